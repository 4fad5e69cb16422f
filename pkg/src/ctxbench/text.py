"""Token counting, sentence segmentation, and passage chunking.

Everything here is pure and deterministic: the same document always
yields byte-identical sentences and passages.  Token counting is
pluggable because downstream budgets are defined in "reader tokens"
that we cannot reproduce offline; the shipped counters are a pure
whitespace counter (exact arithmetic for tests) and a word-piece-style
approximation used as the default.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EmptyDocument, UnknownCounter

BENCHMARKS = ("infinitebench", "quality", "narrativeqa", "synthetic")


@dataclass(frozen=True)
class Document:
    """A source document identified within one corpus."""

    doc_id: str
    text: str
    source_benchmark: str = "synthetic"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise EmptyDocument(f"document {self.doc_id!r} has no text")


@dataclass(frozen=True)
class Sentence:
    """One sentence, addressed by character offsets into the document."""

    index: int
    char_start: int
    char_end: int
    token_count: int


@dataclass(frozen=True)
class Passage:
    """A token-capped, sentence-aligned segment of a document."""

    position: int
    doc_id: str
    text: str
    token_count: int
    sentence_span: tuple[int, int]


class TokenCounter:
    """Base token counter: subclasses define token spans over text."""

    name = "base"

    def spans(self, text: str) -> list[tuple[int, int]]:
        raise NotImplementedError

    def tokenize(self, text: str) -> list[str]:
        return [text[a:b] for a, b in self.spans(text)]

    def count(self, text: str) -> int:
        return len(self.spans(text))


class WhitespaceCounter(TokenCounter):
    """Tokens are maximal runs of non-whitespace characters."""

    name = "whitespace"
    _RE = re.compile(r"\S+")

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self._RE.finditer(text)]


class ApproxCounter(TokenCounter):
    """Word-piece-style approximation of a subword tokenizer.

    Splits on whitespace and punctuation (each punctuation character is
    its own token), then splits alphanumeric runs every 8 characters.
    Counts are additive across concatenation within +/- 1 per joint.
    """

    name = "approx"
    _RE = re.compile(r"[A-Za-z0-9]+|[^A-Za-z0-9\s]")
    _RUN = 8

    def spans(self, text: str) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        for m in self._RE.finditer(text):
            a, b = m.span()
            if text[a].isalnum():
                for start in range(a, b, self._RUN):
                    out.append((start, min(start + self._RUN, b)))
            else:
                out.append((a, b))
        return out


_COUNTERS: dict[str, TokenCounter] = {}


def register_counter(counter: TokenCounter, name: str | None = None) -> None:
    _COUNTERS[name or counter.name] = counter


register_counter(WhitespaceCounter())
register_counter(ApproxCounter())
register_counter(ApproxCounter(), name="default")

DEFAULT_COUNTER = _COUNTERS["default"]


def get_counter(ref: str | TokenCounter) -> TokenCounter:
    """Resolve a counter by name or pass an instance through."""
    if isinstance(ref, TokenCounter):
        return ref
    try:
        return _COUNTERS[ref]
    except KeyError:
        raise UnknownCounter(f"no token counter named {ref!r}") from None


def count_tokens(text: str, counter: str | TokenCounter = "default") -> int:
    """Count tokens in ``text`` under the given counter."""
    return get_counter(counter).count(text)


# Words that end with a period without terminating a sentence.
_ABBREVIATIONS = frozenset(
    w.lower()
    for w in (
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "capt",
        "col", "gen", "lt", "sgt", "rev", "hon", "pres", "gov", "sen",
        "rep", "vs", "etc", "inc", "ltd", "co", "corp", "dept", "univ",
        "approx", "fig", "no", "vol", "ed", "pp", "al", "e.g", "i.e",
        "u.s", "u.k",
    )
)

_TERMINALS = ".!?"
_CLOSERS = "\"'’”)]"
_OPENERS = "\"'‘“(["


def _word_before(text: str, i: int) -> str:
    """The alphanumeric-ish word immediately before position i."""
    j = i
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "."):
        j -= 1
    return text[j:i]


def _is_boundary(text: str, i: int) -> bool:
    """Whether the terminal character at position i ends a sentence.

    Rule: terminal punctuation, optionally followed by closing quotes,
    then whitespace, then an uppercase letter, digit, or opening quote.
    Periods after known abbreviations or single initials do not split;
    an ellipsis is judged at its final dot only.
    """
    ch = text[i]
    if ch == ".":
        if i + 1 < len(text) and text[i + 1] == ".":
            return False  # inside an ellipsis run
        word = _word_before(text, i).rstrip(".")
        if word.lower() in _ABBREVIATIONS:
            return False
    j = i + 1
    while j < len(text) and text[j] in _CLOSERS:
        j += 1
    if j >= len(text):
        return True
    if not text[j].isspace():
        return False
    while j < len(text) and text[j].isspace():
        j += 1
    if j >= len(text):
        return True
    nxt = text[j]
    return nxt.isupper() or nxt.isdigit() or nxt in _OPENERS


def split_sentences(doc: Document, counter: str | TokenCounter = "default") -> list[Sentence]:
    """Segment a document into sentences by rule.

    Sentences are non-overlapping, ordered spans; the text between
    consecutive spans (and around the first/last) is whitespace only,
    so stitching slices and gaps reconstructs the document exactly.
    Text without terminal punctuation comes back as one sentence.
    """
    text = doc.text
    if not text.strip():
        raise EmptyDocument(f"document {doc.doc_id!r} has no text")
    tc = get_counter(counter)

    ends: list[int] = []
    for i, ch in enumerate(text):
        if ch in _TERMINALS and _is_boundary(text, i):
            j = i + 1
            while j < len(text) and text[j] in _CLOSERS:
                j += 1
            ends.append(j)

    sentences: list[Sentence] = []
    cursor = 0
    for end in ends:
        while cursor < end and text[cursor].isspace():
            cursor += 1
        if cursor >= end:
            continue
        sentences.append(Sentence(len(sentences), cursor, end, tc.count(text[cursor:end])))
        cursor = end

    # trailing material without terminal punctuation
    tail = text[cursor:]
    if tail.strip():
        start = cursor + (len(tail) - len(tail.lstrip()))
        end = cursor + len(tail.rstrip())
        sentences.append(Sentence(len(sentences), start, end, tc.count(text[start:end])))
    return sentences


def chunk_passages(
    doc: Document,
    sentences: list[Sentence] | None = None,
    max_passage_tokens: int = 100,
    counter: str | TokenCounter = "default",
) -> list[Passage]:
    """Pack whole sentences greedily into token-capped passages.

    A sentence joins the current passage while the recounted passage
    text stays within the cap; otherwise it starts a new passage.  A
    single sentence longer than the cap is hard-split on token
    boundaries into <=cap pieces.
    """
    if max_passage_tokens < 1:
        raise ValueError("max_passage_tokens must be >= 1")
    tc = get_counter(counter)
    if sentences is None:
        sentences = split_sentences(doc, tc)
    if not sentences:
        raise EmptyDocument(f"document {doc.doc_id!r} has no sentences")

    text = doc.text
    passages: list[Passage] = []

    def emit(piece: str, first: int, last: int) -> None:
        passages.append(
            Passage(len(passages), doc.doc_id, piece, tc.count(piece), (first, last))
        )

    cur_start: int | None = None  # char offset of current passage
    cur_end = 0
    cur_first = 0  # first sentence index in current passage

    def flush(last_sentence: int) -> None:
        nonlocal cur_start
        if cur_start is not None:
            emit(text[cur_start:cur_end], cur_first, last_sentence)
            cur_start = None

    for sent in sentences:
        s_text = text[sent.char_start:sent.char_end]
        if sent.token_count > max_passage_tokens:
            flush(sent.index - 1)
            spans = tc.spans(s_text)
            for i in range(0, len(spans), max_passage_tokens):
                group = spans[i:i + max_passage_tokens]
                emit(s_text[group[0][0]:group[-1][1]], sent.index, sent.index)
            continue
        if cur_start is None:
            cur_start, cur_end, cur_first = sent.char_start, sent.char_end, sent.index
            continue
        extended = text[cur_start:sent.char_end]
        if tc.count(extended) <= max_passage_tokens:
            cur_end = sent.char_end
        else:
            flush(sent.index - 1)
            cur_start, cur_end, cur_first = sent.char_start, sent.char_end, sent.index
    flush(sentences[-1].index)
    return passages


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim."""
    return " ".join(text.split())
