"""Exception hierarchy shared across the toolkit."""


class CtxBenchError(Exception):
    """Base class for all toolkit errors."""


class UnknownCounter(CtxBenchError):
    """A token counter name is not registered."""


class EmptyDocument(CtxBenchError):
    """Document text is empty after trimming."""


class EmptyBatch(CtxBenchError):
    """An embedding batch contained no texts."""


class ProviderUnavailable(CtxBenchError):
    """A remote provider kept failing after all retries."""


class ProviderTransientError(CtxBenchError):
    """A retryable provider failure (rate limit, 5xx, transport)."""


class DimensionMismatch(CtxBenchError):
    """Embedding dimensions do not agree."""


class EmptyIndex(CtxBenchError):
    """A passage index holds no entries."""


class EmptyTree(CtxBenchError):
    """A summary tree holds no nodes."""


class SummarizerFailure(CtxBenchError):
    """The summarization model failed after retries."""


class ClusteringDegenerate(CtxBenchError):
    """A clustering level failed to shrink even after a forced merge."""


class LmFailure(CtxBenchError):
    """A language-model call required by a pipeline step failed."""


class ContextOverflow(CtxBenchError):
    """The assembled prompt exceeds the reader's context limit."""


class ParseFailure(CtxBenchError):
    """No answer marker could be extracted from a model response."""


class OutOfRange(CtxBenchError):
    """An extracted answer index falls outside the option range."""


class TooManyOptions(CtxBenchError):
    """A multiple-choice prompt supports 2-4 options."""


class ValidationError(CtxBenchError):
    """Invalid arguments or configuration."""


class LengthMismatch(CtxBenchError):
    """Paired prediction/gold sequences differ in length."""


class NoReferences(CtxBenchError):
    """A text metric needs at least one reference."""


class EmptyInput(CtxBenchError):
    """An aggregate was asked for on empty input."""


class SchemaMismatch(CtxBenchError):
    """A benchmark file does not match its published schema."""


class MissingFiles(CtxBenchError):
    """Expected benchmark distribution files are absent."""
