"""Shared exception types.

Every module raises a subclass of :class:`PrivmineError` for contract
violations (bad input files, dimension mismatches, undefined metrics), so
callers and the CLI can distinguish data errors from bugs.
"""


class PrivmineError(ValueError):
    """Base class for all toolkit errors caused by invalid input or state."""


class CorpusError(PrivmineError):
    """Malformed review/policy input or a broken corpus invariant."""


class EmbeddingError(PrivmineError):
    """Bad embedding file, dimension mismatch, or degenerate vector."""


class RetrievalError(PrivmineError):
    """Invalid ranking input or an undefined retrieval metric."""


class AnnotationError(PrivmineError):
    """Invalid labeling operation or unresolved adjudication."""


class ClassifyError(PrivmineError):
    """Invalid training data, feature mismatch, or model file problem."""


class TopicError(PrivmineError):
    """Clustering or topic-extraction contract violation."""


class CoherenceError(PrivmineError):
    """Topic words missing from the reference corpus, or bad window config."""
