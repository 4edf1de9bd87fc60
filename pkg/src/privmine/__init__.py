"""privmine: mine user privacy concerns from app-store reviews.

Three stages: embedding-similarity retrieval of candidate privacy reviews
against a privacy-policy query, supervised classification of privacy reviews,
and interpretable cluster-based topic detection, with IR / classification /
topic-quality evaluation throughout.
"""

__version__ = "0.1.0"

from .errors import (
    AnnotationError,
    ClassifyError,
    CoherenceError,
    CorpusError,
    EmbeddingError,
    PrivmineError,
    RetrievalError,
    TopicError,
)

__all__ = [
    "AnnotationError",
    "ClassifyError",
    "CoherenceError",
    "CorpusError",
    "EmbeddingError",
    "PrivmineError",
    "RetrievalError",
    "TopicError",
    "__version__",
]
