"""Feature extraction: TF-IDF over a fixed vocabulary, or raw embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..corpus import DocumentFrequencies, TokenStream, Vocabulary
from ..embedding import EmbeddingSet
from ..errors import ClassifyError


@dataclass
class FeatureMatrix:
    """Dense (docs x features) float64 matrix with named rows and columns."""

    doc_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray
    kind: str  # "tfidf" | "embedding"
    zero_rows: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.doc_ids), len(self.feature_names)):
            raise ClassifyError(
                f"feature matrix shape {self.values.shape} does not match "
                f"{len(self.doc_ids)} docs x {len(self.feature_names)} features"
            )
        if not np.all(np.isfinite(self.values)):
            raise ClassifyError("feature matrix contains NaN or Inf")

    def row(self, doc_id: str) -> np.ndarray:
        return self.values[self.doc_ids.index(doc_id)]

    def __len__(self) -> int:
        return len(self.doc_ids)


class TfidfFeaturizer:
    """tf * ln(N/df) weights with L2-normalized rows.

    Document frequencies are locked in at fit time, so test documents are
    weighted by the training corpus statistics. A term occurring in every
    fitted document gets idf ln(1) = 0 and contributes nothing.
    """

    def __init__(self, vocab: Vocabulary) -> None:
        if len(vocab) == 0:
            raise ClassifyError("TF-IDF featurizer needs a nonempty vocabulary")
        self.vocab = vocab
        self.idf_: np.ndarray | None = None

    def fit(self, streams: Sequence[TokenStream]) -> "TfidfFeaturizer":
        stats = DocumentFrequencies.from_streams(streams)
        n = max(stats.n_docs, 1)
        idf = np.zeros(len(self.vocab), dtype=np.float64)
        for term, idx in self.vocab.term_to_index.items():
            df = stats.df.get(term, 0)
            # df == 0 means the vocabulary was not built from these streams;
            # such terms are silently weightless instead of blowing up idf.
            idf[idx] = math.log(n / df) if df > 0 else 0.0
        self.idf_ = idf
        return self

    def transform(self, streams: Sequence[TokenStream]) -> FeatureMatrix:
        if self.idf_ is None:
            raise ClassifyError("featurizer not fitted")
        n_features = len(self.vocab)
        rows = np.zeros((len(streams), n_features), dtype=np.float64)
        zero_rows: list[str] = []
        for i, stream in enumerate(streams):
            for token in stream.tokens:
                idx = self.vocab.term_to_index.get(token)
                if idx is not None:
                    rows[i, idx] += 1.0
            rows[i] *= self.idf_
            norm = float(np.linalg.norm(rows[i]))
            if norm > 0.0:
                rows[i] /= norm
            else:
                zero_rows.append(stream.doc_id)
        return FeatureMatrix(
            doc_ids=tuple(s.doc_id for s in streams),
            feature_names=self.vocab.terms,
            values=rows,
            kind="tfidf",
            zero_rows=tuple(zero_rows),
        )

    def fit_transform(self, streams: Sequence[TokenStream]) -> FeatureMatrix:
        return self.fit(streams).transform(streams)


def featurize_tfidf(streams: Sequence[TokenStream], vocab: Vocabulary) -> FeatureMatrix:
    """Fit-and-transform convenience for a training batch."""
    return TfidfFeaturizer(vocab).fit_transform(streams)


def embedding_features(embeddings: EmbeddingSet, ids: Iterable[str]) -> FeatureMatrix:
    """Use document vectors directly as the feature matrix."""
    order = list(ids)
    _, matrix = embeddings.matrix(order)
    names = tuple(f"e{i}" for i in range(embeddings.dim))
    zero_rows = tuple(i for i in order if not np.any(embeddings.vector(i)))
    return FeatureMatrix(
        doc_ids=tuple(order),
        feature_names=names,
        values=matrix,
        kind="embedding",
        zero_rows=zero_rows,
    )
