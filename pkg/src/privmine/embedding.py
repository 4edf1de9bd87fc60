"""Document vectors: file ingestion, a deterministic builtin embedder, arithmetic.

Real transformer embeddings live out of process and arrive through the JSONL
vector-file interface. The builtin embedder (TF-IDF weights pushed through a
signed random projection) exists so the whole pipeline runs self-contained in
tests and demos. All arithmetic is 64-bit regardless of what files carry.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .corpus import DocumentFrequencies, TokenStream, Vocabulary
from .errors import EmbeddingError


class EmbeddingSet:
    """Immutable-by-convention map of doc_id -> fixed-dimension float64 vector."""

    def __init__(self, dim: int, model_name: str = "") -> None:
        if dim < 1:
            raise EmbeddingError(f"dimension must be positive, got {dim}")
        self.dim = int(dim)
        self.model_name = model_name
        self._vectors: dict[str, np.ndarray] = {}

    def add(self, doc_id: str, values: np.ndarray | Iterable[float]) -> None:
        if doc_id in self._vectors:
            raise EmbeddingError(f"duplicate embedding id {doc_id!r}")
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (self.dim,):
            raise EmbeddingError(
                f"vector for {doc_id!r} has length {arr.shape[0] if arr.ndim == 1 else arr.shape}, "
                f"expected {self.dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise EmbeddingError(f"vector for {doc_id!r} contains non-finite values")
        self._vectors[doc_id] = arr

    def vector(self, doc_id: str) -> np.ndarray:
        try:
            return self._vectors[doc_id]
        except KeyError:
            raise EmbeddingError(f"no embedding for id {doc_id!r}") from None

    def ids(self) -> list[str]:
        return list(self._vectors)

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self._vectors.items())

    def degenerate_ids(self) -> list[str]:
        """Ids whose vector is all-zero; they cannot be normalized or ranked."""
        return [i for i, v in self._vectors.items() if not np.any(v)]

    def matrix(self, ids: Iterable[str] | None = None) -> tuple[list[str], np.ndarray]:
        """Stack vectors into an (n, dim) array; default order is ascending doc_id."""
        order = sorted(self._vectors) if ids is None else list(ids)
        if not order:
            return [], np.zeros((0, self.dim))
        return order, np.stack([self.vector(i) for i in order])

    def normalized(self, skip_degenerate: bool = False) -> "EmbeddingSet":
        """Length-normalize every vector; degenerate ones error unless skipped."""
        out = EmbeddingSet(self.dim, self.model_name)
        for doc_id, vec in self._vectors.items():
            if not np.any(vec):
                if skip_degenerate:
                    continue
                raise EmbeddingError(f"cannot normalize zero vector for id {doc_id!r}")
            out.add(doc_id, l2_normalize(vec))
        return out

    def subset(self, ids: Iterable[str]) -> "EmbeddingSet":
        out = EmbeddingSet(self.dim, self.model_name)
        for doc_id in ids:
            out.add(doc_id, self.vector(doc_id))
        return out

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._vectors


def load_embeddings(path: str | Path) -> EmbeddingSet:
    """Read a JSONL embedding file.

    Line 1 is the header ``{"dim": D, "count": N, "model": s}``; every later
    line is ``{"id": ..., "vector": [...]}``. Exactly N vectors of length D
    are required.
    """
    with open(path, encoding="utf-8") as handle:
        header_line = handle.readline()
        if not header_line.strip():
            raise EmbeddingError(f"{path}: missing header line")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise EmbeddingError(f"{path}: malformed header: {exc.msg}") from None
        for key in ("dim", "count"):
            if key not in header:
                raise EmbeddingError(f"{path}: header missing {key!r}")
        dims = int(header["dim"])
        count = int(header["count"])
        out = EmbeddingSet(dims, model_name=str(header.get("model", "")))
        for lineno, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingError(f"{path}: line {lineno}: malformed JSON: {exc.msg}") from None
            if "id" not in record or "vector" not in record:
                raise EmbeddingError(f"{path}: line {lineno}: need both 'id' and 'vector'")
            doc_id = str(record["id"])
            vec = np.asarray(record["vector"], dtype=np.float64)
            if vec.ndim != 1 or vec.shape[0] != dims:
                raise EmbeddingError(
                    f"{path}: vector for id {doc_id!r} has length "
                    f"{vec.shape[0] if vec.ndim == 1 else 'non-1d'}, header says {dims}"
                )
            try:
                out.add(doc_id, vec)
            except EmbeddingError as exc:
                raise EmbeddingError(f"{path}: line {lineno}: {exc}") from None
    if len(out) != count:
        raise EmbeddingError(f"{path}: header count {count} but {len(out)} vectors found")
    return out


def save_embeddings(embeddings: EmbeddingSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        header = {"dim": embeddings.dim, "count": len(embeddings), "model": embeddings.model_name}
        handle.write(json.dumps(header, sort_keys=True) + "\n")
        for doc_id, vec in embeddings.items():
            handle.write(json.dumps({"id": doc_id, "vector": vec.tolist()}) + "\n")


def _term_directions(term: str, seed: int, dim: int) -> np.ndarray:
    """Deterministic Rademacher direction for one term, keyed by (seed, term hash)."""
    digest = hashlib.blake2b(f"{seed}:{term}".encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    return rng.integers(0, 2, size=dim).astype(np.float64) * 2.0 - 1.0


def embed_builtin(
    stream: TokenStream,
    vocab: Vocabulary,
    corpus_stats: DocumentFrequencies,
    dim: int,
    seed: int,
) -> np.ndarray:
    """TF-IDF weights over the vocabulary, projected to ``dim`` signed random axes.

    Deterministic for fixed inputs: each term's projection direction depends
    only on (seed, term), so identical token streams map to identical vectors.
    A stream with no in-vocabulary token yields the zero vector, which callers
    treat as degenerate rather than an error.
    """
    if dim < 2:
        raise EmbeddingError(f"builtin embedder needs dim >= 2, got {dim}")
    if len(vocab) == 0:
        raise EmbeddingError("builtin embedder needs a nonempty vocabulary")
    counts: dict[str, int] = {}
    for token in stream.tokens:
        if token in vocab:
            counts[token] = counts.get(token, 0) + 1
    vec = np.zeros(dim, dtype=np.float64)
    n_docs = max(corpus_stats.n_docs, 1)
    for term, tf in counts.items():
        df = corpus_stats.df.get(term, 0)
        if df <= 0:
            continue
        weight = tf * math.log(n_docs / df)
        if weight == 0.0:
            continue
        vec += weight * _term_directions(term, seed, dim)
    return vec / math.sqrt(dim)


def embed_corpus_builtin(
    streams: Iterable[TokenStream],
    vocab: Vocabulary,
    dim: int,
    seed: int,
    corpus_stats: DocumentFrequencies | None = None,
    model_name: str | None = None,
) -> EmbeddingSet:
    """Apply the builtin embedder to every stream; stats default to the streams themselves."""
    streams = list(streams)
    stats = corpus_stats if corpus_stats is not None else DocumentFrequencies.from_streams(streams)
    name = model_name if model_name is not None else f"builtin-tfidf-rp-d{dim}-s{seed}"
    out = EmbeddingSet(dim, model_name=name)
    for stream in streams:
        out.add(stream.doc_id, embed_builtin(stream, vocab, stats, dim, seed))
    return out


def l2_normalize(values: np.ndarray) -> np.ndarray:
    """Scale to unit L2 norm; direction is preserved."""
    arr = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise EmbeddingError("cannot normalize zero vector")
    return arr / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two nonzero vectors, clipped into [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise EmbeddingError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise EmbeddingError("cosine similarity undefined for zero vector")
    return float(np.clip(float(np.dot(va, vb)) / (na * nb), -1.0, 1.0))
