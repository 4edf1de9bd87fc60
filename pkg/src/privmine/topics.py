"""Interpretable topic detection over privacy reviews.

Pipeline: length-normalize document vectors, optionally reduce dimensionality
(PCA by default), cluster with K-means++ seeding and Lloyd iterations, then
rank each cluster's words by cluster-based TF-IDF and pick representative
reviews by similarity to the centroid. Everything is deterministic for a
fixed seed, including the emitted run manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import TokenStream
from .embedding import EmbeddingSet
from .errors import TopicError


@dataclass(frozen=True)
class ClusterAssignment:
    """K-means output: per-document cluster, centroids, and the inertia trace."""

    k: int
    assignment: Mapping[str, int]
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: tuple[float, ...] = field(default=())

    def members(self, cluster: int) -> list[str]:
        return sorted(i for i, c in self.assignment.items() if c == cluster)

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for c in self.assignment.values():
            counts[c] += 1
        return counts


@dataclass(frozen=True)
class Projection2D:
    coords: Mapping[str, tuple[float, float]]


def _principal_components(matrix: np.ndarray, n_components: int) -> tuple[np.ndarray, np.ndarray]:
    """Top principal directions of centered data, eigenvalue-descending.

    Sign convention: each component's largest-magnitude entry is positive, so
    the decomposition is reproducible across runs.
    """
    centered = matrix - matrix.mean(axis=0)
    denom = max(matrix.shape[0] - 1, 1)
    cov = centered.T @ centered / denom
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:n_components]
    components = eigvecs[:, order].T.copy()
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    return components, centered


def reduce_dim(
    vectors: EmbeddingSet,
    method: str = "pca",
    target_dim: int = 5,
    seed: int = 0,
) -> EmbeddingSet:
    """Project every vector to ``target_dim`` dimensions; ``none`` is identity.

    PCA here is a deterministic eigendecomposition; the seed is accepted for
    interface parity with stochastic reducers and recorded, not consumed.
    """
    if method not in ("none", "pca"):
        raise TopicError(f"unknown reduction method {method!r}")
    if target_dim > vectors.dim:
        raise TopicError(f"target_dim {target_dim} exceeds input dim {vectors.dim}")
    if method == "none":
        if target_dim != vectors.dim:
            raise TopicError("method 'none' requires target_dim == input dim")
        return vectors
    if target_dim < 1:
        raise TopicError(f"target_dim must be >= 1, got {target_dim}")
    ids, matrix = vectors.matrix()
    if not ids:
        raise TopicError("cannot reduce an empty embedding set")
    components, centered = _principal_components(matrix, target_dim)
    projected = centered @ components.T
    out = EmbeddingSet(target_dim, model_name=f"{vectors.model_name}+pca{target_dim}")
    for i, doc_id in enumerate(ids):
        out.add(doc_id, projected[i])
    return out


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) squared Euclidean distances, clipped at zero."""
    p2 = np.sum(points * points, axis=1)[:, None]
    c2 = np.sum(centroids * centroids, axis=1)[None, :]
    return np.maximum(p2 + c2 - 2.0 * points @ centroids.T, 0.0)


def _count_distinct(points: np.ndarray) -> int:
    return len(np.unique(points, axis=0))


def kmeans_pp_seed(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    """K-means++ seeding: next centroid sampled proportional to squared distance.

    The first centroid is uniform; ties and the whole draw sequence are fixed
    by the seeded generator.
    """
    points = np.asarray(points, dtype=np.float64)
    if k < 1:
        raise TopicError(f"k must be >= 1, got {k}")
    if k > _count_distinct(points):
        raise TopicError(f"k={k} exceeds the {_count_distinct(points)} distinct points")
    rng = np.random.default_rng(seed)
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        d2 = _squared_distances(points, points[chosen]).min(axis=1)
        total = float(d2.sum())
        probs = d2 / total
        chosen.append(int(rng.choice(n, p=probs)))
    return points[chosen].copy()


def kmeans_cluster(
    vectors: EmbeddingSet,
    k: int,
    seed: int,
    max_iters: int = 300,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """Lloyd iterations from K-means++ seeds over doc_id-sorted rows.

    Assignment ties go to the lowest cluster index; an emptied cluster is
    reseeded with the point currently farthest from its own centroid. The
    recorded inertia history is non-increasing (a Lloyd invariant).
    """
    ids, points = vectors.matrix()
    if not ids:
        raise TopicError("cannot cluster an empty embedding set")
    centroids = kmeans_pp_seed(points, k, seed)
    history: list[float] = []
    iterations = 0
    for iterations in range(1, max_iters + 1):
        d2 = _squared_distances(points, centroids)
        assign = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(ids)), assign].sum()))
        new_centroids = centroids.copy()
        for c in range(k):
            mask = assign == c
            if mask.any():
                new_centroids[c] = points[mask].mean(axis=0)
        empty = [c for c in range(k) if not np.any(assign == c)]
        if empty:
            # Hand each empty cluster the globally worst-fit point.
            distances = d2[np.arange(len(ids)), assign].copy()
            for c in empty:
                far = int(np.argmax(distances))
                new_centroids[c] = points[far]
                distances[far] = -1.0
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break
    d2 = _squared_distances(points, centroids)
    assign = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(ids)), assign].sum())
    history.append(inertia)
    return ClusterAssignment(
        k=k,
        assignment={doc_id: int(c) for doc_id, c in zip(ids, assign)},
        centroids=centroids,
        inertia=inertia,
        iterations_run=iterations,
        inertia_history=tuple(history),
    )


def ctfidf(clusters: Mapping[int, Sequence[TokenStream]]) -> dict[int, dict[str, float]]:
    """Cluster-based TF-IDF: score(w, c) = tf(w, c) * ln(1 + A / tf(w)).

    tf(w, c) counts w inside cluster c, tf(w) counts w over the whole corpus,
    and A is the average token count per cluster. Words absent from a cluster
    simply score 0 there.
    """
    if not clusters:
        raise TopicError("ctfidf needs at least one cluster")
    cluster_counts: dict[int, dict[str, int]] = {}
    corpus_counts: dict[str, int] = {}
    total_tokens = 0
    for cluster, streams in clusters.items():
        counts: dict[str, int] = {}
        for stream in streams:
            for token in stream.tokens:
                counts[token] = counts.get(token, 0) + 1
                corpus_counts[token] = corpus_counts.get(token, 0) + 1
                total_tokens += 1
        cluster_counts[cluster] = counts
    if total_tokens == 0:
        raise TopicError("ctfidf needs at least one cluster with at least one token")
    avg_tokens = total_tokens / len(clusters)
    scores: dict[int, dict[str, float]] = {}
    for cluster, counts in cluster_counts.items():
        scores[cluster] = {
            term: tf * float(np.log(1.0 + avg_tokens / corpus_counts[term]))
            for term, tf in counts.items()
        }
    return scores


def topic_words(
    scores: Mapping[int, Mapping[str, float]],
    top_n: int = 10,
) -> dict[int, list[tuple[str, float]]]:
    """Per-cluster word ranking: score descending, ties lexicographic."""
    if top_n < 1:
        raise TopicError(f"top_n must be >= 1, got {top_n}")
    return {
        cluster: sorted(word_scores.items(), key=lambda item: (-item[1], item[0]))[:top_n]
        for cluster, word_scores in scores.items()
    }


def representative_reviews(
    assignment: ClusterAssignment,
    vectors: EmbeddingSet,
    top_n: int = 10,
) -> dict[int, list[str]]:
    """Top reviews per cluster by cosine similarity to the centroid.

    Similarity is computed in whichever space the clustering ran, so
    ``vectors`` must be the same set that produced ``assignment``.
    """
    if top_n < 1:
        raise TopicError(f"top_n must be >= 1, got {top_n}")
    out: dict[int, list[str]] = {}
    for cluster in range(assignment.k):
        members = assignment.members(cluster)
        centroid = assignment.centroids[cluster]
        cnorm = float(np.linalg.norm(centroid))
        scored: list[tuple[float, str]] = []
        for doc_id in members:
            vec = vectors.vector(doc_id)
            vnorm = float(np.linalg.norm(vec))
            if cnorm == 0.0 or vnorm == 0.0:
                sim = 0.0
            else:
                sim = float(np.dot(vec, centroid) / (vnorm * cnorm))
            scored.append((sim, doc_id))
        scored.sort(key=lambda item: (-item[0], item[1]))
        out[cluster] = [doc_id for _, doc_id in scored[:top_n]]
    return out


def project_2d(vectors: EmbeddingSet, seed: int = 0) -> Projection2D:
    """Two principal components for plotting; deterministic like reduce_dim."""
    ids, matrix = vectors.matrix()
    if len(ids) < 2:
        raise TopicError("2-D projection needs at least 2 points")
    if vectors.dim == 1:
        centered = matrix - matrix.mean(axis=0)
        coords = {doc_id: (float(centered[i, 0]), 0.0) for i, doc_id in enumerate(ids)}
        return Projection2D(coords=coords)
    components, centered = _principal_components(matrix, 2)
    projected = centered @ components.T
    return Projection2D(
        coords={doc_id: (float(projected[i, 0]), float(projected[i, 1])) for i, doc_id in enumerate(ids)}
    )


@dataclass(frozen=True)
class TopicConfig:
    reduce_method: str = "pca"  # "none" | "pca"
    target_dim: int = 5
    max_iters: int = 300
    tol: float = 1e-6
    top_words: int = 10
    top_reviews: int = 10


@dataclass(frozen=True)
class TopicSummary:
    cluster: int
    size: int
    words: tuple[tuple[str, float], ...]
    representative_ids: tuple[str, ...]


@dataclass
class TopicRun:
    """Everything one detection run produced, plus its deterministic manifest."""

    k: int
    seed: int
    config: TopicConfig
    assignment: ClusterAssignment
    topics: list[TopicSummary]
    projection: Projection2D
    degenerate_ids: tuple[str, ...]
    manifest: dict


def _content_hash(streams: Sequence[TokenStream], vectors: EmbeddingSet) -> str:
    digest = hashlib.blake2b(digest_size=12)
    for stream in sorted(streams, key=lambda s: s.doc_id):
        digest.update(stream.doc_id.encode("utf-8"))
        digest.update(" ".join(stream.tokens).encode("utf-8"))
    ids, matrix = vectors.matrix()
    digest.update("|".join(ids).encode("utf-8"))
    digest.update(np.ascontiguousarray(matrix).tobytes())
    return digest.hexdigest()


def run_topic_detection(
    streams: Sequence[TokenStream],
    embeddings: EmbeddingSet,
    k: int,
    seed: int,
    config: TopicConfig = TopicConfig(),
) -> TopicRun:
    """Compose normalize -> reduce -> cluster -> word ranking -> projection.

    Degenerate (zero-vector) documents are dropped from clustering and listed
    in the manifest. The manifest carries no wall-clock data so a rerun with
    the same inputs and seed is byte-identical.
    """
    streams = list(streams)
    stream_ids = [s.doc_id for s in streams]
    missing = [i for i in stream_ids if i not in embeddings]
    if missing:
        raise TopicError(f"reviews without embeddings: {missing[:10]}")
    working = embeddings.subset(stream_ids)
    degenerate = tuple(sorted(working.degenerate_ids()))
    normalized = working.normalized(skip_degenerate=True)
    n_docs = len(normalized)
    if not 2 <= k <= n_docs:
        raise TopicError(f"k={k} outside 2..{n_docs} (clusterable reviews)")
    if config.reduce_method == "none":
        reduced = reduce_dim(normalized, "none", normalized.dim, seed)
    else:
        reduced = reduce_dim(normalized, config.reduce_method, config.target_dim, seed)
    assignment = kmeans_cluster(reduced, k, seed, max_iters=config.max_iters, tol=config.tol)
    by_cluster: dict[int, list[TokenStream]] = {c: [] for c in range(k)}
    for stream in streams:
        cluster = assignment.assignment.get(stream.doc_id)
        if cluster is not None:
            by_cluster[cluster].append(stream)
    words = topic_words(ctfidf(by_cluster), config.top_words)
    reps = representative_reviews(assignment, reduced, config.top_reviews)
    sizes = assignment.sizes()
    topics = [
        TopicSummary(
            cluster=c,
            size=sizes[c],
            words=tuple(words.get(c, [])),
            representative_ids=tuple(reps.get(c, [])),
        )
        for c in range(k)
    ]
    projection = project_2d(reduced, seed)
    manifest = {
        "run_id": f"topics-{_content_hash(streams, working)}-k{k}-s{seed}",
        "stage": "topics",
        "k": k,
        "seed": seed,
        "config": asdict(config),
        "model": embeddings.model_name,
        "n_docs": n_docs,
        "degenerate_ids": list(degenerate),
        "inertia": assignment.inertia,
        "iterations_run": assignment.iterations_run,
        "cluster_sizes": sizes,
        "topics": [
            {
                "cluster": t.cluster,
                "size": t.size,
                "words": [[w, s] for w, s in t.words],
                "representative_ids": list(t.representative_ids),
            }
            for t in topics
        ],
        "notes": {
            "representative_space": "clustering",
            "renormalize_after_reduction": False,
        },
    }
    return TopicRun(
        k=k,
        seed=seed,
        config=config,
        assignment=assignment,
        topics=topics,
        projection=projection,
        degenerate_ids=degenerate,
        manifest=manifest,
    )


def write_topic_run(run: TopicRun, out_dir: str | Path) -> dict:
    """Write manifest.json, assignment.csv, and projection.csv into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    assignment_path = out / "assignment.csv"
    with open(assignment_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["doc_id", "cluster"])
        for doc_id in sorted(run.assignment.assignment):
            writer.writerow([doc_id, run.assignment.assignment[doc_id]])
    projection_path = out / "projection.csv"
    with open(projection_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["doc_id", "x", "y"])
        for doc_id in sorted(run.projection.coords):
            x, y = run.projection.coords[doc_id]
            writer.writerow([doc_id, repr(x), repr(y)])
    manifest = dict(run.manifest)
    manifest["files"] = {
        "assignment": assignment_path.name,
        "projection": projection_path.name,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    return manifest
