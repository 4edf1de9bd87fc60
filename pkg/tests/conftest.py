"""Shared synthetic fixtures: planted corpora with known structure."""

from __future__ import annotations

import numpy as np
import pytest

from privmine.corpus import Corpus, Review, TokenStream

COMMON_PRIVACY_WORDS = ["privacy", "data", "personal"]

TOPIC_GROUPS = {
    "sell": "sell advertiser profit broker monetize merchant market trade bidder auction".split(),
    "hack": "hack password account breach stolen login phishing credential compromise lockout".split(),
    "track": "track location gps follow movement surveillance trace whereabouts geofence beacon".split(),
    "microphone": "microphone camera listen record permission audio eavesdrop snoop wiretap overhear".split(),
    "consent": "consent setting control optout disable preference toggle revoke deny restrict".split(),
}

DISTRACTOR_THEMES = [
    "game level play score win fun boring graphics".split(),
    "crash bug freeze slow battery drain fix broken".split(),
    "music song playlist artist album sound volume beat".split(),
    "video stream watch channel subscribe clip episode quality".split(),
    "photo filter edit picture image effect collage sticker".split(),
    "message chat friend group call emoji reaction reply".split(),
]


def build_planted_corpus(
    n_privacy: int = 200,
    n_distractors: int = 2000,
    seed: int = 42,
) -> tuple[Corpus, dict[str, int], dict[str, str], str]:
    """Privacy reviews in 5 disjoint-vocabulary subtopic groups among distractors.

    Returns (corpus, truth labels, review_id -> group name for the privacy
    reviews, policy text covering the privacy vocabulary).
    """
    rng = np.random.default_rng(seed)
    group_names = list(TOPIC_GROUPS)
    reviews: list[Review] = []
    truth: dict[str, int] = {}
    group_of: dict[str, str] = {}
    for i in range(n_privacy):
        group = group_names[i % len(group_names)]
        words = list(rng.choice(TOPIC_GROUPS[group], size=7, replace=True))
        words.append(COMMON_PRIVACY_WORDS[int(rng.integers(len(COMMON_PRIVACY_WORDS)))])
        rng.shuffle(words)
        rid = f"p{i:04d}"
        reviews.append(Review(id=rid, app="PlantedApp", text=" ".join(words)))
        truth[rid] = 1
        group_of[rid] = group
    for i in range(n_distractors):
        theme = DISTRACTOR_THEMES[int(rng.integers(len(DISTRACTOR_THEMES)))]
        rid = f"d{i:04d}"
        reviews.append(
            Review(id=rid, app="PlantedApp", text=" ".join(rng.choice(theme, size=8, replace=True)))
        )
        truth[rid] = 0
    policy_text = " ".join(
        COMMON_PRIVACY_WORDS + [w for words in TOPIC_GROUPS.values() for w in words]
    )
    return Corpus(reviews), truth, group_of, policy_text


def _fillers(i: int, n: int = 5, pool: int = 60, stride: int = 7) -> list[str]:
    return [f"filler{(i * stride + j * 11) % pool:02d}" for j in range(n)]


def build_bootstrap_corpus() -> tuple[list[TokenStream], dict[str, int]]:
    """Two-stage positive corpus plus a poison word common among negatives.

    Group A (40 docs) says "privacy"; 10 of those also say "tracking". Group B
    (40 docs) says "tracking" but never "privacy"; 15 of those also say
    "update". 40 of the 120 negatives say "update" too, so approving it
    tanks precision.
    """
    streams: list[TokenStream] = []
    truth: dict[str, int] = {}
    for i in range(40):
        tokens = ["privacy"] + _fillers(i)
        if i < 10:
            tokens.append("tracking")
        streams.append(TokenStream(f"a{i:02d}", tuple(tokens)))
        truth[f"a{i:02d}"] = 1
    for i in range(40):
        tokens = ["tracking"] + _fillers(i + 40)
        if i < 15:
            tokens.append("update")
        streams.append(TokenStream(f"b{i:02d}", tuple(tokens)))
        truth[f"b{i:02d}"] = 1
    for i in range(120):
        tokens = _fillers(i + 80, n=6)
        if i < 40:
            tokens.append("update")
        streams.append(TokenStream(f"n{i:03d}", tuple(tokens)))
        truth[f"n{i:03d}"] = 0
    return streams, truth


def build_spherical_points(
    n_points: int = 500,
    n_clusters: int = 5,
    dim: int = 16,
    noise: float = 0.01,
    seed: int = 2024,
) -> tuple[np.ndarray, list[int]]:
    """Unit-norm points in tight spherical clusters around random directions.

    With this noise level the minimum center separation is > 100x the
    within-cluster spread, far beyond the 10x the recovery tests assume.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(n_clusters, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    points = []
    labels = []
    for i in range(n_points):
        c = i % n_clusters
        p = centers[c] + rng.normal(scale=noise, size=dim)
        points.append(p / np.linalg.norm(p))
        labels.append(c)
    return np.array(points), labels


@pytest.fixture(scope="session")
def planted():
    return build_planted_corpus()


@pytest.fixture(scope="session")
def bootstrap_corpus():
    return build_bootstrap_corpus()
