"""Embedding I/O, the builtin embedder, and vector arithmetic tests."""

import json
import math

import numpy as np
import pytest

from privmine.corpus import DocumentFrequencies, TokenStream, Vocabulary
from privmine.embedding import (
    EmbeddingError,
    EmbeddingSet,
    cosine_similarity,
    embed_builtin,
    embed_corpus_builtin,
    l2_normalize,
    load_embeddings,
    save_embeddings,
)


def write_embedding_file(path, dim, count, model, lines):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"dim": dim, "count": count, "model": model}) + "\n")
        for line in lines:
            handle.write(json.dumps(line) + "\n")


class TestLoadEmbeddings:
    def test_accepts_matching_dims(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_embedding_file(path, 3, 1, "m", [{"id": "a", "vector": [1.0, 2.0, 3.0]}])
        loaded = load_embeddings(path)
        assert loaded.dim == 3
        assert loaded.model_name == "m"
        np.testing.assert_array_equal(loaded.vector("a"), [1.0, 2.0, 3.0])

    def test_dimension_mismatch_names_id(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_embedding_file(
            path, 3, 2,
            "m",
            [{"id": "a", "vector": [1.0, 2.0, 3.0]}, {"id": "bad", "vector": [1.0, 2.0]}],
        )
        with pytest.raises(EmbeddingError, match="'bad'"):
            load_embeddings(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_embedding_file(
            path, 2, 2,
            "m",
            [{"id": f"v{i}", "vector": [0.0, 1.0]} for i in range(3)],
        )
        with pytest.raises(EmbeddingError, match="count"):
            load_embeddings(path)

    def test_scientific_notation_accepted(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text(
            '{"dim": 2, "count": 1, "model": "m"}\n{"id": "a", "vector": [1e-3, 2.5E2]}\n',
            encoding="utf-8",
        )
        np.testing.assert_allclose(load_embeddings(path).vector("a"), [0.001, 250.0])

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_embedding_file(path, 2, 1, "m", [{"id": "a", "vector": [1.0, float("nan")]}])
        with pytest.raises(EmbeddingError, match="'a'"):
            load_embeddings(path)

    def test_roundtrip(self, tmp_path):
        original = EmbeddingSet(2, model_name="demo")
        original.add("x", [0.5, -1.25])
        original.add("y", [3.0, 4.0])
        path = tmp_path / "e.jsonl"
        save_embeddings(original, path)
        loaded = load_embeddings(path)
        assert loaded.ids() == ["x", "y"]
        for doc_id in loaded.ids():
            np.testing.assert_array_equal(loaded.vector(doc_id), original.vector(doc_id))


def _vocab_and_stats(*streams: TokenStream):
    vocab = Vocabulary.from_terms(t for s in streams for t in s.tokens)
    stats = DocumentFrequencies.from_streams(list(streams))
    return vocab, stats


class TestBuiltinEmbedder:
    def test_identical_texts_identical_vectors(self):
        s1 = TokenStream("a", ("privacy", "data", "sell"))
        s2 = TokenStream("b", ("privacy", "data", "sell"))
        other = TokenStream("c", ("game", "fun"))
        vocab, stats = _vocab_and_stats(s1, other)
        v1 = embed_builtin(s1, vocab, stats, 64, seed=3)
        v2 = embed_builtin(s2, vocab, stats, 64, seed=3)
        np.testing.assert_array_equal(v1, v2)

    def test_disjoint_vocab_near_orthogonal(self):
        # Frozen check of random-projection near-orthogonality: at dim=256 the
        # cosine magnitude stays below 0.2 for these seeds (verified values
        # around 0.14, 0.00, 0.07).
        s1 = TokenStream("a", tuple("alpha beta gamma delta epsilon zeta".split()))
        s2 = TokenStream("b", tuple("one two three four five six".split()))
        vocab, stats = _vocab_and_stats(s1, s2)
        for seed in (0, 1, 2):
            v1 = embed_builtin(s1, vocab, stats, 256, seed=seed)
            v2 = embed_builtin(s2, vocab, stats, 256, seed=seed)
            assert abs(cosine_similarity(v1, v2)) < 0.2

    def test_empty_stream_degenerate(self):
        reference = TokenStream("a", ("data",))
        vocab, stats = _vocab_and_stats(reference)
        vec = embed_builtin(TokenStream("e", ()), vocab, stats, 8, seed=0)
        assert not np.any(vec)

    def test_out_of_vocab_only_degenerate(self):
        reference = TokenStream("a", ("data",))
        vocab, stats = _vocab_and_stats(reference)
        vec = embed_builtin(TokenStream("o", ("unseen", "words")), vocab, stats, 8, seed=0)
        assert not np.any(vec)

    def test_corpus_embedder_flags_degenerate(self):
        streams = [TokenStream("a", ("data", "sell")), TokenStream("b", ())]
        vocab = Vocabulary.from_terms(["data", "sell"])
        embeddings = embed_corpus_builtin(streams, vocab, dim=16, seed=1)
        assert embeddings.degenerate_ids() == ["b"]

    def test_dim_too_small_rejected(self):
        s = TokenStream("a", ("data",))
        vocab, stats = _vocab_and_stats(s)
        with pytest.raises(EmbeddingError):
            embed_builtin(s, vocab, stats, 1, seed=0)


class TestL2Normalize:
    def test_three_four_five(self):
        np.testing.assert_allclose(l2_normalize(np.array([3.0, 4.0])), [0.6, 0.8], rtol=0, atol=1e-15)

    def test_unit_vector_unchanged(self):
        v = np.array([1.0, 0.0, 0.0])
        np.testing.assert_allclose(l2_normalize(v), v, atol=1e-15)

    def test_zero_vector_errors(self):
        with pytest.raises(EmbeddingError, match="zero vector"):
            l2_normalize(np.array([0.0, 0.0]))

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = rng.normal(size=8)
            once = l2_normalize(v)
            twice = l2_normalize(once)
            assert np.max(np.abs(once - twice)) < 1e-12
            assert abs(np.linalg.norm(once) - 1.0) < 1e-12


class TestCosineSimilarity:
    def test_self_similarity(self):
        v = np.array([0.3, -2.0, 1.0])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_computed(self):
        # dot = 2 + 2 + 4 = 8, norms 3 * 3
        a = np.array([1.0, 2.0, 2.0])
        b = np.array([2.0, 1.0, 2.0])
        assert cosine_similarity(a, b) == pytest.approx(8.0 / 9.0, abs=1e-12)

    def test_zero_operand_errors(self):
        with pytest.raises(EmbeddingError):
            cosine_similarity(np.zeros(2), np.array([1.0, 0.0]))

    def test_dim_mismatch_errors(self):
        with pytest.raises(EmbeddingError):
            cosine_similarity(np.ones(2), np.ones(3))

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        a, b = rng.normal(size=5), rng.normal(size=5)
        assert cosine_similarity(3.7 * a, b) == pytest.approx(cosine_similarity(a, b), abs=1e-12)

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            a, b = rng.normal(size=6), rng.normal(size=6)
            s1, s2 = cosine_similarity(a, b), cosine_similarity(b, a)
            assert s1 == s2
            assert -1.0 <= s1 <= 1.0


def test_euclidean_cosine_identity_on_normalized_pairs():
    """|‖x − y‖² − 2(1 − cos)| < 1e-9 over 1000 random normalized pairs."""
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        x = l2_normalize(rng.normal(size=12))
        y = l2_normalize(rng.normal(size=12))
        lhs = float(np.sum((x - y) ** 2))
        rhs = 2.0 * (1.0 - cosine_similarity(x, y))
        worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-9


def test_embedding_set_duplicate_id_rejected():
    es = EmbeddingSet(2)
    es.add("a", [1.0, 2.0])
    with pytest.raises(EmbeddingError):
        es.add("a", [3.0, 4.0])


def test_normalized_skips_or_errors_on_degenerate():
    es = EmbeddingSet(2)
    es.add("ok", [3.0, 4.0])
    es.add("zero", [0.0, 0.0])
    with pytest.raises(EmbeddingError):
        es.normalized()
    skipped = es.normalized(skip_degenerate=True)
    assert skipped.ids() == ["ok"]
