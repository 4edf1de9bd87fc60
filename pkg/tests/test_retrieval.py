"""Ranking and IR metric tests, including a brute-force oracle for AP."""

import math

import numpy as np
import pytest

from privmine.embedding import EmbeddingSet
from privmine.retrieval import (
    RankedList,
    RelevanceJudgments,
    RetrievalError,
    average_precision,
    export_ranked_csv,
    f1_at_k,
    f1_curve,
    load_judgments,
    load_ranked_csv,
    precision_at_k,
    rank_reviews,
    recall_at_k,
    top_m,
)


def ranked_from_pattern(pattern):
    """Ranked list whose entries relevance follows ``pattern`` (1/0 per rank)."""
    entries = tuple((f"doc{i:03d}", 1.0 - i * 0.01) for i in range(len(pattern)))
    judgments = RelevanceJudgments({f"doc{i:03d}": int(v) for i, v in enumerate(pattern)})
    return RankedList(query_id="q", entries=entries), judgments


def brute_force_ap(pattern, total_relevant):
    """Literal term-by-term evaluation: sum of P(r)*rel(r) over total relevant."""
    acc = 0.0
    for r in range(1, len(pattern) + 1):
        if pattern[r - 1]:
            acc += sum(pattern[:r]) / r
    return acc / total_relevant


class TestRankReviews:
    def _set(self, vectors):
        es = EmbeddingSet(2)
        for doc_id, vec in vectors.items():
            es.add(doc_id, vec)
        return es

    def test_exact_match_ranks_first(self):
        es = self._set({"r1": [0.2, 0.9], "r2": [1.0, 0.0]})
        ranked = rank_reviews(np.array([0.2, 0.9]), es)
        assert ranked.entries[0][0] == "r1"
        assert ranked.entries[0][1] == pytest.approx(1.0, abs=1e-12)

    def test_identical_vectors_tie_by_doc_id(self):
        es = self._set({"zz": [1.0, 1.0], "aa": [1.0, 1.0], "mm": [0.0, 1.0]})
        ranked = rank_reviews(np.array([1.0, 1.0]), es)
        assert ranked.ids() == ["aa", "zz", "mm"]

    def test_hand_computed_ordering(self):
        es = self._set(
            {"r1": [1.0, 0.0], "r2": [0.0, 1.0], "r3": [1 / math.sqrt(2), 1 / math.sqrt(2)]}
        )
        ranked = rank_reviews(np.array([1.0, 0.0]), es)
        assert ranked.ids() == ["r1", "r3", "r2"]
        scores = dict(ranked.entries)
        assert scores["r1"] == pytest.approx(1.0, abs=1e-12)
        assert scores["r3"] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert scores["r2"] == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        es = self._set({"r1": [1.0, 0.0]})
        with pytest.raises(RetrievalError):
            rank_reviews(np.array([1.0, 0.0, 0.0]), es)

    def test_degenerate_vectors_excluded_with_warning(self, caplog):
        es = EmbeddingSet(2)
        es.add("ok", [1.0, 0.0])
        es.add("zero", [0.0, 0.0])
        with caplog.at_level("WARNING"):
            ranked = rank_reviews(np.array([1.0, 0.0]), es)
        assert ranked.ids() == ["ok"]
        assert "zero" in caplog.text

    def test_scale_invariance_of_ranking(self):
        rng = np.random.default_rng(21)
        es = self._set({f"r{i}": rng.normal(size=2) for i in range(20)})
        q = rng.normal(size=2)
        base = rank_reviews(q, es).ids()
        scaled = rank_reviews(123.45 * q, es).ids()
        assert base == scaled


class TestTopM:
    def test_truncates(self):
        ranked, _ = ranked_from_pattern([1, 0, 1, 0, 1])
        assert len(top_m(ranked, 2)) == 2
        assert top_m(ranked, 2).entries == ranked.entries[:2]

    def test_m_beyond_length(self):
        ranked, _ = ranked_from_pattern([1, 0, 1, 0, 1])
        assert len(top_m(ranked, 10)) == 5

    def test_top_500_of_large_list(self):
        # mirrors the 500-of-14122 cut used to build annotation batches
        entries = tuple((f"doc{i:05d}", 1.0 - i * 1e-5) for i in range(14122))
        ranked = RankedList(query_id="q", entries=entries)
        assert len(top_m(ranked, 500)) == 500


class TestPrecisionRecallF1:
    def test_all_relevant_prefix(self):
        ranked, judg = ranked_from_pattern([1, 1, 1])
        assert precision_at_k(ranked, judg, 3) == 1.0

    def test_precision_two_thirds(self):
        ranked, judg = ranked_from_pattern([1, 0, 1])
        assert precision_at_k(ranked, judg, 3) == pytest.approx(2 / 3, abs=1e-12)

    def test_precision_zero(self):
        ranked, judg = ranked_from_pattern([0, 0])
        assert precision_at_k(ranked, judg, 2) == 0.0

    def test_k_out_of_range(self):
        ranked, judg = ranked_from_pattern([1, 0])
        with pytest.raises(RetrievalError):
            precision_at_k(ranked, judg, 0)
        with pytest.raises(RetrievalError):
            precision_at_k(ranked, judg, 3)

    def test_recall_full_retrieval(self):
        ranked, judg = ranked_from_pattern([1, 0, 1, 0])
        assert recall_at_k(ranked, judg, 4) == 1.0

    def test_recall_with_external_relevant(self):
        # 3 relevant in judgments, only 2 of them inside the list
        entries = tuple((f"doc{i}", 1.0 - 0.1 * i) for i in range(4))
        ranked = RankedList(query_id="q", entries=entries)
        judg = RelevanceJudgments(
            {"doc0": 1, "doc1": 0, "doc2": 1, "doc3": 0, "outside": 1}
        )
        assert recall_at_k(ranked, judg, 3) == pytest.approx(2 / 3, abs=1e-12)

    def test_recall_undefined_without_relevant(self):
        ranked, judg = ranked_from_pattern([0, 0])
        with pytest.raises(RetrievalError, match="recall undefined"):
            recall_at_k(ranked, judg, 1)

    def test_f1_perfect(self):
        ranked, judg = ranked_from_pattern([1, 1])
        assert f1_at_k(ranked, judg, 2) == 1.0

    def test_f1_half(self):
        # pattern [1, 0] with 2 total relevant (one never retrieved): P = R = 0.5
        entries = (("doc0", 1.0), ("doc1", 0.9))
        ranked = RankedList(query_id="q", entries=entries)
        judg = RelevanceJudgments({"doc0": 1, "doc1": 0, "missing": 1})
        assert f1_at_k(ranked, judg, 2) == pytest.approx(0.5, abs=1e-12)

    def test_f1_zero_convention(self):
        entries = (("a", 1.0), ("b", 0.9))
        ranked = RankedList(query_id="q", entries=entries)
        judg = RelevanceJudgments({"a": 0, "b": 0, "far": 1})
        assert f1_at_k(ranked, judg, 2) == 0.0


class TestAveragePrecision:
    def test_all_relevant_first(self):
        ranked, judg = ranked_from_pattern([1, 1, 0, 0])
        assert average_precision(ranked, judg) == 1.0

    def test_pattern_101(self):
        ranked, judg = ranked_from_pattern([1, 0, 1])
        assert average_precision(ranked, judg) == pytest.approx(5 / 6, abs=1e-12)

    def test_pattern_01(self):
        ranked, judg = ranked_from_pattern([0, 1])
        assert average_precision(ranked, judg) == pytest.approx(0.5, abs=1e-12)

    def test_zero_relevant_errors(self):
        ranked, judg = ranked_from_pattern([0, 0])
        with pytest.raises(RetrievalError):
            average_precision(ranked, judg)

    def test_matches_brute_force_on_random_patterns(self):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            n = int(rng.integers(1, 40))
            pattern = list(rng.integers(0, 2, size=n))
            if sum(pattern) == 0:
                pattern[int(rng.integers(n))] = 1
            ranked, judg = ranked_from_pattern(pattern)
            expected = brute_force_ap(pattern, sum(pattern))
            assert average_precision(ranked, judg) == expected

    def test_invariant_to_tail_permutations(self):
        # shuffling irrelevant docs below the last relevant one keeps AP fixed
        rng = np.random.default_rng(37)
        pattern = [1, 0, 1, 0, 0, 1, 0, 0, 0, 0]
        ranked, judg = ranked_from_pattern(pattern)
        base = average_precision(ranked, judg)
        last_rel = max(i for i, v in enumerate(pattern) if v)
        tail = list(ranked.entries[last_rel + 1 :])
        for _ in range(10):
            rng.shuffle(tail)
            scores = [s for _, s in ranked.entries]
            remixed = tuple(
                (doc, scores[i])
                for i, (doc, _) in enumerate(list(ranked.entries[: last_rel + 1]) + tail)
            )
            assert average_precision(RankedList("q", remixed), judg) == base


class TestF1Curve:
    def test_peak_at_two(self):
        ranked, judg = ranked_from_pattern([1, 1, 0, 0])
        curve = f1_curve(ranked, judg, 4)
        assert curve.best_k == 2
        assert curve.best_f1 == 1.0

    def test_irrelevant_prefix_starts_at_zero(self):
        ranked, judg = ranked_from_pattern([0, 1])
        assert f1_curve(ranked, judg, 2).points[0][1] == 0.0

    def test_single_relevant_decreasing(self):
        ranked, judg = ranked_from_pattern([1, 0, 0])
        values = [v for _, v in f1_curve(ranked, judg, 3).points]
        assert values[0] == 1.0
        assert values[1] == pytest.approx(2 / 3, abs=1e-12)
        assert values == sorted(values, reverse=True)

    def test_monotone_recall_along_curve(self):
        rng = np.random.default_rng(41)
        pattern = list(rng.integers(0, 2, size=30))
        pattern[0] = 1
        ranked, judg = ranked_from_pattern(pattern)
        recalls = [recall_at_k(ranked, judg, k) for k in range(1, 31)]
        assert recalls == sorted(recalls)

    def test_precision_non_increasing_when_relevant_first(self):
        # all relevant items before all irrelevant ones
        pattern = [1] * 7 + [0] * 13
        ranked, judg = ranked_from_pattern(pattern)
        precisions = [precision_at_k(ranked, judg, k) for k in range(1, 21)]
        assert precisions == sorted(precisions, reverse=True)


class TestCsvAndJudgmentsIO:
    def test_export_then_load(self, tmp_path):
        ranked, _ = ranked_from_pattern([1, 0, 1])
        path = tmp_path / "ranked.csv"
        export_ranked_csv(ranked, path)
        text = path.read_text()
        assert text.splitlines()[0] == "rank,doc_id,score"
        assert text.splitlines()[1] == "1,doc000,1.000000"
        loaded = load_ranked_csv(path)
        assert loaded.ids() == ranked.ids()

    def test_load_judgments(self, tmp_path):
        path = tmp_path / "judg.jsonl"
        path.write_text('{"id": "a", "label": 1}\n{"id": "b", "label": 0}\n')
        judg = load_judgments(path)
        assert judg.is_relevant("a")
        assert not judg.is_relevant("b")
        assert judg.total_relevant == 1

    def test_unjudged_query_errors(self):
        judg = RelevanceJudgments({"a": 1})
        with pytest.raises(RetrievalError, match="'mystery'"):
            judg.is_relevant("mystery")


def test_ranked_list_rejects_bad_order_and_duplicates():
    with pytest.raises(RetrievalError):
        RankedList(query_id="q", entries=(("a", 0.5), ("b", 0.9)))
    with pytest.raises(RetrievalError):
        RankedList(query_id="q", entries=(("a", 0.9), ("a", 0.5)))
