import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unlearnkit.curriculum import (
    CurriculumPlan,
    DifficultyScores,
    build_plan,
    difficulty_scores,
    export_score_histogram,
    validate_plan,
)
from unlearnkit.data import make_blobs
from unlearnkit.nncore import MlpArchitecture, init_params


@pytest.fixture(scope="module")
def model():
    arch = MlpArchitecture((2, 6, 3))
    return arch, init_params(arch, 4), make_blobs(10, 3, 2, 0.5, 0)


class TestScores:
    def test_zero_model_confidence(self, model):
        arch, _, ds = model
        s = difficulty_scores(arch, np.zeros(arch.n_params), ds, [0, 5, 20])
        np.testing.assert_allclose(s.scores, 1 / 3, rtol=0, atol=1e-15)
        assert s.ids.tolist() == [0, 5, 20]

    def test_zero_model_loss(self, model):
        arch, _, ds = model
        s = difficulty_scores(arch, np.zeros(arch.n_params), ds, [1, 2], measure="loss")
        np.testing.assert_allclose(s.scores, math.log(3), rtol=0, atol=1e-12)

    def test_confidence_and_loss_orders_reverse(self, model):
        arch, p, ds = model
        ids = np.arange(len(ds))
        conf = difficulty_scores(arch, p, ds, ids, "confidence")
        loss = difficulty_scores(arch, p, ds, ids, "loss")
        np.testing.assert_allclose(loss.scores, -np.log(conf.scores), rtol=1e-12)
        assert np.array_equal(np.argsort(conf.scores, kind="stable"), np.argsort(-loss.scores, kind="stable"))

    def test_model_unchanged(self, model):
        arch, p, ds = model
        before = p.copy()
        difficulty_scores(arch, p, ds, [0, 1])
        assert np.array_equal(before, p)

    def test_errors(self, model):
        arch, p, ds = model
        with pytest.raises(ValueError):
            difficulty_scores(arch, p, ds, [])
        with pytest.raises(ValueError):
            difficulty_scores(arch, p, ds, [0], measure="entropy")


class TestBuildPlan:
    def test_forced_by_sort(self):
        s = DifficultyScores.from_mapping({0: 0.1, 1: 0.5, 2: 0.3, 3: 0.9})
        plan = build_plan(s, 2, "equal_size")
        assert [sorted(c.tolist()) for c in plan.criteria] == [[0, 2], [1, 3]]
        assert plan.mean_scores == pytest.approx([0.2, 0.7])

    def test_singletons(self):
        s = DifficultyScores.from_mapping({10: 0.4, 11: 0.2, 12: 0.3})
        plan = build_plan(s, 3)
        assert [c.tolist() for c in plan.criteria] == [[11], [12], [10]]

    def test_ties_by_id(self):
        s = DifficultyScores(np.array([5, 3, 9, 1, 7, 2]), np.full(6, 0.5))
        plan = build_plan(s, 3)
        assert [c.tolist() for c in plan.criteria] == [[1, 2], [3, 5], [7, 9]]
        assert validate_plan(plan, s.ids, s) == []

    def test_remainder_to_earliest(self):
        s = DifficultyScores(np.arange(7), np.arange(7) / 7)
        assert [len(c) for c in build_plan(s, 3).criteria] == [3, 2, 2]

    def test_quantile(self):
        s = DifficultyScores(np.arange(8), np.array([0.0, 0.1, 0.2, 0.3, 0.6, 0.7, 0.8, 0.9]))
        plan = build_plan(s, 2, "quantile")
        assert [c.tolist() for c in plan.criteria] == [[0, 1, 2, 3], [4, 5, 6, 7]]

    def test_quantile_drops_empty_buckets(self):
        s = DifficultyScores(np.arange(6), np.array([0.5, 0.5, 0.5, 0.5, 0.5, 0.9]))
        plan = build_plan(s, 3, "quantile")
        assert validate_plan(plan, s.ids, s) == []
        assert 1 <= len(plan) <= 3

    @pytest.mark.parametrize("n", [0, 5])
    def test_n_out_of_range(self, n):
        with pytest.raises(ValueError):
            build_plan(DifficultyScores(np.arange(4), np.ones(4)), n)

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        s = DifficultyScores(np.arange(50), rng.random(50))
        a, b = build_plan(s, 4), build_plan(s, 4)
        assert all(np.array_equal(x, y) for x, y in zip(a.criteria, b.criteria))

    def test_json_round_trip(self):
        s = DifficultyScores(np.arange(5), np.array([0.3, 0.1, 0.2, 0.5, 0.4]))
        plan = build_plan(s, 2)
        back = CurriculumPlan.from_json(plan.to_json())
        assert [c.tolist() for c in back.criteria] == [c.tolist() for c in plan.criteria]
        assert back.mean_scores == plan.mean_scores


class TestValidatePlan:
    def test_missing_id(self):
        plan = CurriculumPlan([np.array([0, 1]), np.array([2])], [0.1, 0.2])
        problems = validate_plan(plan, [0, 1, 2, 3])
        assert len(problems) == 1 and "completeness" in problems[0] and "3" in problems[0]

    def test_overlap(self):
        plan = CurriculumPlan([np.array([0, 1]), np.array([1, 2])], [0.1, 0.2])
        assert any("disjointness" in p for p in validate_plan(plan, [0, 1, 2]))

    def test_swapped_criteria(self):
        s = DifficultyScores.from_mapping({0: 0.1, 1: 0.2, 2: 0.8, 3: 0.9})
        plan = build_plan(s, 2)
        assert validate_plan(plan, s.ids, s) == []
        swapped = CurriculumPlan(plan.criteria[::-1], plan.mean_scores[::-1])
        problems = validate_plan(swapped, s.ids, s)
        assert len(problems) == 1 and "monotonicity" in problems[0]
        assert validate_plan(swapped, s.ids) == problems

    @settings(max_examples=200, deadline=None)
    @given(
        scores=st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=80),
        n=st.integers(1, 80),
        strategy=st.sampled_from(["equal_size", "quantile"]),
        seed=st.integers(0, 1000),
    )
    def test_build_plan_always_valid(self, scores, n, strategy, seed):
        n = min(n, len(scores))
        ids = np.random.default_rng(seed).permutation(1000)[: len(scores)]
        s = DifficultyScores(ids, np.array(scores))
        plan = build_plan(s, n, strategy)
        assert validate_plan(plan, ids, s) == []
        assert sorted(np.concatenate(plan.criteria).tolist()) == sorted(ids.tolist())


class TestHistogram:
    def test_documented_binning(self):
        h = export_score_histogram(DifficultyScores(np.arange(4), np.array([0.1, 0.3, 0.5, 0.9])), 2)
        assert h.counts.tolist() == [3, 1]
        np.testing.assert_allclose(h.edges, [0.1, 0.5, 0.9])

    @pytest.mark.parametrize("bins", [1, 3, 10])
    def test_all_equal(self, bins):
        h = export_score_histogram(DifficultyScores(np.arange(5), np.full(5, 0.7)), bins)
        assert np.count_nonzero(h.counts) == 1 and h.counts.sum() == 5

    def test_counts_sum(self):
        s = DifficultyScores(np.arange(100), np.random.default_rng(1).random(100))
        h = export_score_histogram(s, 7)
        assert h.counts.sum() == 100 and len(h.edges) == 8
        assert h.to_csv().splitlines()[0] == "bin,left,right,count"

    def test_bins_positive(self):
        with pytest.raises(ValueError):
            export_score_histogram(DifficultyScores([0], [0.5]), 0)


def test_equal_scores_with_rounding_are_monotone():
    # means of different-sized groups of one value may differ in the last ulp
    s = DifficultyScores(np.arange(97), np.full(97, 0.34193872))
    for n in range(1, 97):
        assert validate_plan(build_plan(s, n), s.ids, s) == []
