import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from debias_clr.errors import EmptyInput, InsufficientData, ZeroNormInput
from debias_clr.numerics import (
    RandomStream,
    cosine_similarity,
    cosine_similarity_matrix,
    mean_and_sample_std,
    stable_log_softmax_denominator,
)

finite_vec = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=2, max_size=8
)


class TestCosineSimilarity:
    def test_identity(self):
        assert cosine_similarity([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == pytest.approx(0.0)

    def test_analytic_inv_sqrt2(self):
        assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(0.70710678, abs=1e-8)

    def test_zero_norm_raises(self):
        with pytest.raises(ZeroNormInput):
            cosine_similarity([0, 0], [1, 1])
        with pytest.raises(ZeroNormInput):
            cosine_similarity([1, 1], [0, 0])

    @given(finite_vec, st.floats(0.01, 100), st.floats(0.01, 100))
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_scale_invariant(self, values, alpha, beta):
        u = np.array(values)
        v = u[::-1].copy()
        if np.linalg.norm(u) == 0 or np.linalg.norm(v) == 0:
            return
        base = cosine_similarity(u, v)
        assert cosine_similarity(v, u) == pytest.approx(base, abs=1e-12)
        assert cosine_similarity(alpha * u, beta * v) == pytest.approx(base, abs=1e-9)

    def test_matrix_matches_scalar(self):
        rng = RandomStream(3)
        A = rng.normal(12).reshape(3, 4)
        B = rng.normal(8).reshape(2, 4)
        M = cosine_similarity_matrix(A, B)
        for i in range(3):
            for j in range(2):
                assert M[i, j] == pytest.approx(cosine_similarity(A[i], B[j]), abs=1e-12)


class TestLogSoftmaxDenominator:
    def test_symmetry(self):
        assert stable_log_softmax_denominator([0, 0, 0]) == pytest.approx(math.log(3))

    def test_single_element(self):
        assert stable_log_softmax_denominator([5.0]) == pytest.approx(5.0)

    def test_direct_summation_oracle(self):
        # Independent full-precision evaluation of log(e^1 + e^0 + e^0).
        expected = math.log(math.exp(1.0) + 2.0)
        assert stable_log_softmax_denominator([1, 0, 0]) == pytest.approx(expected, abs=1e-12)

    def test_no_overflow_at_large_scores(self):
        out = stable_log_softmax_denominator([100.0, 100.0])
        assert out == pytest.approx(100.0 + math.log(2.0))

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            stable_log_softmax_denominator([])

    @given(finite_vec, st.floats(-50, 50))
    @settings(max_examples=200, deadline=None)
    def test_shift_property(self, scores, c):
        lhs = stable_log_softmax_denominator(np.array(scores) + c)
        rhs = stable_log_softmax_denominator(scores) + c
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestMeanAndSampleStd:
    def test_hand_oracle(self):
        mean, std = mean_and_sample_std([1, 0])
        assert mean == pytest.approx(0.5)
        assert std == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_constant_list(self):
        mean, std = mean_and_sample_std([3.5, 3.5, 3.5])
        assert (mean, std) == (3.5, 0.0)

    def test_brute_force_formula(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        mean = sum(xs) / 4
        var = sum((x - mean) ** 2 for x in xs) / 3
        got_mean, got_std = mean_and_sample_std(xs)
        assert got_mean == pytest.approx(2.5)
        assert got_std == pytest.approx(math.sqrt(var), abs=1e-12)
        assert got_std == pytest.approx(1.2909944, abs=1e-7)

    def test_too_short(self):
        with pytest.raises(InsufficientData):
            mean_and_sample_std([1.0])


class TestRandomStream:
    def test_equal_seeds_million_draws(self):
        a = RandomStream(123456789).uniform(1_000_000)
        b = RandomStream(123456789).uniform(1_000_000)
        assert np.array_equal(a, b)

    def test_batching_invariance(self):
        s1 = RandomStream(9)
        s2 = RandomStream(9)
        joined = np.concatenate([s1.uniform(3), s1.uniform(2)])
        assert np.array_equal(joined, s2.uniform(5))

    def test_uniform_range(self):
        u = RandomStream(5).uniform(10_000)
        assert u.min() >= 0.0 and u.max() < 1.0

    def test_normal_moments(self):
        z = RandomStream(11).normal(200_000)
        assert abs(z.mean()) < 0.01
        assert abs(z.std() - 1.0) < 0.01

    def test_integers_bounds(self):
        v = RandomStream(2).integers(7, 10_000)
        assert v.min() >= 0 and v.max() <= 6

    def test_permutation_is_permutation(self):
        p = RandomStream(4).permutation(257)
        assert np.array_equal(np.sort(p), np.arange(257))

    def test_choice_without_replacement(self):
        idx = RandomStream(6).choice_without_replacement(50, 7)
        assert len(idx) == 7
        assert len(set(idx.tolist())) == 7
        assert np.array_equal(idx, np.sort(idx))

    def test_child_streams_are_stable_and_distinct(self):
        s = RandomStream(77)
        c1 = s.child("alpha")
        s.uniform(100)  # advancing the parent must not change children
        c2 = s.child("alpha")
        assert c1.seed == c2.seed
        assert s.child("beta").seed != c1.seed
        assert not np.array_equal(c1.uniform(100), s.child("beta").uniform(100))

    def test_shuffle_preserves_multiset(self):
        out = RandomStream(8).shuffle(list(range(20)))
        assert sorted(out) == list(range(20))
