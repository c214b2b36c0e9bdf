import numpy as np
import pytest

from debias_clr.counterfactual import (
    build_pairs,
    cutout,
    cutout_rows,
    generate_positive,
    pair_matrices,
)
from debias_clr.errors import DimensionMismatch
from debias_clr.numerics import RandomStream
from debias_clr.preprocess import SensitiveProfile

from conftest import make_table


def profile_for(indices, x_f, x_s, dim, attribute="gender"):
    mi = np.zeros(dim)
    return SensitiveProfile(
        attribute=attribute,
        sensitive_indices=np.asarray(indices, dtype=np.int64),
        mi_scores=mi,
        class1_means=np.asarray(x_f, dtype=np.float64),
        class2_means=np.asarray(x_s, dtype=np.float64),
    )


class TestGeneratePositive:
    def test_direct_substitution(self):
        p = profile_for([1, 3], x_f=[5, 6], x_s=[9, 7], dim=4)
        out = generate_positive([1, 2, 3, 4], 0, p)
        np.testing.assert_array_equal(out, [1, 9, 3, 7])

    def test_empty_profile_identity(self):
        p = profile_for([], [], [], dim=4)
        x = np.array([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(generate_positive(x, 0, p), x)

    def test_class2_gets_class1_means(self):
        p = profile_for([0, 2], x_f=[11, 13], x_s=[0, 0], dim=4)
        out = generate_positive([1, 2, 3, 4], 1, p)
        np.testing.assert_array_equal(out[[0, 2]], [11, 13])
        np.testing.assert_array_equal(out[[1, 3]], [2, 4])

    def test_class_by_name(self):
        p = profile_for([0], x_f=[7], x_s=[8], dim=2)
        np.testing.assert_array_equal(generate_positive([0, 0], "female", p), [8, 0])
        np.testing.assert_array_equal(generate_positive([0, 0], "male", p), [7, 0])

    def test_involution_on_class_means(self):
        p = profile_for([1, 2], x_f=[1, 2], x_s=[3, 4], dim=4)
        row = np.array([9.0, 1.0, 2.0, 9.0])  # class-1 row sitting at X_f
        swapped = generate_positive(row, 0, p)
        np.testing.assert_array_equal(swapped[[1, 2]], [3, 4])
        back = generate_positive(swapped, 1, p)
        np.testing.assert_array_equal(back, row)

    def test_dimension_mismatch(self):
        p = profile_for([5], [1], [2], dim=6)
        with pytest.raises(DimensionMismatch):
            generate_positive([1.0, 2.0], 0, p)


class TestBuildPairs:
    def test_one_pair_per_record(self, small_table):
        p = profile_for([0, 1], [0.0, 0.0], [1.0, 1.0], small_table.dim)
        pairs = build_pairs(small_table, p)
        assert len(pairs) == len(small_table)

    def test_anchors_bit_exact(self, small_table):
        p = profile_for([0], [0.0], [1.0], small_table.dim)
        pairs = build_pairs(small_table, p)
        for i, pair in enumerate(pairs):
            assert np.array_equal(pair.anchor, small_table.features[i])

    def test_all_class1_positives_hit_x_s(self):
        t = make_table(n=10, gender_codes=[0] * 10)
        p = profile_for([1, 3], [0.5, 0.5], [7.0, 8.0], t.dim)
        _, positives, _ = pair_matrices(t, p)
        assert np.all(positives[:, 1] == 7.0)
        assert np.all(positives[:, 3] == 8.0)

    def test_difference_supported_on_sensitive_indices(self, small_table):
        p = profile_for([2, 4], [0.1, 0.2], [0.3, 0.4], small_table.dim)
        anchors, positives, _ = pair_matrices(small_table, p)
        diff = anchors - positives
        off = np.setdiff1d(np.arange(small_table.dim), p.sensitive_indices)
        assert np.all(diff[:, off] == 0.0)

    def test_pair_class_labels(self):
        t = make_table(n=4, gender_codes=[0, 1, 0, 1])
        p = profile_for([0], [0.0], [1.0], t.dim)
        pairs = build_pairs(t, p)
        assert [x.attribute_class for x in pairs] == ["female", "male", "female", "male"]


class TestCutout:
    def test_exact_mask_count(self):
        p = profile_for(list(range(10)), [0] * 10, [0] * 10, dim=12)
        x = np.ones(12)
        out = cutout(x, p, 0.2, RandomStream(0))
        zeroed = np.flatnonzero(out == 0.0)
        assert len(zeroed) == 2
        assert set(zeroed.tolist()) <= set(range(10))

    def test_fraction_zero_identity(self):
        p = profile_for([0, 1], [0, 0], [0, 0], dim=4)
        x = np.array([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(cutout(x, p, 0.0, RandomStream(1)), x)

    def test_min_one_mask_for_small_profiles(self):
        p = profile_for([3], [0], [0], dim=5)
        out = cutout(np.ones(5), p, 0.2, RandomStream(2))
        assert out[3] == 0.0

    def test_deterministic(self):
        p = profile_for(list(range(8)), [0] * 8, [0] * 8, dim=10)
        x = np.arange(1.0, 11.0)
        a = cutout(x, p, 0.25, RandomStream(7))
        b = cutout(x, p, 0.25, RandomStream(7))
        np.testing.assert_array_equal(a, b)

    def test_non_sensitive_untouched(self):
        p = profile_for([0, 1, 2, 3], [0] * 4, [0] * 4, dim=8)
        x = np.arange(1.0, 9.0)
        out = cutout(x, p, 0.5, RandomStream(3))
        np.testing.assert_array_equal(out[4:], x[4:])

    def test_changes_at_most_ceil_fraction(self):
        p = profile_for(list(range(9)), [0] * 9, [0] * 9, dim=9)
        x = np.ones(9)
        for seed in range(10):
            out = cutout(x, p, 0.33, RandomStream(seed))
            assert np.sum(out != x) <= int(np.ceil(0.33 * 9))

    def test_rows_equals_scalar_loop(self):
        p = profile_for([1, 2, 5, 6], [0] * 4, [0] * 4, dim=8)
        X = RandomStream(4).normal(5 * 8).reshape(5, 8) + 10.0
        batched = cutout_rows(X, p, 0.5, RandomStream(9))
        scalar_stream = RandomStream(9)
        rowwise = np.array([cutout(row, p, 0.5, scalar_stream) for row in X])
        np.testing.assert_array_equal(batched, rowwise)
