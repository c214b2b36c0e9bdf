import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from debias_clr.dataset import SynthConfig, generate_synthetic
from debias_clr.errors import (
    InsufficientData,
    SingleClassLabels,
    TooFewMinoritySamples,
)
from debias_clr.numerics import RandomStream
from debias_clr.preprocess import (
    SensitiveProfile,
    bulk_mutual_information,
    mutual_information,
    oversample_minority,
    select_sensitive_features,
    smote,
)

from conftest import make_table


class TestMutualInformation:
    def test_constant_feature_zero(self):
        y = np.array([0, 1] * 20)
        assert mutual_information(np.full(40, 3.3), y) == 0.0

    def test_feature_equals_label_one_bit(self):
        y = np.array([0, 1] * 50)
        assert mutual_information(y.astype(float), y) == pytest.approx(1.0, abs=1e-9)

    def test_independent_feature_small(self):
        for seed in range(3):
            s = RandomStream(seed)
            x = s.normal(10_000)
            y = (s.uniform(10_000) < 0.5).astype(int)
            assert mutual_information(x, y) < 0.02

    def test_counting_oracle_2x2(self):
        # feature == label, 30/10 imbalance: MI = H(label) by direct count.
        y = np.array([0] * 30 + [1] * 10)
        p = np.array([0.75, 0.25])
        expected = float(-(p * np.log2(p)).sum())
        assert mutual_information(y.astype(float), y) == pytest.approx(expected, abs=1e-12)

    def test_non_negative(self):
        s = RandomStream(5)
        for _ in range(20):
            x = s.normal(50)
            y = (s.uniform(50) < 0.5).astype(int)
            if y.min() == y.max():
                continue
            assert mutual_information(x, y) >= 0.0

    @pytest.mark.parametrize("transform", [np.exp, lambda v: v**3])
    def test_monotone_transform_invariance(self, transform):
        s = RandomStream(7)
        for _ in range(10):
            x = s.normal(200)
            y = (s.uniform(200) < 0.5).astype(int)
            if y.min() == y.max():
                continue
            assert mutual_information(transform(x), y) == mutual_information(x, y)

    @given(st.integers(0, 1000))
    @settings(max_examples=50, deadline=None)
    def test_bulk_matches_scalar(self, seed):
        s = RandomStream(seed)
        X = s.normal(30 * 4).reshape(30, 4)
        X[:, 0] = np.round(X[:, 0])  # ties
        y = (s.uniform(30) < 0.5).astype(int)
        if y.min() == y.max():
            return
        bulk = bulk_mutual_information(X, y)
        for j in range(4):
            assert bulk[j] == mutual_information(X[:, j], y)

    def test_too_few_samples(self):
        with pytest.raises(InsufficientData):
            mutual_information(np.zeros(10), np.array([0, 1] * 5))

    def test_single_class(self):
        with pytest.raises(SingleClassLabels):
            mutual_information(np.arange(30.0), np.zeros(30, dtype=int))


class TestSelectSensitiveFeatures:
    def test_top_half_count(self):
        t = make_table(n=40, dim=10)
        profile = select_sensitive_features(t, "gender")
        assert profile.sensitive_indices.size == 5

    def test_odd_dim_floors(self):
        t = make_table(n=40, dim=7)
        assert select_sensitive_features(t, "gender").sensitive_indices.size == 3

    def test_ties_break_to_lower_index(self):
        # All columns identical: equal scores, lowest indices win.
        col = RandomStream(1).normal(40)
        t = make_table(n=40, dim=4, features=np.tile(col[:, None], (1, 4)))
        profile = select_sensitive_features(t, "gender")
        assert profile.sensitive_indices.tolist() == [0, 1]

    def test_class_means_arithmetic(self):
        # 24 rows; class-1 rows alternate (0,2) and (2,4) on the two
        # informative columns, so X_f must be (1, 3).
        n = 24
        codes = np.array([0, 1] * 12, dtype=np.uint8)
        features = RandomStream(3).normal(n * 4).reshape(n, 4) * 0.01
        features[:, 0] = np.where(codes == 0, 0.0, 10.0)
        features[:, 2] = np.where(codes == 0, 0.0, 10.0)
        features[codes == 0, 0] = np.tile([0.0, 2.0], 6)
        features[codes == 0, 2] = np.tile([2.0, 4.0], 6)
        t = make_table(n=n, dim=4, features=features, gender_codes=codes)
        profile = select_sensitive_features(t, "gender")
        assert profile.sensitive_indices.tolist() == [0, 2]
        np.testing.assert_allclose(profile.class1_means, [1.0, 3.0])

    def test_recovers_planted_indices(self):
        for seed in range(5):
            cfg = SynthConfig(n_records=600, dim=60, sensitive_frac=0.5,
                              bias_shift=1.0, seed=seed)
            t = generate_synthetic(cfg)
            profile = select_sensitive_features(t, "gender")
            planted = set(t.provenance["biased_indices"])
            got = set(profile.sensitive_indices.tolist())
            assert len(planted & got) >= 0.8 * len(planted)

    def test_deterministic(self, small_table):
        a = select_sensitive_features(small_table, "gender")
        b = select_sensitive_features(small_table, "gender")
        assert np.array_equal(a.sensitive_indices, b.sensitive_indices)
        assert np.array_equal(a.mi_scores, b.mi_scores)

    def test_profile_round_trip(self, tmp_path, small_table):
        profile = select_sensitive_features(small_table, "ethnicity")
        path = str(tmp_path / "p.json")
        profile.save(path)
        loaded = SensitiveProfile.load(path)
        assert loaded.attribute == "ethnicity"
        assert np.array_equal(loaded.sensitive_indices, profile.sensitive_indices)
        np.testing.assert_array_equal(loaded.class1_means, profile.class1_means)


class TestSmote:
    def test_balanced_table_unchanged(self):
        t = make_table(n=20, gender_codes=[0, 1] * 10)
        assert smote(t, "gender", stream=RandomStream(0)) is t

    def test_paper_shape_counts(self):
        t = make_table(n=2429, dim=4, gender_codes=[0] * 510 + [1] * 1919)
        out = smote(t, "gender", stream=RandomStream(1))
        counts = np.bincount(out.gender_codes)
        assert counts.tolist() == [1919, 1919]

    def test_originals_are_prefix(self):
        t = make_table(n=30, gender_codes=[0] * 10 + [1] * 20)
        out = smote(t, "gender", stream=RandomStream(2))
        assert out.record_ids[:30] == t.record_ids
        assert np.array_equal(out.features[:30], t.features)

    def test_synthetics_on_convex_segments(self):
        t = make_table(n=30, dim=5, gender_codes=[0] * 12 + [1] * 18)
        out = smote(t, "gender", stream=RandomStream(3))
        lineage = out.provenance["smote_lineage"]
        assert len(lineage) == 6
        id_to_row = {rid: i for i, rid in enumerate(t.record_ids)}
        for synth_row, (seed_id, nn_id, lam) in enumerate(lineage, start=30):
            a = t.features[id_to_row[seed_id]]
            b = t.features[id_to_row[nn_id]]
            expected = a + lam * (b - a)
            np.testing.assert_allclose(out.features[synth_row], expected, atol=1e-12)
            lo = np.minimum(a, b) - 1e-12
            hi = np.maximum(a, b) + 1e-12
            assert np.all(out.features[synth_row] >= lo)
            assert np.all(out.features[synth_row] <= hi)

    def test_synthetic_labels_copied(self):
        t = make_table(n=30, gender_codes=[0] * 10 + [1] * 20)
        out = smote(t, "gender", stream=RandomStream(4))
        assert np.all(out.gender_codes[30:] == 0)
        id_to_row = {rid: i for i, rid in enumerate(t.record_ids)}
        for synth_row, (seed_id, _, _) in enumerate(out.provenance["smote_lineage"], start=30):
            src = id_to_row[seed_id]
            assert out.los_classes[synth_row] == t.los_classes[src]
            assert np.array_equal(out.dx_phenotypes[synth_row], t.dx_phenotypes[src])

    def test_too_few_minority(self):
        t = make_table(n=20, gender_codes=[0] * 4 + [1] * 16)
        with pytest.raises(TooFewMinoritySamples):
            smote(t, "gender", k=5, stream=RandomStream(5))

    def test_deterministic(self):
        t = make_table(n=40, gender_codes=[0] * 15 + [1] * 25)
        a = smote(t, "gender", stream=RandomStream(6))
        b = smote(t, "gender", stream=RandomStream(6))
        assert a.equals(b)

    def test_neighbors_are_same_class(self):
        t = make_table(n=40, gender_codes=[0] * 15 + [1] * 25)
        out = smote(t, "gender", stream=RandomStream(7))
        minority_ids = set(t.record_ids[i] for i in range(15))
        for seed_id, nn_id, _ in out.provenance["smote_lineage"]:
            assert seed_id in minority_ids and nn_id in minority_ids


class TestOversampleMinority:
    def test_randomized_contract(self):
        # Balanced output, originals untouched, synthetics on segments.
        for trial in range(200):
            s = RandomStream(trial)
            n0 = 7 + int(s.uniform() * 10)
            n1 = n0 + 1 + int(s.uniform() * 10)
            X = s.normal((n0 + n1) * 3).reshape(n0 + n1, 3)
            y = np.array([0] * n0 + [1] * n1)
            synth, seeds, nns, lams = oversample_minority(X, y, 5, s)
            assert len(synth) == n1 - n0
            assert np.all(y[seeds] == 0) and np.all(y[nns] == 0)
            expected = X[seeds] + lams[:, None] * (X[nns] - X[seeds])
            np.testing.assert_allclose(synth, expected, atol=1e-12)
