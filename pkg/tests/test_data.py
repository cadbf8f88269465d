import numpy as np
import pytest

from longtail_kd.data import (
    FEW,
    MANY,
    MEDIUM,
    ImbalanceProfile,
    LabeledDataset,
    downsample_to_profile,
    load_dataset,
    make_longtail_counts,
    save_dataset,
    subset_tags,
    synth_gaussian_mixture,
)


class TestMakeLongtailCounts:
    def test_balanced_degenerate(self):
        counts = make_longtail_counts(ImbalanceProfile("exponential", 1.0, 500, 10))
        np.testing.assert_array_equal(counts, np.full(10, 500))

    def test_exponential_cifar_style(self):
        counts = make_longtail_counts(ImbalanceProfile("exponential", 100.0, 5000, 10))
        assert counts[0] == 5000
        assert counts[-1] == 50
        assert counts[0] / counts[-1] == 100.0

    def test_step_profile(self):
        counts = make_longtail_counts(ImbalanceProfile("step", 10.0, 100, 4))
        np.testing.assert_array_equal(counts, [100, 100, 10, 10])

    def test_nonincreasing_and_ratio_near_rho(self):
        for rho in (10.0, 50.0, 100.0):
            for C in (5, 10, 37):
                counts = make_longtail_counts(ImbalanceProfile("exponential", rho, 1000, C))
                assert np.all(np.diff(counts) <= 0)
                ratio = counts[0] / counts[-1]
                assert abs(ratio - rho) / rho < 0.05

    def test_counts_clamped_to_one(self):
        counts = make_longtail_counts(ImbalanceProfile("exponential", 1000.0, 100, 10))
        assert counts.min() >= 1

    def test_single_class_needs_rho_one(self):
        with pytest.raises(ValueError):
            ImbalanceProfile("exponential", 10.0, 100, 1)
        counts = make_longtail_counts(ImbalanceProfile("exponential", 1.0, 100, 1))
        np.testing.assert_array_equal(counts, [100])

    def test_bad_profile_rejected(self):
        with pytest.raises(ValueError):
            ImbalanceProfile("linear", 10.0, 100, 4)
        with pytest.raises(ValueError):
            ImbalanceProfile("step", 0.5, 100, 4)


class TestSynthGaussianMixture:
    def test_well_separated_clusters_are_nearest_mean_classifiable(self):
        train, test = synth_gaussian_mixture([10, 10], 2, separation=10.0, seed=7, per_class_test=200)
        means = np.vstack([train.features[train.labels == c].mean(axis=0) for c in range(2)])
        d = ((test.features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        preds = d.argmin(axis=1)
        assert (preds == test.labels).mean() >= 0.99

    def test_zero_separation_is_chance_level(self):
        train, test = synth_gaussian_mixture([200, 200, 200], 4, separation=0.0, seed=3, per_class_test=300)
        means = np.vstack([train.features[train.labels == c].mean(axis=0) for c in range(3)])
        d = ((test.features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        acc = (d.argmin(axis=1) == test.labels).mean()
        assert abs(acc - 1.0 / 3.0) < 0.1

    def test_same_seed_bit_identical(self):
        a_train, a_test = synth_gaussian_mixture([30, 20, 10], 5, 2.0, seed=11, per_class_test=40)
        b_train, b_test = synth_gaussian_mixture([30, 20, 10], 5, 2.0, seed=11, per_class_test=40)
        np.testing.assert_array_equal(a_train.features, b_train.features)
        np.testing.assert_array_equal(a_test.features, b_test.features)

    def test_counts_and_balance(self):
        train, test = synth_gaussian_mixture([30, 20, 10], 5, 2.0, seed=11, per_class_test=40)
        np.testing.assert_array_equal(train.class_counts, [30, 20, 10])
        np.testing.assert_array_equal(test.class_counts, [40, 40, 40])

    def test_mean_radius_matches_separation(self):
        train, _ = synth_gaussian_mixture([5000], 8, separation=6.0, seed=2, per_class_test=1)
        mean = train.features.mean(axis=0)
        assert abs(np.linalg.norm(mean) - 6.0) < 0.2

    def test_dimension_too_small_rejected(self):
        with pytest.raises(ValueError):
            synth_gaussian_mixture([10], 1, 1.0, seed=0, per_class_test=5)


class TestDownsample:
    def _dataset(self):
        train, _ = synth_gaussian_mixture([100, 100], 3, 2.0, seed=5, per_class_test=1)
        return train

    def test_identity_when_counts_match(self):
        data = self._dataset()
        out = downsample_to_profile(data, [100, 100], seed=9)
        np.testing.assert_array_equal(out.features, data.features)
        np.testing.assert_array_equal(out.labels, data.labels)

    def test_cardinalities(self):
        out = downsample_to_profile(self._dataset(), [100, 10], seed=9)
        np.testing.assert_array_equal(out.class_counts, [100, 10])

    def test_rows_come_from_source(self):
        data = self._dataset()
        out = downsample_to_profile(data, [17, 5], seed=1)
        source_rows = {tuple(row) for row in data.features}
        assert all(tuple(row) in source_rows for row in out.features)

    def test_different_seeds_different_subsets_same_counts(self):
        data = self._dataset()
        a = downsample_to_profile(data, [50, 50], seed=1)
        b = downsample_to_profile(data, [50, 50], seed=2)
        np.testing.assert_array_equal(a.class_counts, b.class_counts)
        rows_a = {tuple(r) for r in a.features}
        rows_b = {tuple(r) for r in b.features}
        assert rows_a != rows_b

    def test_overdraw_names_the_class(self):
        with pytest.raises(ValueError, match="class 1"):
            downsample_to_profile(self._dataset(), [50, 101], seed=0)


class TestSubsetTags:
    def test_spec_thresholds(self):
        tags = subset_tags([5000, 50, 5])
        assert tags.tags == (MANY, MEDIUM, FEW)

    def test_boundaries_inclusive_on_medium(self):
        assert subset_tags([100]).tags == (MEDIUM,)
        assert subset_tags([101]).tags == (MANY,)
        assert subset_tags([20]).tags == (MEDIUM,)
        assert subset_tags([19]).tags == (FEW,)

    def test_custom_thresholds(self):
        tags = subset_tags([30, 10, 2], many_thresh=20, few_thresh=5)
        assert tags.tags == (MANY, MEDIUM, FEW)

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError):
            subset_tags([10], many_thresh=5, few_thresh=20)

    def test_classes_tagged_lookup(self):
        tags = subset_tags([5000, 50, 5, 5000])
        np.testing.assert_array_equal(tags.classes_tagged(MANY), [0, 3])
        np.testing.assert_array_equal(tags.classes_tagged(FEW), [2])


class TestDiskFormat:
    def test_round_trip_is_exact(self, tmp_path):
        train, _ = synth_gaussian_mixture([7, 3], 4, 1.5, seed=13, per_class_test=1)
        path = tmp_path / "train.csv"
        save_dataset(train, str(path))
        loaded = load_dataset(str(path))
        np.testing.assert_array_equal(loaded.features, train.features)
        np.testing.assert_array_equal(loaded.labels, train.labels)
        assert loaded.num_classes == train.num_classes

    def test_header_format(self, tmp_path):
        train, _ = synth_gaussian_mixture([2, 2], 3, 1.0, seed=1, per_class_test=1)
        path = tmp_path / "d.csv"
        save_dataset(train, str(path))
        header = path.read_text().splitlines()[0]
        assert header == "longtail-csv v1, C=2, d=3"

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            load_dataset("/nonexistent/nope.csv")

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("something-else v9, C=2, d=2\n0,1.0,2.0\n")
        with pytest.raises(ValueError):
            load_dataset(str(path))

    def test_bad_row_width_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("longtail-csv v1, C=2, d=2\n0,1.0\n")
        with pytest.raises(ValueError, match=":2"):
            load_dataset(str(path))


class TestLabeledDataset:
    def test_label_range_validated(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((2, 2)), np.array([0, 5]), num_classes=2)

    def test_non_finite_features_rejected(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.array([[np.inf, 0.0]]), np.array([0]), num_classes=1)
