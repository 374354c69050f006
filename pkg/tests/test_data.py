import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unlearnkit.data import (
    CsvFormatError,
    ForgetSplit,
    LabeledDataset,
    forget_count,
    load_csv,
    make_blobs,
    save_csv,
    split_classwise,
    split_random,
)


@pytest.fixture
def blobs():
    return make_blobs(10, 3, 2, 0.3, seed=1)


class TestBlobs:
    def test_sizes_and_balance(self, blobs):
        assert len(blobs) == 30
        assert blobs.class_counts().tolist() == [10, 10, 10]
        assert blobs.ids.tolist() == list(range(30))

    def test_deterministic(self):
        a, b = make_blobs(20, 4, 3, 0.5, 9), make_blobs(20, 4, 3, 0.5, 9)
        assert a.features.tobytes() == b.features.tobytes()
        assert a.labels.tobytes() == b.labels.tobytes()

    def test_zero_spread_hits_means(self):
        ds = make_blobs(5, 4, 2, 0.0, 3)
        for k in range(4):
            rows = ds.features[ds.labels == k]
            angle = 2 * np.pi * k / 4
            np.testing.assert_allclose(rows, np.tile([np.cos(angle), np.sin(angle)], (5, 1)))

    def test_means_on_unit_circle(self):
        ds = make_blobs(2, 5, 3, 0.0, 0)
        np.testing.assert_allclose(np.linalg.norm(ds.features, axis=1), 1.0)

    def test_one_feature(self):
        ds = make_blobs(1, 3, 1, 0.0, 0)
        assert ds.features.ravel().tolist() == [-1.0, 0.0, 1.0]

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            make_blobs(0, 3, 2, 0.1, 0)


class TestDataset:
    def test_mismatched_rows(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((3, 2)), np.zeros(2, dtype=int))

    def test_immutable(self, blobs):
        with pytest.raises(ValueError):
            blobs.features[0, 0] = 5.0

    def test_subset(self, blobs):
        sub = blobs.subset([0, 29])
        assert len(sub) == 2 and sub.n_classes == 3
        assert sub.labels.tolist() == [0, 2]


class TestCsv:
    def test_round_trip(self, tmp_path):
        ds = LabeledDataset(np.array([[0.1, 2.5], [-1.0, 1e-17], [3.0, 4.0]]), np.array([0, 1, 1]))
        for header in (False, True):
            path = tmp_path / f"d{header}.csv"
            save_csv(ds, path, header=header)
            back = load_csv(path, header=header)
            assert np.array_equal(back.features, ds.features)
            assert np.array_equal(back.labels, ds.labels)
            assert back.n_classes == 2

    def test_class_count_from_max_label(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0.0,0\n1.0,1\n2.0,5\n")
        assert load_csv(path).n_classes == 6

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0.0,1.0,0\n1.0,abc,1\n")
        with pytest.raises(CsvFormatError, match=r"row 2, column 2"):
            load_csv(path)

    def test_bad_label(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0.0,1.5\n")
        with pytest.raises(CsvFormatError, match=r"row 1, column 2"):
            load_csv(path)

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0.0,1.0,0\n1.0,1\n")
        with pytest.raises(CsvFormatError, match=r"row 2"):
            load_csv(path)


class TestSplits:
    def test_random_counts(self):
        ds = make_blobs(50, 2, 2, 0.3, 0)
        split = split_random(ds, 0.1, seed=3)
        assert split.forget_ids.size == 10
        assert split.is_partition_of(100)

    def test_random_half_of_ten(self):
        ds = make_blobs(5, 2, 2, 0.3, 0)
        assert split_random(ds, 0.5, 0).forget_ids.size == 5

    def test_rounding_half_up(self):
        assert forget_count(0.25, 10) == 3
        assert forget_count(0.15, 10) == 2
        assert forget_count(0.5, 3) == 2

    def test_random_deterministic(self, blobs):
        assert np.array_equal(split_random(blobs, 0.3, 4).forget_ids, split_random(blobs, 0.3, 4).forget_ids)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_random_fraction_range(self, blobs, fraction):
        with pytest.raises(ValueError):
            split_random(blobs, fraction, 0)

    def test_classwise(self, blobs):
        split = split_classwise(blobs, 1)
        assert split.forget_ids.size == 10
        assert not np.any(blobs.labels[split.retain_ids] == 1)
        assert np.all(blobs.labels[split.forget_ids] == 1)
        again = split_classwise(blobs, 1)
        assert np.array_equal(split.forget_ids, again.forget_ids)

    def test_classwise_errors(self, blobs):
        with pytest.raises(ValueError):
            split_classwise(blobs, 7)
        single = LabeledDataset(np.zeros((4, 2)), np.zeros(4, dtype=int))
        with pytest.raises(ValueError):
            split_classwise(single, 0)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            ForgetSplit(np.array([1, 2]), np.array([2, 3]))

    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(2, 200), fraction=st.floats(0.01, 0.99), seed=st.integers(0, 2**32 - 1))
    def test_random_split_partitions(self, n, fraction, seed):
        ds = LabeledDataset(np.zeros((n, 1)), np.arange(n) % 3)
        split = split_random(ds, fraction, seed)
        assert split.is_partition_of(n)
        assert split.forget_ids.size == forget_count(fraction, n)

    @settings(max_examples=50, deadline=None)
    @given(labels=st.lists(st.integers(0, 4), min_size=2, max_size=60), pick=st.integers(0, 100))
    def test_classwise_partitions(self, labels, pick):
        labels = np.array(labels)
        present = np.unique(labels)
        if present.size < 2:
            return
        cls = int(present[pick % present.size])
        ds = LabeledDataset(np.zeros((labels.size, 1)), labels)
        split = split_classwise(ds, cls)
        assert split.is_partition_of(labels.size)
        assert set(labels[split.forget_ids]) == {cls}
