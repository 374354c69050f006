import numpy as np
import pytest

from unlearnkit.data import ForgetSplit, LabeledDataset, make_blobs, split_random
from unlearnkit.nncore import MlpArchitecture, init_params, predict
from unlearnkit.train import TrainHyper, load_checkpoint, retrain, save_checkpoint, train_erm

ARCH = MlpArchitecture((2, 8, 2))


@pytest.fixture(scope="module")
def separable():
    # two well separated clusters at (1, 0) and (-1, 0)
    return make_blobs(40, 2, 2, 0.1, seed=0)


class CountingDataset(LabeledDataset):
    """Records every id passed to ``take``."""

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "seen", [])

    def take(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        self.seen.extend(ids.tolist())
        return super().take(ids)


def test_hyper_validation():
    with pytest.raises(ValueError):
        TrainHyper(epochs=0)
    with pytest.raises(ValueError):
        TrainHyper(eta=0.0)
    with pytest.raises(ValueError):
        TrainHyper(batch_size=0)


def test_separable_blobs_reach_full_accuracy(separable):
    params, curve = train_erm(ARCH, init_params(ARCH, 0), separable, TrainHyper(0.1, 50, 16, 0))
    assert np.mean(predict(ARCH, params, separable.features) == separable.labels) == 1.0
    assert len(curve) == 50 and np.all(np.isfinite(curve))
    assert curve[-1] < curve[0]


def test_training_is_deterministic(separable):
    h = TrainHyper(0.1, 5, 7, 3)
    a, ca = train_erm(ARCH, init_params(ARCH, 1), separable, h)
    b, cb = train_erm(ARCH, init_params(ARCH, 1), separable, h)
    assert a.tobytes() == b.tobytes() and ca == cb


def test_empty_dataset_rejected():
    ds = LabeledDataset(np.zeros((0, 2)), np.zeros(0, dtype=int), 2)
    with pytest.raises(ValueError):
        train_erm(ARCH, init_params(ARCH, 0), ds, TrainHyper())


class TestRetrain:
    h = TrainHyper(0.1, 3, 8, 2)

    def test_empty_forget_equals_full_training(self, separable):
        split = ForgetSplit(np.array([], dtype=int), separable.ids)
        full, _ = train_erm(ARCH, init_params(ARCH, 5), separable, self.h)
        assert retrain(ARCH, 5, split, separable, self.h).tobytes() == full.tobytes()

    def test_never_reads_forget_rows(self, separable):
        ds = CountingDataset(separable.features, separable.labels, separable.n_classes)
        split = split_random(ds, 0.25, 0)
        retrain(ARCH, 0, split, ds, self.h)
        assert ds.seen and not set(ds.seen) & set(split.forget_ids.tolist())

    def test_invariant_to_forget_contents(self, separable):
        split = split_random(separable, 0.25, 0)
        x = separable.features.copy()
        x[split.forget_ids] = 1e6
        poisoned = LabeledDataset(x, separable.labels, separable.n_classes)
        a = retrain(ARCH, 0, split, separable, self.h)
        b = retrain(ARCH, 0, split, poisoned, self.h)
        assert a.tobytes() == b.tobytes()

    def test_equals_definition(self, separable):
        split = split_random(separable, 0.25, 1)
        expected, _ = train_erm(ARCH, init_params(ARCH, 4), separable.subset(split.retain_ids), self.h)
        assert retrain(ARCH, 4, split, separable, self.h).tobytes() == expected.tobytes()

    def test_empty_retain_rejected(self, separable):
        split = ForgetSplit(separable.ids, np.array([], dtype=int))
        with pytest.raises(ValueError):
            retrain(ARCH, 0, split, separable, self.h)


def test_checkpoint_round_trip(tmp_path):
    arch = MlpArchitecture((3, 5, 2), "tanh")
    params = init_params(arch, 11) * np.pi
    save_checkpoint(tmp_path / "c.json", arch, 11, params)
    arch2, seed, back = load_checkpoint(tmp_path / "c.json")
    assert arch2 == arch and seed == 11
    assert back.tobytes() == params.tobytes()
