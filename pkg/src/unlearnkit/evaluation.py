"""Unlearning metrics: UA, RA, TA, MIA, runtime, and the average gap to Retrain."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .data import LabeledDataset
from .nncore import MlpArchitecture, init_params, log_softmax, forward, predict
from .train import TrainHyper, train_erm

GAP_METRICS = ("ua", "ra", "ta", "mia")


def accuracy(arch: MlpArchitecture, params: np.ndarray, ds: LabeledDataset, ids) -> float:
    """Percentage of ``ids`` whose argmax prediction (ties to lowest class) matches the label."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("accuracy over an empty id set")
    x, y = ds.take(ids)
    return 100.0 * np.count_nonzero(predict(arch, params, x) == y) / ids.size


def compute_ua(arch: MlpArchitecture, params: np.ndarray, ds: LabeledDataset, forget_ids) -> float:
    """Unlearning accuracy: ``100 - accuracy`` on the forget set."""
    return 100.0 - accuracy(arch, params, ds, forget_ids)


# --- membership inference -------------------------------------------------


def attack_features(arch: MlpArchitecture, params: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Softmax vector sorted in descending order, followed by the cross-entropy loss."""
    logp = log_softmax(forward(arch, params, x))
    probs = -np.sort(-np.exp(logp), axis=1)
    loss = -logp[np.arange(len(y)), y]
    return np.column_stack([probs, loss])


@dataclass
class AttackSet:
    features: np.ndarray
    is_member: np.ndarray

    @property
    def n_members(self) -> int:
        return int(self.is_member.sum())

    @property
    def n_nonmembers(self) -> int:
        return int(self.is_member.size - self.is_member.sum())


def build_attack_set(member_features: np.ndarray, nonmember_features: np.ndarray, seed: int) -> AttackSet:
    """Balanced member/non-member set; the larger pool is subsampled without replacement."""
    n_m, n_n = len(member_features), len(nonmember_features)
    if n_m == 0 or n_n == 0:
        raise ValueError("membership pools must both be non-empty")
    if member_features.shape[1] != nonmember_features.shape[1]:
        raise ValueError("member and non-member features have different widths")
    k = min(n_m, n_n)
    rng = np.random.default_rng([seed, 0])
    if n_m > k:
        member_features = member_features[np.sort(rng.choice(n_m, size=k, replace=False))]
    if n_n > k:
        nonmember_features = nonmember_features[np.sort(rng.choice(n_n, size=k, replace=False))]
    feats = np.vstack([member_features, nonmember_features])
    labels = np.concatenate([np.ones(k, dtype=np.int64), np.zeros(k, dtype=np.int64)])
    return AttackSet(feats, labels)


@dataclass
class LogisticAttack:
    """Binary logistic classifier (member = 1) on standardised attack features."""

    mean: np.ndarray
    scale: np.ndarray
    params: np.ndarray
    arch: MlpArchitecture

    @classmethod
    def fit(cls, data: AttackSet, seed: int, eta: float = 0.1, epochs: int = 30, batch_size: int = 64):
        mean = data.features.mean(axis=0)
        scale = data.features.std(axis=0)
        scale[scale == 0.0] = 1.0
        arch = MlpArchitecture((data.features.shape[1], 2))
        z = (data.features - mean) / scale
        params, _ = train_erm(
            arch,
            init_params(arch, seed),
            LabeledDataset(z, data.is_member, 2),
            TrainHyper(eta=eta, epochs=epochs, batch_size=batch_size, shuffle_seed=seed),
        )
        return cls(mean, scale, params, arch)

    def predict_member(self, features: np.ndarray) -> np.ndarray:
        if features.shape[1] != self.mean.shape[0]:
            raise ValueError(f"attack expects {self.mean.shape[0]} features, got {features.shape[1]}")
        return predict(self.arch, self.params, (features - self.mean) / self.scale) == 1


def mia_from_predictions(is_member_pred: np.ndarray) -> float:
    """Percentage of forget samples the attack labels as non-members."""
    is_member_pred = np.asarray(is_member_pred, dtype=bool)
    if is_member_pred.size == 0:
        raise ValueError("no forget samples to attack")
    return 100.0 * np.count_nonzero(~is_member_pred) / is_member_pred.size


@dataclass
class MiaResult:
    mia: float
    attack_train_accuracy: float
    n_per_class: int


def run_mia(
    arch: MlpArchitecture,
    params_u: np.ndarray,
    member_pool: tuple[LabeledDataset, np.ndarray],
    nonmember_pool: LabeledDataset,
    forget_ids,
    attack_seed: int,
    attack_epochs: int = 30,
    attack_eta: float = 0.1,
) -> MiaResult:
    ds, retain_ids = member_pool
    retain_ids = np.asarray(retain_ids, dtype=np.int64)
    forget_ids = np.asarray(forget_ids, dtype=np.int64)
    if retain_ids.size == 0 or len(nonmember_pool) == 0:
        raise ValueError("membership pools must both be non-empty")
    if forget_ids.size == 0:
        raise ValueError("forget set is empty")
    xm, ym = ds.take(retain_ids)
    xn, yn = nonmember_pool.take(nonmember_pool.ids)
    data = build_attack_set(
        attack_features(arch, params_u, xm, ym), attack_features(arch, params_u, xn, yn), attack_seed
    )
    attack = LogisticAttack.fit(data, attack_seed, eta=attack_eta, epochs=attack_epochs)
    train_acc = 100.0 * float(np.mean(attack.predict_member(data.features) == (data.is_member == 1)))
    xf, yf = ds.take(forget_ids)
    mia = mia_from_predictions(attack.predict_member(attack_features(arch, params_u, xf, yf)))
    return MiaResult(mia, train_acc, data.n_members)


def mia_score(
    arch: MlpArchitecture,
    params_u: np.ndarray,
    member_pool: tuple[LabeledDataset, np.ndarray],
    nonmember_pool: LabeledDataset,
    forget_ids,
    attack_seed: int,
    **attack_kw,
) -> float:
    return run_mia(arch, params_u, member_pool, nonmember_pool, forget_ids, attack_seed, **attack_kw).mia


# --- reports ----------------------------------------------------------------


@dataclass
class MetricsReport:
    method: str
    seed: int
    ua: float
    ra: float
    ta: float
    mia: float
    rte_seconds: float = 0.0

    def __post_init__(self):
        for name in GAP_METRICS:
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name} must be a percentage, got {v}")
        if self.rte_seconds < 0:
            raise ValueError("runtime cannot be negative")

    def to_dict(self, include_rte: bool = True) -> dict:
        d = asdict(self)
        if not include_rte:
            d.pop("rte_seconds")
        return d


@dataclass
class GapReport:
    method: str
    reference: str
    ua: float
    ra: float
    ta: float
    mia: float
    avg_gap: float

    def to_dict(self) -> dict:
        return asdict(self)


def avg_gap(report: MetricsReport, reference: MetricsReport) -> GapReport:
    """Absolute per-metric differences over UA/RA/TA/MIA and their mean (runtime excluded)."""
    gaps = {m: abs(getattr(report, m) - getattr(reference, m)) for m in GAP_METRICS}
    return GapReport(report.method, reference.method, avg_gap=sum(gaps.values()) / len(gaps), **gaps)


def measure_rte(thunk: Callable[[], object]) -> tuple[float, object]:
    """Wall-clock seconds spent in ``thunk`` (monotonic clock) and its return value."""
    t0 = time.perf_counter()
    out = thunk()
    return time.perf_counter() - t0, out


def evaluate(
    arch: MlpArchitecture,
    params: np.ndarray,
    ds: LabeledDataset,
    split,
    test: LabeledDataset,
    method: str,
    seed: int,
    attack_seed: int,
    rte_seconds: float = 0.0,
    attack_epochs: int = 30,
    attack_eta: float = 0.1,
) -> MetricsReport:
    """Full metric set for one unlearned model."""
    return MetricsReport(
        method=method,
        seed=seed,
        ua=compute_ua(arch, params, ds, split.forget_ids),
        ra=accuracy(arch, params, ds, split.retain_ids),
        ta=accuracy(arch, params, test, test.ids),
        mia=mia_score(
            arch, params, (ds, split.retain_ids), test, split.forget_ids, attack_seed,
            attack_epochs=attack_epochs, attack_eta=attack_eta,
        ),
        rte_seconds=rte_seconds,
    )


def report_json(report: MetricsReport, gap: Optional[GapReport] = None) -> str:
    """Deterministic JSON for a report (runtime lives in a separate timing file)."""
    body = {"metrics": report.to_dict(include_rte=False)}
    if gap is not None:
        body["gap"] = gap.to_dict()
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
