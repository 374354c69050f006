"""Approximate unlearning: fine-tuning, gradient ascent, and forgetting-gradient
corrected fine-tuning with and without a curriculum.

The corrected methods fine-tune on the retained data; before every step the
batch gradient is compared with the mean gradient of the forget set. If the
two point in similar directions (angle below ``gamma``) the step would also
re-learn the forget set, so it is replaced by the average of the retain
gradient and the negated forget gradient.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curriculum import CurriculumPlan, validate_plan
from .data import ForgetSplit, LabeledDataset
from .nncore import MlpArchitecture, cosine_similarity, loss_and_grad, unit_vector
from .train import sgd_epoch

METHODS = ("retrain", "ft", "ga", "ufg", "cufg")


class ZeroGradientError(ValueError):
    """An angle was requested with a zero-norm vector."""


@dataclass(frozen=True)
class UnlearnConfig:
    method: str = "ufg"
    eta: float = 0.01
    epochs: int = 10
    gamma: float = math.pi / 3
    n_criteria: int = 2
    batch_size: int = 32
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if not 0.0 <= self.gamma <= math.pi / 2:
            raise ValueError(f"gamma must lie in [0, pi/2], got {self.gamma}")
        if self.n_criteria < 1:
            raise ValueError(f"n_criteria must be >= 1, got {self.n_criteria}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class EpochRecord:
    epoch: int
    criterion_index: int
    retain_loss: float
    forget_loss: float
    corrections_fired: int
    cos_sim_to_reference: float
    angles: list[float] = field(default_factory=list)


@dataclass
class UnlearnTrace:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def criterion_boundaries(self) -> list[int]:
        """Epoch counts after which the criterion index changes."""
        return [
            i + 1
            for i in range(len(self.records) - 1)
            if self.records[i].criterion_index != self.records[i + 1].criterion_index
        ]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("epoch,criterion_index,retain_loss,forget_loss,corrections_fired,cos_sim_to_reference\n")
        for r in self.records:
            out.write(
                f"{r.epoch},{r.criterion_index},{r.retain_loss!r},{r.forget_loss!r},"
                f"{r.corrections_fired},{r.cos_sim_to_reference!r}\n"
            )
        return out.getvalue()


def forgetting_mean_gradient(arch: MlpArchitecture, params: np.ndarray, ds: LabeledDataset, forget_ids) -> np.ndarray:
    """Mean per-sample loss gradient over the forget set at ``params``.

    The forgetting direction is the negation of this vector; callers negate.
    Because the loss is a per-sample mean, one batched backward pass over all
    forget samples gives exactly the mean of the per-sample gradients.
    """
    # summation in ascending id order, whatever order the caller passes
    forget_ids = np.sort(np.asarray(forget_ids, dtype=np.int64))
    if forget_ids.size == 0:
        raise ValueError("forget set is empty")
    x, y = ds.take(forget_ids)
    _, grad = loss_and_grad(arch, params, x, y)
    return grad


def gradient_angle(g1, g2) -> float:
    g1 = np.asarray(g1, dtype=np.float64)
    g2 = np.asarray(g2, dtype=np.float64)
    u1, u2 = unit_vector(g1), unit_vector(g2)
    if u1 is None or u2 is None:
        raise ZeroGradientError("angle undefined for a zero-norm gradient")
    cos = float(np.dot(u1, u2))
    return math.acos(min(1.0, max(-1.0, cos)))


def _correct(g_r: np.ndarray, g_f_mean: np.ndarray, gamma: float) -> tuple[np.ndarray, bool, float]:
    if g_r.shape != g_f_mean.shape:
        raise ValueError(f"gradient length mismatch: {g_r.shape} vs {g_f_mean.shape}")
    try:
        angle = gradient_angle(g_f_mean, g_r)
    except ZeroGradientError:
        return g_r, False, float("nan")
    if angle < gamma:
        return 0.5 * (-g_f_mean + g_r), True, angle
    return g_r, False, angle


def correct_gradient(g_r, g_f_mean, gamma: float) -> tuple[np.ndarray, bool]:
    """Replace ``g_r`` by ``(-g_f_mean + g_r) / 2`` when their angle is below ``gamma``.

    Zero-norm inputs leave ``g_r`` untouched. Returns the step gradient and
    whether the correction fired.
    """
    g, fired, _ = _correct(np.asarray(g_r, dtype=np.float64), np.asarray(g_f_mean, dtype=np.float64), gamma)
    return g, fired


def _mean_loss(arch, params, ds, ids) -> float:
    if len(ids) == 0:
        return float("nan")
    x, y = ds.take(ids)
    return loss_and_grad(arch, params, x, y)[0]


def _record(arch, params, ds, split, epoch, criterion, fired, reference, angles) -> EpochRecord:
    cos = cosine_similarity(params, reference) if reference is not None else float("nan")
    return EpochRecord(
        epoch=epoch,
        criterion_index=criterion,
        retain_loss=_mean_loss(arch, params, ds, split.retain_ids),
        forget_loss=_mean_loss(arch, params, ds, split.forget_ids),
        corrections_fired=fired,
        cos_sim_to_reference=cos,
        angles=angles,
    )


def unlearn_ft(
    arch: MlpArchitecture,
    params0: np.ndarray,
    ds: LabeledDataset,
    split: ForgetSplit,
    cfg: UnlearnConfig,
    reference: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, UnlearnTrace]:
    """Plain fine-tuning on the retained data, warm-started from the trained model."""
    if split.retain_ids.size == 0:
        raise ValueError("retained set is empty")
    x, y = ds.take(split.retain_ids)
    params = np.array(params0, dtype=np.float64)
    trace = UnlearnTrace()
    for epoch in range(cfg.epochs):
        params, _ = sgd_epoch(arch, params, x, y, cfg.eta, cfg.batch_size, cfg.shuffle_seed, epoch)
        trace.records.append(_record(arch, params, ds, split, epoch, 0, 0, reference, []))
    return params, trace


def unlearn_ga(
    arch: MlpArchitecture,
    params0: np.ndarray,
    ds: LabeledDataset,
    split: ForgetSplit,
    cfg: UnlearnConfig,
    reference: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, UnlearnTrace]:
    """Gradient ascent on the forget set: ``params += eta * grad`` per mini-batch."""
    if split.forget_ids.size == 0:
        raise ValueError("forget set is empty")
    x, y = ds.take(split.forget_ids)
    params = np.array(params0, dtype=np.float64)
    trace = UnlearnTrace()
    for epoch in range(cfg.epochs):
        params, _ = sgd_epoch(arch, params, x, y, cfg.eta, cfg.batch_size, cfg.shuffle_seed, epoch, sign=-1.0)
        trace.records.append(_record(arch, params, ds, split, epoch, 0, 0, reference, []))
    return params, trace


def _corrected_epochs(arch, params, ds, split, forget_subset, cfg, epochs, first_epoch, criterion, reference, trace):
    x_r, y_r = ds.take(split.retain_ids)
    for k in range(epochs):
        epoch = first_epoch + k
        # fixed for the whole epoch, refreshed at the next one
        g_f = forgetting_mean_gradient(arch, params, ds, forget_subset)
        angles: list[float] = []
        fired = 0

        def hook(_params, g_r):
            nonlocal fired
            g, hit, angle = _correct(g_r, g_f, cfg.gamma)
            angles.append(angle)
            fired += hit
            return g

        params, _ = sgd_epoch(arch, params, x_r, y_r, cfg.eta, cfg.batch_size, cfg.shuffle_seed, epoch, hook=hook)
        trace.records.append(_record(arch, params, ds, split, epoch, criterion, fired, reference, angles))
    return params


def unlearn_ufg(
    arch: MlpArchitecture,
    params0: np.ndarray,
    ds: LabeledDataset,
    split: ForgetSplit,
    cfg: UnlearnConfig,
    reference: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, UnlearnTrace]:
    """Fine-tuning on the retained data with the forgetting-gradient corrector."""
    if split.forget_ids.size == 0 or split.retain_ids.size == 0:
        raise ValueError("both the forget and the retained set must be non-empty")
    trace = UnlearnTrace()
    params = _corrected_epochs(
        arch, np.array(params0, dtype=np.float64), ds, split, split.forget_ids, cfg, cfg.epochs, 0, 0, reference, trace
    )
    return params, trace


def unlearn_cufg(
    arch: MlpArchitecture,
    params0: np.ndarray,
    ds: LabeledDataset,
    split: ForgetSplit,
    cfg: UnlearnConfig,
    plan: CurriculumPlan,
    reference: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, UnlearnTrace]:
    """Corrected fine-tuning run criterion by criterion, easiest first.

    Each criterion gets ``cfg.epochs / len(plan)`` epochs during which the
    forget gradient is taken over that criterion's samples only.
    """
    if split.forget_ids.size == 0 or split.retain_ids.size == 0:
        raise ValueError("both the forget and the retained set must be non-empty")
    problems = validate_plan(plan, split.forget_ids)
    if problems:
        raise ValueError("invalid curriculum plan: " + "; ".join(problems[:5]))
    n = len(plan)
    if cfg.epochs % n:
        raise ValueError(f"epochs ({cfg.epochs}) must be divisible by the number of criteria ({n})")
    per = cfg.epochs // n
    params = np.array(params0, dtype=np.float64)
    trace = UnlearnTrace()
    for i, subset in enumerate(plan.criteria):
        params = _corrected_epochs(arch, params, ds, split, subset, cfg, per, i * per, i, reference, trace)
    return params, trace


def run_method(
    arch: MlpArchitecture,
    params0: np.ndarray,
    ds: LabeledDataset,
    split: ForgetSplit,
    cfg: UnlearnConfig,
    plan: Optional[CurriculumPlan] = None,
    reference: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, UnlearnTrace]:
    """Dispatch on ``cfg.method`` (``retrain`` is handled by :func:`unlearnkit.train.retrain`)."""
    if cfg.method == "ft":
        return unlearn_ft(arch, params0, ds, split, cfg, reference)
    if cfg.method == "ga":
        return unlearn_ga(arch, params0, ds, split, cfg, reference)
    if cfg.method == "ufg":
        return unlearn_ufg(arch, params0, ds, split, cfg, reference)
    if cfg.method == "cufg":
        if plan is None:
            raise ValueError("cufg needs a curriculum plan")
        return unlearn_cufg(arch, params0, ds, split, cfg, plan, reference)
    raise ValueError(f"run_method does not handle {cfg.method!r}")
