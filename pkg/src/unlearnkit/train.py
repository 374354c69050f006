"""Mini-batch SGD training from scratch (original model and the Retrain reference)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .data import ForgetSplit, LabeledDataset
from .nncore import MlpArchitecture, apply_update, init_params, loss_and_grad


@dataclass(frozen=True)
class TrainHyper:
    eta: float = 0.1
    epochs: int = 100
    batch_size: int = 32
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def epoch_order(n: int, shuffle_seed: int, epoch: int) -> np.ndarray:
    """Sample order for one epoch; depends only on ``(shuffle_seed, epoch)``."""
    return np.random.default_rng([shuffle_seed, epoch]).permutation(n)


GradHook = Callable[[np.ndarray, np.ndarray], np.ndarray]


def sgd_epoch(
    arch: MlpArchitecture,
    params: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    eta: float,
    batch_size: int,
    shuffle_seed: int,
    epoch: int,
    hook: Optional[GradHook] = None,
    sign: float = 1.0,
) -> tuple[np.ndarray, float]:
    """One pass over ``(x, y)`` in shuffled mini-batches.

    ``hook(params, grad)`` may replace each batch gradient before the step.
    ``sign=-1`` turns descent into ascent. Returns the new parameters and the
    sample-weighted mean batch loss.
    """
    n = x.shape[0]
    order = epoch_order(n, shuffle_seed, epoch)
    total = 0.0
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        loss, grad = loss_and_grad(arch, params, x[idx], y[idx])
        total += loss * idx.size
        if hook is not None:
            grad = hook(params, grad)
        if sign < 0:
            grad = -grad
        params = apply_update(params, grad, eta)
    return params, total / n


def train_erm(
    arch: MlpArchitecture, init: np.ndarray, ds: LabeledDataset, h: TrainHyper
) -> tuple[np.ndarray, list[float]]:
    """Empirical risk minimisation by SGD from ``init``; returns params and per-epoch loss."""
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    x, y = ds.take(ds.ids)
    params = np.array(init, dtype=np.float64)
    curve = []
    for epoch in range(h.epochs):
        params, mean_loss = sgd_epoch(arch, params, x, y, h.eta, h.batch_size, h.shuffle_seed, epoch)
        curve.append(mean_loss)
    return params, curve


def retrain(
    arch: MlpArchitecture, seed: int, split: ForgetSplit, ds: LabeledDataset, h: TrainHyper
) -> np.ndarray:
    """Gold-standard unlearning: train from the seed's initial weights on the retained rows only."""
    if split.retain_ids.size == 0:
        raise ValueError("retained set is empty; nothing to retrain on")
    params, _ = train_erm(arch, init_params(arch, seed), ds.subset(split.retain_ids), h)
    return params


def save_checkpoint(path, arch: MlpArchitecture, seed: int, params: np.ndarray) -> None:
    # 17 significant digits round-trip every float64 exactly
    body = ",".join(format(float(v), ".17g") for v in params)
    arch_json = json.dumps(arch.to_dict(), sort_keys=True)
    Path(path).write_text(f'{{"arch": {arch_json}, "params": [{body}], "seed": {int(seed)}}}\n')


def load_checkpoint(path) -> tuple[MlpArchitecture, int, np.ndarray]:
    d = json.loads(Path(path).read_text())
    arch = MlpArchitecture.from_dict(d["arch"])
    params = np.asarray(d["params"], dtype=np.float64)
    if params.shape != (arch.n_params,):
        raise ValueError(f"checkpoint holds {params.size} parameters, architecture needs {arch.n_params}")
    return arch, int(d["seed"]), params
