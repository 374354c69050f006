"""Datasets, CSV ingestion and forget/retain splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus integer labels; sample ids are the row indices."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int = -1

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {x.shape}")
        y = np.asarray(self.labels, dtype=np.int64)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError(f"{x.shape[0]} feature rows but labels of shape {y.shape}")
        if y.size and y.min() < 0:
            raise ValueError("labels must be non-negative")
        n_classes = int(self.n_classes)
        if n_classes < 0:
            n_classes = int(y.max()) + 1 if y.size else 0
        elif y.size and y.max() >= n_classes:
            raise ValueError(f"label {int(y.max())} out of range for {n_classes} classes")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "n_classes", n_classes)

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self), dtype=np.int64)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, ids) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``ids`` as ``(features, labels)``.

        All row access by training and unlearning code goes through here.
        """
        ids = np.asarray(ids, dtype=np.int64)
        return self.features[ids], self.labels[ids]

    def subset(self, ids) -> "LabeledDataset":
        x, y = self.take(ids)
        return LabeledDataset(x, y, self.n_classes)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def make_blobs(n_per_class: int, n_classes: int, n_features: int, spread: float, seed: int) -> LabeledDataset:
    """Isotropic Gaussian clusters with fixed class means at unit radius.

    Class ``k`` is centred at angle ``2*pi*k/n_classes`` on the unit circle
    spanned by the first two feature axes (remaining axes have mean 0). With a
    single feature the means are spread evenly over ``[-1, 1]``. Samples are
    ordered by class.
    """
    if n_per_class <= 0 or n_classes <= 0 or n_features <= 0:
        raise ValueError("n_per_class, n_classes and n_features must be positive")
    if spread < 0:
        raise ValueError("spread must be non-negative")
    means = np.zeros((n_classes, n_features))
    if n_features == 1:
        means[:, 0] = np.linspace(-1.0, 1.0, n_classes) if n_classes > 1 else 0.0
    else:
        angles = 2.0 * np.pi * np.arange(n_classes) / n_classes
        means[:, 0] = np.cos(angles)
        means[:, 1] = np.sin(angles)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n_classes * n_per_class, n_features))
    labels = np.repeat(np.arange(n_classes), n_per_class)
    features = means[labels] + spread * noise
    return LabeledDataset(features, labels, n_classes)


class CsvFormatError(ValueError):
    pass


def load_csv(path, header: bool = False) -> LabeledDataset:
    """Read ``feature,...,feature,label`` rows; the row order defines the ids.

    The class count is ``max label + 1``.
    """
    rows_x: list[list[float]] = []
    rows_y: list[int] = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise CsvFormatError(f"{path}: row {lineno}: need at least one feature and a label")
            elif len(row) != width:
                raise CsvFormatError(f"{path}: row {lineno}: expected {width} columns, found {len(row)}")
            values = []
            for col, cell in enumerate(row[:-1], start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvFormatError(f"{path}: row {lineno}, column {col}: not a number: {cell!r}") from None
            label_cell = row[-1].strip()
            try:
                label = int(label_cell)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: row {lineno}, column {width}: label is not an integer: {label_cell!r}"
                ) from None
            if label < 0:
                raise CsvFormatError(f"{path}: row {lineno}, column {width}: negative label {label}")
            rows_x.append(values)
            rows_y.append(label)
    if not rows_y:
        raise CsvFormatError(f"{path}: no data rows")
    return LabeledDataset(np.array(rows_x, dtype=np.float64), np.array(rows_y, dtype=np.int64))


def save_csv(ds: LabeledDataset, path, header: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow([f"x{i}" for i in range(ds.n_features)] + ["label"])
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


@dataclass(frozen=True)
class ForgetSplit:
    forget_ids: np.ndarray
    retain_ids: np.ndarray
    scenario: str = "custom"
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.sort(np.asarray(self.forget_ids, dtype=np.int64))
        r = np.sort(np.asarray(self.retain_ids, dtype=np.int64))
        if np.intersect1d(f, r).size:
            raise ValueError("forget and retain ids overlap")
        object.__setattr__(self, "forget_ids", f)
        object.__setattr__(self, "retain_ids", r)

    def is_partition_of(self, n: int) -> bool:
        both = np.concatenate([self.forget_ids, self.retain_ids])
        return both.size == n and np.array_equal(np.sort(both), np.arange(n))

    @classmethod
    def from_forget(cls, n: int, forget_ids, scenario: str = "custom", **detail) -> "ForgetSplit":
        forget_ids = np.unique(np.asarray(forget_ids, dtype=np.int64))
        if forget_ids.size and (forget_ids[0] < 0 or forget_ids[-1] >= n):
            raise ValueError("forget id out of range")
        retain = np.setdiff1d(np.arange(n, dtype=np.int64), forget_ids)
        return cls(forget_ids, retain, scenario, dict(detail))


def forget_count(fraction: float, n: int) -> int:
    """``round(fraction * n)`` with halves rounded up."""
    return int(math.floor(fraction * n + 0.5))


def split_random(ds: LabeledDataset, fraction: float, seed: int) -> ForgetSplit:
    """Forget a uniformly drawn ``fraction`` of the samples (across classes)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"forget fraction must lie in (0, 1), got {fraction}")
    n = len(ds)
    k = forget_count(fraction, n)
    rng = np.random.default_rng(seed)
    forget = rng.choice(n, size=k, replace=False)
    return ForgetSplit.from_forget(n, forget, "random_data", fraction=fraction)


def split_classwise(ds: LabeledDataset, class_index: int) -> ForgetSplit:
    """Forget every sample of one class."""
    mask = ds.labels == class_index
    if not mask.any():
        raise ValueError(f"class {class_index} does not occur in the dataset")
    if mask.all():
        raise ValueError(f"class {class_index} is the only class; the retained set would be empty")
    return ForgetSplit.from_forget(len(ds), np.flatnonzero(mask), "class_wise", class_index=int(class_index))
