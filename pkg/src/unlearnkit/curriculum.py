"""Forgetting-difficulty scores and easy-to-hard curriculum plans.

A plan splits the forget set into disjoint criteria ordered by increasing mean
difficulty; the union of the criteria is the whole forget set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import LabeledDataset
from .nncore import MlpArchitecture, log_softmax, forward

MEASURES = ("confidence", "loss")
STRATEGIES = ("equal_size", "quantile")


@dataclass(frozen=True)
class DifficultyScores:
    ids: np.ndarray
    scores: np.ndarray
    measure: str = "confidence"

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        scores = np.asarray(self.scores, dtype=np.float64)
        if ids.shape != scores.shape or ids.ndim != 1:
            raise ValueError("ids and scores must be 1-D arrays of equal length")
        if np.unique(ids).size != ids.size:
            raise ValueError("duplicate ids in difficulty scores")
        if not np.all(np.isfinite(scores)):
            raise ValueError("difficulty scores must be finite")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.ids.size

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(s) for i, s in zip(self.ids, self.scores)}

    @classmethod
    def from_mapping(cls, mapping: dict, measure: str = "confidence") -> "DifficultyScores":
        ids = list(mapping)
        return cls(np.array(ids, dtype=np.int64), np.array([mapping[i] for i in ids], dtype=np.float64), measure)


@dataclass(frozen=True)
class CurriculumPlan:
    criteria: list[np.ndarray]
    mean_scores: list[float]
    measure: str = "confidence"
    strategy: str = "equal_size"

    def __len__(self) -> int:
        return len(self.criteria)

    def to_json(self) -> str:
        return json.dumps(
            {
                "criteria": [[int(i) for i in c] for c in self.criteria],
                "mean_scores": [float(m) for m in self.mean_scores],
                "measure": self.measure,
                "strategy": self.strategy,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CurriculumPlan":
        d = json.loads(text)
        return cls(
            [np.asarray(c, dtype=np.int64) for c in d["criteria"]],
            [float(m) for m in d["mean_scores"]],
            d.get("measure", "confidence"),
            d.get("strategy", "equal_size"),
        )


def difficulty_scores(
    arch: MlpArchitecture, params_star: np.ndarray, ds: LabeledDataset, forget_ids, measure: str = "confidence"
) -> DifficultyScores:
    """Score every forget sample under the trained model in one inference pass.

    ``confidence`` is the softmax probability of the true class (low means
    easy to forget); ``loss`` is the per-sample cross-entropy.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown difficulty measure {measure!r}; expected one of {MEASURES}")
    forget_ids = np.asarray(forget_ids, dtype=np.int64)
    if forget_ids.size == 0:
        raise ValueError("forget set is empty")
    x, y = ds.take(forget_ids)
    logp = log_softmax(forward(arch, params_star, x))[np.arange(y.size), y]
    scores = np.exp(logp) if measure == "confidence" else -logp
    return DifficultyScores(forget_ids, scores, measure)


def _ascending(scores: DifficultyScores) -> np.ndarray:
    # primary key score, ties by ascending id
    return np.lexsort((scores.ids, scores.scores))


def build_plan(scores: DifficultyScores, n: int, strategy: str = "equal_size") -> CurriculumPlan:
    """Partition the scored forget set into ``n`` criteria, easiest first.

    ``equal_size`` cuts the ascending queue into chunks of ``len // n`` with the
    remainder handed to the earliest chunks. ``quantile`` cuts at the score
    quantiles ``i/n``; buckets left empty by tied scores are dropped, so the
    plan may be shorter than ``n``.
    """
    m = len(scores)
    if not 1 <= n <= m:
        raise ValueError(f"number of criteria must lie in [1, {m}], got {n}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown plan strategy {strategy!r}; expected one of {STRATEGIES}")
    order = _ascending(scores)
    ids = scores.ids[order]
    vals = scores.scores[order]
    if strategy == "equal_size":
        base, extra = divmod(m, n)
        sizes = [base + (1 if i < extra else 0) for i in range(n)]
        bounds = np.cumsum([0] + sizes)
        groups = [(bounds[i], bounds[i + 1]) for i in range(n)]
    else:
        cuts = np.quantile(vals, np.arange(1, n) / n)
        bucket = np.searchsorted(cuts, vals, side="left")
        groups = []
        for b in range(n):
            pos = np.flatnonzero(bucket == b)
            if pos.size:
                groups.append((pos[0], pos[-1] + 1))
    criteria = [ids[a:b].copy() for a, b in groups]
    means = [float(vals[a:b].mean()) for a, b in groups]
    return CurriculumPlan(criteria, means, scores.measure, strategy)


MEAN_RTOL = 1e-12


def validate_plan(plan: CurriculumPlan, forget_ids, scores: DifficultyScores | None = None) -> list[str]:
    """Every way ``plan`` fails to be a curriculum over ``forget_ids``; empty if none.

    Checks pairwise disjointness, completeness (union equals the forget set) and
    non-decreasing per-criterion mean score (up to ``MEAN_RTOL`` of summation
    rounding). Means are recomputed from
    ``scores`` when given, otherwise the plan's stored means are used.
    """
    problems: list[str] = []
    target = set(int(i) for i in np.asarray(forget_ids).ravel())
    seen: dict[int, int] = {}
    for ci, crit in enumerate(plan.criteria):
        if len(crit) == 0:
            problems.append(f"criterion {ci} is empty")
        for i in crit:
            i = int(i)
            if i in seen:
                problems.append(f"disjointness: id {i} appears in criteria {seen[i]} and {ci}")
            else:
                seen[i] = ci
    for i in sorted(target - seen.keys()):
        problems.append(f"completeness: forget id {i} is not covered by any criterion")
    for i in sorted(seen.keys() - target):
        problems.append(f"completeness: id {i} is not in the forget set")

    if scores is not None:
        lookup = scores.as_dict()
        means = []
        for crit in plan.criteria:
            vals = [lookup[int(i)] for i in crit if int(i) in lookup]
            means.append(float(np.mean(vals)) if vals else float("nan"))
    else:
        means = list(plan.mean_scores)
        if len(means) != len(plan.criteria):
            problems.append("plan has a different number of mean scores and criteria")
            return problems
    for ci in range(len(means) - 1):
        # a mean of equal values can round one ulp either way; allow for it
        slack = MEAN_RTOL * max(1.0, abs(means[ci]), abs(means[ci + 1]))
        if means[ci] - means[ci + 1] > slack:
            problems.append(
                f"monotonicity: criterion {ci} mean {means[ci]:.6g} exceeds criterion {ci + 1} mean {means[ci + 1]:.6g}"
            )
    return problems


@dataclass
class ScoreHistogram:
    edges: np.ndarray
    counts: np.ndarray

    def to_csv(self) -> str:
        lines = ["bin,left,right,count"]
        for i, c in enumerate(self.counts):
            lines.append(f"{i},{self.edges[i]!r},{self.edges[i + 1]!r},{int(c)}")
        return "\n".join(lines) + "\n"


def export_score_histogram(scores: DifficultyScores, bins: int) -> ScoreHistogram:
    """Histogram over ``[min, max]`` with right-closed bins ``(a, b]``; the first bin also holds ``min``."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    vals = scores.scores
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 0.0)
    edges = np.linspace(lo, hi, bins + 1)
    which = np.clip(np.searchsorted(edges, vals, side="left") - 1, 0, bins - 1)
    counts = np.bincount(which, minlength=bins)
    return ScoreHistogram(edges, counts)
