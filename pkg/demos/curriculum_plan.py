"""Score forget samples by difficulty, split them into criteria and print
the plan together with a score histogram."""

import numpy as np

from unlearnkit.curriculum import build_plan, difficulty_scores, export_score_histogram, validate_plan
from unlearnkit.data import make_blobs, split_random
from unlearnkit.nncore import MlpArchitecture, init_params
from unlearnkit.train import TrainHyper, train_erm

ds = make_blobs(300, 3, 2, 0.6, seed=5)
arch = MlpArchitecture((2, 16, 3))
params, _ = train_erm(arch, init_params(arch, 0), ds, TrainHyper(0.1, 40, 32, 0))
split = split_random(ds, 0.2, seed=1)

for measure in ("confidence", "loss"):
    scores = difficulty_scores(arch, params, ds, split.forget_ids, measure)
    for strategy in ("equal_size", "quantile"):
        plan = build_plan(scores, 4, strategy)
        sizes = [len(c) for c in plan.criteria]
        means = ", ".join(f"{m:.3f}" for m in plan.mean_scores)
        print(f"{measure:10s} {strategy:10s} sizes={sizes} means=[{means}] problems={validate_plan(plan, split.forget_ids, scores)}")

scores = difficulty_scores(arch, params, ds, split.forget_ids)
hist = export_score_histogram(scores, 10)
width = 50 / max(hist.counts)
for left, right, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
    print(f"({left:.3f}, {right:.3f}] {count:4d} {'#' * round(count * width)}")

hardest = scores.ids[np.argsort(scores.scores)[:3]]
print("three least confident forget samples:", hardest.tolist())
