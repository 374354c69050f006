"""Forgetting a whole class. The retain gradients point away from the
class-0 gradient, so the corrector only fires once the threshold reaches
pi/2, and with batches of 32 that is still not enough to forget."""

import math

from unlearnkit.data import make_blobs, split_classwise
from unlearnkit.evaluation import accuracy, compute_ua
from unlearnkit.nncore import MlpArchitecture, init_params
from unlearnkit.train import TrainHyper, train_erm
from unlearnkit.unlearn import UnlearnConfig, unlearn_ufg

ds = make_blobs(1000, 3, 2, 0.35, seed=0)
arch = MlpArchitecture((2, 32, 3))
params, _ = train_erm(arch, init_params(arch, 0), ds, TrainHyper(0.1, 100, 32, 1))
split = split_classwise(ds, 0)

print(f"{'gamma':>8s} {'batch':>5s} {'fired':>6s} {'min angle':>9s} {'UA':>6s} {'RA':>6s}")
for gamma, batch in [(math.pi / 3, 32), (5 * math.pi / 12, 32), (math.pi / 2, 32), (math.pi / 2, 4), (math.pi / 2, 1)]:
    cfg = UnlearnConfig("ufg", gamma=gamma, batch_size=batch, shuffle_seed=3)
    p, trace = unlearn_ufg(arch, params, ds, split, cfg)
    fired = sum(r.corrections_fired for r in trace.records)
    min_angle = min(min(r.angles) for r in trace.records)
    print(
        f"{gamma:8.4f} {batch:5d} {fired:6d} {math.degrees(min_angle):8.1f}d "
        f"{compute_ua(arch, p, ds, split.forget_ids):6.2f} {accuracy(arch, p, ds, split.retain_ids):6.2f}"
    )
