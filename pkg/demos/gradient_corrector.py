"""The corrector on hand-made vectors, then how often it fires during a real
run as the threshold grows."""

import math

import numpy as np

from unlearnkit.data import make_blobs, split_random
from unlearnkit.nncore import MlpArchitecture, init_params
from unlearnkit.train import TrainHyper, train_erm
from unlearnkit.unlearn import UnlearnConfig, correct_gradient, gradient_angle, unlearn_ufg

g_r = np.array([1.0, 0.0])
for deg in (30, 60, 90, 150):
    g_f = np.array([math.cos(math.radians(deg)), math.sin(math.radians(deg))])
    step, fired = correct_gradient(g_r, g_f, math.pi / 3)
    print(f"angle {math.degrees(gradient_angle(g_f, g_r)):5.1f} deg  fired={fired!s:5s}  step={step.round(4)}")

# when it fires with |g_r| <= |g_f| the step no longer descends on the forget set
step, _ = correct_gradient(g_r, np.array([1.0, 1.0]), math.pi / 3)
print("step . g_f =", float(step @ np.array([1.0, 1.0])))

ds = make_blobs(300, 3, 2, 0.35, seed=0)
arch = MlpArchitecture((2, 32, 3))
params, _ = train_erm(arch, init_params(arch, 0), ds, TrainHyper(0.1, 50, 32, 1))
split = split_random(ds, 0.1, seed=2)

for k in range(0, 7):
    gamma = k * math.pi / 12
    _, trace = unlearn_ufg(arch, params, ds, split, UnlearnConfig("ufg", gamma=gamma))
    fired = sum(r.corrections_fired for r in trace.records)
    total = sum(len(r.angles) for r in trace.records)
    print(f"gamma {k:d}pi/12: {fired:3d} of {total} steps corrected, forget loss {trace.records[-1].forget_loss:.4f}")
