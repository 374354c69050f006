"""Train a small classifier on blobs, forget 10% of it four ways, and compare
each result with retraining from scratch."""

import numpy as np

from unlearnkit.curriculum import build_plan, difficulty_scores
from unlearnkit.data import make_blobs, split_random
from unlearnkit.evaluation import avg_gap, evaluate
from unlearnkit.nncore import MlpArchitecture, init_params
from unlearnkit.train import TrainHyper, retrain, train_erm
from unlearnkit.unlearn import UnlearnConfig, run_method

ds = make_blobs(1000, 3, 2, 0.35, seed=0)
test = make_blobs(300, 3, 2, 0.35, seed=10001)
arch = MlpArchitecture((2, 32, 3))
hyper = TrainHyper(eta=0.1, epochs=100, batch_size=32, shuffle_seed=1)

params_star, curve = train_erm(arch, init_params(arch, 0), ds, hyper)
print(f"original model: final train loss {curve[-1]:.4f}")

split = split_random(ds, 0.1, seed=2)
print(f"forget {split.forget_ids.size} samples, keep {split.retain_ids.size}")

params_ref = retrain(arch, 0, split, ds, hyper)
ref = evaluate(arch, params_ref, ds, split, test, "retrain", 0, attack_seed=3)

scores = difficulty_scores(arch, params_star, ds, split.forget_ids)
plan = build_plan(scores, 2)

print(f"{'method':8s} {'UA':>6s} {'RA':>6s} {'TA':>6s} {'MIA':>6s} {'gap':>6s}")
print(f"{'retrain':8s} {ref.ua:6.2f} {ref.ra:6.2f} {ref.ta:6.2f} {ref.mia:6.2f} {0:6.2f}")
for method, eta, epochs in [("ft", 0.01, 10), ("ga", 0.1, 5), ("ufg", 0.01, 10), ("cufg", 0.01, 10)]:
    cfg = UnlearnConfig(method, eta=eta, epochs=epochs, shuffle_seed=4)
    params_u, trace = run_method(arch, params_star, ds, split, cfg, plan=plan, reference=params_ref)
    rep = evaluate(arch, params_u, ds, split, test, method, 0, attack_seed=3)
    print(
        f"{method:8s} {rep.ua:6.2f} {rep.ra:6.2f} {rep.ta:6.2f} {rep.mia:6.2f} {avg_gap(rep, ref).avg_gap:6.2f}"
        f"   cos to retrain {trace.records[-1].cos_sim_to_reference:.5f}"
    )

print("weights moved by unlearning (L2):", np.linalg.norm(params_u - params_star).round(4))
