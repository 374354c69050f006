"""Seeded experiment pipelines: train, unlearn with every method, evaluate, report.

Output layout::

    out_dir/
      summary.csv            per (seed, method): metrics, gaps to Retrain, Avg.Gap
      summary.md             seed-averaged table, "metric (gap)" cells
      timings.csv            runtime of each unlearning call (not reproducible)
      seed_<s>/
        split.json           forget ids
        original_checkpoint.json
        score_histogram.csv  difficulty scores of the forget set
        plan.json            curriculum plan (when cufg runs)
        <method>/report.json, trace.csv, checkpoint.json

Everything except ``timings.csv`` is a pure function of the config.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ClasswiseScenario, ConfigError, CsvSpec, ExperimentConfig, DEFAULT_GAMMA_GRID
from .curriculum import build_plan, difficulty_scores, export_score_histogram
from .data import ForgetSplit, LabeledDataset, load_csv, make_blobs, split_classwise, split_random
from .evaluation import GAP_METRICS, MetricsReport, avg_gap, evaluate, measure_rte, report_json
from .nncore import MlpArchitecture, init_params
from .train import TrainHyper, save_checkpoint, train_erm, retrain
from .unlearn import UnlearnConfig, run_method

log = logging.getLogger(__name__)

WORKERS_ENV = "UNLEARNKIT_WORKERS"

# stream tags for derive_seed
_SPLIT, _TRAIN_SHUFFLE, _UNLEARN_SHUFFLE, _ATTACK = 1, 2, 3, 4


def derive_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([seed, tag]).generate_state(1)[0])


def load_datasets(cfg: ExperimentConfig) -> tuple[LabeledDataset, LabeledDataset]:
    spec = cfg.dataset
    if isinstance(spec, CsvSpec):
        train = load_csv(spec.train_path, header=spec.header)
        test = load_csv(spec.test_path, header=spec.header)
        n_classes = max(train.n_classes, test.n_classes)
        train = LabeledDataset(train.features, train.labels, n_classes)
        test = LabeledDataset(test.features, test.labels, n_classes)
    else:
        train = make_blobs(spec.n_per_class, spec.n_classes, spec.n_features, spec.spread, spec.seed)
        test = make_blobs(spec.test_n_per_class, spec.n_classes, spec.n_features, spec.spread, spec.test_seed)
    widths = cfg.architecture.layer_widths
    if widths[0] != train.n_features or test.n_features != train.n_features:
        raise ConfigError(
            f"architecture.layer_widths: input width {widths[0]} does not match {train.n_features} dataset features"
        )
    if widths[-1] != train.n_classes:
        raise ConfigError(
            f"architecture.layer_widths: output width {widths[-1]} does not match {train.n_classes} classes"
        )
    return train, test


def make_arch(cfg: ExperimentConfig) -> MlpArchitecture:
    return MlpArchitecture(tuple(cfg.architecture.layer_widths), cfg.architecture.activation)


def make_split(cfg: ExperimentConfig, ds: LabeledDataset, seed: int) -> ForgetSplit:
    sc = cfg.scenario
    if isinstance(sc, ClasswiseScenario):
        if sc.class_index >= ds.n_classes:
            raise ConfigError(f"scenario.class_index: class {sc.class_index} not in dataset")
        return split_classwise(ds, sc.class_index)
    return split_random(ds, sc.fraction, derive_seed(seed, _SPLIT))


def train_hyper(cfg: ExperimentConfig, seed: int) -> TrainHyper:
    t = cfg.train
    return TrainHyper(t.eta, t.epochs, t.batch_size, derive_seed(seed, _TRAIN_SHUFFLE))


def unlearn_config(cfg: ExperimentConfig, method: str, seed: int) -> UnlearnConfig:
    shuffle = derive_seed(seed, _UNLEARN_SHUFFLE)
    if method == "ga":
        g = cfg.ga
        return UnlearnConfig("ga", eta=g.eta, epochs=g.epochs, batch_size=g.batch_size, shuffle_seed=shuffle)
    u = cfg.unlearn
    return UnlearnConfig(
        method,
        eta=u.eta,
        epochs=u.epochs,
        gamma=u.gamma,
        n_criteria=cfg.curriculum.n_criteria,
        batch_size=u.batch_size,
        shuffle_seed=shuffle,
    )


def train_original(cfg: ExperimentConfig, ds: LabeledDataset, seed: int) -> tuple[np.ndarray, list[float]]:
    arch = make_arch(cfg)
    return train_erm(arch, init_params(arch, seed), ds, train_hyper(cfg, seed))


@dataclass
class MethodResult:
    report: MetricsReport
    params: np.ndarray
    trace_csv: Optional[str] = None


def _curve_csv(curve: Sequence[float]) -> str:
    return "epoch,train_loss\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(curve))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def run_seed(cfg: ExperimentConfig, seed: int, out_dir: Path) -> list[MethodResult]:
    """Full pipeline for one seed; writes ``out_dir/seed_<seed>/``."""
    ds, test = load_datasets(cfg)
    arch = make_arch(cfg)
    seed_dir = Path(out_dir) / f"seed_{seed}"
    attack_seed = derive_seed(seed, _ATTACK)

    def ev(params, method, rte=0.0):
        return evaluate(
            arch, params, ds, split, test, method, seed, attack_seed, rte,
            attack_epochs=cfg.attack.epochs, attack_eta=cfg.attack.eta,
        )

    log.info("seed %d: training original model", seed)
    params_star, curve = train_original(cfg, ds, seed)
    seed_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(seed_dir / "original_checkpoint.json", arch, seed, params_star)
    _write(seed_dir / "original_loss_curve.csv", _curve_csv(curve))

    split = make_split(cfg, ds, seed)
    _write(
        seed_dir / "split.json",
        json.dumps(
            {"scenario": split.scenario, "detail": split.detail, "forget_ids": split.forget_ids.tolist()},
            sort_keys=True,
        )
        + "\n",
    )

    cur = cfg.curriculum
    scores = difficulty_scores(arch, params_star, ds, split.forget_ids, cur.measure)
    _write(seed_dir / "score_histogram.csv", export_score_histogram(scores, cur.histogram_bins).to_csv())

    log.info("seed %d: retrain on %d retained samples", seed, split.retain_ids.size)
    rte, params_ref = measure_rte(lambda: retrain(arch, seed, split, ds, train_hyper(cfg, seed)))
    ref_report = ev(params_ref, "retrain", rte)
    _write(seed_dir / "retrain" / "report.json", report_json(ref_report, avg_gap(ref_report, ref_report)))
    save_checkpoint(seed_dir / "retrain" / "checkpoint.json", arch, seed, params_ref)
    results = [MethodResult(ref_report, params_ref)]

    plan = None
    if "cufg" in cfg.methods:
        plan = build_plan(scores, cur.n_criteria, cur.strategy)
        _write(seed_dir / "plan.json", plan.to_json() + "\n")

    for method in cfg.unlearning_methods:
        ucfg = unlearn_config(cfg, method, seed)
        log.info("seed %d: unlearning with %s", seed, method)
        rte, (params_u, trace) = measure_rte(
            lambda: run_method(arch, params_star, ds, split, ucfg, plan=plan, reference=params_ref)
        )
        report = ev(params_u, method, rte)
        mdir = seed_dir / method
        _write(mdir / "report.json", report_json(report, avg_gap(report, ref_report)))
        _write(mdir / "trace.csv", trace.to_csv())
        save_checkpoint(mdir / "checkpoint.json", arch, seed, params_u)
        results.append(MethodResult(report, params_u, trace.to_csv()))
    return results


SUMMARY_FIELDS = ["method", "seed"] + [f for m in GAP_METRICS for f in (m, f"{m}_gap")] + ["avg_gap"]


def summary_rows(results_by_seed: dict[int, list[MethodResult]]) -> list[dict]:
    rows = []
    for seed in sorted(results_by_seed):
        results = results_by_seed[seed]
        ref = next(r.report for r in results if r.report.method == "retrain")
        for r in results:
            gap = avg_gap(r.report, ref)
            row = {"method": r.report.method, "seed": seed}
            for m in GAP_METRICS:
                row[m] = getattr(r.report, m)
                row[f"{m}_gap"] = getattr(gap, m)
            row["avg_gap"] = gap.avg_gap
            rows.append(row)
    return rows


def _rows_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def summary_markdown(rows: list[dict]) -> str:
    methods = list(dict.fromkeys(r["method"] for r in rows))
    lines = ["| Method | UA | RA | TA | MIA | Avg.Gap |", "|---|---|---|---|---|---|"]
    for m in methods:
        sel = [r for r in rows if r["method"] == m]
        cells = [
            f"{np.mean([r[k] for r in sel]):.2f} ({np.mean([r[k + '_gap'] for r in sel]):.2f})" for k in GAP_METRICS
        ]
        lines.append(f"| {m} | " + " | ".join(cells) + f" | {np.mean([r['avg_gap'] for r in sel]):.2f} |")
    return "\n".join(lines) + "\n"


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict[int, list[MethodResult]]:
    """Run every seed and write the output tree; returns results keyed by seed."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    load_datasets(cfg)  # fail fast on config/data mismatch
    workers = min(_workers(), len(cfg.seeds))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = {s: pool.submit(run_seed, cfg, s, out) for s in cfg.seeds}
            results = {s: f.result() for s, f in futures.items()}
    else:
        results = {s: run_seed(cfg, s, out) for s in cfg.seeds}

    rows = summary_rows(results)
    _write(out / "summary.csv", _rows_csv(rows, SUMMARY_FIELDS))
    _write(out / "summary.md", summary_markdown(rows))
    timing = [
        {"method": r.report.method, "seed": s, "rte_seconds": r.report.rte_seconds}
        for s in sorted(results)
        for r in results[s]
    ]
    _write(out / "timings.csv", _rows_csv(timing, ["method", "seed", "rte_seconds"]))
    return results


SWEEP_PATHS = {
    "gamma": "unlearn.gamma",
    "n_criteria": "curriculum.n_criteria",
    "forget_fraction": "scenario.fraction",
}
SWEEP_FIELDS = ["parameter", "value", "seed", "method", "metric", "score"]


def default_sweep_values(parameter: str) -> list[float]:
    if parameter == "gamma":
        return list(DEFAULT_GAMMA_GRID)
    if parameter == "n_criteria":
        return [1, 2, 5]
    if parameter == "forget_fraction":
        return [0.1, 0.2, 0.3, 0.4, 0.5]
    raise ConfigError(f"sweep.parameter: unknown parameter {parameter!r}")


def run_sweep(cfg: ExperimentConfig, parameter: str, values: Sequence[float], out_dir=None) -> list[dict]:
    """One full experiment per value; writes a long-format ``sweep_<parameter>.csv``."""
    if parameter not in SWEEP_PATHS:
        raise ConfigError(f"sweep.parameter: unknown parameter {parameter!r}")
    if not values:
        raise ConfigError("sweep.values: at least one value is required")
    if parameter == "forget_fraction" and isinstance(cfg.scenario, ClasswiseScenario):
        raise ConfigError("sweep.parameter: forget_fraction needs a random scenario")
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    rows = []
    for i, value in enumerate(values):
        if parameter == "n_criteria":
            if float(value) != int(value):
                raise ConfigError(f"sweep.values[{i}]: n_criteria must be an integer, got {value}")
            value = int(value)
        sub = cfg.with_updates(**{SWEEP_PATHS[parameter]: value})
        results = run_experiment(sub, out / f"sweep_{parameter}" / f"value_{i}")
        for row in summary_rows(results):
            for metric in list(GAP_METRICS) + ["avg_gap"]:
                rows.append(
                    {
                        "parameter": parameter,
                        "value": value,
                        "seed": row["seed"],
                        "method": row["method"],
                        "metric": metric,
                        "score": row[metric],
                    }
                )
    _write(out / f"sweep_{parameter}.csv", _rows_csv(rows, SWEEP_FIELDS))
    return rows
