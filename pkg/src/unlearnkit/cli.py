"""Command line entry point.

Exit status: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config
from .evaluation import MetricsReport, avg_gap, evaluate, report_json
from .harness import (
    _ATTACK,
    _curve_csv,
    default_sweep_values,
    derive_seed,
    load_datasets,
    make_arch,
    make_split,
    run_experiment,
    run_sweep,
    train_hyper,
    train_original,
    unlearn_config,
)
from .curriculum import build_plan, difficulty_scores
from .train import load_checkpoint, retrain, save_checkpoint
from .unlearn import run_method

log = logging.getLogger("unlearnkit")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["seeds"] = [args.seed]
    if getattr(args, "method", None):
        updates["methods"] = args.method
    return cfg.with_updates(**updates) if updates else cfg


def _out(args, cfg) -> Path:
    out = Path(args.out if args.out else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _single_seed(cfg: ExperimentConfig) -> int:
    if len(cfg.seeds) != 1:
        raise ConfigError("seeds: this command runs a single seed; pass --seed or list exactly one seed")
    return cfg.seeds[0]


def cmd_train(args) -> None:
    cfg = _config(args)
    seed = _single_seed(cfg)
    ds, _ = load_datasets(cfg)
    params, curve = train_original(cfg, ds, seed)
    out = _out(args, cfg)
    save_checkpoint(out / "checkpoint.json", make_arch(cfg), seed, params)
    (out / "loss_curve.csv").write_text(_curve_csv(curve))
    print(out / "checkpoint.json")


def _original_params(args, cfg, ds, seed):
    if args.checkpoint:
        arch, _, params = load_checkpoint(args.checkpoint)
        if arch != make_arch(cfg):
            raise ConfigError("architecture: checkpoint architecture differs from the config")
        return params
    return train_original(cfg, ds, seed)[0]


def cmd_unlearn(args) -> None:
    cfg = _config(args)
    if len(cfg.methods) != 1:
        raise ConfigError("methods: pass exactly one --method")
    seed = _single_seed(cfg)
    method = cfg.methods[0]
    ds, _ = load_datasets(cfg)
    arch = make_arch(cfg)
    split = make_split(cfg, ds, seed)
    out = _out(args, cfg)
    if method == "retrain":
        params = retrain(arch, seed, split, ds, train_hyper(cfg, seed))
    else:
        params0 = _original_params(args, cfg, ds, seed)
        plan = None
        if method == "cufg":
            scores = difficulty_scores(arch, params0, ds, split.forget_ids, cfg.curriculum.measure)
            plan = build_plan(scores, cfg.curriculum.n_criteria, cfg.curriculum.strategy)
            (out / "plan.json").write_text(plan.to_json() + "\n")
        params, trace = run_method(arch, params0, ds, split, unlearn_config(cfg, method, seed), plan=plan)
        (out / "trace.csv").write_text(trace.to_csv())
    save_checkpoint(out / "checkpoint.json", arch, seed, params)
    print(out / "checkpoint.json")


def cmd_eval(args) -> None:
    cfg = _config(args)
    seed = _single_seed(cfg)
    if not args.checkpoint:
        raise ConfigError("checkpoint: eval needs --checkpoint")
    ds, test = load_datasets(cfg)
    arch, _, params = load_checkpoint(args.checkpoint)
    if arch != make_arch(cfg):
        raise ConfigError("architecture: checkpoint architecture differs from the config")
    split = make_split(cfg, ds, seed)
    label = args.label or "model"
    report = evaluate(
        arch, params, ds, split, test, label, seed, derive_seed(seed, _ATTACK),
        attack_epochs=cfg.attack.epochs, attack_eta=cfg.attack.eta,
    )
    gap = None
    if args.reference:
        ref = json.loads(Path(args.reference).read_text())["metrics"]
        gap = avg_gap(report, MetricsReport(**ref))
    text = report_json(report, gap)
    out = _out(args, cfg)
    (out / "report.json").write_text(text)
    sys.stdout.write(text)


def cmd_experiment(args) -> None:
    cfg = _config(args)
    out = _out(args, cfg)
    run_experiment(cfg, out)
    sys.stdout.write((out / "summary.md").read_text())


def cmd_sweep(args) -> None:
    cfg = _config(args)
    parameter = args.parameter or (cfg.sweep.parameter if cfg.sweep else None)
    if parameter is None:
        raise ConfigError("sweep.parameter: pass --parameter or set sweep.parameter in the config")
    if args.values:
        try:
            values = [float(v) for v in args.values.split(",")]
        except ValueError:
            raise ConfigError(f"sweep.values: cannot parse {args.values!r}") from None
    elif cfg.sweep and cfg.sweep.parameter == parameter:
        values = list(cfg.sweep.values)
    else:
        values = default_sweep_values(parameter)
    out = _out(args, cfg)
    run_sweep(cfg, parameter, values, out)
    print(out / f"sweep_{parameter}.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unlearnkit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method=False):
        p.add_argument("--config", help="experiment config JSON (defaults apply when omitted)")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="run this single seed")
        if method:
            p.add_argument(
                "--method", action="append", choices=["retrain", "ft", "ga", "ufg", "cufg"],
                help="method to run (repeatable)",
            )
        return p

    common(sub.add_parser("train", help="train the original model")).set_defaults(func=cmd_train)
    p = common(sub.add_parser("unlearn", help="run one unlearning method"), method=True)
    p.add_argument("--checkpoint", help="original model checkpoint (trained from config when omitted)")
    p.set_defaults(func=cmd_unlearn)
    p = common(sub.add_parser("eval", help="evaluate a checkpoint"))
    p.add_argument("--checkpoint", help="model checkpoint to evaluate")
    p.add_argument("--reference", help="reference report.json (Retrain) for gap computation")
    p.add_argument("--label", help="method label written into the report")
    p.set_defaults(func=cmd_eval)
    common(sub.add_parser("experiment", help="full pipeline over all seeds and methods"), method=True).set_defaults(
        func=cmd_experiment
    )
    p = common(sub.add_parser("sweep", help="repeat the experiment over parameter values"), method=True)
    p.add_argument("--parameter", choices=["gamma", "n_criteria", "forget_fraction"])
    p.add_argument("--values", help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
