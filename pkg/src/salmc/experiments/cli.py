"""Command-line entry point.

Commands:
    salmc train <config.json>                 full configured run
    salmc sample <model.json> --chains N --steps T --seed S [--mh]
    salmc diagnose <run-dir>                  recompute + print diagnostics
    salmc blr <config.json>                   logistic-regression experiment
    salmc sweep <config.json> --grid <grid.json>

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure during a run. SALMC_WORKERS sets the chain worker count.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..adversarial import SALMC, load_generator, sample_chain
from ..diagnostics import compute_diagnostics
from ..errors import ExperimentError, SalmcError, ValidationError
from ..rng import RngStream
from ..targets import load_target
from .data import blr_test_accuracy, load_blr_dataset
from .runner import (
    _atomic_write,
    _decode_params,
    _write_chain_csv,
    rediagnose,
    run_experiment,
    run_sweep,
    workers_from_env,
)

_BLR_DEFAULTS = {
    "dataset": None,
    "sampler": "sal_mc",
    "sampler_params": {},
    "chains": 32,
    "steps": 2000,
    "seed": 0,
    "runs": 1,
    "train_fraction": 0.8,
    "prior_precision": 1.0,
    "minibatch_size": 64,
    "burn_in": 0,
    "mh": False,
    "outdir": None,
}


def _cmd_train(args):
    record = run_experiment(args.config)
    print(json.dumps({
        "outdir": record["config"]["outdir"],
        "sample_files": record["sample_files"],
        "diagnostics": record["diagnostics"],
    }, indent=1))


def _cmd_sample(args):
    generator, meta = load_generator(args.model)
    target = load_target(args.target) if args.target else None
    if args.mh and target is None:
        raise ValidationError("--mh needs --target for the density ratio")
    dim = meta["dim"]
    outdir = Path(args.outdir)
    (outdir / "samples").mkdir(parents=True, exist_ok=True)
    streams = RngStream(args.seed).spawn(args.chains)
    files = []
    for i in range(args.chains):
        x0 = streams[i].standard_normal(size=dim)
        chain = sample_chain(generator, x0, args.steps, meta["noise_var"],
                             streams[i], mh_target=target if args.mh else None)
        rel = f"samples/chain_{i:03d}.csv"
        _write_chain_csv(outdir / rel, chain)
        files.append(rel)
    print(json.dumps({"outdir": str(outdir), "sample_files": files}, indent=1))


def _cmd_diagnose(args):
    record = rediagnose(args.run_dir)
    print(json.dumps(record["diagnostics"], indent=1))


def _load_blr_config(path):
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ValidationError(f"config file {path} is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    cfg = dict(_BLR_DEFAULTS)
    for key, value in doc.items():
        if key not in _BLR_DEFAULTS:
            raise ValidationError(f"unknown config key {key!r}")
        cfg[key] = value
    if cfg["dataset"] is None:
        raise ValidationError("config key 'dataset' is required")
    if not Path(cfg["dataset"]).is_file():
        raise ValidationError(
            f"config key 'dataset' points at a missing file: {cfg['dataset']!r}"
        )
    if cfg["sampler"] not in ("sal_mc", "sgld"):
        raise ValidationError("config key 'sampler' must be 'sal_mc' or 'sgld'")
    if cfg["runs"] < 1:
        raise ValidationError("config key 'runs' must be at least 1")
    return cfg


def run_blr(config_path, workers=None):
    """Repeated split/train/sample/score runs; returns the summary dict."""
    from ..samplers.sgld import SGLD
    from .runner import _generator_chains

    cfg = _load_blr_config(config_path)
    if workers is None:
        workers = workers_from_env()
    params = _decode_params(cfg["sampler_params"])
    accuracies = []
    per_run = []
    for r in range(cfg["runs"]):
        seed = cfg["seed"] + r
        target, (x_test, y_test) = load_blr_dataset(
            cfg["dataset"], split_seed=seed,
            train_fraction=cfg["train_fraction"],
            prior_precision=cfg["prior_precision"],
            minibatch_size=cfg["minibatch_size"],
        )
        if cfg["sampler"] == "sgld":
            sampler = SGLD(n_steps=cfg["steps"], n_chains=cfg["chains"],
                           seed=seed, **params)
            sampler.fit(target)
            chains = sampler.chains_
        else:
            trainer = SALMC(seed=seed, **params)
            trainer.fit(target)
            chains = _generator_chains(trainer, cfg["chains"], cfg["steps"],
                                       seed + 1, target if cfg["mh"] else None,
                                       workers)
        kept = chains[:, cfg["burn_in"]:, :]
        acc = blr_test_accuracy(kept.reshape(-1, kept.shape[-1]), x_test, y_test)
        diag = compute_diagnostics(kept, cap=2000)
        accuracies.append(acc)
        per_run.append({"seed": seed, "accuracy": acc, "ess_min": diag.ess_min})
    summary = {
        "dataset": cfg["dataset"],
        "sampler": cfg["sampler"],
        "runs": cfg["runs"],
        "accuracy_mean": float(np.mean(accuracies)),
        "accuracy_std": float(np.std(accuracies)),
        "per_run": per_run,
    }
    if cfg["outdir"]:
        outdir = Path(cfg["outdir"])
        outdir.mkdir(parents=True, exist_ok=True)
        _atomic_write(outdir / "blr.json", json.dumps(summary, indent=1))
    return summary


def _cmd_blr(args):
    print(json.dumps(run_blr(args.config), indent=1))


def _cmd_sweep(args):
    results = run_sweep(args.config, args.grid)
    print(json.dumps(results, indent=1))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="salmc",
        description="Train and evaluate learned Markov transition kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run a configured experiment")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("sample", help="sample chains from a saved model")
    p.add_argument("model")
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mh", action="store_true")
    p.add_argument("--target", default=None,
                   help="target spec for the MH density ratio")
    p.add_argument("--outdir", default=".")
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("diagnose", help="recompute diagnostics for a run")
    p.add_argument("run_dir")
    p.set_defaults(fn=_cmd_diagnose)

    p = sub.add_parser("blr", help="Bayesian logistic regression experiment")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_blr)

    p = sub.add_parser("sweep", help="grid sweep over h* and eta")
    p.add_argument("config")
    p.add_argument("--grid", required=True)
    p.set_defaults(fn=_cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ExperimentError as err:
        code = 2 if isinstance(err.original, ValidationError) else 3
        print(f"error: {err}", file=sys.stderr)
        return code
    except SalmcError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
