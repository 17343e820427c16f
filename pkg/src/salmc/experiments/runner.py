"""Experiment orchestration: build the sampler, run it, write artifacts.

A run directory contains samples/chain_*.csv (one per chain, columns
x0..x{d-1}, no burn-in unless configured), plots.csv (long format:
iteration,metric,value,chain), model.json for trained kernels, and
run.json written last so an interrupted run never leaves a record
pointing at missing files.

Chains are sampled from per-chain spawned RNG streams, so sample CSVs
are byte-identical across reruns and across worker counts. Rejected
MH proposals duplicate the previous state; the recorded move fraction
is therefore an exact acceptance count for continuous proposals.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..adversarial import SALMC, acceptance_ratio_trace, sample_chain
from ..diagnostics import compute_diagnostics, mmd
from ..errors import ExperimentError, SalmcError, ValidationError
from ..kernels import KernelConfig
from ..rng import RngStream
from ..samplers.ag_svgd import AGSVGD
from ..samplers.sgld import SGLD
from ..samplers.svgd import SVGD
from ..targets import load_target
from .config import ExperimentConfig
from .data import load_sample_csv

PARTICLE_SAMPLERS = ("svgd", "ag_svgd")


def workers_from_env():
    raw = os.environ.get("SALMC_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"SALMC_WORKERS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"SALMC_WORKERS must be positive, got {n}")
    return n


def _atomic_write(path, text):
    path = Path(path)
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_chain_csv(path, chain):
    d = chain.shape[1]
    header = ",".join(f"x{j}" for j in range(d))
    lines = [header]
    lines += [",".join(repr(float(v)) for v in row) for row in chain]
    _atomic_write(path, "\n".join(lines) + "\n")


def _maybe_kernel(value):
    if isinstance(value, dict) and "rule" in value:
        extra = set(value) - {"rule", "value"}
        if extra:
            raise ValidationError(f"unknown kernel keys {sorted(extra)}")
        return KernelConfig(value["rule"], value.get("value"))
    return value


def _decode_params(params):
    out = {}
    for key, value in params.items():
        if isinstance(value, dict) and "rule" in value:
            out[key] = _maybe_kernel(value)
        elif isinstance(value, dict):
            out[key] = _decode_params(value)
        else:
            out[key] = value
    return out


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValidationError:
        raise
    except SalmcError as err:
        raise ExperimentError(name, err) from err


def _generator_chains(trainer, n_chains, steps, seed, mh_target, workers):
    """Per-chain spawned streams: reproducible for any worker count."""
    gen = trainer.generator_
    streams = RngStream(seed).spawn(n_chains)

    def one(i):
        x0 = streams[i].standard_normal(size=trainer.dim_)
        return sample_chain(gen, x0, steps, trainer.noise_var, streams[i],
                            mh_target=mh_target)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chains = list(pool.map(one, range(n_chains)))
    else:
        chains = [one(i) for i in range(n_chains)]
    return np.stack(chains)


def run_experiment(config, workers=None):
    """Execute one configured run and return the RunRecord dict."""
    if isinstance(config, (str, Path)):
        cfg = ExperimentConfig.from_file(config)
    elif isinstance(config, dict):
        cfg = ExperimentConfig.from_dict(config)
    else:
        cfg = config
    if cfg.outdir is None:
        raise ValidationError("config key 'outdir' is required to run")
    if workers is None:
        workers = workers_from_env()
    if cfg.sampler in PARTICLE_SAMPLERS:
        if cfg.chains != 1:
            raise ValidationError(
                f"config key 'chains' must be 1 for particle sampler {cfg.sampler!r}"
            )
        if cfg.burn_in != 0:
            raise ValidationError(
                "config key 'burn_in' must be 0 for particle samplers"
            )
    reserved = {"seed", "n_steps", "n_chains"} if cfg.sampler == "sgld" else {"seed"}
    if cfg.sampler == "al_mc":
        reserved.add("source")
    taken = reserved & set(cfg.sampler_params)
    if taken:
        raise ValidationError(
            f"config key 'sampler_params' may not set {sorted(taken)[0]!r}; "
            "it is controlled by the run configuration"
        )

    target = None
    if cfg.target is not None:
        target = _stage("target", load_target, cfg.target)
    dataset = None
    if cfg.sampler == "al_mc":
        dataset = _stage("target", load_sample_csv, cfg.dataset)

    params = _decode_params(cfg.sampler_params)
    record = {"config": cfg.to_dict(), "version": __version__}
    trace = None
    mh_move_fraction = None
    t_train = 0.0

    if cfg.sampler == "sgld":
        sampler = SGLD(n_steps=cfg.steps, n_chains=cfg.chains, seed=cfg.seed,
                       **params)
        t0 = time.perf_counter()
        _stage("sample", sampler.fit, target)
        t_sample = time.perf_counter() - t0
        chains = sampler.chains_
    elif cfg.sampler in PARTICLE_SAMPLERS:
        cls = SVGD if cfg.sampler == "svgd" else AGSVGD
        sampler = cls(seed=cfg.seed, **params)
        t0 = time.perf_counter()
        _stage("sample", sampler.fit, target)
        t_sample = time.perf_counter() - t0
        chains = sampler.particles_[None, :, :]  # one pseudo-chain
    else:
        trainer = SALMC(seed=cfg.seed, **params)
        t0 = time.perf_counter()
        if cfg.sampler == "al_mc":
            trainer.set_params(source="dataset")
            _stage("train", trainer.fit, dataset=dataset)
        else:
            _stage("train", trainer.fit, target)
        t_train = time.perf_counter() - t0
        trace = trainer.trace_
        record["outer_iterations"] = trainer.n_outer
        if dataset is not None:
            record["epochs_equivalent"] = (
                trainer.n_outer * trainer.batch_size / len(dataset)
            )
        t0 = time.perf_counter()
        mh_target = target if cfg.mh else None
        if cfg.mh and target is None:
            raise ValidationError("config key 'mh' needs a target density")
        chains = _stage("sample", _generator_chains, trainer, cfg.chains,
                        cfg.steps, cfg.seed + 1, mh_target, workers)
        t_sample = time.perf_counter() - t0
        if cfg.mh:
            moved = np.any(np.diff(chains, axis=1) != 0, axis=2)
            mh_move_fraction = float(moved.mean())

    outdir = Path(cfg.outdir)
    (outdir / "samples").mkdir(parents=True, exist_ok=True)

    if cfg.sampler in ("sal_mc", "al_mc"):
        trainer.save(outdir / "model.json")
        record["model_file"] = "model.json"

    kept = chains[:, cfg.burn_in:, :]
    sample_files = []
    for i in range(kept.shape[0]):
        rel = f"samples/chain_{i:03d}.csv"
        _stage("write", _write_chain_csv, outdir / rel, kept[i])
        sample_files.append(rel)
    record["sample_files"] = sample_files
    record["rows_per_file"] = int(kept.shape[1])
    record["mh_move_fraction"] = mh_move_fraction

    diag = None
    dcfg = cfg.diagnostics
    if dcfg["enabled"]:
        diag = _stage(
            "diagnostics", compute_diagnostics, kept, target,
            max(t_sample, 1e-9), dcfg["cap"], dcfg["max_lag"],
            (trace or {}).get("mmd"),
        )
        if target is not None and target.has_reference_sampler:
            ref = target.reference_sample(
                dcfg["reference_size"], RngStream(cfg.seed).spawn(1)[0]
            )
            flat = kept.reshape(-1, kept.shape[-1])[: dcfg["reference_size"]]
            diag.extra["mmd_to_reference"] = mmd(flat, ref)
        record["diagnostics"] = diag.to_dict()
    else:
        record["diagnostics"] = None

    record["wall_clock"] = {"train_seconds": t_train, "sample_seconds": t_sample}
    _stage("write", _write_plot_csv, outdir / "plots.csv", trace, diag, kept, target)
    _stage("write", _atomic_write, outdir / "run.json",
           json.dumps(record, indent=1))
    return record


def _write_plot_csv(path, trace, diag, chains, target):
    rows = ["iteration,metric,value,chain"]
    if trace is not None:
        for name in ("d_loss", "g_loss", "acceptance"):
            for it, v in enumerate(trace[name]):
                rows.append(f"{it},{name},{float(v)!r},")
        for it, v in trace["mmd"]:
            rows.append(f"{it},mmd,{float(v)!r},")
    if diag is not None:
        acf = np.asarray(diag.autocorrelation)
        for lag in range(acf.shape[0]):
            for j in range(acf.shape[1]):
                rows.append(f"{lag},autocorrelation_x{j},{float(acf[lag, j])!r},0")
    if target is not None and chains.shape[1] >= 2:
        ratios = acceptance_ratio_trace(chains[0], target, ceiling=1e6)
        for it, v in enumerate(ratios):
            rows.append(f"{it},acceptance_ratio,{float(v)!r},0")
    _atomic_write(path, "\n".join(rows) + "\n")


def load_run_record(run_dir):
    """Read run.json and verify the files it references."""
    run_dir = Path(run_dir)
    path = run_dir / "run.json"
    if not path.is_file():
        raise ValidationError(f"no run.json under {run_dir}")
    record = json.loads(path.read_text())
    for key in ("config", "sample_files", "rows_per_file", "version"):
        if key not in record:
            raise ValidationError(f"run record missing key {key!r}")
    for rel in record["sample_files"]:
        f = run_dir / rel
        if not f.is_file():
            raise ValidationError(f"run record references a missing file: {rel}")
        with open(f) as fh:
            n_rows = sum(1 for _ in fh) - 1
        if n_rows != record["rows_per_file"]:
            raise ValidationError(
                f"{rel} has {n_rows} rows, record says {record['rows_per_file']}"
            )
    return record


def read_run_chains(run_dir):
    """Load every chain CSV referenced by a verified run record."""
    record = load_run_record(run_dir)
    run_dir = Path(run_dir)
    chains = [load_sample_csv(run_dir / rel) for rel in record["sample_files"]]
    return record, np.stack(chains)


def rediagnose(run_dir):
    """Recompute diagnostics from stored samples; refresh run.json."""
    record, chains = read_run_chains(run_dir)
    cfg = ExperimentConfig.from_dict(record["config"])
    target = load_target(cfg.target) if cfg.target is not None else None
    dcfg = cfg.diagnostics
    seconds = record.get("wall_clock", {}).get("sample_seconds") or 1e-9
    diag = compute_diagnostics(chains, target, max(seconds, 1e-9),
                               dcfg["cap"], dcfg["max_lag"])
    record["diagnostics"] = diag.to_dict()
    _atomic_write(Path(run_dir) / "run.json", json.dumps(record, indent=1))
    return record


def run_sweep(config, grid, workers=None):
    """Grid sweep over the score-estimator knobs h* and eta.

    `grid` is {"h_star": [...], "eta": [...]}; each cell reruns the
    configured experiment with the cell's kernel settings in a cell_*
    subdirectory and one summary row lands in sweep.csv.
    """
    if isinstance(config, (str, Path)):
        cfg = ExperimentConfig.from_file(config)
    elif isinstance(config, dict):
        cfg = ExperimentConfig.from_dict(config)
    else:
        cfg = config
    if isinstance(grid, (str, Path)):
        grid = json.loads(Path(grid).read_text())
    for key in ("h_star", "eta"):
        if key not in grid or not isinstance(grid[key], list) or not grid[key]:
            raise ValidationError(f"grid key {key!r} must be a non-empty list")
    extra = set(grid) - {"h_star", "eta"}
    if extra:
        raise ValidationError(f"unknown grid key {sorted(extra)[0]!r}")
    if cfg.sampler not in ("ag_svgd", "sal_mc"):
        raise ValidationError("sweep supports samplers 'ag_svgd' and 'sal_mc'")
    if cfg.outdir is None:
        raise ValidationError("config key 'outdir' is required to run")

    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ["h_star,eta,mmd_to_reference,mse_mean,mse_var,seconds"]
    results = []
    for i, h in enumerate(grid["h_star"]):
        for j, e in enumerate(grid["eta"]):
            doc = cfg.to_dict()
            doc["outdir"] = str(outdir / f"cell_{i:02d}_{j:02d}")
            params = dict(doc["sampler_params"])
            if cfg.sampler == "ag_svgd":
                params["est_kernel"] = {"rule": "fixed", "value": h}
                params["eta"] = e
            else:
                src = dict(params.get("source_params") or {})
                src["est_kernel"] = {"rule": "fixed", "value": h}
                src["eta"] = e
                params["source_params"] = src
            doc["sampler_params"] = params
            t0 = time.perf_counter()
            record = run_experiment(doc, workers=workers)
            seconds = time.perf_counter() - t0
            diag = record["diagnostics"] or {}
            cell = {
                "h_star": h, "eta": e,
                "mmd_to_reference": (diag.get("extra") or {}).get("mmd_to_reference"),
                "mse_mean": diag.get("mse_mean"), "mse_var": diag.get("mse_var"),
                "outdir": doc["outdir"],
            }
            results.append(cell)
            rows.append(
                f"{h},{e},{cell['mmd_to_reference']},{cell['mse_mean']},"
                f"{cell['mse_var']},{seconds:.3f}"
            )
    _atomic_write(outdir / "sweep.csv", "\n".join(rows) + "\n")
    return results
