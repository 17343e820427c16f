"""Experiment configuration: one JSON document fully determines a run.

Schema (all keys optional unless noted):

    {
      "sampler": "sgld" | "svgd" | "ag_svgd" | "sal_mc" | "al_mc",   required
      "target": "mog6" | "path.json" | {...target document...},
      "sampler_params": {...},      forwarded to the sampler constructor
      "chains": 1,
      "steps": 1000,
      "seed": 0,
      "outdir": "runs/out",         required by run_experiment
      "dataset": "data.csv",        required by al_mc
      "mh": false,
      "burn_in": 0,
      "diagnostics": {"enabled": true, "cap": 2000, "max_lag": 50,
                      "reference_size": 2000}
    }

Kernel-valued entries inside sampler_params are written as
{"rule": "median" | "fixed" | "scaled_median", "value": number-or-null}
and converted when the sampler is built.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ValidationError

SAMPLERS = ("sgld", "svgd", "ag_svgd", "sal_mc", "al_mc")

_DIAG_DEFAULTS = {"enabled": True, "cap": 2000, "max_lag": 50,
                  "reference_size": 2000}


@dataclass
class ExperimentConfig:
    sampler: str
    target: object = None
    sampler_params: dict = field(default_factory=dict)
    chains: int = 1
    steps: int = 1000
    seed: int = 0
    outdir: str = None
    dataset: str = None
    mh: bool = False
    burn_in: int = 0
    diagnostics: dict = field(default_factory=lambda: dict(_DIAG_DEFAULTS))

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in doc:
            if key not in known:
                raise ValidationError(f"unknown config key {key!r}")
        if "sampler" not in doc:
            raise ValidationError("config key 'sampler' is required")
        if doc["sampler"] not in SAMPLERS:
            raise ValidationError(
                f"config key 'sampler' must be one of {SAMPLERS}, "
                f"got {doc['sampler']!r}"
            )
        cfg = cls(**doc)
        for key in ("chains", "steps", "seed", "burn_in"):
            value = getattr(cfg, key)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(f"config key {key!r} must be an integer")
        if cfg.chains < 1:
            raise ValidationError("config key 'chains' must be at least 1")
        if cfg.steps < 1:
            raise ValidationError("config key 'steps' must be at least 1")
        if cfg.burn_in < 0 or cfg.burn_in >= cfg.steps:
            raise ValidationError("config key 'burn_in' must be in [0, steps)")
        if not isinstance(cfg.mh, bool):
            raise ValidationError("config key 'mh' must be a boolean")
        if not isinstance(cfg.sampler_params, dict):
            raise ValidationError("config key 'sampler_params' must be an object")
        if cfg.sampler == "al_mc":
            if cfg.dataset is None:
                raise ValidationError("config key 'dataset' is required for al_mc")
        elif cfg.target is None:
            raise ValidationError(
                f"config key 'target' is required for {cfg.sampler}"
            )
        if cfg.dataset is not None and not Path(cfg.dataset).is_file():
            raise ValidationError(
                f"config key 'dataset' points at a missing file: {cfg.dataset!r}"
            )
        if isinstance(cfg.target, str) and cfg.target.endswith(".json"):
            if not Path(cfg.target).is_file():
                raise ValidationError(
                    f"config key 'target' points at a missing file: {cfg.target!r}"
                )
        diag = dict(_DIAG_DEFAULTS)
        if not isinstance(cfg.diagnostics, dict):
            raise ValidationError("config key 'diagnostics' must be an object")
        for key, value in cfg.diagnostics.items():
            if key not in _DIAG_DEFAULTS:
                raise ValidationError(f"unknown diagnostics key {key!r}")
            diag[key] = value
        cfg.diagnostics = diag
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {path}") from None
        except json.JSONDecodeError as err:
            raise ValidationError(f"config file {path} is not valid JSON: {err}") from None
        return cls.from_dict(doc)

    def to_dict(self):
        return asdict(self)
