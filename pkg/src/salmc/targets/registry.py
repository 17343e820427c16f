"""Target construction from names, parameter files, or parsed documents.

Parameter files are JSON with either
  {"type": "gmm", "weights": [...], "means": [[...]], "variances": [[...]]}
or
  {"type": "ring", "radii": [...], "sharpness": s}
The packaged layouts (mog2, mog4, mog6, mog10, ring, ring5) live under
`salmc/targets/params/` and are addressable by bare name.
"""

import json
from importlib import resources
from pathlib import Path

from ..errors import ValidationError
from .gmm import GaussianMixture
from .ring import Ring

BUILTIN_TARGETS = ("mog2", "mog4", "mog6", "mog10", "ring", "ring5")

_REQUIRED_KEYS = {"gmm": ("weights", "means", "variances"), "ring": ("radii", "sharpness")}


def target_from_dict(doc):
    """Build a target from a parsed parameter document."""
    if not isinstance(doc, dict):
        raise ValidationError("target document must be a JSON object")
    kind = doc.get("type")
    if kind not in _REQUIRED_KEYS:
        raise ValidationError(f"unknown or missing target 'type': {kind!r}")
    missing = [k for k in _REQUIRED_KEYS[kind] if k not in doc]
    if missing:
        raise ValidationError(f"target document missing key(s): {', '.join(missing)}")
    if kind == "gmm":
        return GaussianMixture(doc["weights"], doc["means"], doc["variances"])
    return Ring(doc["radii"], doc["sharpness"])


def load_target(spec):
    """Resolve a target from a builtin name, a JSON file path, or a dict."""
    if isinstance(spec, dict):
        return target_from_dict(spec)
    if spec in BUILTIN_TARGETS:
        text = resources.files("salmc.targets").joinpath(f"params/{spec}.json").read_text()
        return target_from_dict(json.loads(text))
    path = Path(spec)
    if not path.is_file():
        raise ValidationError(
            f"target {spec!r} is neither a builtin ({', '.join(BUILTIN_TARGETS)}) "
            "nor an existing parameter file"
        )
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ValidationError(f"target file {spec!r} is not valid JSON: {err}") from err
    return target_from_dict(doc)
