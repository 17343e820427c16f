from .base import TargetDistribution
from .blr import LogisticRegressionPosterior
from .gmm import GaussianMixture
from .registry import BUILTIN_TARGETS, load_target, target_from_dict
from .ring import Ring

__all__ = [
    "TargetDistribution",
    "GaussianMixture",
    "Ring",
    "LogisticRegressionPosterior",
    "BUILTIN_TARGETS",
    "load_target",
    "target_from_dict",
]
