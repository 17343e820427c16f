from .ag_svgd import (
    AGSVGD,
    ag_svgd_step,
    density_ratio_weights,
    kde_estimate,
    stein_gradient_estimate,
)
from .base import BaseSampler, MinibatchSchedule, check_particles, check_target
from .sgld import SGLD, sgld_schedule, sgld_step
from .svgd import SVGD, svgd_step

__all__ = [
    "BaseSampler",
    "MinibatchSchedule",
    "check_particles",
    "check_target",
    "SGLD",
    "sgld_step",
    "sgld_schedule",
    "SVGD",
    "svgd_step",
    "AGSVGD",
    "ag_svgd_step",
    "kde_estimate",
    "stein_gradient_estimate",
    "density_ratio_weights",
]
