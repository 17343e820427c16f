"""Ring-shaped 2D targets: a single annulus or an equal mixture of them.

log p(x) = logsumexp_k [ -(||x|| - r_k)^2 / s ] up to a constant; with a
single radius this is exactly -(||x|| - r)^2 / s. Reference sampling
works in polar coordinates: the angle is uniform and the radius follows
rho * exp(f(rho)), inverted numerically on a fine grid.
"""

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import ValidationError
from .base import TargetDistribution

_GRID_POINTS = 8192


class Ring(TargetDistribution):
    """2D ring target; pass several radii for the ring-mixture variant."""

    dim = 2
    has_grad = True
    has_reference_sampler = True

    def __init__(self, radii=(2.0,), sharpness=0.32):
        self.radii = np.atleast_1d(np.asarray(radii, dtype=np.float64))
        self.sharpness = float(sharpness)
        if np.any(self.radii <= 0):
            raise ValidationError("radii must be positive")
        if not self.sharpness > 0:
            raise ValidationError("sharpness must be positive")
        # radial grid for the inverse-CDF sampler and quadrature moments
        hi = float(self.radii.max() + 10.0 * np.sqrt(self.sharpness))
        self._rho = np.linspace(0.0, hi, _GRID_POINTS)
        pdf = self._rho * np.exp(self._radial_log(self._rho))
        cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * np.diff(self._rho))])
        self._radial_cdf = cdf / cdf[-1]
        self._mean_rho2 = float(
            np.trapezoid(self._rho**2 * pdf, self._rho) / np.trapezoid(pdf, self._rho)
        )

    def _radial_log(self, rho):
        # (...,): logsumexp over radii of -(rho - r_k)^2 / s
        gaps = (rho[..., None] - self.radii) ** 2 / self.sharpness
        return logsumexp(-gaps, axis=-1)

    def _log_unnorm(self, x):
        return self._radial_log(np.linalg.norm(x, axis=1))

    def _grad_log(self, x):
        rho = np.linalg.norm(x, axis=1)
        safe = np.maximum(rho, 1e-300)
        resp = softmax(-((rho[:, None] - self.radii) ** 2) / self.sharpness, axis=1)
        dlog_drho = np.sum(resp * (-2.0 * (rho[:, None] - self.radii) / self.sharpness), axis=1)
        grad = (dlog_drho / safe)[:, None] * x
        grad[rho == 0.0] = 0.0  # symmetric point, no preferred direction
        return grad

    def mean(self):
        return np.zeros(2)

    def variance(self):
        return np.full(2, self._mean_rho2 / 2.0)

    def reference_sample(self, n, rng):
        rho = np.interp(rng.uniform(size=n), self._radial_cdf, self._rho)
        theta = 2.0 * np.pi * rng.uniform(size=n)
        return np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])
