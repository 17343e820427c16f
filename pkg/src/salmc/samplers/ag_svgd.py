"""Adversarially-guided SVGD: gradient-free particle updates.

The target enters only through density-ratio weights, so the target
needs nothing beyond `log_unnorm`. Particle-side gradients come from
two estimators over the current particle set: an unnormalized kernel
density estimate and the Stein gradient estimator.
"""

import numpy as np
from scipy.special import softmax

from ..errors import ConditioningError, DecompositionError, WeightDegeneracyError
from ..kernels import KernelConfig, kernel_matrix
from ..linalg import spd_solve
from .base import BaseSampler, check_particles, check_target


def kde_estimate(particles, queries, h_star):
    """Unnormalized KDE: (1/M) sum_i k*(query, x_i). No (pi h)^{-d/2}
    factor on purpose; constants cancel in the density-ratio weights."""
    x = np.atleast_2d(np.asarray(particles, dtype=np.float64))
    q = np.asarray(queries, dtype=np.float64)
    single = q.ndim == 1
    k = kernel_matrix(np.atleast_2d(q), h_star, x)
    out = k.mean(axis=1)
    return float(out[0]) if single else out


def stein_gradient_estimate(particles, h_star, eta):
    """Score estimates at the particles: -(K + eta I)^{-1} G, where
    G_i = sum_j grad_xj k*(x_i, x_j)."""
    x = np.atleast_2d(np.asarray(particles, dtype=np.float64))
    m = x.shape[0]
    if not eta > 0:
        raise ValueError("ridge eta must be positive")
    k = kernel_matrix(x, h_star)
    g = (2.0 / h_star) * (x * k.sum(axis=1)[:, None] - k @ x)
    try:
        return -spd_solve(k + eta * np.eye(m), g)
    except DecompositionError as err:
        raise ConditioningError(
            f"score-estimator solve failed at pivot {err.pivot_index}; "
            "a larger ridge eta usually fixes this"
        ) from err


def density_ratio_weights(particles, target, h_star, clip_quantile=None):
    """Normalized weights w_j = omega_j / Z with omega_j = kde(x_j) / p_tilde(x_j).

    Everything runs in log space; only log differences enter, so any
    constant scaling of the unnormalized target cancels exactly.
    """
    log_kde = np.log(kde_estimate(particles, particles, h_star))
    log_p = target.log_unnorm(particles)
    raw = log_kde - log_p
    if not np.all(np.isfinite(raw)):
        raise WeightDegeneracyError("density-ratio weights are non-finite")
    # pivot differencing: constant shifts of log_p (target rescaling)
    # cancel before any rounding can differ, keeping weights bit-stable
    j = int(np.argmax(raw))
    t = (log_kde - log_kde[j]) - (log_p - log_p[j])
    if clip_quantile is not None:
        t = np.minimum(t, np.quantile(t, clip_quantile))
    w = softmax(t)
    if not np.all(np.isfinite(w)) or w.sum() == 0.0:
        raise WeightDegeneracyError("density-ratio weights degenerate after normalization")
    return w


def ag_svgd_step(particles, target, step_size, kernel=KernelConfig("median"),
                 est_kernel=KernelConfig("median"), eta=1.0, clip_quantile=None,
                 h=None, h_star=None):
    """One weighted-SVGD update with estimated scores.

    x_i += eps * sum_j w_j [ghat(x_j) k(x_i,x_j) + grad_xj k(x_i,x_j)]

    Explicit `h`/`h_star` override the kernel configs (used when the
    caller froze the bandwidths).
    """
    x = np.atleast_2d(np.asarray(particles, dtype=np.float64))
    m = x.shape[0]
    if m < 2:
        raise ValueError("ag_svgd_step needs at least two particles")
    if h_star is None:
        h_star = est_kernel.resolve(x)
    if h is None:
        h = kernel.resolve(x)
    ghat = stein_gradient_estimate(x, h_star, eta)
    w = density_ratio_weights(x, target, h_star, clip_quantile)
    k = kernel_matrix(x, h)
    drive = k @ (w[:, None] * ghat)
    kw = k @ w
    repulse = (2.0 / h) * (x * kw[:, None] - k @ (w[:, None] * x))
    return x + step_size * (drive + repulse)


class AGSVGD(BaseSampler):
    """Gradient-free particle sampler; the target only needs log_unnorm.

    `kernel` drives the SVGD-shaped update, `est_kernel` both density
    and score estimation. With `freeze_bandwidths` the median rules are
    resolved once at iteration 0 and reused.
    """

    def __init__(self, step_size=0.1, n_iters=500, n_particles=200,
                 kernel=KernelConfig("median"), est_kernel=KernelConfig("median"),
                 eta=1.0, clip_quantile=None, freeze_bandwidths=False,
                 init_var=1.0, seed=0):
        self.step_size = step_size
        self.n_iters = n_iters
        self.n_particles = n_particles
        self.kernel = kernel
        self.est_kernel = est_kernel
        self.eta = eta
        self.clip_quantile = clip_quantile
        self.freeze_bandwidths = freeze_bandwidths
        self.init_var = init_var
        self.seed = seed

    def fit(self, target, x0=None, callback=None):
        check_target(target)
        if x0 is None:
            x = np.sqrt(self.init_var) * self._stream().standard_normal(
                size=(self.n_particles, target.dim))
        else:
            x = check_particles(x0, target.dim, "x0").copy()
        h = h_star = None
        if self.freeze_bandwidths:
            h = self.kernel.resolve(x)
            h_star = self.est_kernel.resolve(x)
        for it in range(self.n_iters):
            x = ag_svgd_step(x, target, self.step_size, self.kernel,
                             self.est_kernel, self.eta, self.clip_quantile,
                             h=h, h_star=h_star)
            if callback is not None:
                callback(it, x)
        self.particles_ = x
        return self

    def sample(self):
        return self.particles_
