"""RBF kernels, bandwidth heuristics, and batched kernel matrices.

Shared by the particle samplers and by MMD. The kernel convention is

    k(x, y) = exp(-||x - y||^2 / h)

so the bandwidth h scales the *squared* distance directly (no factor of
2 and no square root). The median heuristic, likewise, is the median of
pairwise squared distances.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBandwidthError


@dataclass(frozen=True)
class KernelConfig:
    """Bandwidth policy for one RBF kernel.

    rule: "fixed" (use `value`), "median", or "scaled_median" (median of
    pairwise squared distances times `value`).
    """

    rule: str = "median"
    value: float = 1.0

    def __post_init__(self):
        if self.rule not in ("fixed", "median", "scaled_median"):
            raise ValueError(f"unknown bandwidth rule {self.rule!r}")
        if self.rule in ("fixed", "scaled_median") and not self.value > 0:
            raise ValueError("bandwidth value must be positive")

    def resolve(self, particles):
        if self.rule == "fixed":
            return float(self.value)
        factor = 1.0 if self.rule == "median" else float(self.value)
        return median_bandwidth(particles, factor)


def squared_distances(x, y=None):
    """Pairwise squared Euclidean distances, clipped at zero."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = x if y is None else np.atleast_2d(np.asarray(y, dtype=np.float64))
    xx = np.sum(x * x, axis=1)[:, None]
    yy = np.sum(y * y, axis=1)[None, :]
    d2 = xx + yy - 2.0 * (x @ y.T)
    return np.maximum(d2, 0.0)


def rbf(x, y, h):
    """exp(-||x - y||^2 / h) for a single pair of vectors."""
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.exp(-np.sum((x - y) ** 2) / h))


def median_bandwidth(particles, factor=1.0):
    """factor times the median of the M(M-1)/2 pairwise squared distances."""
    particles = np.atleast_2d(np.asarray(particles, dtype=np.float64))
    m = particles.shape[0]
    if m < 2:
        raise ValueError("median bandwidth needs at least two particles")
    if not factor > 0:
        raise ValueError("factor must be positive")
    d2 = squared_distances(particles)
    iu = np.triu_indices(m, k=1)
    med = float(np.median(d2[iu]))
    if med <= 0.0:
        raise DegenerateBandwidthError(
            "all particles identical; median pairwise distance is zero"
        )
    return factor * med


def kernel_matrix(x, h, y=None):
    """Kernel matrix K_ij = k(x_i, y_j) (y defaults to x)."""
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    return np.exp(-squared_distances(x, y) / h)


def kernel_matrix_with_grads(particles, h):
    """Kernel matrix plus gradients w.r.t. the second argument.

    Returns (K, G) with K_ij = k(x_i, x_j) and
    G[i, j] = d k(x_i, x_j) / d x_j = (2/h) (x_i - x_j) K_ij.
    """
    particles = np.atleast_2d(np.asarray(particles, dtype=np.float64))
    k = kernel_matrix(particles, h)
    diff = particles[:, None, :] - particles[None, :, :]
    grads = (2.0 / h) * diff * k[:, :, None]
    return k, grads
