"""Stein variational gradient descent."""

import numpy as np

from ..kernels import KernelConfig, kernel_matrix
from .base import BaseSampler, check_particles, check_target


def svgd_step(particles, target, step_size, kernel=KernelConfig("median")):
    """Move each particle by (eps/M) sum_j [grad_log(x_j) k_ij + grad_xj k_ij]."""
    x = np.atleast_2d(np.asarray(particles, dtype=np.float64))
    m = x.shape[0]
    grads = target.grad_log(x)
    if m == 1:
        return x + step_size * grads  # k(x,x)=1 and the repulsion term vanishes
    h = kernel.resolve(x)
    k = kernel_matrix(x, h)
    drive = k @ grads
    repulse = (2.0 / h) * (x * k.sum(axis=1)[:, None] - k @ x)
    return x + (step_size / m) * (drive + repulse)


class SVGD(BaseSampler):
    """Synchronous particle system; `fit` runs n_iters update sweeps."""

    def __init__(self, step_size=0.1, n_iters=500, n_particles=100,
                 kernel=KernelConfig("median"), init_var=1.0, seed=0):
        self.step_size = step_size
        self.n_iters = n_iters
        self.n_particles = n_particles
        self.kernel = kernel
        self.init_var = init_var
        self.seed = seed

    def fit(self, target, x0=None, callback=None):
        check_target(target, needs_grad=True)
        if x0 is None:
            x = np.sqrt(self.init_var) * self._stream().standard_normal(
                size=(self.n_particles, target.dim))
        else:
            x = check_particles(x0, target.dim, "x0").copy()
        for it in range(self.n_iters):
            x = svgd_step(x, target, self.step_size, self.kernel)
            if callback is not None:
                callback(it, x)
        self.particles_ = x
        return self

    def sample(self):
        return self.particles_
