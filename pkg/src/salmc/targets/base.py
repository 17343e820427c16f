"""Target-distribution abstraction shared by every sampler.

A target exposes the unnormalized log density (the negative potential)
and, when available, its exact and stochastic gradients. All methods
accept a single point of shape (d,) or a batch of shape (M, d) and
return matching scalar/vector or batched results.
"""

import numpy as np


class TargetDistribution:
    """Unnormalized log density with optional gradient capabilities."""

    dim = None
    has_grad = False
    has_stochastic_grad = False
    has_reference_sampler = False

    # -- subclass hooks (batched, X is always (M, d)) --------------------

    def _log_unnorm(self, x):
        raise NotImplementedError

    def _grad_log(self, x):
        raise NotImplementedError

    # -- public API -------------------------------------------------------

    def log_unnorm(self, x):
        """Unnormalized log density, -U(x)."""
        x, single = self._as_batch(x)
        out = self._log_unnorm(x)
        return float(out[0]) if single else out

    def grad_log(self, x):
        """Gradient of log_unnorm; requires `has_grad`."""
        if not self.has_grad:
            raise NotImplementedError(f"{type(self).__name__} provides no gradient")
        x, single = self._as_batch(x)
        out = self._grad_log(x)
        return out[0] if single else out

    def stochastic_grad_log(self, x, indices):
        """Minibatch gradient estimate; requires `has_stochastic_grad`."""
        raise NotImplementedError(f"{type(self).__name__} provides no stochastic gradient")

    def reference_sample(self, n, rng):
        """Direct draws from the target, where tractable (tests, MMD)."""
        raise NotImplementedError(f"{type(self).__name__} has no reference sampler")

    def mean(self):
        raise NotImplementedError

    def variance(self):
        raise NotImplementedError

    def _as_batch(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
            single = True
        else:
            single = False
        if x.shape[1] != self.dim:
            raise ValueError(
                f"expected points of dimension {self.dim}, got shape {x.shape}"
            )
        return x, single
