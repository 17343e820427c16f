"""Gaussian mixtures with diagonal covariances (the Mog* family)."""

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import ValidationError
from .base import TargetDistribution

_LOG_2PI = np.log(2.0 * np.pi)


class GaussianMixture(TargetDistribution):
    """Mixture of K diagonal-covariance Gaussians in d dimensions.

    log_unnorm is the fully normalized log density (a valid unnormalized
    one too). Moments are closed-form, so this family doubles as the
    reference for moment-error diagnostics.
    """

    has_grad = True
    has_reference_sampler = True

    def __init__(self, weights, means, variances):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        self.variances = np.atleast_2d(np.asarray(variances, dtype=np.float64))
        k, d = self.means.shape
        if self.weights.shape != (k,) or self.variances.shape != (k, d):
            raise ValidationError(
                "weights/means/variances shapes disagree: "
                f"{self.weights.shape}, {self.means.shape}, {self.variances.shape}"
            )
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {self.weights.sum()!r}, not 1")
        if np.any(self.weights < 0):
            raise ValidationError("weights must be non-negative")
        if not np.all(self.variances > 0):
            raise ValidationError("variances must be strictly positive")
        self.dim = d
        self.n_components = k
        self._log_w = np.log(self.weights)
        self._log_norm = -0.5 * np.sum(_LOG_2PI + np.log(self.variances), axis=1)

    def _component_logpdf(self, x):
        # (M, K): log w_k + log N(x; mu_k, diag(var_k))
        diff = x[:, None, :] - self.means[None, :, :]
        quad = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        return self._log_w[None, :] + self._log_norm[None, :] - 0.5 * quad

    def _log_unnorm(self, x):
        return logsumexp(self._component_logpdf(x), axis=1)

    def _grad_log(self, x):
        resp = softmax(self._component_logpdf(x), axis=1)  # (M, K)
        pulls = (self.means[None, :, :] - x[:, None, :]) / self.variances[None, :, :]
        return np.sum(resp[:, :, None] * pulls, axis=1)

    def mean(self):
        return self.weights @ self.means

    def variance(self):
        second = self.weights @ (self.variances + self.means**2)
        return second - self.mean() ** 2

    def reference_sample(self, n, rng):
        comps = rng.choice_weighted(self.n_components, self.weights, size=n)
        z = rng.standard_normal(size=(n, self.dim))
        return self.means[comps] + np.sqrt(self.variances[comps]) * z

    def nearest_component(self, x):
        """Index of the closest component mean per point (mode occupancy)."""
        x, single = self._as_batch(x)
        d2 = np.sum((x[:, None, :] - self.means[None, :, :]) ** 2, axis=2)
        idx = np.argmin(d2, axis=1)
        return int(idx[0]) if single else idx
