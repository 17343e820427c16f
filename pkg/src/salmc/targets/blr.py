"""Bayesian logistic regression posterior with a Gaussian prior."""

import numpy as np
from scipy.special import expit

from ..errors import ValidationError
from .base import TargetDistribution


class LogisticRegressionPosterior(TargetDistribution):
    """Posterior over weights for binary logistic regression.

    The design matrix is taken as given (standardization and the bias
    column are the loader's job). The prior is zero-mean Gaussian with
    precision `prior_precision`.
    """

    has_grad = True
    has_stochastic_grad = True

    def __init__(self, features, labels, prior_precision=1.0, minibatch_size=64):
        self.features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        self.labels = np.asarray(labels, dtype=np.float64).ravel()
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValidationError(
                f"{self.features.shape[0]} feature rows vs {self.labels.shape[0]} labels"
            )
        if not np.all(np.isin(self.labels, (0.0, 1.0))):
            raise ValidationError("labels must be 0 or 1")
        if not prior_precision > 0:
            raise ValidationError("prior precision must be positive")
        self.prior_precision = float(prior_precision)
        self.minibatch_size = int(min(minibatch_size, self.labels.size))
        self.n_observations = self.labels.size
        self.dim = self.features.shape[1]

    def _log_unnorm(self, w):
        z = w @ self.features.T  # (M, N)
        loglik = np.sum(self.labels * z - np.logaddexp(0.0, z), axis=1)
        logprior = -0.5 * self.prior_precision * np.sum(w * w, axis=1)
        return logprior + loglik

    def _grad_log(self, w):
        z = w @ self.features.T
        return -self.prior_precision * w + (self.labels - expit(z)) @ self.features

    def stochastic_grad_log(self, w, indices):
        indices = np.asarray(indices)
        if indices.size == 0:
            raise ValidationError("minibatch is empty")
        w, single = self._as_batch(w)
        f = self.features[indices]
        y = self.labels[indices]
        scale = self.n_observations / indices.size
        z = w @ f.T
        grad = -self.prior_precision * w + scale * ((y - expit(z)) @ f)
        return grad[0] if single else grad
