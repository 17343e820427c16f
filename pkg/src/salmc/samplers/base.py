"""Shared sampler plumbing: estimator base class, validation helpers,
and the random-permutation minibatch schedule."""

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ValidationError
from ..rng import RngStream
from ..targets.base import TargetDistribution


def check_target(target, needs_grad=False, needs_stochastic=False):
    if not isinstance(target, TargetDistribution):
        raise ValidationError(f"expected a TargetDistribution, got {type(target).__name__}")
    if needs_grad and not target.has_grad:
        raise ValidationError(f"{type(target).__name__} provides no gradient")
    if needs_stochastic and not target.has_stochastic_grad:
        raise ValidationError(f"{type(target).__name__} provides no stochastic gradient")
    return target


def check_particles(x, dim, name="particles"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError(f"{name} must be a 2D array, got shape {x.shape}")
    if x.shape[1] != dim:
        raise ValidationError(f"{name} have dimension {x.shape[1]}, target has {dim}")
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} contain non-finite values")
    return x


class MinibatchSchedule:
    """Shuffle once per epoch, then walk contiguous blocks of the permutation."""

    def __init__(self, n_total, batch_size, rng: RngStream):
        if not 1 <= batch_size <= n_total:
            raise ValidationError(f"batch size {batch_size} not in [1, {n_total}]")
        self.n_total = n_total
        self.batch_size = batch_size
        self._rng = rng
        self._perm = rng.permutation(n_total)
        self._cursor = 0

    def next_batch(self):
        if self._cursor >= self.n_total:
            self._perm = self._rng.permutation(self.n_total)
            self._cursor = 0
        block = self._perm[self._cursor:self._cursor + self.batch_size]
        self._cursor += self.batch_size
        return block


class BaseSampler(BaseEstimator):
    """Common surface for all samplers: `fit(target)` draws samples and
    stores them on trailing-underscore attributes."""

    def fit(self, target, x0=None):
        raise NotImplementedError

    def _stream(self):
        return RngStream(self.seed)
