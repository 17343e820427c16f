"""Stochastic-gradient Langevin dynamics with polynomially decayed steps."""

import numpy as np

from ..errors import NonFiniteError
from .base import BaseSampler, MinibatchSchedule, check_particles, check_target


def sgld_step(x, target, eps, rng=None, noise=None, minibatch_indices=None):
    """One Langevin update: x + eps * grad_log(x) + sqrt(2 eps) * noise.

    `noise` overrides the N(0, I) draw (tests inject zeros). With
    `minibatch_indices` the stochastic gradient estimate is used.
    """
    if not eps > 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=np.float64)
    if minibatch_indices is not None:
        grad = target.stochastic_grad_log(x, minibatch_indices)
    else:
        grad = target.grad_log(x)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError("non-finite gradient in sgld_step")
    if noise is None:
        noise = rng.standard_normal(size=x.shape)
    return x + eps * grad + np.sqrt(2.0 * eps) * noise


def sgld_schedule(a, decay, n_steps):
    """eps_t = a / (t+1)^decay for t = 0..n_steps-1."""
    t = np.arange(n_steps, dtype=np.float64)
    return a / (t + 1.0) ** decay


class SGLD(BaseSampler):
    """Langevin chains; several run side by side, one noise stream each.

    Parameters
    ----------
    step_size : base step a in eps_t = a / (t+1)^decay.
    decay : polynomial decay exponent.
    n_steps : chain length (post burn-in rows kept every `thin` steps).
    n_chains : number of independent chains.
    minibatch_size : use stochastic gradients with this batch size
        (requires target support); None means exact gradients.
    burn_in, thin : discards; both default off.
    init_var : variance of the N(0, init_var I) initialization.
    seed : master seed; chains draw from spawned child streams.
    """

    def __init__(self, step_size=0.1, decay=0.55, n_steps=1000, n_chains=1,
                 minibatch_size=None, burn_in=0, thin=1, init_var=1.0, seed=0):
        self.step_size = step_size
        self.decay = decay
        self.n_steps = n_steps
        self.n_chains = n_chains
        self.minibatch_size = minibatch_size
        self.burn_in = burn_in
        self.thin = thin
        self.init_var = init_var
        self.seed = seed

    def fit(self, target, x0=None):
        check_target(target, needs_grad=self.minibatch_size is None,
                     needs_stochastic=self.minibatch_size is not None)
        c, d = self.n_chains, target.dim
        streams = self._stream().spawn(c + 1)
        chain_streams, init_stream = streams[:c], streams[c]
        if x0 is None:
            x = np.sqrt(self.init_var) * init_stream.standard_normal(size=(c, d))
        else:
            x = check_particles(np.broadcast_to(np.asarray(x0, dtype=np.float64),
                                                (c, d)).copy(), d, "x0")
        total = self.burn_in + self.n_steps
        eps = sgld_schedule(self.step_size, self.decay, total)
        schedules = None
        if self.minibatch_size is not None:
            schedules = [MinibatchSchedule(target.n_observations, self.minibatch_size, s)
                         for s in chain_streams]
        kept = [[] for _ in range(c)]
        for t in range(total):
            noise = np.stack([s.standard_normal(size=d) for s in chain_streams])
            if schedules is None:
                x = sgld_step(x, target, eps[t], noise=noise)
            else:
                # per-chain minibatches, so gradients go chain by chain
                grads = np.stack([
                    target.stochastic_grad_log(x[i], schedules[i].next_batch())
                    for i in range(c)
                ])
                if not np.all(np.isfinite(grads)):
                    raise NonFiniteError("non-finite gradient in sgld_step")
                x = x + eps[t] * grads + np.sqrt(2.0 * eps[t]) * noise
            if t >= self.burn_in and (t - self.burn_in) % self.thin == 0:
                for i in range(c):
                    kept[i].append(x[i])
        self.chains_ = np.asarray(kept)  # (C, T_kept, d)
        self.state_ = x.copy()
        return self

    def sample(self):
        """Kept samples pooled over chains, shape (C*T, d)."""
        return self.chains_.reshape(-1, self.chains_.shape[-1])
