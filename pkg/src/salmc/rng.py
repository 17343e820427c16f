"""Seeded random streams with a documented, reproducible output sequence.

Every stochastic component in the toolkit draws from an `RngStream`: a
PCG64 counter-based generator plus an inverse-CDF Gaussian transform.
Identical seed and identical call sequence give bit-identical outputs,
which the determinism tests rely on.
"""

import numpy as np
from scipy.special import ndtri

# Uniform draws are (k + 0.5) / 2^53 with k a 53-bit PCG64 integer, so the
# open interval (0, 1) is guaranteed and ndtri never sees 0 or 1.
_DENOM = float(2**53)


class RngStream:
    """PCG64-backed stream; Gaussians via the inverse normal CDF."""

    def __init__(self, seed):
        self.seed = seed
        self._bits = np.random.Generator(np.random.PCG64(seed))

    def uniform(self, size=None):
        """Uniform draws in the open interval (0, 1)."""
        k = self._bits.integers(0, 2**53, size=size)
        return (k + 0.5) / _DENOM

    def standard_normal(self, size=None):
        return ndtri(self.uniform(size=size))

    def normal(self, loc=0.0, scale=1.0, size=None):
        return loc + scale * self.standard_normal(size=size)

    def integers(self, low, high, size=None):
        return self._bits.integers(low, high, size=size)

    def permutation(self, n):
        return self._bits.permutation(n)

    def choice_weighted(self, n, p, size=None):
        """Index draws in [0, n) with probabilities `p` (inverse-CDF)."""
        cdf = np.cumsum(np.asarray(p, dtype=np.float64))
        cdf /= cdf[-1]
        return np.searchsorted(cdf, self.uniform(size=size), side="right")

    def spawn(self, n):
        """`n` independent child streams, deterministic in the parent seed."""
        seqs = np.random.SeedSequence(self.seed).spawn(n)
        children = []
        for seq in seqs:
            child = RngStream.__new__(RngStream)
            child.seed = seq.entropy
            child._bits = np.random.Generator(np.random.PCG64(seq))
            children.append(child)
        return children
