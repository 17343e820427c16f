"""Chain quality metrics: ESS, R-hat, MMD, autocorrelation, moment MSE.

Conventions. ESS uses the initial-positive-sequence truncation of the
autocorrelation sum and is clipped to [1, cap]; a zero-variance
dimension reports ESS 1 and is flagged rather than treated as "no Monte
Carlo error". R-hat is the classic multi-chain statistic without
rank-normalization or splitting. MMD is the biased V-statistic with a
pooled median-trick bandwidth.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateChainError, ValidationError
from .kernels import KernelConfig, kernel_matrix


def _autocovariance(x):
    # FFT autocovariance, normalized by T (biased), lags 0..T-1
    t = len(x)
    xc = x - x.mean()
    n = 1 << (2 * t - 1).bit_length()
    f = np.fft.rfft(xc, n)
    acov = np.fft.irfft(f * np.conj(f), n)[:t].real
    return acov / t


def autocorrelation(chain, max_lag):
    """Per-dimension autocorrelation for lags 0..max_lag, shape (L+1, d)."""
    x = np.asarray(chain, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    t, d = x.shape
    if max_lag >= t:
        raise ValidationError(f"max_lag {max_lag} needs a chain longer than that")
    out = np.empty((max_lag + 1, d))
    for j in range(d):
        acov = _autocovariance(x[:, j])
        if acov[0] <= 0:
            out[:, j] = np.nan
            out[0, j] = 1.0
        else:
            out[:, j] = acov[: max_lag + 1] / acov[0]
    return out


@dataclass
class EssResult:
    per_dim: np.ndarray
    minimum: float
    zero_variance_dims: list


def ess(chain, cap=2000):
    """Effective sample size per dimension, T / (1 + 2 sum rho_k).

    The sum over k >= 1 keeps whole consecutive pairs (rho_1+rho_2),
    (rho_3+rho_4), ... and stops at the first pair whose sum is not
    positive. Kept pairs are positive, so tau >= 1 and ESS <= T before
    the [1, cap] clip.
    """
    x = np.asarray(chain, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    t, d = x.shape
    if t < 10:
        raise ValidationError(f"need at least 10 samples for ESS, got {t}")
    per_dim = np.empty(d)
    flagged = []
    for j in range(d):
        acov = _autocovariance(x[:, j])
        if acov[0] <= 0:
            per_dim[j] = 1.0
            flagged.append(j)
            continue
        rho = acov / acov[0]
        n_pairs = (t - 1) // 2
        pair = rho[1 : 2 * n_pairs : 2] + rho[2 : 2 * n_pairs + 1 : 2]
        bad = np.nonzero(pair <= 0)[0]
        keep = bad[0] if len(bad) else n_pairs
        tau = 1.0 + 2.0 * pair[:keep].sum()
        per_dim[j] = np.clip(t / tau, 1.0, cap)
    return EssResult(per_dim, float(per_dim.min()), flagged)


def ess_per_second(min_ess, sampling_seconds):
    """Sampling wall-clock only; training time is excluded by contract."""
    if not sampling_seconds > 0:
        raise ValidationError("sampling_seconds must be positive")
    return min_ess / sampling_seconds


def gelman_rubin(chains):
    """Per-dimension R-hat: sqrt((T-1)/T + B/(T W)) from C chains of length T."""
    x = np.asarray(chains, dtype=np.float64)
    if x.ndim != 3:
        raise ValidationError(f"chains must be (C, T, d), got shape {x.shape}")
    c, t, d = x.shape
    if c < 2 or t < 10:
        raise ValidationError(f"need at least 2 chains of 10+ samples, got {c}x{t}")
    within = x.var(axis=1, ddof=1)
    if np.any(within.sum(axis=1) == 0) or np.any(within == 0):
        bad = np.argwhere(within == 0)[0]
        raise DegenerateChainError(
            f"chain {bad[0]} has zero variance in dimension {bad[1]}"
        )
    w = within.mean(axis=0)
    b = t * x.mean(axis=1).var(axis=0, ddof=1)
    return np.sqrt((t - 1) / t + b / (t * w))


def mmd(set_a, set_b, kernel=KernelConfig("median")):
    """Kernel MMD between two sample sets, bandwidth from the pooled set."""
    a = np.atleast_2d(np.asarray(set_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(set_b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValidationError("sample sets differ in dimension")
    h = kernel.resolve(np.concatenate([a, b], axis=0))
    kaa = kernel_matrix(a, h).mean()
    kbb = kernel_matrix(b, h).mean()
    kab = kernel_matrix(a, h, b).mean()
    return float(np.sqrt(max(kaa + kbb - 2.0 * kab, 0.0)))


def moment_mse(samples, ref_mean, ref_var):
    """Squared moment errors averaged over dimensions: (mse_mean, mse_var)."""
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    mu = np.asarray(ref_mean, dtype=np.float64)
    var = np.asarray(ref_var, dtype=np.float64)
    mse_mean = float(np.mean((x.mean(axis=0) - mu) ** 2))
    mse_var = float(np.mean((x.var(axis=0) - var) ** 2))
    return mse_mean, mse_var


@dataclass
class ChainDiagnostics:
    """Everything the experiment runner reports about a set of chains."""

    ess_per_dim: list
    ess_min: float
    ess_cap: int
    zero_variance_dims: list
    r_hat: list
    mmd_trace: list
    autocorrelation: list
    mse_mean: float
    mse_var: float
    sampling_seconds: float
    ess_per_sec: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "ess_per_dim": list(map(float, self.ess_per_dim)),
            "ess_min": self.ess_min,
            "ess_cap": self.ess_cap,
            "zero_variance_dims": self.zero_variance_dims,
            "r_hat": list(map(float, self.r_hat)) if self.r_hat is not None else None,
            "mmd_trace": self.mmd_trace,
            "autocorrelation": self.autocorrelation,
            "mse_mean": None if np.isnan(self.mse_mean) else self.mse_mean,
            "mse_var": None if np.isnan(self.mse_var) else self.mse_var,
            "sampling_seconds": self.sampling_seconds,
            "ess_per_sec": self.ess_per_sec,
            "extra": self.extra,
        }


def compute_diagnostics(chains, target=None, sampling_seconds=1.0, cap=2000,
                        max_lag=50, mmd_trace=None):
    """Assemble a ChainDiagnostics record for (C, T, d) chains.

    ESS is computed per chain and averaged; R-hat needs C >= 2 and is
    None otherwise. Moment MSEs need a target with closed-form moments.
    """
    x = np.asarray(chains, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    c, t, d = x.shape
    per_chain = [ess(x[i], cap) for i in range(c)]
    per_dim = np.mean([r.per_dim for r in per_chain], axis=0)
    flagged = sorted({j for r in per_chain for j in r.zero_variance_dims})
    r_hat = gelman_rubin(x) if c >= 2 else None
    acf = autocorrelation(x[0], min(max_lag, t - 1))
    mse_mean = mse_var = float("nan")
    if target is not None:
        try:
            mse_mean, mse_var = moment_mse(
                x.reshape(-1, d), target.mean(), target.variance()
            )
        except NotImplementedError:
            pass
    ess_min = float(per_dim.min())
    return ChainDiagnostics(
        ess_per_dim=per_dim.tolist(),
        ess_min=ess_min,
        ess_cap=cap,
        zero_variance_dims=flagged,
        r_hat=None if r_hat is None else r_hat.tolist(),
        mmd_trace=mmd_trace or [],
        autocorrelation=acf.tolist(),
        mse_mean=mse_mean,
        mse_var=mse_var,
        sampling_seconds=sampling_seconds,
        ess_per_sec=ess_per_second(ess_min, sampling_seconds),
    )
