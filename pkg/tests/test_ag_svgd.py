import numpy as np
import pytest

from salmc.errors import WeightDegeneracyError
from salmc.kernels import KernelConfig, kernel_matrix, rbf
from salmc.rng import RngStream
from salmc.samplers.ag_svgd import (
    AGSVGD,
    ag_svgd_step,
    density_ratio_weights,
    kde_estimate,
    stein_gradient_estimate,
)
from salmc.targets import GaussianMixture, load_target
from salmc.targets.base import TargetDistribution


class TabulatedTarget(TargetDistribution):
    """Returns precomputed log-density values for a known particle set."""

    def __init__(self, dim, values):
        self.dim = dim
        self.values = np.asarray(values, dtype=np.float64)

    def _log_unnorm(self, x):
        return self.values[: x.shape[0]].copy()


def test_kde_single_particle_self_density():
    assert kde_estimate([[1.5, -2.0]], [1.5, -2.0], h_star=3.0) == 1.0


def test_kde_far_query_vanishes():
    rng = RngStream(0)
    x = rng.normal(size=(20, 3))
    val = kde_estimate(x, 100.0 * np.ones(3), h_star=1.0)
    assert 0.0 <= val < 1e-100


def test_kde_matches_loop_sum():
    rng = RngStream(1)
    x = rng.normal(size=(30, 2))
    q = rng.normal(size=(5, 2))
    got = kde_estimate(x, q, h_star=0.7)
    for i in range(5):
        want = np.mean([rbf(q[i], x[j], 0.7) for j in range(30)])
        assert abs(got[i] - want) < 1e-12


def test_stein_huge_ridge_kills_estimate():
    rng = RngStream(2)
    x = rng.normal(size=(40, 2))
    g = stein_gradient_estimate(x, h_star=2.0, eta=1e12)
    assert np.max(np.abs(g)) < 1e-8


def test_stein_negation_equivariance():
    rng = RngStream(3)
    x = rng.normal(size=(25, 3))
    g_pos = stein_gradient_estimate(x, h_star=1.5, eta=0.5)
    g_neg = stein_gradient_estimate(-x, h_star=1.5, eta=0.5)
    assert np.allclose(g_neg, -g_pos, atol=1e-10)


def test_stein_tracks_gaussian_score():
    # draws from N(0, I) have score -x; a good estimate points the same way
    rng = RngStream(4)
    x = rng.normal(size=(150, 2))
    g = stein_gradient_estimate(x, h_star=8.0, eta=5.0)
    cos = np.sum(g * (-x), axis=1) / (
        np.linalg.norm(g, axis=1) * np.linalg.norm(x, axis=1)
    )
    assert np.mean(cos) > 0.8


def test_stein_rejects_bad_ridge():
    with pytest.raises(ValueError):
        stein_gradient_estimate(np.zeros((3, 2)), h_star=1.0, eta=0.0)


def test_weights_normalized_and_ordered():
    rng = RngStream(5)
    x = rng.normal(size=(30, 2))
    target = GaussianMixture([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    w = density_ratio_weights(x, target, h_star=1.0)
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.all(w > 0)


def test_weights_uniform_when_ratio_constant():
    rng = RngStream(6)
    x = rng.normal(size=(12, 2))
    log_kde = np.log(kde_estimate(x, x, h_star=2.0))
    target = TabulatedTarget(2, log_kde + 3.7)
    w = density_ratio_weights(x, target, h_star=2.0)
    assert np.allclose(w, 1.0 / 12, atol=1e-12)


def test_weights_clip_formula():
    rng = RngStream(7)
    x = rng.normal(size=(15, 2))
    target = GaussianMixture([1.0], [[0.0, 0.0]], [[2.0, 2.0]])
    log_kde = np.log(kde_estimate(x, x, h_star=1.0))
    log_p = target.log_unnorm(x)
    raw = log_kde - log_p
    j = int(np.argmax(raw))
    t = (log_kde - log_kde[j]) - (log_p - log_p[j])
    t = np.minimum(t, np.quantile(t, 0.8))
    expected = np.exp(t - t.max())
    expected /= expected.sum()
    got = density_ratio_weights(x, target, h_star=1.0, clip_quantile=0.8)
    assert np.allclose(got, expected, atol=1e-12)


def test_weights_target_rescaling_is_bit_exact():
    # log values quantized to 2^-20 with magnitude < 2^10, so adding the
    # exactly-representable constant 64.0 changes no bit of any difference
    rng = RngStream(8)
    x = rng.normal(size=(20, 2))
    quantized = np.round(rng.normal(scale=100.0, size=20) * 2**20) / 2**20
    base = TabulatedTarget(2, quantized)
    shifted = TabulatedTarget(2, quantized + 64.0)
    w0 = density_ratio_weights(x, base, h_star=1.0)
    w1 = density_ratio_weights(x, shifted, h_star=1.0)
    assert np.array_equal(w0, w1)


def test_weights_reject_zero_density():
    x = np.array([[0.0, 0.0], [1.0, 1.0]])
    target = TabulatedTarget(2, [0.0, -np.inf])
    with pytest.raises(WeightDegeneracyError):
        density_ratio_weights(x, target, h_star=1.0)


def test_step_zero_size_is_identity():
    rng = RngStream(9)
    x = rng.normal(size=(10, 2))
    target = GaussianMixture([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    out = ag_svgd_step(x, target, 0.0)
    assert np.array_equal(out, x)


def test_step_matches_hand_computed_update():
    # constant density ratio forces uniform weights; the update then has
    # the plain SVGD shape with the estimated score in place of grad log p
    rng = RngStream(10)
    m = 8
    x = rng.normal(size=(m, 2))
    h = 1.3
    h_star = 2.1
    eta = 0.7
    eps = 0.05
    log_kde = np.log(kde_estimate(x, x, h_star))
    target = TabulatedTarget(2, log_kde - 1.0)
    got = ag_svgd_step(
        x, target, eps,
        kernel=KernelConfig("fixed", h), est_kernel=KernelConfig("fixed", h_star),
        eta=eta,
    )
    ghat = stein_gradient_estimate(x, h_star, eta)
    want = x.copy()
    for i in range(m):
        upd = np.zeros(2)
        for j in range(m):
            kij = rbf(x[i], x[j], h)
            upd += (1.0 / m) * (ghat[j] * kij + (2.0 / h) * (x[i] - x[j]) * kij)
        want[i] += eps * upd
    assert np.allclose(got, want, atol=1e-10)


def test_step_permutation_equivariance():
    rng = RngStream(11)
    x = rng.normal(size=(14, 2))
    target = GaussianMixture([1.0], [[0.5, -0.5]], [[1.0, 2.0]])
    perm = rng.permutation(14)
    out = ag_svgd_step(x, target, 0.1, eta=1.0)
    out_perm = ag_svgd_step(x[perm], target, 0.1, eta=1.0)
    assert np.allclose(out[perm], out_perm, atol=1e-10)


def test_step_needs_two_particles():
    target = GaussianMixture([1.0], [[0.0]], [[1.0]])
    with pytest.raises(ValueError):
        ag_svgd_step(np.zeros((1, 1)), target, 0.1)


def test_two_mode_migration_balances_occupancy():
    # gradient-free updates should populate both far-apart modes
    target = load_target("mog2")
    sampler = AGSVGD(
        step_size=0.5,
        n_iters=500,
        n_particles=200,
        kernel=KernelConfig("scaled_median", 0.1),
        est_kernel=KernelConfig("median"),
        eta=1.0,
        init_var=2.5,
        seed=4,
    )
    sampler.fit(target)
    occ = np.bincount(target.nearest_component(sampler.particles_), minlength=2) / 200
    assert occ.min() >= 0.3
    assert occ.max() <= 0.7


def test_estimator_seed_reproducibility():
    target = GaussianMixture([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    a = AGSVGD(n_iters=20, n_particles=30, seed=12).fit(target).sample()
    b = AGSVGD(n_iters=20, n_particles=30, seed=12).fit(target).sample()
    assert np.array_equal(a, b)


def test_estimator_accepts_x0_and_callback():
    target = GaussianMixture([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    rng = RngStream(13)
    x0 = rng.normal(size=(25, 2))
    seen = []
    sampler = AGSVGD(n_iters=5, step_size=0.05)
    sampler.fit(target, x0=x0, callback=lambda it, x: seen.append(it))
    assert seen == [0, 1, 2, 3, 4]
    assert sampler.particles_.shape == (25, 2)
    assert not np.array_equal(sampler.particles_, x0)


def test_estimator_frozen_bandwidths_change_trajectory():
    target = load_target("mog2")
    frozen = AGSVGD(n_iters=30, n_particles=40, freeze_bandwidths=True, seed=3)
    live = AGSVGD(n_iters=30, n_particles=40, freeze_bandwidths=False, seed=3)
    xf = frozen.fit(target).sample()
    xl = live.fit(target).sample()
    assert xf.shape == xl.shape == (40, 2)
    assert not np.array_equal(xf, xl)


def test_estimator_sklearn_params():
    sampler = AGSVGD(step_size=0.25, eta=2.0)
    params = sampler.get_params()
    assert params["step_size"] == 0.25
    clone = AGSVGD(**params)
    assert clone.get_params() == params
