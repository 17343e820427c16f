import itertools
import json

import numpy as np
import pytest

from salmc.errors import ValidationError
from salmc.rng import RngStream
from salmc.targets import (
    BUILTIN_TARGETS,
    GaussianMixture,
    LogisticRegressionPosterior,
    Ring,
    load_target,
    target_from_dict,
)


def fd_grad(f, x, step=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


# -- Gaussian mixtures -------------------------------------------------


def test_single_standard_gaussian_at_mean():
    g = GaussianMixture([1.0], [[0.0]], [[1.0]])
    assert g.log_unnorm(np.zeros(1)) == pytest.approx(-0.5 * np.log(2 * np.pi), rel=1e-12)


def test_symmetric_two_component_weights_cancel():
    g = GaussianMixture([0.5, 0.5], [[-3.0], [3.0]], [[1.0], [1.0]])
    single = GaussianMixture([1.0], [[3.0]], [[1.0]])
    # at 0 both components contribute equally, so the mixture density
    # equals the single-component density there
    assert g.log_unnorm(np.zeros(1)) == pytest.approx(single.log_unnorm(np.zeros(1)), rel=1e-12)


def test_mog6_matches_naive_summation():
    g = load_target("mog6")
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.uniform(-10, 10, size=2)
        total = 0.0
        for w, mu, var in zip(g.weights, g.means, g.variances):
            norm = np.prod(1.0 / np.sqrt(2 * np.pi * var))
            total += w * norm * np.exp(-0.5 * np.sum((x - mu) ** 2 / var))
        assert g.log_unnorm(x) == pytest.approx(np.log(total), rel=1e-10)


def test_gmm_permutation_invariant():
    g = load_target("mog6")
    perm = [3, 0, 5, 1, 4, 2]
    h = GaussianMixture(g.weights[perm], g.means[perm], g.variances[perm])
    x = np.array([1.0, -2.0])
    assert g.log_unnorm(x) == pytest.approx(h.log_unnorm(x), rel=1e-12)
    np.testing.assert_allclose(g.grad_log(x), h.grad_log(x), rtol=1e-10)


def test_gmm_closed_form_moments():
    g = GaussianMixture([0.3, 0.7], [[-2.0, 1.0], [4.0, -1.0]], [[0.5, 1.0], [2.0, 3.0]])
    np.testing.assert_allclose(g.mean(), [0.3 * -2 + 0.7 * 4, 0.3 * 1 + 0.7 * -1])
    # E[x^2] - mean^2, first dimension: 0.3*(0.5+4) + 0.7*(2+16) - 2.2^2
    assert g.variance()[0] == pytest.approx(0.3 * 4.5 + 0.7 * 18.0 - 2.2**2)


def test_gmm_reference_sample_moments():
    g = load_target("mog2")
    x = g.reference_sample(200000, RngStream(4))
    np.testing.assert_allclose(x.mean(axis=0), g.mean(), atol=0.05)
    np.testing.assert_allclose(x.var(axis=0), g.variance(), rtol=0.02)


def test_gmm_grad_matches_finite_differences():
    g = load_target("mog6")
    rng = np.random.default_rng(10)
    pts = rng.uniform(-10, 10, size=(200, 2))
    grads = g.grad_log(pts)
    for i in range(0, 200, 17):
        numeric = fd_grad(lambda v: g.log_unnorm(v), pts[i].copy())
        np.testing.assert_allclose(grads[i], numeric, rtol=1e-5, atol=1e-7)


def test_nearest_component():
    g = load_target("mog2")
    assert g.nearest_component(np.array([-4.0, 1.0])) == 0
    assert g.nearest_component(np.array([6.0, -1.0])) == 1
    idx = g.nearest_component(np.array([[-5.0, 0.0], [5.0, 0.0]]))
    np.testing.assert_array_equal(idx, [0, 1])


def test_gmm_validation():
    with pytest.raises(ValidationError):
        GaussianMixture([0.6, 0.6], [[0.0], [1.0]], [[1.0], [1.0]])
    with pytest.raises(ValidationError):
        GaussianMixture([0.5, 0.5], [[0.0], [1.0]], [[1.0], [0.0]])
    with pytest.raises(ValidationError):
        GaussianMixture([1.0], [[0.0, 0.0]], [[1.0]])


# -- rings ---------------------------------------------------------------


def test_ring_log_density_on_circle_is_zero():
    ring = Ring([2.0], 0.32)
    x = 2.0 * np.array([np.cos(0.7), np.sin(0.7)])
    assert ring.log_unnorm(x) == pytest.approx(0.0, abs=1e-12)


def test_ring_log_density_at_origin():
    ring = Ring([2.0], 0.32)
    assert ring.log_unnorm(np.zeros(2)) == pytest.approx(-(2.0**2) / 0.32, rel=1e-12)


def test_ring_grad_matches_finite_differences():
    ring = Ring([2.0], 0.32)
    ring5 = Ring([1.0, 2.0, 3.0, 4.0, 5.0], 0.04)
    rng = np.random.default_rng(8)
    for tgt in (ring, ring5):
        pts = rng.uniform(-6, 6, size=(200, 2))
        grads = tgt.grad_log(pts)
        for i in range(0, 200, 23):
            numeric = fd_grad(lambda v: tgt.log_unnorm(v), pts[i].copy())
            np.testing.assert_allclose(grads[i], numeric, rtol=1e-5, atol=1e-6)


def test_ring_grad_at_origin_is_zero():
    np.testing.assert_array_equal(Ring([2.0], 0.32).grad_log(np.zeros(2)), np.zeros(2))


def test_ring_reference_sample_radii():
    from scipy.integrate import quad
    from scipy.optimize import brentq

    ring = Ring([2.0], 0.32)
    x = ring.reference_sample(100000, RngStream(6))
    rho = np.linalg.norm(x, axis=1)
    # independent oracle: median of the radial density rho*exp(-(rho-2)^2/0.32)
    # via adaptive quadrature and root finding
    pdf = lambda r: r * np.exp(-((r - 2.0) ** 2) / 0.32)
    total = quad(pdf, 0.0, 10.0)[0]
    median = brentq(lambda r: quad(pdf, 0.0, r)[0] / total - 0.5, 0.5, 4.0)
    assert abs(np.median(rho) - median) < 0.01
    assert np.percentile(rho, 99) < 3.5
    # angles uniform
    theta = np.arctan2(x[:, 1], x[:, 0])
    assert abs(np.mean(theta > 0) - 0.5) < 0.01
    np.testing.assert_allclose(x.mean(axis=0), [0, 0], atol=0.02)
    np.testing.assert_allclose(x.var(axis=0), ring.variance(), rtol=0.02)


def test_ring5_covers_all_radii():
    ring5 = Ring([1.0, 2.0, 3.0, 4.0, 5.0], 0.04)
    rho = np.linalg.norm(ring5.reference_sample(50000, RngStream(7)), axis=1)
    counts = np.histogram(rho, bins=[0.5, 1.5, 2.5, 3.5, 4.5, 5.5])[0]
    assert np.all(counts > 0)
    # outer rings carry more mass (mass scales with radius)
    assert counts[4] > counts[0]


# -- logistic regression ------------------------------------------------


def make_blr(n=10, b=3, seed=0):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(n, b))
    y = (rng.uniform(size=n) < 0.5).astype(float)
    return LogisticRegressionPosterior(f, y, prior_precision=1.0, minibatch_size=4)


def test_blr_full_batch_equals_exact_gradient():
    m = make_blr()
    w = np.array([0.3, -0.2, 0.5])
    np.testing.assert_allclose(
        m.stochastic_grad_log(w, np.arange(10)), m.grad_log(w), rtol=1e-12
    )


def test_blr_gradient_at_zero_weights():
    # symmetric features, balanced labels: sigmoid(0) = 0.5 everywhere
    f = np.array([[1.0, 2.0], [-1.0, -2.0], [3.0, -1.0], [-3.0, 1.0]])
    y = np.array([1.0, 0.0, 1.0, 0.0])
    m = LogisticRegressionPosterior(f, y)
    w = np.zeros(2)
    idx = np.array([0, 1])
    expected = (4 / 2) * ((y[idx] - 0.5) @ f[idx])
    np.testing.assert_allclose(m.stochastic_grad_log(w, idx), expected, rtol=1e-12)


def test_blr_minibatch_gradient_unbiased_by_enumeration():
    m = make_blr(n=10)
    w = np.array([0.1, 0.4, -0.7])
    batches = list(itertools.combinations(range(10), 4))
    avg = np.mean([m.stochastic_grad_log(w, np.array(b)) for b in batches], axis=0)
    np.testing.assert_allclose(avg, m.grad_log(w), rtol=1e-10)


def test_blr_grad_matches_finite_differences():
    m = make_blr(n=30, b=4, seed=3)
    rng = np.random.default_rng(5)
    for _ in range(5):
        w = rng.normal(size=4)
        numeric = fd_grad(lambda v: m.log_unnorm(v), w.copy())
        np.testing.assert_allclose(m.grad_log(w), numeric, rtol=1e-5, atol=1e-7)


def test_blr_validation():
    with pytest.raises(ValidationError):
        LogisticRegressionPosterior(np.ones((3, 2)), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(ValidationError):
        LogisticRegressionPosterior(np.ones((3, 2)), np.array([0.0, 1.0]))
    m = make_blr()
    with pytest.raises(ValidationError):
        m.stochastic_grad_log(np.zeros(3), np.array([], dtype=int))


# -- registry ------------------------------------------------------------


def test_all_builtin_targets_load_and_evaluate():
    for name in BUILTIN_TARGETS:
        t = load_target(name)
        x = np.zeros(t.dim)
        assert np.isfinite(t.log_unnorm(x))
        assert np.all(np.isfinite(t.grad_log(x)))


def test_mog10_layout():
    t = load_target("mog10")
    assert t.dim == 5 and t.n_components == 10
    assert np.all(np.abs(t.means) <= 4.0)
    assert np.all((t.variances >= 0.5) & (t.variances <= 2.0))


def test_load_target_from_file(tmp_path):
    doc = {"type": "ring", "radii": [1.5], "sharpness": 0.1}
    p = tmp_path / "custom.json"
    p.write_text(json.dumps(doc))
    t = load_target(str(p))
    assert t.log_unnorm(np.array([1.5, 0.0])) == pytest.approx(0.0, abs=1e-12)


def test_registry_validation_errors():
    with pytest.raises(ValidationError, match="type"):
        target_from_dict({"weights": [1.0]})
    with pytest.raises(ValidationError, match="missing key"):
        target_from_dict({"type": "gmm", "weights": [1.0]})
    with pytest.raises(ValidationError):
        load_target("no_such_target")
    with pytest.raises(ValidationError, match="JSON"):
        import tempfile

        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
            fh.write("{broken")
        load_target(fh.name)
