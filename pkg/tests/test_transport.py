import itertools

import numpy as np
import pytest

from salmc import autodiff as ad
from salmc.transport import W2Config, cost_matrix, entropic_w2, exact_w2


def brute_force_w2(a, b):
    """Full enumeration over all M! assignments."""
    m = a.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(m)):
        total = sum(float(np.sum((a[i] - b[p]) ** 2)) for i, p in enumerate(perm))
        best = min(best, total)
    return best / m


# -- entropic approximation ----------------------------------------------


def test_single_pair_closed_form():
    out = np.array([[0.0, 0.0]])
    inp = np.array([[3.0, 0.0]])
    cfg = W2Config(temperature=2.0, prefactor=0.7)
    c = 9.0
    expected = 0.7 * c * np.exp(-c / 2.0)
    assert entropic_w2(out, inp, cfg).item() == pytest.approx(expected, rel=1e-12)


def test_identical_sets_cross_terms_survive():
    pts = np.array([[0.0, 0.0], [2.0, 0.0]])
    cfg = W2Config(temperature=3.0, prefactor=1.0)
    c = 4.0  # the two inter-pair squared distances
    expected = 2.0 * c * np.exp(-c / 3.0)
    assert entropic_w2(pts, pts, cfg).item() == pytest.approx(expected, rel=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    outputs = rng.normal(size=(5, 2))
    inputs = rng.normal(size=(5, 2))
    cfg = W2Config(temperature=1.7)

    out = ad.parameter(outputs)
    entropic_w2(out, inputs, cfg).backward()

    step = 1e-6
    for i in range(5):
        for j in range(2):
            o = outputs.copy()
            o[i, j] += step
            hi = entropic_w2(o, inputs, cfg).item()
            o[i, j] -= 2 * step
            lo = entropic_w2(o, inputs, cfg).item()
            numeric = (hi - lo) / (2 * step)
            assert out.grad[i, j] == pytest.approx(numeric, rel=1e-5, abs=1e-10)


def test_inputs_receive_no_gradient():
    rng = np.random.default_rng(4)
    out = ad.parameter(rng.normal(size=(4, 2)))
    inp = ad.parameter(rng.normal(size=(4, 2)))
    entropic_w2(out, inp).backward()
    assert out.grad is not None
    assert inp.grad is None  # detached by construction


def test_nonnegative_and_zero_iff_coincident():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(6, 3))
    assert entropic_w2(a, a + 0.1).item() > 0.0
    coincident = np.zeros((4, 2))
    assert entropic_w2(coincident, coincident).item() == 0.0


def test_symmetry_in_arguments():
    rng = np.random.default_rng(6)
    a, b = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
    cfg = W2Config(temperature=2.0)
    assert entropic_w2(a, b, cfg).item() == pytest.approx(
        entropic_w2(b, a, cfg).item(), rel=1e-12)


def test_median_temperature_default():
    rng = np.random.default_rng(7)
    a, b = rng.normal(size=(4, 2)), rng.normal(size=(4, 2))
    c = np.sum((a[:, None] - b[None, :]) ** 2, axis=2)
    lam = np.median(c)
    expected = np.sum(c * np.exp(-c / lam))
    assert entropic_w2(a, b).item() == pytest.approx(expected, rel=1e-12)


def test_w2config_validation_and_strength():
    assert W2Config(balance=0.1, proximal_step=0.5).strength == pytest.approx(0.1)
    with pytest.raises(ValueError):
        W2Config(temperature=-1.0)
    with pytest.raises(ValueError):
        W2Config(prefactor=0.0)


def test_cost_matrix_mismatch():
    with pytest.raises(ValueError):
        cost_matrix(np.zeros((3, 2)), np.zeros((4, 2)))


# -- exact oracle ----------------------------------------------------------


def test_oracle_identical_sets_zero():
    pts = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    assert exact_w2(pts, pts) == 0.0


def test_oracle_shifted_pair():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert exact_w2(a, a) == 0.0
    b = np.array([[2.0, 0.0], [3.0, 0.0]])
    assert exact_w2(a, b) == pytest.approx(4.0)


def test_oracle_matches_brute_force():
    rng = np.random.default_rng(8)
    for m in (2, 3, 4, 5, 6):
        for _ in range(5):
            a = rng.normal(size=(m, 2))
            b = rng.normal(size=(m, 2))
            assert exact_w2(a, b) == pytest.approx(brute_force_w2(a, b), rel=1e-12)


def test_oracle_rigid_translation():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(5, 3))
    t = np.array([0.7, -1.2, 0.4])
    assert exact_w2(a, a + t) == pytest.approx(float(np.sum(t**2)), rel=1e-12)


def test_oracle_size_guard():
    big = np.zeros((11, 2))
    with pytest.raises(ValueError):
        exact_w2(big, big)
