import numpy as np
import pytest

from salmc import autodiff as ad
from salmc.errors import ValidationError
from salmc.nets import MLP, RMSProp
from salmc.rng import RngStream


def test_predict_matches_graph_forward():
    rng = RngStream(3)
    net = MLP([4, 16, 16, 2], ["tanh", "tanh", "linear"], rng)
    x = rng.normal(size=(7, 4))
    out = net(x)
    assert np.allclose(out.data, net.predict(x), atol=1e-12)


def test_sigmoid_head_bounded():
    rng = RngStream(4)
    net = MLP([3, 8, 8, 1], ["tanh", "tanh", "sigmoid"], rng)
    y = net.predict(10.0 * rng.normal(size=(50, 3)))
    assert np.all(y > 0.0) and np.all(y < 1.0)


def test_gradients_flow_to_all_parameters():
    rng = RngStream(5)
    net = MLP([2, 8, 8, 1], ["tanh", "tanh", "linear"], rng)
    loss = net(rng.normal(size=(6, 2))).mean()
    loss.backward()
    for p in net.parameters():
        assert p.grad is not None
        assert p.grad.shape == p.data.shape


def test_gradcheck_through_network():
    # central differences on a handful of weight entries
    rng = RngStream(6)
    net = MLP([2, 5, 5, 1], ["tanh", "tanh", "sigmoid"], rng)
    x = rng.normal(size=(4, 2))

    def loss_value():
        return float(net.predict(x).sum())

    loss = net(x).sum()
    loss.backward()
    h = 1e-6
    for p in (net.weights[0], net.weights[2], net.biases[1]):
        flat = p.data.reshape(-1)
        gflat = p.grad.reshape(-1)
        for k in range(min(3, flat.size)):
            keep = flat[k]
            flat[k] = keep + h
            up = loss_value()
            flat[k] = keep - h
            down = loss_value()
            flat[k] = keep
            num = (up - down) / (2 * h)
            assert abs(num - gflat[k]) < 1e-5 * max(1.0, abs(num))


def test_glorot_scale():
    rng = RngStream(7)
    net = MLP([100, 100], ["linear"], rng)
    limit = np.sqrt(6.0 / 200)
    w = net.weights[0].data
    assert np.all(np.abs(w) <= limit)
    assert np.abs(w).max() > 0.9 * limit
    assert abs(w.mean()) < 0.01


def test_serialization_round_trip():
    rng = RngStream(8)
    net = MLP([3, 4, 2], ["relu", "linear"], rng)
    clone = MLP.from_dict(net.to_dict())
    x = rng.normal(size=(5, 3))
    assert np.array_equal(net.predict(x), clone.predict(x))


def test_serialization_validation():
    rng = RngStream(9)
    doc = MLP([2, 3], ["linear"], rng).to_dict()
    del doc["weights"]
    with pytest.raises(ValidationError, match="weights"):
        MLP.from_dict(doc)
    doc2 = MLP([2, 3], ["linear"], rng).to_dict()
    doc2["weights"][0] = doc2["weights"][0][:-1]
    with pytest.raises(ValidationError, match="layer 0"):
        MLP.from_dict(doc2)


def test_activation_and_arity_validation():
    rng = RngStream(10)
    with pytest.raises(ValidationError):
        MLP([2, 3, 1], ["tanh"], rng)
    with pytest.raises(ValidationError, match="softmax"):
        MLP([2, 3], ["softmax"], rng)


def test_rmsprop_first_step_size():
    # with zero history the update magnitude is ~lr per coordinate
    p = ad.parameter(np.zeros(4))
    p.grad = np.array([1.0, -2.0, 0.5, 3.0])
    opt = RMSProp([p], lr=0.01, decay=0.9)
    opt.step()
    expected = 0.01 / np.sqrt(0.1)  # v = 0.1 * g^2, update = lr*g/sqrt(v)
    assert np.allclose(np.abs(p.data), expected, rtol=1e-6)
    assert np.all(np.sign(p.data) == -np.sign(p.grad))


def test_rmsprop_descends_quadratic():
    p = ad.parameter(np.array([3.0, -2.0]))
    opt = RMSProp([p], lr=0.05)
    for _ in range(500):
        opt.zero_grad()
        loss = (p * p).sum()
        loss.backward()
        opt.step()
    assert np.all(np.abs(p.data) < 0.05)


def test_rmsprop_skips_gradless_params():
    p = ad.parameter(np.ones(2))
    q = ad.parameter(np.ones(2))
    p.grad = np.ones(2)
    opt = RMSProp([p, q], lr=0.1)
    opt.step()
    assert np.array_equal(q.data, np.ones(2))
    assert not np.array_equal(p.data, np.ones(2))
