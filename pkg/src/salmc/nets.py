"""Small MLPs on the autodiff engine, plus their optimizer and
serialization.

Two forward paths on purpose: `__call__` builds the compute graph for
training; `predict` is a plain numpy evaluation of the same weights for
cheap rollouts and post-training sampling.
"""

import numpy as np

from . import autodiff as ad
from .errors import ValidationError

_ACTIVATIONS = ("tanh", "relu", "sigmoid", "linear")


def _apply_graph(t, name):
    if name == "tanh":
        return t.tanh()
    if name == "relu":
        return t.relu()
    if name == "sigmoid":
        return t.sigmoid()
    return t


def _apply_numpy(x, name):
    if name == "tanh":
        return np.tanh(x)
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))
    return x


class MLP:
    """Fully-connected net: sizes[0] -> ... -> sizes[-1].

    `activations` has one entry per weight layer ("linear" for none).
    Weights are Glorot-uniform from the supplied stream; biases zero.
    """

    def __init__(self, sizes, activations, rng=None, _weights=None):
        if len(activations) != len(sizes) - 1:
            raise ValidationError(
                f"{len(sizes) - 1} layers need {len(sizes) - 1} activations, "
                f"got {len(activations)}"
            )
        for a in activations:
            if a not in _ACTIVATIONS:
                raise ValidationError(f"unknown activation {a!r}")
        self.sizes = list(int(s) for s in sizes)
        self.activations = list(activations)
        self.weights = []
        self.biases = []
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if _weights is not None:
                w, b = _weights[i]
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                w = limit * (2.0 * rng.uniform(size=(fan_in, fan_out)) - 1.0)
                b = np.zeros(fan_out)
            self.weights.append(ad.parameter(w))
            self.biases.append(ad.parameter(b))

    def parameters(self):
        return self.weights + self.biases

    def __call__(self, x):
        """Graph forward pass; gradients reach the weights on backward."""
        t = x if isinstance(x, ad.Tensor) else ad.constant(np.atleast_2d(x))
        for w, b, act in zip(self.weights, self.biases, self.activations):
            t = _apply_graph(t @ w + b.reshape(1, -1), act)
        return t

    def predict(self, x):
        """Numpy forward pass with the same weights, no graph built."""
        t = np.atleast_2d(np.asarray(x, dtype=np.float64))
        for w, b, act in zip(self.weights, self.biases, self.activations):
            t = _apply_numpy(t @ w.data + b.data, act)
        return t

    def to_dict(self):
        return {
            "sizes": self.sizes,
            "activations": self.activations,
            "weights": [w.data.reshape(-1).tolist() for w in self.weights],
            "biases": [b.data.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, doc):
        for key in ("sizes", "activations", "weights", "biases"):
            if key not in doc:
                raise ValidationError(f"net document missing key {key!r}")
        sizes = doc["sizes"]
        pairs = []
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            w = np.asarray(doc["weights"][i], dtype=np.float64)
            if w.size != fan_in * fan_out:
                raise ValidationError(
                    f"layer {i} expects {fan_in * fan_out} weights, got {w.size}"
                )
            b = np.asarray(doc["biases"][i], dtype=np.float64)
            if b.size != fan_out:
                raise ValidationError(f"layer {i} expects {fan_out} biases, got {b.size}")
            pairs.append((w.reshape(fan_in, fan_out), b))
        return cls(sizes, doc["activations"], _weights=pairs)


class RMSProp:
    """Momentum-free adaptive updates with per-parameter second moments."""

    def __init__(self, params, lr=1e-4, decay=0.9, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        for p, v in zip(self.params, self._v):
            if p.grad is None:
                continue
            v *= self.decay
            v += (1.0 - self.decay) * p.grad**2
            p.data -= self.lr * p.grad / (np.sqrt(v) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.grad = None
