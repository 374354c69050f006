"""Dense feed-forward classifier with parameters and gradients as flat vectors.

Every unlearning routine in the package works on a single ``float64`` vector
holding all weights and biases, so gradients from different data subsets can be
compared (angles, means) and combined without caring about layer structure.

Parameter layout, layer by layer: the weight matrix of shape
``(fan_in, fan_out)`` in row-major order, followed by the bias of length
``fan_out``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MlpArchitecture:
    layer_widths: tuple[int, ...]
    activation: str = "relu"

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        if len(widths) < 2:
            raise ValueError("an architecture needs at least an input and an output width")
        if any(w <= 0 for w in widths):
            raise ValueError(f"layer widths must be positive, got {widths}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        object.__setattr__(self, "layer_widths", widths)

    @property
    def n_inputs(self) -> int:
        return self.layer_widths[0]

    @property
    def n_classes(self) -> int:
        return self.layer_widths[-1]

    @property
    def n_params(self) -> int:
        return sum(a * b + b for a, b in zip(self.layer_widths[:-1], self.layer_widths[1:]))

    def layer_slices(self) -> Iterator[tuple[slice, slice, int, int]]:
        """Yield ``(weight_slice, bias_slice, fan_in, fan_out)`` per layer."""
        offset = 0
        for fan_in, fan_out in zip(self.layer_widths[:-1], self.layer_widths[1:]):
            w = slice(offset, offset + fan_in * fan_out)
            offset += fan_in * fan_out
            b = slice(offset, offset + fan_out)
            offset += fan_out
            yield w, b, fan_in, fan_out

    def to_dict(self) -> dict:
        return {"layer_widths": list(self.layer_widths), "activation": self.activation}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpArchitecture":
        return cls(tuple(d["layer_widths"]), d.get("activation", "relu"))


def init_scale(fan_in: int, fan_out: int) -> float:
    """Half-width of the uniform init range for one layer."""
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(arch: MlpArchitecture, seed: int) -> np.ndarray:
    """Uniform ``[-s, s]`` init per layer (weights and biases), ``s = sqrt(6/(fan_in+fan_out))``."""
    rng = np.random.default_rng(seed)
    params = np.empty(arch.n_params, dtype=np.float64)
    for w, b, fan_in, fan_out in arch.layer_slices():
        s = init_scale(fan_in, fan_out)
        params[w] = rng.uniform(-s, s, size=fan_in * fan_out)
        params[b] = rng.uniform(-s, s, size=fan_out)
    return params


def _unpack(arch: MlpArchitecture, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    params = np.asarray(params, dtype=np.float64)
    if params.ndim != 1 or params.shape[0] != arch.n_params:
        raise ValueError(f"expected a flat vector of {arch.n_params} parameters, got shape {params.shape}")
    return [
        (params[w].reshape(fan_in, fan_out), params[b])
        for w, b, fan_in, fan_out in arch.layer_slices()
    ]


def _check_inputs(arch: MlpArchitecture, inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != arch.n_inputs:
        raise ValueError(f"inputs must have {arch.n_inputs} columns, got shape {x.shape}")
    return x


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _act_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    return (z > 0.0).astype(np.float64) if kind == "relu" else 1.0 - a * a


def _forward_cached(arch, layers, x):
    acts = [x]
    pre = []
    h = x
    for i, (W, b) in enumerate(layers):
        z = h @ W + b
        pre.append(z)
        h = z if i == len(layers) - 1 else _act(z, arch.activation)
        acts.append(h)
    return acts, pre


def forward(arch: MlpArchitecture, params: np.ndarray, inputs) -> np.ndarray:
    """Logits, one row per input sample."""
    x = _check_inputs(arch, inputs)
    acts, _ = _forward_cached(arch, _unpack(arch, params), x)
    return acts[-1]


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def predict_proba(arch: MlpArchitecture, params: np.ndarray, inputs) -> np.ndarray:
    logits = forward(arch, params, inputs)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _check_labels(arch: MlpArchitecture, labels, n: int) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1 or y.shape[0] != n:
        raise ValueError(f"expected {n} labels, got shape {y.shape}")
    if n == 0:
        raise ValueError("empty batch")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValueError("labels must be integers")
        y = y.astype(np.int64)
    if y.min() < 0 or y.max() >= arch.n_classes:
        raise ValueError(f"labels must lie in [0, {arch.n_classes}), got range [{y.min()}, {y.max()}]")
    return y


def per_sample_loss(arch: MlpArchitecture, params: np.ndarray, inputs, labels) -> np.ndarray:
    """Softmax cross-entropy of every sample (no reduction)."""
    x = _check_inputs(arch, inputs)
    y = _check_labels(arch, labels, x.shape[0])
    logp = log_softmax(forward(arch, params, x))
    return -logp[np.arange(x.shape[0]), y]


def loss_and_grad(arch: MlpArchitecture, params: np.ndarray, features, labels) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over the batch and its exact gradient.

    The gradient has the same flat layout as ``params``.
    """
    x = _check_inputs(arch, features)
    n = x.shape[0]
    y = _check_labels(arch, labels, n)
    layers = _unpack(arch, params)
    acts, pre = _forward_cached(arch, layers, x)

    logp = log_softmax(acts[-1])
    loss = float(-logp[np.arange(n), y].mean())

    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grad = np.empty(arch.n_params, dtype=np.float64)
    slices = list(arch.layer_slices())
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        w_sl, b_sl, _, _ = slices[i]
        grad[w_sl] = (acts[i].T @ delta).ravel()
        grad[b_sl] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ W.T) * _act_grad(pre[i - 1], acts[i], arch.activation)
    return loss, grad


def apply_update(params: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
    """One plain SGD step: ``params - eta * grad`` (new array)."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape:
        raise ValueError(f"parameter/gradient length mismatch: {params.shape} vs {grad.shape}")
    if not eta > 0:
        raise ValueError(f"learning rate must be positive, got {eta}")
    return params - eta * grad


def predict(arch: MlpArchitecture, params: np.ndarray, inputs) -> np.ndarray:
    """Predicted class per sample; argmax ties go to the lowest class index."""
    return np.argmax(forward(arch, params, inputs), axis=1)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    u, v = unit_vector(a), unit_vector(b)
    if u is None or v is None:
        return 0.0
    return float(np.dot(u, v))


def unit_vector(a: np.ndarray) -> Optional[np.ndarray]:
    """``a / ||a||`` computed without under/overflow; None for an all-zero vector."""
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return None
    a = a / scale
    return a / np.linalg.norm(a)
