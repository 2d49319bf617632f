"""Dense MLP with hand-written backprop, Adam, and a finite-difference check.

Inputs may be a single vector ``(d,)`` or a minibatch ``(B, d)``. For a
minibatch, parameter gradients are the mean over samples while input
gradients stay per-sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import RngStream
from .errors import ShapeMismatch

HIDDEN = (64, 64)


class Mlp:
    """Rectifier hidden layers; identity or bound-scaled tanh output."""

    def __init__(
        self,
        sizes: Sequence[int],
        output: str = "identity",
        low=None,
        high=None,
        rng: RngStream | None = None,
    ):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeMismatch(f"invalid layer sizes {sizes}")
        if output not in ("identity", "tanh"):
            raise ValueError(f"unknown output activation {output!r}")
        self.sizes = sizes
        self.output = output
        if output == "tanh":
            low = np.full(sizes[-1], -1.0) if low is None else np.asarray(low, dtype=np.float64)
            high = np.full(sizes[-1], 1.0) if high is None else np.asarray(high, dtype=np.float64)
            self.low = np.broadcast_to(low, (sizes[-1],)).astype(np.float64)
            self.high = np.broadcast_to(high, (sizes[-1],)).astype(np.float64)
        else:
            self.low = self.high = None
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.gen.uniform(-limit, limit, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.output = self.output
        other.low = None if self.low is None else self.low.copy()
        other.high = None if self.high is None else self.high.copy()
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def load_from(self, other: "Mlp") -> None:
        """Overwrite parameters in place with ``other``'s values."""
        for dst, src in zip(self.params, other.params):
            dst[...] = src

    def soft_update(self, other: "Mlp", tau: float) -> None:
        for dst, src in zip(self.params, other.params):
            dst *= 1.0 - tau
            dst += tau * src

    def _check_input(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ShapeMismatch(f"expected input width {self.sizes[0]}, got shape {x.shape}")
        return x, single

    def forward(self, x) -> np.ndarray:
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x):
        x, single = self._check_input(x)
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if i < last:
                h = np.maximum(z, 0.0)
            else:
                h = z
            acts.append(h)
        z_out = acts[-1]
        if self.output == "tanh":
            t = np.tanh(z_out)
            y = self.low + 0.5 * (t + 1.0) * (self.high - self.low)
        else:
            t = None
            y = z_out
        cache = (acts, t, single)
        return (y[0] if single else y), cache

    def backward(self, x, output_grad, cache=None):
        """Gradients of ``sum(output * output_grad)``.

        Returns ``(param_grads, input_grad)`` with ``param_grads`` ordered
        like :attr:`params`.
        """
        if cache is None:
            _, cache = self.forward_cache(x)
        acts, t, single = cache
        g = np.asarray(output_grad, dtype=np.float64)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != acts[-1].shape:
            raise ShapeMismatch(f"output_grad shape {g.shape} != output shape {acts[-1].shape}")
        batch = g.shape[0]
        if self.output == "tanh":
            g = g * (0.5 * (self.high - self.low)) * (1.0 - t * t)
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))  # type: ignore[list-item]
        for i in range(len(self.weights) - 1, -1, -1):
            h_prev = acts[i]
            grads[2 * i] = h_prev.T @ g / batch
            grads[2 * i + 1] = g.sum(axis=0) / batch
            g = g @ self.weights[i].T
            if i > 0:
                g = g * (acts[i] > 0)
        input_grad = g[0] if single else g
        return grads, input_grad

    def __repr__(self) -> str:
        return f"Mlp(sizes={self.sizes}, output={self.output!r})"


def make_mlp(n_in: int, n_out: int, rng: RngStream, hidden=HIDDEN, **kw) -> Mlp:
    return Mlp([n_in, *hidden, n_out], rng=rng, **kw)


def mlp_forward(net: Mlp, x) -> np.ndarray:
    return net.forward(x)


def mlp_backward(net: Mlp, x, output_grad) -> list[np.ndarray]:
    grads, _ = net.backward(x, output_grad)
    return grads


def dueling_combine(raw: np.ndarray) -> np.ndarray:
    """Split the last axis into value (first) and advantages; Q = V + A - mean(A)."""
    v = raw[..., :1]
    a = raw[..., 1:]
    return v + a - a.mean(axis=-1, keepdims=True)


def dueling_backward(q_grad: np.ndarray) -> np.ndarray:
    """Map dL/dQ back to dL/d(raw) through :func:`dueling_combine`."""
    dv = q_grad.sum(axis=-1, keepdims=True)
    da = q_grad - q_grad.mean(axis=-1, keepdims=True)
    return np.concatenate([dv, da], axis=-1)


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], lr: float = 1e-4, **kw) -> "AdamState":
        return cls(
            lr=lr,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **kw,
        )


def adam_step(state: AdamState, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]):
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if not (len(params) == len(grads) == len(state.m)):
        raise ShapeMismatch("params, grads and moments differ in count")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    step_size = state.lr * np.sqrt(c2) / c1
    eps_hat = state.eps * np.sqrt(c2)
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeMismatch(f"param {p.shape} vs grad {g.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= step_size * m / (np.sqrt(v) + eps_hat)
    return params, state


def finite_diff_check(net: Mlp, rng: RngStream, h: float = 1e-5, floor: float = 1e-6) -> float:
    """Max relative error between backprop and central differences.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``; the floor keeps
    gradients that are zero on both sides from amplifying rounding noise.
    Coordinates whose +-h perturbation switches any rectifier on or off are
    skipped, since the central difference then straddles a kink (zero
    biases put the units behind a dead layer exactly on one).
    """
    x = rng.gen.normal(size=net.sizes[0])
    g = rng.gen.normal(size=net.sizes[-1])
    grads, _ = net.backward(x, g)

    def f() -> tuple[float, np.ndarray]:
        return float(np.dot(net.forward(x), g)), _relu_pattern(net, x)

    worst = 0.0
    for p, analytic in zip(net.params, grads):
        flat = p.reshape(-1)
        a_flat = analytic.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            fp, pattern_p = f()
            flat[j] = orig - h
            fm, pattern_m = f()
            flat[j] = orig
            if not np.array_equal(pattern_p, pattern_m):
                continue
            numeric = (fp - fm) / (2 * h)
            denom = max(abs(a_flat[j]), abs(numeric), floor)
            worst = max(worst, abs(a_flat[j] - numeric) / denom)
    return worst


def _relu_pattern(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Which hidden pre-activations are strictly positive."""
    h = np.asarray(x, dtype=np.float64)
    pattern = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = h @ w + b
        pattern.append(z > 0)
        h = np.maximum(z, 0.0)
    return np.concatenate(pattern) if pattern else np.zeros(0, dtype=bool)


# Checkpoint text layout:
#   line 1: "mlp <output>"
#   line 2: layer sizes, space separated
#   line 3 (tanh only): low bounds; line 4: high bounds
#   then per layer: one line of row-major weights (fan_in x fan_out), one line of biases
# Floats use repr() so a save/load round trip is exact.


def save_mlp(net: Mlp, path) -> None:
    lines = [f"mlp {net.output}", " ".join(str(s) for s in net.sizes)]
    if net.output == "tanh":
        lines.append(" ".join(repr(float(v)) for v in net.low))
        lines.append(" ".join(repr(float(v)) for v in net.high))
    for w, b in zip(net.weights, net.biases):
        lines.append(" ".join(repr(float(v)) for v in w.reshape(-1)))
        lines.append(" ".join(repr(float(v)) for v in b))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_mlp(path) -> Mlp:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    tag, output = lines[0].split()
    if tag != "mlp":
        raise ValueError(f"{path} is not an mlp checkpoint")
    sizes = [int(s) for s in lines[1].split()]
    pos = 2
    low = high = None
    if output == "tanh":
        low = np.array([float(v) for v in lines[2].split()])
        high = np.array([float(v) for v in lines[3].split()])
        pos = 4
    net = Mlp(sizes, output=output, low=low, high=high)
    for i in range(len(sizes) - 1):
        w = np.array([float(v) for v in lines[pos].split()])
        b = np.array([float(v) for v in lines[pos + 1].split()])
        if w.size != sizes[i] * sizes[i + 1] or b.size != sizes[i + 1]:
            raise ShapeMismatch(f"layer {i} size mismatch in {path}")
        net.weights[i][...] = w.reshape(sizes[i], sizes[i + 1])
        net.biases[i][...] = b
        pos += 2
    return net
