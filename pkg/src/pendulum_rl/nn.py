"""Dense feed-forward networks with hand-written backprop and Adam.

Everything runs in float64. Inputs may be a single vector ``(in_dim,)`` or a
batch ``(n, in_dim)``; the backward pass returns gradients of
``sum(output_grad * output)`` so batch means are the caller's business.
"""

from dataclasses import dataclass, field

import numpy as np

HIDDEN_ACTIVATIONS = ("relu", "tanh")
OUTPUT_ACTIVATIONS = ("linear", "tanh", "scaled_tanh")


class ShapeError(ValueError):
    pass


class MLP:
    def __init__(self, layer_dims, hidden_activation="relu", output_activation="linear",
                 output_bound=1.0):
        layer_dims = [int(d) for d in layer_dims]
        if len(layer_dims) < 2 or any(d <= 0 for d in layer_dims):
            raise ShapeError(f"invalid layer dims {layer_dims}")
        if hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {hidden_activation!r}")
        if output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.layer_dims = layer_dims
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        self.output_bound = float(output_bound) if output_activation == "scaled_tanh" else 1.0
        self.weights = [np.zeros((o, i)) for i, o in zip(layer_dims[:-1], layer_dims[1:])]
        self.biases = [np.zeros(o) for o in layer_dims[1:]]

    @classmethod
    def init(cls, layer_dims, rng, hidden_activation="relu", output_activation="linear",
             output_bound=1.0, final_layer_range=None):
        """Glorot-uniform weights, zero biases.

        ``final_layer_range`` overrides the last layer with ``U[-r, r]``
        (used for the DDPG actor head).
        """
        net = cls(layer_dims, hidden_activation, output_activation, output_bound)
        n = len(net.weights)
        for k, w in enumerate(net.weights):
            fan_out, fan_in = w.shape
            if k == n - 1 and final_layer_range is not None:
                limit = float(final_layer_range)
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
            w[...] = rng.uniform(-limit, limit, size=w.shape)
        return net

    @property
    def params(self) -> list:
        """Parameter arrays in a fixed order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "MLP":
        net = MLP(self.layer_dims, self.hidden_activation, self.output_activation,
                  self.output_bound)
        for dst, src in zip(net.params, self.params):
            dst[...] = src
        return net

    def load_params(self, other: "MLP") -> None:
        if other.layer_dims != self.layer_dims:
            raise ShapeError(f"dims {other.layer_dims} != {self.layer_dims}")
        for dst, src in zip(self.params, other.params):
            dst[...] = src

    def __call__(self, x):
        return self.forward(x)[0]

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        xb = x[None, :] if single else x
        if xb.ndim != 2 or xb.shape[1] != self.layer_dims[0]:
            raise ShapeError(f"expected input dim {self.layer_dims[0]}, got shape {x.shape}")
        if not np.all(np.isfinite(xb)):
            raise ValueError("non-finite network input")

        acts = [xb]
        pre = []
        h = xb
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            pre.append(z)
            if k < last:
                h = np.maximum(z, 0.0) if self.hidden_activation == "relu" else np.tanh(z)
            elif self.output_activation == "linear":
                h = z
            else:
                h = self.output_bound * np.tanh(z)
            acts.append(h)
        tape = GradientTape(self, pre, acts, single)
        return (h[0] if single else h), tape

    def backward(self, tape: "GradientTape", output_grad):
        """Return ``(param_grads, input_grad)``; ``param_grads`` matches ``params``."""
        if tape.net is not self:
            raise ShapeError("tape was recorded by a different network")
        g = np.asarray(output_grad, dtype=np.float64)
        if tape.single:
            g = g[None, :]
        if g.shape != tape.acts[-1].shape:
            raise ShapeError(f"output grad shape {g.shape} != {tape.acts[-1].shape}")

        n = len(self.weights)
        grads = [None] * (2 * n)
        for k in range(n - 1, -1, -1):
            if k == n - 1:
                if self.output_activation != "linear":
                    t = tape.acts[-1] / self.output_bound
                    g = g * self.output_bound * (1.0 - t * t)
            elif self.hidden_activation == "relu":
                g = g * (tape.pre[k] > 0.0)
            else:
                g = g * (1.0 - tape.acts[k + 1] ** 2)
            grads[2 * k] = g.T @ tape.acts[k]
            grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.weights[k]
        input_grad = g[0] if tape.single else g
        tape.param_grads = grads
        tape.input_grad = input_grad
        return grads, input_grad


@dataclass
class GradientTape:
    net: MLP
    pre: list
    acts: list
    single: bool
    param_grads: list | None = None
    input_grad: np.ndarray | None = None


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


class NonFiniteError(FloatingPointError):
    pass


def adam_update(params: list, grads: list, opt: AdamState) -> None:
    """One Adam descent step, in place. Pass negated gradients to ascend."""
    if len(params) != len(grads):
        raise ShapeError("parameter / gradient count mismatch")
    for p, g in zip(params, grads):
        if np.shape(g) != p.shape:
            raise ShapeError(f"gradient shape {np.shape(g)} != parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient; parameters left untouched")
    if not opt.m:
        opt.m = [np.zeros_like(p) for p in params]
        opt.v = [np.zeros_like(p) for p in params]

    opt.t += 1
    c1 = 1.0 - opt.beta1**opt.t
    c2 = 1.0 - opt.beta2**opt.t
    for p, g, m, v in zip(params, grads, opt.m, opt.v):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.lr * (m / c1) / (np.sqrt(v / c2) + opt.epsilon)
    for p in params:
        if not np.all(np.isfinite(p)):
            raise NonFiniteError("parameters became non-finite after Adam step")
