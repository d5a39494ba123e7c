"""Minimal dense feed-forward engine with reverse-mode gradients and Adam.

Conventions used throughout:

- A matrix is a 2-D C-contiguous float64 numpy array, batch in rows.
- A network is a plain chain of dense layers y = act(x W + b); supported
  activations are linear, tanh, relu and softmax, with softmax allowed only
  as the final activation.
- Every parameter of a network lives inside one flat float64 vector, and the
  per-layer weight/bias arrays are reshaped views into it. The gradient and
  both Adam moment vectors mirror that layout. This buys three things: a hard
  target-network sync is a single bit-exact copy, a soft sync is a single
  vector expression, and the optimizer can update a whole network in one
  fused kernel call.
- Gradients accumulate across backward calls until zero_grads() is called;
  training code zeroes before each backward.
- backward reconstructs activation derivatives from cached outputs only
  (tanh' = 1 - y^2, relu' = [y > 0], softmax via its output), so the per-layer
  cache is just the (input, output) pair.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .backends import ACT_CODE
from .errors import DimensionError, StateError

ACTIVATIONS = ("linear", "tanh", "relu", "softmax")


@dataclass(frozen=True)
class NetworkSpec:
    """Shape declaration: input width, then one (size, activation) per layer."""

    input_dim: int
    layer_sizes: tuple
    activations: tuple

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        object.__setattr__(self, "activations", tuple(str(a) for a in self.activations))
        if self.input_dim < 1:
            raise DimensionError("input_dim must be >= 1, got %r" % (self.input_dim,))
        if len(self.layer_sizes) == 0:
            raise DimensionError("a network needs at least one layer")
        if len(self.activations) != len(self.layer_sizes):
            raise DimensionError(
                "got %d activations for %d layers"
                % (len(self.activations), len(self.layer_sizes))
            )
        for s in self.layer_sizes:
            if s < 1:
                raise DimensionError("layer sizes must be >= 1, got %r" % (s,))
        for i, a in enumerate(self.activations):
            if a not in ACTIVATIONS:
                raise DimensionError("unknown activation %r" % (a,))
            if a == "softmax" and i != len(self.activations) - 1:
                raise DimensionError("softmax is only allowed as the final activation")

    @property
    def output_dim(self):
        return self.layer_sizes[-1]

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "layer_sizes": list(self.layer_sizes),
            "activations": list(self.activations),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["input_dim"], tuple(d["layer_sizes"]), tuple(d["activations"]))


@dataclass
class Parameter:
    """One weight or bias array plus its gradient and Adam state.

    value/grad/adam_m/adam_v share one shape; with flat network storage they
    are views into the owning network's vectors.
    """

    value: np.ndarray
    grad: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray
    step_count: int = 0


def _flat(a):
    if not a.flags["C_CONTIGUOUS"]:
        raise DimensionError("parameter arrays must be C-contiguous")
    return a.reshape(-1)


class Network:
    """Dense feed-forward network over flat parameter storage."""

    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        sizes = (spec.input_dim,) + spec.layer_sizes
        self.n_params = sum(
            sizes[i] * sizes[i + 1] + sizes[i + 1] for i in range(len(spec.layer_sizes))
        )
        self.theta = np.zeros(self.n_params)
        self.grad_flat = np.zeros(self.n_params)
        self.adam_m_flat = np.zeros(self.n_params)
        self.adam_v_flat = np.zeros(self.n_params)
        self._adam_t = 0
        self.weights = []
        self.biases = []
        self._act_codes = tuple(ACT_CODE[a] for a in spec.activations)
        off = 0
        for i in range(len(spec.layer_sizes)):
            fan_in, fan_out = sizes[i], sizes[i + 1]
            n = fan_in * fan_out
            shape = (fan_in, fan_out)
            self.weights.append(
                Parameter(
                    self.theta[off : off + n].reshape(shape),
                    self.grad_flat[off : off + n].reshape(shape),
                    self.adam_m_flat[off : off + n].reshape(shape),
                    self.adam_v_flat[off : off + n].reshape(shape),
                )
            )
            off += n
            self.biases.append(
                Parameter(
                    self.theta[off : off + fan_out],
                    self.grad_flat[off : off + fan_out],
                    self.adam_m_flat[off : off + fan_out],
                    self.adam_v_flat[off : off + fan_out],
                )
            )
            off += fan_out
        self._cache_x = None
        self._cache_y = None

    @classmethod
    def initialize(cls, spec: NetworkSpec, rng, zero_final=False):
        """Fresh network: weights uniform in +-1/sqrt(fan_in), biases zero.

        zero_final zeroes the last layer entirely, which pins the initial
        output to the activation of zero (useful to start a softmax head at
        the exact uniform distribution).
        """
        net = cls(spec)
        for i, w in enumerate(net.weights):
            fan_in = w.value.shape[0]
            bound = 1.0 / math.sqrt(fan_in)
            w.value[:] = rng.uniform(-bound, bound, size=w.value.shape)
        if zero_final:
            net.weights[-1].value[:] = 0.0
            net.biases[-1].value[:] = 0.0
        return net

    def parameters(self):
        return self.weights + self.biases

    def forward(self, x):
        """Run the layer chain; keeps the per-layer cache for backward."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2:
            raise DimensionError("forward expects a 2-D batch, got ndim=%d" % x.ndim)
        if x.shape[1] != self.spec.input_dim:
            raise DimensionError(
                "input has %d columns, network expects %d" % (x.shape[1], self.spec.input_dim)
            )
        x = np.ascontiguousarray(x)
        xs = []
        ys = []
        for w, b, code in zip(self.weights, self.biases, self._act_codes):
            xs.append(x)
            x = backends.dense_forward(x, w.value, b.value, code)
            ys.append(x)
        self._cache_x = xs
        self._cache_y = ys
        return x

    def backward(self, output_grad, write_param_grads=True):
        """Reverse pass from d(objective)/d(output); returns d/d(input).

        Parameter gradients are accumulated into .grad views unless
        write_param_grads is false (used when a network only relays gradient
        to its input, e.g. a frozen critic during an actor update).
        """
        if self._cache_y is None:
            raise StateError("backward called before forward")
        gy = np.asarray(output_grad, dtype=np.float64)
        if gy.shape != self._cache_y[-1].shape:
            raise DimensionError(
                "output_grad shape %r does not match output shape %r"
                % (gy.shape, self._cache_y[-1].shape)
            )
        gy = np.ascontiguousarray(gy)
        for i in range(len(self.weights) - 1, -1, -1):
            gx, gw, gb = backends.dense_backward(
                self._cache_x[i],
                self._cache_y[i],
                self.weights[i].value,
                gy,
                self._act_codes[i],
                True,
            )
            if write_param_grads:
                self.weights[i].grad += gw
                self.biases[i].grad += gb
            gy = gx
        return gy

    def zero_grads(self):
        self.grad_flat[:] = 0.0

    def adam_step(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        """Fused Adam over the whole flat parameter vector."""
        self._adam_t += 1
        backends.adam_flat(
            self.theta, self.grad_flat, self.adam_m_flat, self.adam_v_flat,
            self._adam_t, lr, beta1, beta2, eps,
        )
        for p in self.weights:
            p.step_count += 1
        for p in self.biases:
            p.step_count += 1

    def copy_from(self, other: "Network"):
        """Hard sync: bit-exact copy of the other network's parameters."""
        if other.spec != self.spec:
            raise DimensionError("cannot copy between different network shapes")
        self.theta[:] = other.theta

    def soft_update_from(self, other: "Network", tau):
        """Blend toward the other network: theta <- tau*other + (1-tau)*theta."""
        if other.spec != self.spec:
            raise DimensionError("cannot blend between different network shapes")
        self.theta *= 1.0 - tau
        self.theta += tau * other.theta

    def check_finite(self):
        if not np.isfinite(self.theta).all():
            raise FloatingPointError("network parameters contain non-finite values")


def softmax(logits):
    """Row-wise softmax with max-subtraction for overflow safety."""
    z = np.asarray(logits, dtype=np.float64)
    oned = z.ndim == 1
    if oned:
        z = z[None, :]
    z = z - z.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z[0] if oned else z


def mse_loss(pred, target):
    """Mean squared error over a (batch x 1) column; returns (loss, dloss/dpred)."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError("pred shape %r != target shape %r" % (pred.shape, target.shape))
    if pred.ndim != 2 or pred.shape[1] != 1:
        raise DimensionError("mse_loss expects a (batch x 1) column, got %r" % (pred.shape,))
    batch = pred.shape[0]
    if batch == 0:
        raise ValueError("mse_loss on an empty batch")
    diff = pred - target
    loss = float((diff * diff).mean())
    grad = (2.0 / batch) * diff
    return loss, grad


def adam_step(params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Adam with bias correction applied to each Parameter independently.

    Grads are left untouched; callers zero them. Equivalent, bit for bit, to
    the fused Network.adam_step when the step counts line up.
    """
    for p in params:
        t = p.step_count + 1
        backends.adam_flat(
            _flat(p.value), _flat(p.grad), _flat(p.adam_m), _flat(p.adam_v),
            t, lr, beta1, beta2, eps,
        )
        p.step_count = t
