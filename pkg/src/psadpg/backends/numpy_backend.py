"""Pure-numpy implementations of the hot kernels.

Every kernel here has a signature-identical twin in numba_backend; the package
selects one module at import time (see backends.__init__). Keep the arithmetic
expression order in sync with the jitted twins: several tests compare the two
backends at tight tolerances and the fused Adam twin is expected to match
bit for bit.
"""

import numpy as np

from . import _ode
from ._codes import ACT_LINEAR, ACT_RELU, ACT_SOFTMAX, ACT_TANH

NAME = "numpy"


def dense_forward(x, w, b, act):
    """y = activation(x @ w + b) for one dense layer, batch in rows."""
    z = x @ w + b
    if act == ACT_TANH:
        return np.tanh(z)
    if act == ACT_RELU:
        return np.maximum(z, 0.0)
    if act == ACT_SOFTMAX:
        z -= z.max(axis=1, keepdims=True)
        np.exp(z, out=z)
        z /= z.sum(axis=1, keepdims=True)
        return z
    return z


def dense_backward(x, y, w, gy, act, need_gx):
    """Gradients of one dense layer from its cached input x and output y.

    Activation derivatives are reconstructed from the output alone, which is
    exact for every activation this engine supports. Returns (gx, gw, gb);
    gx is an empty array when need_gx is false.
    """
    if act == ACT_TANH:
        gz = gy * (1.0 - y * y)
    elif act == ACT_RELU:
        gz = gy * (y > 0.0)
    elif act == ACT_SOFTMAX:
        dot = (gy * y).sum(axis=1, keepdims=True)
        gz = (gy - dot) * y
    else:
        gz = gy
    gw = x.T @ gz
    gb = gz.sum(axis=0)
    if need_gx:
        gx = gz @ w.T
    else:
        gx = np.empty((0, 0))
    return gx, gw, gb


def adam_flat(value, grad, m, v, t, lr, beta1, beta2, eps):
    """One fused Adam update over a flat parameter vector, in place.

    t is the 1-based step count after this update; bias correction uses it
    directly. grad is left untouched.
    """
    tf = float(t)
    c1 = 1.0 - beta1 ** tf
    c2 = 1.0 - beta2 ** tf
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    value -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


acrobot_step = _ode.make_step(_ode.acrobot_derivs)


def vi_sweep(v, r, p2, gamma):
    """One greedy Bellman backup over all states, in place; returns the
    sup-norm change. p2 is the transition tensor reshaped to (S*A, S')."""
    n_states, n_actions = r.shape
    q = r + gamma * (p2 @ v).reshape(n_states, n_actions)
    vn = q.max(axis=1)
    delta = np.abs(vn - v).max()
    v[:] = vn
    return float(delta)


def q_from_v(v, r, p2, gamma):
    n_states, n_actions = r.shape
    return r + gamma * (p2 @ v).reshape(n_states, n_actions)


def warmup():
    """No-op for symmetry with the jitted backend (which compiles here)."""
    x = np.zeros((2, 3))
    w = np.zeros((3, 2))
    b = np.zeros(2)
    y = dense_forward(x, w, b, ACT_TANH)
    dense_backward(x, y, w, y, ACT_TANH, True)
    flat = np.zeros(4)
    adam_flat(flat, flat.copy(), flat.copy(), flat.copy(), 1, 1e-3, 0.9, 0.999, 1e-8)
    acrobot_step(0.1, 0.0, 0.0, 0.0, 1.0, 0.2)
    vv = np.zeros(2)
    vi_sweep(vv, np.zeros((2, 1)), np.eye(2), 0.9)
    q_from_v(vv, np.zeros((2, 1)), np.eye(2), 0.9)
