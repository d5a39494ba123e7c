"""Network engine against independent oracles: straight-line re-evaluation,
high-precision decimal softmax, textbook scalar Adam, central differences."""

from decimal import Decimal, getcontext

import numpy as np
import pytest

from psadpg.errors import DimensionError, StateError
from psadpg.nn import Network, NetworkSpec, adam_step, mse_loss, softmax

getcontext().prec = 50


def manual_forward(net, x):
    # deliberately naive re-evaluation, no shared code with the package
    h = np.asarray(x, dtype=np.float64)
    for w, b, act in zip(net.weights, net.biases, net.spec.activations):
        z = h @ w.value + b.value
        if act == "tanh":
            h = np.tanh(z)
        elif act == "relu":
            h = np.maximum(z, 0.0)
        elif act == "softmax":
            e = np.exp(z - z.max(axis=1, keepdims=True))
            h = e / e.sum(axis=1, keepdims=True)
        else:
            h = z
    return h


def softmax_decimal(row):
    exps = [Decimal(float(x)).exp() for x in row]
    total = sum(exps)
    return np.array([float(e / total) for e in exps])


def central_diff(eval_fn, theta, idx, h=1e-6):
    old = theta[idx]
    theta[idx] = old + h
    up = eval_fn()
    theta[idx] = old - h
    down = eval_fn()
    theta[idx] = old
    return (up - down) / (2.0 * h)


def random_spec(rng):
    depth = int(rng.integers(1, 4))
    sizes = tuple(int(rng.integers(1, 9)) for _ in range(depth))
    acts = tuple(str(rng.choice(["linear", "tanh", "relu"])) for _ in range(depth))
    return NetworkSpec(int(rng.integers(1, 7)), sizes, acts)


def test_forward_matches_manual_reevaluation():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        spec = random_spec(rng)
        net = Network.initialize(spec, rng)
        x = rng.standard_normal((int(rng.integers(1, 9)), spec.input_dim))
        got = net.forward(x)
        want = manual_forward(net, x)
        assert got.shape == (x.shape[0], spec.output_dim)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


def test_forward_softmax_head_matches_manual():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        spec = NetworkSpec(4, (8, 3), ("tanh", "softmax"))
        net = Network.initialize(spec, rng)
        x = rng.standard_normal((5, 4))
        np.testing.assert_allclose(net.forward(x), manual_forward(net, x),
                                   rtol=1e-12, atol=1e-15)


def test_softmax_against_decimal_oracle():
    # the classic worked example first
    p = softmax(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(p, [0.09003057317038046, 0.24472847105479767,
                                   0.6652409557748219], rtol=1e-15)
    for seed in range(25):
        rng = np.random.default_rng(seed)
        z = rng.uniform(-30, 30, size=int(rng.integers(2, 7)))
        np.testing.assert_allclose(softmax(z), softmax_decimal(z), rtol=0, atol=1e-15)


def test_softmax_rows_sum_to_one_and_survive_huge_logits():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        z = rng.uniform(-1000, 1000, size=(4, 5))
        p = softmax(z)
        assert np.isfinite(p).all()
        assert (p >= 0).all()
        np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12)


def test_softmax_shift_invariance():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((6, 4))
    np.testing.assert_allclose(softmax(z), softmax(z + 123.456), rtol=0, atol=1e-14)


def test_backward_matches_central_differences():
    # J = sum(forward(x) * G); every parameter coordinate of small nets
    for seed in range(12):
        rng = np.random.default_rng(seed)
        spec = random_spec(rng)
        net = Network.initialize(spec, rng)
        x = rng.standard_normal((4, spec.input_dim))
        g = rng.standard_normal((4, spec.output_dim))

        def j():
            return float(np.sum(net.forward(x) * g))

        net.zero_grads()
        net.forward(x)
        net.backward(g)
        analytic = net.grad_flat.copy()
        for idx in range(net.n_params):
            fd = central_diff(j, net.theta, idx)
            assert abs(analytic[idx] - fd) <= 1e-6 * max(1.0, abs(fd)), (seed, idx)


def test_backward_softmax_layer_against_differences():
    for seed in range(8):
        rng = np.random.default_rng(50 + seed)
        spec = NetworkSpec(3, (5, 4), ("tanh", "softmax"))
        net = Network.initialize(spec, rng)
        x = rng.standard_normal((3, 3))
        g = rng.standard_normal((3, 4))

        def j():
            return float(np.sum(net.forward(x) * g))

        net.zero_grads()
        net.forward(x)
        net.backward(g)
        analytic = net.grad_flat.copy()
        coords = rng.choice(net.n_params, size=min(25, net.n_params), replace=False)
        for idx in coords:
            fd = central_diff(j, net.theta, int(idx))
            assert abs(analytic[idx] - fd) <= 1e-6 * max(1.0, abs(fd))


def test_backward_returns_input_gradient():
    rng = np.random.default_rng(9)
    spec = NetworkSpec(4, (6, 2), ("tanh", "linear"))
    net = Network.initialize(spec, rng)
    x = rng.standard_normal((3, 4))
    g = rng.standard_normal((3, 2))

    net.forward(x)
    gx = net.backward(g)
    assert gx.shape == x.shape
    # check dJ/dx against differences on the input
    for (i, k) in [(0, 0), (1, 2), (2, 3)]:
        xp = x.copy()
        xp[i, k] += 1e-6
        xm = x.copy()
        xm[i, k] -= 1e-6
        fd = (np.sum(net.forward(xp) * g) - np.sum(net.forward(xm) * g)) / 2e-6
        assert abs(gx[i, k] - fd) <= 1e-6 * max(1.0, abs(fd))


def test_backward_accumulates_until_zeroed():
    rng = np.random.default_rng(11)
    spec = NetworkSpec(3, (4,), ("tanh",))
    net = Network.initialize(spec, rng)
    x = rng.standard_normal((2, 3))
    g = rng.standard_normal((2, 4))
    net.forward(x)
    net.backward(g)
    once = net.grad_flat.copy()
    net.forward(x)
    net.backward(g)
    np.testing.assert_allclose(net.grad_flat, 2 * once, rtol=1e-15)
    net.zero_grads()
    assert (net.grad_flat == 0).all()


def test_write_param_grads_false_leaves_grads_alone():
    rng = np.random.default_rng(12)
    net = Network.initialize(NetworkSpec(3, (4, 1), ("tanh", "linear")), rng)
    x = rng.standard_normal((2, 3))
    net.forward(x)
    net.backward(np.ones((2, 1)), write_param_grads=False)
    assert (net.grad_flat == 0).all()


def adam_oracle(theta0, grads, lr, b1, b2, eps):
    # textbook form with explicit bias-corrected mhat / vhat
    th = theta0.copy()
    m = np.zeros_like(th)
    v = np.zeros_like(th)
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        th = th - lr * mhat / (np.sqrt(vhat) + eps)
    return th


def test_fused_adam_matches_textbook_oracle():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        spec = NetworkSpec(3, (5, 2), ("tanh", "linear"))
        net = Network.initialize(spec, rng)
        theta0 = net.theta.copy()
        grads = [rng.standard_normal(net.n_params) for _ in range(7)]
        for g in grads:
            net.zero_grads()
            net.grad_flat[:] = g
            net.adam_step(2e-3)
        want = adam_oracle(theta0, grads, 2e-3, 0.9, 0.999, 1e-8)
        np.testing.assert_allclose(net.theta, want, rtol=1e-12, atol=0)


def test_per_parameter_adam_matches_fused_bitwise():
    rng = np.random.default_rng(21)
    spec = NetworkSpec(4, (6, 3), ("relu", "linear"))
    a = Network.initialize(spec, rng)
    b = Network(spec)
    b.copy_from(a)
    for _ in range(5):
        g = rng.standard_normal(a.n_params)
        a.grad_flat[:] = g
        b.grad_flat[:] = g
        a.adam_step(1e-3)
        adam_step(b.parameters(), 1e-3)
    assert np.array_equal(a.theta, b.theta)
    assert np.array_equal(a.adam_m_flat, b.adam_m_flat)
    assert np.array_equal(a.adam_v_flat, b.adam_v_flat)


def test_adam_single_step_direction_and_size():
    # with zero moments one step moves each coordinate by about lr*sign(g)
    net = Network(NetworkSpec(2, (2,), ("linear",)))
    net.grad_flat[:] = np.array([1.0, -2.0, 0.5, -0.25, 3.0, -1.0])
    net.adam_step(1e-2)
    np.testing.assert_allclose(net.theta, -1e-2 * np.sign([1, -2, 0.5, -0.25, 3, -1]),
                               rtol=1e-6)


def test_initialize_bounds_and_zero_final():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        spec = NetworkSpec(5, (7, 3), ("tanh", "softmax"))
        net = Network.initialize(spec, rng, zero_final=True)
        b0 = 1.0 / np.sqrt(5)
        assert np.abs(net.weights[0].value).max() <= b0
        assert (net.biases[0].value == 0).all()
        assert (net.weights[1].value == 0).all()
        assert (net.biases[1].value == 0).all()
        p = net.forward(np.zeros((2, 5)))
        assert (p == 1.0 / 3.0).all()  # exactly uniform by construction


def test_parameter_views_alias_flat_storage():
    net = Network(NetworkSpec(2, (3,), ("linear",)))
    net.theta[:] = np.arange(net.n_params, dtype=np.float64)
    assert net.weights[0].value[0, 0] == 0.0
    assert net.biases[0].value[0] == 6.0
    net.weights[0].value[0, 0] = 99.0
    assert net.theta[0] == 99.0


def test_copy_from_is_bit_exact_and_independent():
    rng = np.random.default_rng(4)
    spec = NetworkSpec(3, (4, 2), ("tanh", "linear"))
    a = Network.initialize(spec, rng)
    b = Network(spec)
    b.copy_from(a)
    assert np.array_equal(a.theta, b.theta)
    a.theta += 1.0
    assert not np.array_equal(a.theta, b.theta)  # no sharing


def test_soft_update_matches_blend_bitwise():
    rng = np.random.default_rng(5)
    spec = NetworkSpec(3, (4,), ("tanh",))
    a = Network.initialize(spec, rng)
    b = Network.initialize(spec, rng)
    tau = 0.005
    want = tau * a.theta + (1.0 - tau) * b.theta
    b.soft_update_from(a, tau)
    assert np.array_equal(b.theta, want)


def test_mse_loss_value_and_gradient():
    rng = np.random.default_rng(6)
    pred = rng.standard_normal((8, 1))
    target = rng.standard_normal((8, 1))
    loss, grad = mse_loss(pred, target)
    assert loss == pytest.approx(float(np.mean((pred - target) ** 2)), rel=1e-15)
    for i in range(8):
        up = pred.copy()
        up[i, 0] += 1e-7
        down = pred.copy()
        down[i, 0] -= 1e-7
        fd = (np.mean((up - target) ** 2) - np.mean((down - target) ** 2)) / 2e-7
        assert grad[i, 0] == pytest.approx(fd, rel=1e-5)


def test_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec(4, (8, 3), ("softmax", "linear"))  # softmax only final
    with pytest.raises(ValueError):
        NetworkSpec(4, (8, 3), ("tanh",))  # length mismatch
    with pytest.raises(ValueError):
        NetworkSpec(4, (), ())  # no layers
    with pytest.raises(ValueError):
        NetworkSpec(4, (8,), ("sigmoid",))  # unknown activation
    with pytest.raises(ValueError):
        NetworkSpec(0, (8,), ("tanh",))


def test_spec_dict_round_trip():
    spec = NetworkSpec(6, (64, 3), ("tanh", "softmax"))
    again = NetworkSpec.from_dict(spec.to_dict())
    assert again == spec
    assert again.output_dim == 3


def test_forward_and_backward_error_paths():
    net = Network(NetworkSpec(3, (2,), ("linear",)))
    with pytest.raises(DimensionError):
        net.forward(np.zeros(3))  # 1-D rejected
    with pytest.raises(DimensionError):
        net.forward(np.zeros((2, 4)))  # wrong width
    with pytest.raises(StateError):
        net.backward(np.zeros((2, 2)))  # no forward yet
    net.forward(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        net.backward(np.zeros((3, 2)))  # batch mismatch
    other = Network(NetworkSpec(3, (3,), ("linear",)))
    with pytest.raises(DimensionError):
        net.copy_from(other)


def test_mse_loss_error_paths():
    with pytest.raises(DimensionError):
        mse_loss(np.zeros((2, 1)), np.zeros((3, 1)))
    with pytest.raises(DimensionError):
        mse_loss(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        mse_loss(np.zeros((0, 1)), np.zeros((0, 1)))
