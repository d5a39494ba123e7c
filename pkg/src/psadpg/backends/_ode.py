"""Scalar dynamics for the two-link underactuated pendulum (acrobot).

Classic swing-up task: two unit-mass, unit-length links, centers of mass at
the link midpoints, unit moments of inertia, gravity 9.8, and a bounded torque
applied at the elbow joint only. The derivative equations below are the
standard textbook form of that system, which is also what the widely used
Acrobot-v1 simulation implements, so trajectories are directly comparable.

Both backends execute the very same function objects defined here. The numba
backend wraps them in @njit, the numpy backend calls them as plain Python.
That is the reason everything in this file is scalar and loop-free: the same
source must compile under nopython mode and run unmodified in CPython.
"""

import math

M1 = 1.0
M2 = 1.0
L1 = 1.0
LC1 = 0.5
LC2 = 0.5
I1 = 1.0
I2 = 1.0
G = 9.8

MAX_VEL1 = 4.0 * math.pi
MAX_VEL2 = 9.0 * math.pi

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def acrobot_derivs(th1, th2, w1, w2, torque):
    """Time derivatives (dth1, dth2, dw1, dw2) of the acrobot state."""
    s2 = math.sin(th2)
    c2 = math.cos(th2)
    d1 = M1 * LC1 * LC1 + M2 * (L1 * L1 + LC2 * LC2 + 2.0 * L1 * LC2 * c2) + I1 + I2
    d2 = M2 * (LC2 * LC2 + L1 * LC2 * c2) + I2
    phi2 = M2 * LC2 * G * math.cos(th1 + th2 - HALF_PI)
    phi1 = (
        -M2 * L1 * LC2 * w2 * w2 * s2
        - 2.0 * M2 * L1 * LC2 * w2 * w1 * s2
        + (M1 * LC1 + M2 * L1) * G * math.cos(th1 - HALF_PI)
        + phi2
    )
    a2 = (torque + (d2 / d1) * phi1 - M2 * L1 * LC2 * w1 * w1 * s2 - phi2) / (
        M2 * LC2 * LC2 + I2 - d2 * d2 / d1
    )
    a1 = -(d2 * a2 + phi1) / d1
    return w1, w2, a1, a2


def wrap_angle(x):
    # maps to [-pi, pi); floating % keeps the sign of the divisor
    return (x + math.pi) % TWO_PI - math.pi


def make_step(derivs):
    """Build the one-macro-step integrator around a derivative function.

    Classic fourth-order Runge-Kutta over a single interval of length dt,
    followed by angle wrapping and velocity clamping. Returned as a closure so
    the numba backend can hand in the jitted derivative function and jit the
    result, while the numpy backend passes the plain one.
    """

    def step(th1, th2, w1, w2, torque, dt):
        k1a, k1b, k1c, k1d = derivs(th1, th2, w1, w2, torque)
        h = 0.5 * dt
        k2a, k2b, k2c, k2d = derivs(th1 + h * k1a, th2 + h * k1b, w1 + h * k1c, w2 + h * k1d, torque)
        k3a, k3b, k3c, k3d = derivs(th1 + h * k2a, th2 + h * k2b, w1 + h * k2c, w2 + h * k2d, torque)
        k4a, k4b, k4c, k4d = derivs(th1 + dt * k3a, th2 + dt * k3b, w1 + dt * k3c, w2 + dt * k3d, torque)
        sixth = dt / 6.0
        th1 = th1 + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        th2 = th2 + sixth * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        w1 = w1 + sixth * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        w2 = w2 + sixth * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        th1 = (th1 + math.pi) % TWO_PI - math.pi
        th2 = (th2 + math.pi) % TWO_PI - math.pi
        if w1 < -MAX_VEL1:
            w1 = -MAX_VEL1
        elif w1 > MAX_VEL1:
            w1 = MAX_VEL1
        if w2 < -MAX_VEL2:
            w2 = -MAX_VEL2
        elif w2 > MAX_VEL2:
            w2 = MAX_VEL2
        return th1, th2, w1, w2

    return step
