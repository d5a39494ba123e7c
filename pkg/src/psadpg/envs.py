"""Episodic environments behind one small contract.

Contract (duck-typed): an environment exposes obs_dim, action_count and
max_episode_steps attributes, reset() -> observation, and
step(action) -> StepResult. step accepts only integer actions in
[0, action_count), raises StateError once an episode has finished, and
reports true termination (done) separately from the step-limit cutoff
(truncated) so agents can bootstrap through truncation.

Two implementations live here: a native acrobot swing-up task and an adapter
that exposes any finite tabular decision process as an environment.
"""

import math
import operator
from dataclasses import dataclass

import numpy as np

from . import backends
from .backends import _ode
from .errors import StateError


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    truncated: bool


@dataclass
class AcrobotState:
    theta1: float
    theta2: float
    dtheta1: float
    dtheta2: float
    step_index: int


def _check_action(action, n):
    try:
        a = operator.index(action)
    except TypeError:
        raise ValueError("action must be an integer, got %r" % (action,))
    if not 0 <= a < n:
        raise ValueError("action %d outside [0, %d)" % (a, n))
    return a


class AcrobotEnv:
    """Two-link pendulum swing-up.

    Both joint angles start near the hanging pose; the agent torques the elbow
    joint with -1/0/+1 and must raise the tip above one link length, at which
    point the episode terminates. Reward is -1 per non-terminal step and 0 on
    the terminating step; episodes truncate at max_episode_steps. One call to
    step advances a single fourth-order Runge-Kutta macro-step of 0.2 s.
    """

    obs_dim = 6
    action_count = 3
    DT = 0.2

    def __init__(self, rng, max_episode_steps=500):
        self._rng = rng
        self.max_episode_steps = int(max_episode_steps)
        self._th1 = 0.0
        self._th2 = 0.0
        self._w1 = 0.0
        self._w2 = 0.0
        self._step_index = 0
        self._finished = True  # not usable before the first reset

    def reset(self):
        s = self._rng.uniform(-0.1, 0.1, size=4)
        self._th1, self._th2, self._w1, self._w2 = (float(v) for v in s)
        self._step_index = 0
        self._finished = False
        return self._observation()

    def step(self, action):
        if self._finished:
            raise StateError("step after the episode has finished; call reset")
        a = _check_action(action, self.action_count)
        torque = float(a) - 1.0
        self._th1, self._th2, self._w1, self._w2 = backends.acrobot_step(
            self._th1, self._th2, self._w1, self._w2, torque, self.DT
        )
        self._step_index += 1
        done = bool(-math.cos(self._th1) - math.cos(self._th1 + self._th2) > 1.0)
        truncated = (not done) and self._step_index >= self.max_episode_steps
        reward = 0.0 if done else -1.0
        self._finished = done or truncated
        return StepResult(self._observation(), reward, done, truncated)

    def _observation(self):
        return np.array(
            [
                math.cos(self._th1),
                math.sin(self._th1),
                math.cos(self._th2),
                math.sin(self._th2),
                self._w1,
                self._w2,
            ]
        )

    @property
    def state(self):
        return AcrobotState(self._th1, self._th2, self._w1, self._w2, self._step_index)

    def set_state(self, theta1, theta2, dtheta1, dtheta2):
        """Place the pendulum at an exact state (testing hook)."""
        self._th1 = float(theta1)
        self._th2 = float(theta2)
        self._w1 = float(dtheta1)
        self._w2 = float(dtheta2)
        self._step_index = 0
        self._finished = False
        return self._observation()


def acrobot_energy(state: AcrobotState):
    """Total mechanical energy of the pendulum, for conservation checks."""
    th1, th2, w1, w2 = state.theta1, state.theta2, state.dtheta1, state.dtheta2
    c2 = math.cos(th2)
    d1 = (
        _ode.M1 * _ode.LC1 ** 2
        + _ode.M2 * (_ode.L1 ** 2 + _ode.LC2 ** 2 + 2.0 * _ode.L1 * _ode.LC2 * c2)
        + _ode.I1
        + _ode.I2
    )
    d2 = _ode.M2 * (_ode.LC2 ** 2 + _ode.L1 * _ode.LC2 * c2) + _ode.I2
    kinetic = 0.5 * d1 * w1 * w1 + d2 * w1 * w2 + 0.5 * (_ode.M2 * _ode.LC2 ** 2 + _ode.I2) * w2 * w2
    potential = -_ode.M1 * _ode.G * _ode.LC1 * math.cos(th1) - _ode.M2 * _ode.G * (
        _ode.L1 * math.cos(th1) + _ode.LC2 * math.cos(th1 + th2)
    )
    return kinetic + potential


class TabularEnv:
    """Adapter: a finite MDP as an episodic environment.

    Observations are one-hot state encodings. step samples the successor from
    the transition kernel and pays R(s, a). Episodes end when the chain enters
    a declared absorbing state (done) or at the step limit (truncated).
    """

    def __init__(self, mdp, rng, start_state=0, max_episode_steps=100):
        self.mdp = mdp
        self._rng = rng
        self.obs_dim = mdp.n_states
        self.action_count = mdp.n_actions
        self.max_episode_steps = int(max_episode_steps)
        if not 0 <= start_state < mdp.n_states:
            raise ValueError("start_state %r outside the state space" % (start_state,))
        self.start_state = int(start_state)
        # cumulative rows make successor draws one uniform + one bisect
        self._cum = np.cumsum(mdp.P, axis=2)
        self._absorbing = frozenset(mdp.absorbing or ())
        self._state = self.start_state
        self._step_index = 0
        self._finished = True

    def reset(self):
        self._state = self.start_state
        self._step_index = 0
        self._finished = False
        return self._observation(self._state)

    def step(self, action):
        if self._finished:
            raise StateError("step after the episode has finished; call reset")
        a = _check_action(action, self.action_count)
        s = self._state
        u = self._rng.random()
        s2 = int(np.searchsorted(self._cum[s, a], u, side="right"))
        if s2 >= self.mdp.n_states:  # guard the u ~= 1.0 edge
            s2 = self.mdp.n_states - 1
        reward = float(self.mdp.R[s, a])
        self._state = s2
        self._step_index += 1
        done = s2 in self._absorbing
        truncated = (not done) and self._step_index >= self.max_episode_steps
        self._finished = done or truncated
        return StepResult(self._observation(s2), reward, done, truncated)

    def _observation(self, s):
        v = np.zeros(self.obs_dim)
        v[s] = 1.0
        return v

    @property
    def state(self):
        return self._state


def tabular_env(mdp, rng, start_state=0, max_episode_steps=100):
    """Factory matching the environment-construction operation name."""
    return TabularEnv(mdp, rng, start_state=start_state, max_episode_steps=max_episode_steps)
