"""Fixed-capacity experience replay.

Stores (state, surrogate_action, reward, next_state, done) records in
preallocated ring arrays. The surrogate action is a probability vector over
the discrete actions; the training loop always stores the sampled action's
one-hot unit vector, and the buffer enforces the simplex invariant on every
push so a scan can certify that property at any time.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

PROB_SUM_TOL = 1e-6


@dataclass
class Transition:
    state: np.ndarray
    surrogate_action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool


TransitionBatch = namedtuple(
    "TransitionBatch", ["states", "surrogate_actions", "rewards", "next_states", "dones"]
)


def one_hot(action, n):
    """Unit vector with a single 1 at the sampled action's index."""
    action = int(action)
    if not 0 <= action < n:
        raise ValueError("action %d outside [0, %d)" % (action, n))
    v = np.zeros(n)
    v[action] = 1.0
    return v


def check_probability_vector(p, n=None):
    """Raise if p is not a point on the action simplex (within 1e-6)."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or (n is not None and p.shape[0] != n):
        raise DimensionError("probability vector has shape %r" % (p.shape,))
    if not np.isfinite(p).all():
        raise ValueError("probability vector contains non-finite entries")
    if (p < 0.0).any() or (p > 1.0).any():
        raise ValueError("probability vector entries must lie in [0, 1]")
    if abs(float(p.sum()) - 1.0) > PROB_SUM_TOL:
        raise ValueError("probability vector sums to %r, not 1" % float(p.sum()))
    return p


class ReplayBuffer:
    """Ring buffer over preallocated float64 storage, FIFO once full."""

    def __init__(self, capacity, obs_dim, action_count):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.obs_dim = int(obs_dim)
        self.action_count = int(action_count)
        self._states = np.zeros((capacity, obs_dim))
        self._actions = np.zeros((capacity, action_count))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, obs_dim))
        self._dones = np.zeros(capacity, dtype=np.bool_)
        self.write_index = 0
        self._size = 0

    def __len__(self):
        return self._size

    def push(self, t: Transition):
        state = np.asarray(t.state, dtype=np.float64)
        next_state = np.asarray(t.next_state, dtype=np.float64)
        if state.shape != (self.obs_dim,) or next_state.shape != (self.obs_dim,):
            raise DimensionError(
                "transition states must have shape (%d,), got %r and %r"
                % (self.obs_dim, state.shape, next_state.shape)
            )
        if not (np.isfinite(state).all() and np.isfinite(next_state).all()):
            raise ValueError("transition states contain non-finite entries")
        reward = float(t.reward)
        if not np.isfinite(reward):
            raise ValueError("transition reward is non-finite")
        p = check_probability_vector(t.surrogate_action, self.action_count)
        i = self.write_index
        self._states[i] = state
        self._actions[i] = p
        self._rewards[i] = reward
        self._next_states[i] = next_state
        self._dones[i] = bool(t.done)
        self.write_index = (i + 1) % self.capacity
        if self._size < self.capacity:
            self._size += 1

    def _draw_indices(self, n, rng):
        if n < 1:
            raise ValueError("sample size must be >= 1")
        if self._size < n:
            return None
        return rng.choice(self._size, size=n, replace=False)

    def sample(self, n, rng):
        """n transitions uniform without replacement, or None when the buffer
        is not yet ready (caller skips the update for this step)."""
        idx = self._draw_indices(n, rng)
        if idx is None:
            return None
        out = []
        for i in idx:
            out.append(
                Transition(
                    self._states[i].copy(),
                    self._actions[i].copy(),
                    float(self._rewards[i]),
                    self._next_states[i].copy(),
                    bool(self._dones[i]),
                )
            )
        return out

    def sample_arrays(self, n, rng):
        """Stacked-array variant of sample for the training hot loop."""
        idx = self._draw_indices(n, rng)
        if idx is None:
            return None
        return TransitionBatch(
            self._states[idx],
            self._actions[idx],
            self._rewards[idx],
            self._next_states[idx],
            self._dones[idx],
        )

    def contents(self):
        """All stored transitions, oldest first."""
        if self._size < self.capacity:
            order = range(self._size)
        else:
            order = list(range(self.write_index, self.capacity)) + list(
                range(self.write_index)
            )
        return [
            Transition(
                self._states[i].copy(),
                self._actions[i].copy(),
                float(self._rewards[i]),
                self._next_states[i].copy(),
                bool(self._dones[i]),
            )
            for i in order
        ]

    def all_one_hot(self):
        """True when every stored surrogate action is exactly a unit vector."""
        rows = self._actions[: self._size]
        ones = rows == 1.0
        zeros = rows == 0.0
        return bool((ones.sum(axis=1) == 1).all() and (ones | zeros).all())

    def snapshot_csv(self, path):
        """Debug dump: header with dimensions, then one row per transition."""
        with open(path, "w") as f:
            f.write("# obs_dim=%d action_count=%d\n" % (self.obs_dim, self.action_count))
            for t in self.contents():
                cells = (
                    [repr(float(x)) for x in t.state]
                    + [repr(float(x)) for x in t.surrogate_action]
                    + [repr(t.reward)]
                    + [repr(float(x)) for x in t.next_state]
                    + ["1" if t.done else "0"]
                )
                f.write(",".join(cells) + "\n")


def load_snapshot(path):
    """Parse a snapshot_csv file back into a list of transitions."""
    with open(path) as f:
        header = f.readline().strip()
        fields = dict(kv.split("=") for kv in header.lstrip("# ").split())
        obs_dim = int(fields["obs_dim"])
        action_count = int(fields["action_count"])
        out = []
        for line in f:
            cells = line.strip().split(",")
            s = np.array([float(c) for c in cells[:obs_dim]])
            p = np.array([float(c) for c in cells[obs_dim : obs_dim + action_count]])
            r = float(cells[obs_dim + action_count])
            s2 = np.array(
                [float(c) for c in cells[obs_dim + action_count + 1 : 2 * obs_dim + action_count + 1]]
            )
            done = cells[-1] == "1"
            out.append(Transition(s, p, r, s2, done))
    return out
