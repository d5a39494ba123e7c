"""Finite MDPs, simplex grids, and the optimal-policy equivalence check.

The object under test: take a finite MDP whose agent emits a discrete action,
and wrap it so the agent instead emits a probability vector p over actions
while the environment samples the action internally. Rewards and dynamics of
the wrapped process are affine mixtures, R~(s, p) = sum_a p_a R(s, a) and
P~(s'|s, p) = sum_a p_a P(s'|s, a). Because both are affine in p, the wrapped
process attains its optimum at simplex vertices, so its optimal value function
equals the original one and some optimal p is the one-hot of an original
greedy action. This module verifies that equivalence numerically by running
the same value iteration over the task action set and over a discretized
simplex that always contains the vertices.

Grid order matters: compositions are enumerated with the leading coordinate
descending, so at resolution k=1 grid point i is exactly the one-hot of action
i. The mixture tensors then come out bitwise equal to the task tensors (mixing
with a one-hot row is exact in IEEE arithmetic), and both value iterations run
the identical float sequence. That gives the vertex-grid equivalence check
bit-for-bit teeth instead of a tolerance.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backends
from .errors import ConfigError

ROW_SUM_TOL = 1e-12


@dataclass
class TabularMdp:
    n_states: int
    n_actions: int
    P: np.ndarray  # (S, A, S') transition probabilities
    R: np.ndarray  # (S, A) rewards
    gamma: float
    absorbing: Optional[frozenset] = None

    def __post_init__(self):
        self.n_states = int(self.n_states)
        self.n_actions = int(self.n_actions)
        self.P = np.ascontiguousarray(self.P, dtype=np.float64)
        self.R = np.ascontiguousarray(self.R, dtype=np.float64)
        self.gamma = float(self.gamma)
        S, A = self.n_states, self.n_actions
        if self.P.shape != (S, A, S):
            raise ValueError("P must have shape (%d, %d, %d), got %r" % (S, A, S, self.P.shape))
        if self.R.shape != (S, A):
            raise ValueError("R must have shape (%d, %d), got %r" % (S, A, self.R.shape))
        if not np.isfinite(self.R).all():
            raise ValueError("R contains non-finite entries")
        if (self.P < 0.0).any():
            raise ValueError("P contains negative probabilities")
        sums = self.P.sum(axis=2)
        if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("transition rows must sum to 1 within %g" % ROW_SUM_TOL)
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1), got %r" % self.gamma)
        if self.absorbing is not None:
            self.absorbing = frozenset(int(s) for s in self.absorbing)
            for s in self.absorbing:
                if not 0 <= s < S:
                    raise ValueError("absorbing state %d outside the state space" % s)
                # absorbing means: self-loop with zero reward, so episodic
                # returns and the fixed point agree on the same number
                for a in range(A):
                    if self.P[s, a, s] != 1.0 or self.R[s, a] != 0.0:
                        raise ValueError(
                            "absorbing state %d must self-loop with zero reward" % s
                        )


@dataclass
class SimplexGrid:
    n_actions: int
    resolution: int
    points: np.ndarray  # (G, n_actions), rows on the simplex
    vertex_of_point: np.ndarray  # (G,) action index for vertex rows, -1 otherwise
    vertex_rows: np.ndarray  # (n_actions,) grid index of each action's one-hot

    def __len__(self):
        return self.points.shape[0]


def _compositions(total, parts):
    # leading coordinate descending; at total=1 this yields e0, e1, ... in order
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_simplex_grid(n_actions, k):
    """All probability vectors whose entries are multiples of 1/k."""
    n_actions = int(n_actions)
    k = int(k)
    if n_actions < 1 or k < 1:
        raise ValueError("need n_actions >= 1 and k >= 1")
    comps = np.array(list(_compositions(k, n_actions)), dtype=np.float64)
    points = comps / k
    expected = math.comb(k + n_actions - 1, n_actions - 1)
    assert points.shape[0] == expected
    vertex_of_point = np.full(points.shape[0], -1, dtype=np.int64)
    vertex_rows = np.full(n_actions, -1, dtype=np.int64)
    for g in range(points.shape[0]):
        row = comps[g]
        hot = np.flatnonzero(row == k)
        if hot.size == 1:
            a = int(hot[0])
            vertex_of_point[g] = a
            vertex_rows[a] = g
    assert (vertex_rows >= 0).all(), "every vertex must appear in the grid"
    return SimplexGrid(n_actions, k, points, vertex_of_point, vertex_rows)


@dataclass
class ValueFunction:
    values: np.ndarray  # (S,)
    greedy: np.ndarray  # (S,) chosen action (task) or grid point (surrogate)


def _value_iterate(R, P2, gamma, tol, max_sweeps=1_000_000):
    """Greedy Bellman fixed point over whatever action set R's columns index.

    Stops when a sweep moves no state by more than tol, which bounds the
    Bellman residual of the result by gamma * tol. Ties in the final greedy
    extraction go to the lowest index.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    v = np.zeros(R.shape[0])
    for _ in range(max_sweeps):
        delta = backends.vi_sweep(v, R, P2, gamma)
        if delta <= tol:
            break
    else:
        raise RuntimeError("value iteration did not converge in %d sweeps" % max_sweeps)
    q = backends.q_from_v(v, R, P2, gamma)
    return ValueFunction(v, np.argmax(q, axis=1)), q


def _task_tensors(mdp):
    P2 = mdp.P.reshape(mdp.n_states * mdp.n_actions, mdp.n_states)
    return mdp.R, np.ascontiguousarray(P2)


def _surrogate_tensors(mdp, grid):
    """Mixture reward (S, G) and transition (S*G, S') tensors over the grid."""
    if grid.n_actions != mdp.n_actions:
        raise ValueError(
            "grid is over %d actions, mdp has %d" % (grid.n_actions, mdp.n_actions)
        )
    S, A = mdp.n_states, mdp.n_actions
    G = len(grid)
    R_mix = mdp.R @ grid.points.T  # (S, G)
    flat = mdp.P.transpose(1, 0, 2).reshape(A, S * S)
    P_mix = (grid.points @ flat).reshape(G, S, S).transpose(1, 0, 2)  # (S, G, S')
    P2 = np.ascontiguousarray(P_mix).reshape(S * G, S)
    return np.ascontiguousarray(R_mix), P2


def task_value_iteration(mdp, tol=1e-10):
    R, P2 = _task_tensors(mdp)
    vf, _ = _value_iterate(R, P2, mdp.gamma, tol)
    return vf


def surrogate_value_iteration(mdp, grid, tol=1e-10):
    R, P2 = _surrogate_tensors(mdp, grid)
    vf, _ = _value_iterate(R, P2, mdp.gamma, tol)
    return vf


@dataclass
class TheoremReport:
    """Per-state outcome of the equivalence check."""

    task_values: np.ndarray
    surrogate_values: np.ndarray
    value_gap: np.ndarray
    argmax_is_vertex: np.ndarray  # bool per state
    vertex_matches_task_greedy: np.ndarray  # bool per state
    task_greedy: np.ndarray
    chosen_vertex_action: np.ndarray  # -1 when no vertex attains the optimum
    grid_resolution: int

    @property
    def max_gap(self):
        return float(self.value_gap.max())

    def all_flags(self):
        return bool(self.argmax_is_vertex.all() and self.vertex_matches_task_greedy.all())


def verify_equivalence(mdp, grid, flag_tol=1e-9, vi_tol=1e-12):
    """Check optimal-value equality and vertex-optimality state by state.

    flag_tol is the comparison slack: a grid point counts as optimal when its
    Q is within flag_tol of the state's best, and ties are resolved toward
    vertices (the flags ask whether some within-tolerance optimum is a vertex,
    and whether such a vertex maps to a task-optimal action).
    """
    task_R, task_P2 = _task_tensors(mdp)
    task_vf, task_q = _value_iterate(task_R, task_P2, mdp.gamma, vi_tol)
    sur_R, sur_P2 = _surrogate_tensors(mdp, grid)
    sur_vf, sur_q = _value_iterate(sur_R, sur_P2, mdp.gamma, vi_tol)

    S = mdp.n_states
    gap = np.abs(sur_vf.values - task_vf.values)
    argmax_is_vertex = np.zeros(S, dtype=bool)
    vertex_matches = np.zeros(S, dtype=bool)
    chosen = np.full(S, -1, dtype=np.int64)
    for s in range(S):
        best_sur = sur_q[s].max()
        best_task = task_q[s].max()
        optimal_vertices = [
            int(grid.vertex_of_point[g])
            for g in grid.vertex_rows
            if sur_q[s, g] >= best_sur - flag_tol
        ]
        argmax_is_vertex[s] = len(optimal_vertices) > 0
        matching = [a for a in optimal_vertices if task_q[s, a] >= best_task - flag_tol]
        vertex_matches[s] = len(matching) > 0
        if matching:
            chosen[s] = matching[0]
        elif optimal_vertices:
            chosen[s] = optimal_vertices[0]
    return TheoremReport(
        task_values=task_vf.values,
        surrogate_values=sur_vf.values,
        value_gap=gap,
        argmax_is_vertex=argmax_is_vertex,
        vertex_matches_task_greedy=vertex_matches,
        task_greedy=task_vf.greedy,
        chosen_vertex_action=chosen,
        grid_resolution=grid.resolution,
    )


def random_mdp(rng, n_states, n_actions, gamma=0.9):
    """Dense random MDP: Dirichlet-ish rows, rewards uniform in [-1, 1]."""
    raw = rng.random((n_states, n_actions, n_states)) + 1e-3
    P = raw / raw.sum(axis=2, keepdims=True)
    R = rng.uniform(-1.0, 1.0, size=(n_states, n_actions))
    return TabularMdp(n_states, n_actions, P, R, gamma)


def tied_action_mdp():
    """Degenerate case: actions 0 and 1 are bitwise-identical from state 0.

    Every mixture on the 0-1 edge then has exactly the same value as the
    vertices, so the wrapped process has optimal stochastic policies too.
    """
    P = np.zeros((2, 3, 2))
    P[0, 0] = [0.0, 1.0]
    P[0, 1] = [0.0, 1.0]
    P[0, 2] = [1.0, 0.0]
    P[1, :, 1] = 1.0
    R = np.zeros((2, 3))
    R[0, 0] = 1.0
    R[0, 1] = 1.0
    R[0, 2] = 0.0
    return TabularMdp(2, 3, P, R, 0.9, absorbing=frozenset({1}))


@dataclass
class VerificationSummary:
    """Outcome of the randomized sweep plus the degenerate tie case."""

    per_mdp: list  # (n_states, n_actions, max_gap, vertex_ok, match_ok) tuples
    max_gap: float
    all_vertex_flags: bool
    all_match_flags: bool
    tie_gap: float
    tie_edge_gap: float
    passed: bool


def run_verification(rng, n_mdps=20, max_states=5, max_actions=4, k=8, gamma=0.9,
                     gap_tol=1e-8, tie_tol=1e-9):
    """Randomized equivalence sweep; the shared engine behind the CLI check."""
    per_mdp = []
    worst = 0.0
    vertex_ok = True
    match_ok = True
    for _ in range(n_mdps):
        S = int(rng.integers(2, max_states + 1))
        A = int(rng.integers(2, max_actions + 1))
        mdp = random_mdp(rng, S, A, gamma)
        rep = verify_equivalence(mdp, enumerate_simplex_grid(A, k))
        per_mdp.append((S, A, rep.max_gap, bool(rep.argmax_is_vertex.all()),
                        bool(rep.vertex_matches_task_greedy.all())))
        worst = max(worst, rep.max_gap)
        vertex_ok = vertex_ok and bool(rep.argmax_is_vertex.all())
        match_ok = match_ok and bool(rep.vertex_matches_task_greedy.all())

    tie = tied_action_mdp()
    tie_grid = enumerate_simplex_grid(tie.n_actions, k)
    tie_rep = verify_equivalence(tie, tie_grid, flag_tol=tie_tol)
    sur_R, sur_P2 = _surrogate_tensors(tie, tie_grid)
    _, sur_q = _value_iterate(sur_R, sur_P2, tie.gamma, 1e-12)
    best = sur_q[0].max()
    on_edge = tie_grid.points[:, 2] == 0.0  # mixtures of the tied pair only
    edge_gap = float((best - sur_q[0][on_edge]).max())

    passed = (
        worst <= gap_tol
        and vertex_ok
        and match_ok
        and tie_rep.max_gap <= tie_tol
        and edge_gap <= tie_tol
    )
    return VerificationSummary(
        per_mdp=per_mdp,
        max_gap=worst,
        all_vertex_flags=vertex_ok,
        all_match_flags=match_ok,
        tie_gap=tie_rep.max_gap,
        tie_edge_gap=edge_gap,
        passed=passed,
    )


def parse_mdp(path):
    """Read the plain-text MDP format (see write_mdp for the grammar)."""
    n_states = n_actions = None
    gamma = None
    absorbing = None
    R = None
    P = None
    mode = None  # None | "reward" | ("transition", a)
    row = 0
    try:
        f = open(path)
    except OSError as e:
        raise ConfigError("cannot read MDP file %s: %s" % (path, e)) from None
    with f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            head = parts[0].lower()
            try:
                if head == "states":
                    n_states = int(parts[1])
                    mode = None
                elif head == "actions":
                    n_actions = int(parts[1])
                    mode = None
                elif head == "gamma":
                    gamma = float(parts[1])
                    mode = None
                elif head == "absorbing":
                    absorbing = frozenset(int(x) for x in parts[1:])
                    mode = None
                elif head == "reward":
                    if n_states is None or n_actions is None:
                        raise ConfigError("reward block before states/actions")
                    R = np.zeros((n_states, n_actions))
                    mode = "reward"
                    row = 0
                elif head == "transition":
                    if n_states is None or n_actions is None:
                        raise ConfigError("transition block before states/actions")
                    if P is None:
                        P = np.zeros((n_states, n_actions, n_states))
                    mode = ("transition", int(parts[1]))
                    row = 0
                else:
                    values = [float(x) for x in parts]
                    if mode == "reward":
                        R[row] = values
                        row += 1
                    elif isinstance(mode, tuple):
                        P[row, mode[1]] = values
                        row += 1
                    else:
                        raise ConfigError("unexpected data row")
            except ConfigError as e:
                raise ConfigError("%s:%d: %s" % (path, lineno, e)) from None
            except Exception as e:
                raise ConfigError("%s:%d: %s" % (path, lineno, e)) from None
    if n_states is None or n_actions is None or gamma is None or R is None or P is None:
        raise ConfigError("%s: incomplete MDP (need states, actions, gamma, reward, transitions)" % path)
    try:
        return TabularMdp(n_states, n_actions, P, R, gamma, absorbing=absorbing)
    except ValueError as e:
        raise ConfigError("%s: %s" % (path, e)) from None


def write_mdp(mdp, path):
    """Plain-text MDP format:

        states N
        actions A
        gamma G
        absorbing i j ...        (optional)
        reward                   (then N rows of A numbers)
        transition a             (then N rows of N numbers, one block per a)

    '#' starts a comment; blank lines are ignored.
    """
    with open(path, "w") as f:
        f.write("states %d\n" % mdp.n_states)
        f.write("actions %d\n" % mdp.n_actions)
        f.write("gamma %r\n" % float(mdp.gamma))
        if mdp.absorbing:
            f.write("absorbing %s\n" % " ".join(str(s) for s in sorted(mdp.absorbing)))
        f.write("reward\n")
        for s in range(mdp.n_states):
            f.write(" ".join(repr(float(x)) for x in mdp.R[s]) + "\n")
        for a in range(mdp.n_actions):
            f.write("transition %d\n" % a)
            for s in range(mdp.n_states):
                f.write(" ".join(repr(float(x)) for x in mdp.P[s, a]) + "\n")
