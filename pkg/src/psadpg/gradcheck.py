"""Finite-difference verification of every backward pass.

The analytic gradients feed Adam directly, so an unnoticed sign slip or a
dropped term trains something subtly wrong. Each check builds a scalar
J(theta), computes dJ/dtheta with the reverse pass, then probes sampled
coordinates with central differences and compares relative error against a
tolerance with an absolute floor for near-zero coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .agents import DqnAgent, Hyperparams, PsadpgAgent
from .nn import softmax

FD_STEP = 1e-5
REL_TOL = 1e-4
ERR_FLOOR = 1e-4


def relative_error(a, b, floor=ERR_FLOOR):
    return abs(a - b) / max(abs(a), abs(b), floor)


def sample_coords(rng, n_params, n_coords):
    if n_coords >= n_params:
        return np.arange(n_params)
    return np.sort(rng.choice(n_params, size=n_coords, replace=False))


@dataclass
class GradCheckReport:
    label: str
    n_coords: int
    max_rel_err: float
    mean_rel_err: float
    worst_coord: int
    tolerance: float

    @property
    def passed(self):
        return self.max_rel_err <= self.tolerance


def _compare(label, thetas, analytic, eval_fn, coords, h, tol):
    """Central differences on the virtual concatenation of `thetas`."""
    sizes = [t.size for t in thetas]
    offsets = np.cumsum([0] + sizes)
    errs = []
    worst = (0.0, -1)
    for c in coords:
        seg = int(np.searchsorted(offsets, c, side="right") - 1)
        theta = thetas[seg]
        i = int(c - offsets[seg])
        old = theta[i]
        theta[i] = old + h
        up = eval_fn()
        theta[i] = old - h
        down = eval_fn()
        theta[i] = old
        fd = (up - down) / (2.0 * h)
        err = relative_error(analytic[int(c)], fd)
        errs.append(err)
        if err > worst[0]:
            worst = (err, int(c))
    errs = np.asarray(errs)
    return GradCheckReport(label, len(coords), float(errs.max()), float(errs.mean()),
                           worst[1], tol)


def network_check(net, x, rng, n_coords=100, h=FD_STEP, tol=REL_TOL, label="network"):
    """J = sum(forward(x) * G) for a fixed random G; checks all layer grads."""
    g = rng.standard_normal(size=(x.shape[0], net.spec.output_dim))

    def eval_j():
        return float(np.sum(net.forward(x) * g))

    net.zero_grads()
    net.forward(x)
    net.backward(g)
    analytic = net.grad_flat.copy()
    coords = sample_coords(rng, net.n_params, n_coords)
    return _compare(label, [net.theta], analytic, eval_j, coords, h, tol)


def critic_check(critic, states, probs, rng, n_coords=100, h=FD_STEP, tol=REL_TOL):
    """J = sum(Q(s, p) * G) over both the trunk and the head parameters."""
    g = rng.standard_normal(size=(states.shape[0], 1))

    def eval_j():
        return float(np.sum(critic.forward(states, probs) * g))

    critic.zero_grads()
    critic.forward(states, probs)
    critic.backward(g)
    analytic = np.concatenate([critic.trunk.grad_flat, critic.head.grad_flat])
    n_total = critic.trunk.n_params + critic.head.n_params
    coords = sample_coords(rng, n_total, n_coords)
    return _compare("critic", [critic.trunk.theta, critic.head.theta],
                    analytic, eval_j, coords, h, tol)


def actor_through_critic_check(agent: PsadpgAgent, states, rng,
                               n_coords=100, h=FD_STEP, tol=REL_TOL):
    """J = mean Q(s, actor(s)) with the critic frozen.

    This is exactly the surrogate-action objective the actor climbs during
    training, so it exercises the combined path: critic backward to its
    probability input, then actor backward through the softmax.
    """
    n = states.shape[0]

    def eval_j():
        return float(np.mean(agent.critic.forward(states, agent.actor.forward(states))))

    agent.actor.zero_grads()
    probs = agent.actor.forward(states)
    agent.critic.forward(states, probs)
    gq = np.full((n, 1), 1.0 / n)
    gp = agent.critic.input_p_gradient(gq)
    agent.actor.backward(gp)
    analytic = agent.actor.grad_flat.copy()
    coords = sample_coords(rng, agent.actor.n_params, n_coords)
    return _compare("actor-through-critic", [agent.actor.theta], analytic,
                    eval_j, coords, h, tol)


def run_all_checks(seed=0, n_coords=100, h=FD_STEP, tol=REL_TOL,
                   obs_dim=6, action_count=3, batch=8):
    """The three checks a training run depends on: actor (through the frozen
    critic), critic, and the DQN value network. Returns a list of reports."""
    rng = np.random.default_rng(seed)
    hp = Hyperparams()
    agent = PsadpgAgent(obs_dim, action_count, hp, rng, rng)
    dqn = DqnAgent(obs_dim, action_count, hp, rng)
    states = 0.5 * rng.standard_normal(size=(batch, obs_dim))
    probs = softmax(rng.standard_normal(size=(batch, action_count)))

    reports = [
        actor_through_critic_check(agent, states, rng, n_coords, h, tol),
        critic_check(agent.critic, states, probs, rng, n_coords, h, tol),
        network_check(dqn.q_net, states, rng, n_coords, h, tol, label="dqn"),
    ]
    return reports
