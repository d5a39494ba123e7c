"""The two learners.

PsadpgAgent emits a probability vector over the discrete actions through a
deterministic actor; the environment-facing loop samples the actual action
from it. The critic scores (state, probability) pairs, so one-hot replay
entries and soft actor outputs travel through the same input slots. The actor
improves by one combined reverse pass: the critic is differentiated with
respect to its probability input only (its own parameters frozen), and that
gradient continues through the softmax actor.

DqnAgent is the baseline: one network of action values, greedy action
selection, max-bootstrapped targets. It shares the widths, activation,
learning rate, exploration schedule and target cadence with the first agent
so curve comparisons isolate the algorithm, not the tuning.

Both use hard target synchronization on a fixed step period by default; the
soft tau-blend is available through target_update(agent, "soft").
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .nn import Network, NetworkSpec, mse_loss
from .replay import TransitionBatch

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

HIDDEN = 64  # width of every hidden layer in the default shapes


@dataclass
class Hyperparams:
    learning_rate: float = 5e-4
    gamma: float = 1.0
    target_update_period: int = 1000
    tau: float = 0.005
    batch_size: int = 32
    buffer_capacity: int = 50_000
    warmup: int = 1000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.02
    epsilon_horizon: int = 100_000

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.target_update_period < 1:
            raise ValueError("target_update_period must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.buffer_capacity < self.batch_size:
            raise ValueError("buffer_capacity must be >= batch_size")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_horizon < 1:
            raise ValueError("epsilon_horizon must be >= 1")


def epsilon_at(hp: Hyperparams, step):
    """Linear anneal from epsilon_start to epsilon_end, then flat.

    Exact at the rails: step 0 returns epsilon_start itself and every step at
    or past the horizon returns epsilon_end itself, no float drift.
    """
    if step < 0:
        raise ValueError("step must be >= 0")
    if step >= hp.epsilon_horizon:
        return hp.epsilon_end
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * (step / hp.epsilon_horizon)


def sample_action(p, epsilon, rng):
    """Exploration wrapper around a categorical draw.

    With probability epsilon the action is uniform over the action set;
    otherwise it is drawn from p itself. Greedy agents pass a one-hot p, which
    turns the non-exploring branch into their greedy choice.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(n))
    c = np.cumsum(p)
    idx = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    return min(idx, n - 1)


class Critic:
    """Q(s, p): a state trunk, then a head over (trunk features, p)."""

    def __init__(self, trunk: Network, head: Network):
        self.trunk = trunk
        self.head = head
        self.p_dim = head.spec.input_dim - trunk.spec.output_dim
        if self.p_dim < 1:
            raise DimensionError(
                "critic head must be wider than the trunk output to admit the probability input"
            )

    def forward(self, states, probs):
        h = self.trunk.forward(states)
        if probs.shape != (h.shape[0], self.p_dim):
            raise DimensionError(
                "probability input has shape %r, critic expects (%d, %d)"
                % (probs.shape, h.shape[0], self.p_dim)
            )
        z = np.concatenate([h, probs], axis=1)
        return self.head.forward(z)

    def backward(self, output_grad, write_param_grads=True):
        """Full reverse pass; returns the gradient at the probability input."""
        gz = self.head.backward(output_grad, write_param_grads)
        cut = self.trunk.spec.output_dim
        self.trunk.backward(gz[:, :cut], write_param_grads)
        return gz[:, cut:]

    def input_p_gradient(self, output_grad):
        """Gradient at the probability input only; no parameter grads are
        written anywhere, and the trunk is not even walked."""
        gz = self.head.backward(output_grad, write_param_grads=False)
        return gz[:, self.trunk.spec.output_dim:]

    def networks(self):
        return (self.trunk, self.head)

    def zero_grads(self):
        self.trunk.zero_grads()
        self.head.zero_grads()

    def adam_step(self, lr):
        self.trunk.adam_step(lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)
        self.head.adam_step(lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)

    def copy_from(self, other: "Critic"):
        self.trunk.copy_from(other.trunk)
        self.head.copy_from(other.head)

    def soft_update_from(self, other: "Critic", tau):
        self.trunk.soft_update_from(other.trunk, tau)
        self.head.soft_update_from(other.head, tau)


def default_actor_spec(obs_dim, action_count):
    return NetworkSpec(obs_dim, (HIDDEN, action_count), ("tanh", "softmax"))


def default_critic_specs(obs_dim, action_count):
    trunk = NetworkSpec(obs_dim, (HIDDEN,), ("tanh",))
    head = NetworkSpec(
        HIDDEN + action_count, (HIDDEN, HIDDEN, 1), ("linear", "tanh", "linear")
    )
    return trunk, head


def default_dqn_spec(obs_dim, action_count):
    return NetworkSpec(obs_dim, (HIDDEN, action_count), ("tanh", "linear"))


class PsadpgAgent:
    """Actor, critic, and their target twins.

    The actor's final layer starts at zero so the untrained policy is exactly
    uniform. Targets are initialized as bit-exact copies of the online
    networks. The network shapes are constructor arguments, so alternative
    critic stacks are one call-site edit away.
    """

    kind = "psadpg"

    def __init__(self, obs_dim, action_count, hp: Hyperparams, actor_rng, critic_rng,
                 actor_spec=None, critic_trunk_spec=None, critic_head_spec=None):
        self.obs_dim = int(obs_dim)
        self.action_count = int(action_count)
        self.hp = hp
        if actor_spec is None:
            actor_spec = default_actor_spec(obs_dim, action_count)
        if critic_trunk_spec is None or critic_head_spec is None:
            trunk_spec, head_spec = default_critic_specs(obs_dim, action_count)
            critic_trunk_spec = critic_trunk_spec or trunk_spec
            critic_head_spec = critic_head_spec or head_spec
        if actor_spec.activations[-1] != "softmax":
            raise DimensionError("the actor must end in a softmax layer")
        self.actor = Network.initialize(actor_spec, actor_rng, zero_final=True)
        self.critic = Critic(
            Network.initialize(critic_trunk_spec, critic_rng),
            Network.initialize(critic_head_spec, critic_rng),
        )
        self.target_actor = Network(actor_spec)
        self.target_actor.copy_from(self.actor)
        self.target_critic = Critic(Network(critic_trunk_spec), Network(critic_head_spec))
        self.target_critic.copy_from(self.critic)
        self.global_step = 0

    def network_pairs(self):
        return [
            (self.actor, self.target_actor),
            (self.critic.trunk, self.target_critic.trunk),
            (self.critic.head, self.target_critic.head),
        ]

    def named_networks(self):
        return [
            ("actor", self.actor),
            ("critic_trunk", self.critic.trunk),
            ("critic_head", self.critic.head),
            ("target_actor", self.target_actor),
            ("target_critic_trunk", self.target_critic.trunk),
            ("target_critic_head", self.target_critic.head),
        ]


class DqnAgent:
    """Action-value baseline with a target twin."""

    kind = "dqn"

    def __init__(self, obs_dim, action_count, hp: Hyperparams, rng, q_spec=None):
        self.obs_dim = int(obs_dim)
        self.action_count = int(action_count)
        self.hp = hp
        if q_spec is None:
            q_spec = default_dqn_spec(obs_dim, action_count)
        self.q_net = Network.initialize(q_spec, rng)
        self.target_q_net = Network(q_spec)
        self.target_q_net.copy_from(self.q_net)
        self.global_step = 0

    def network_pairs(self):
        return [(self.q_net, self.target_q_net)]

    def named_networks(self):
        return [("q_net", self.q_net), ("target_q_net", self.target_q_net)]


def as_batch(batch):
    """Normalize a list of transitions or a TransitionBatch to stacked arrays."""
    if isinstance(batch, TransitionBatch):
        return batch
    if isinstance(batch, (list, tuple)):
        if len(batch) == 0:
            raise ValueError("empty batch")
        return TransitionBatch(
            np.stack([np.asarray(t.state, dtype=np.float64) for t in batch]),
            np.stack([np.asarray(t.surrogate_action, dtype=np.float64) for t in batch]),
            np.array([t.reward for t in batch], dtype=np.float64),
            np.stack([np.asarray(t.next_state, dtype=np.float64) for t in batch]),
            np.array([t.done for t in batch], dtype=np.bool_),
        )
    raise TypeError("batch must be a TransitionBatch or a list of transitions")


def actor_probabilities(agent: PsadpgAgent, s):
    """The deterministic policy output for one observation."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1:
        raise DimensionError("expected a single 1-D observation")
    return agent.actor.forward(s[None, :])[0]


def psadpg_targets(agent: PsadpgAgent, batch: TransitionBatch):
    """Bootstrap targets from the target twins; rewards alone at terminals."""
    p2 = agent.target_actor.forward(batch.next_states)
    q2 = agent.target_critic.forward(batch.next_states, p2)
    not_done = 1.0 - batch.dones.astype(np.float64)
    return batch.rewards[:, None] + agent.hp.gamma * (q2 * not_done[:, None])


def psadpg_train_step(agent: PsadpgAgent, batch):
    """One critic regression step, then one actor ascent step.

    Returns (critic_loss, actor_objective); the objective is the mean critic
    score of the actor's own outputs, measured before the actor moves.
    """
    batch = as_batch(batch)
    n = batch.states.shape[0]
    y = psadpg_targets(agent, batch)

    agent.critic.zero_grads()
    q = agent.critic.forward(batch.states, batch.surrogate_actions)
    critic_loss, gq = mse_loss(q, y)
    agent.critic.backward(gq)
    agent.critic.adam_step(agent.hp.learning_rate)

    agent.actor.zero_grads()
    probs = agent.actor.forward(batch.states)
    qa = agent.critic.forward(batch.states, probs)
    actor_objective = float(qa.mean())
    # ascent on mean Q, phrased as descent on its negation; the critic only
    # relays gradient to its probability input here
    gq_actor = np.full((n, 1), -1.0 / n)
    gp = agent.critic.input_p_gradient(gq_actor)
    agent.actor.backward(gp)
    agent.actor.adam_step(agent.hp.learning_rate, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)

    return critic_loss, actor_objective


def dqn_targets(agent: DqnAgent, batch: TransitionBatch):
    q2 = agent.target_q_net.forward(batch.next_states)
    not_done = 1.0 - batch.dones.astype(np.float64)
    return batch.rewards + agent.hp.gamma * (q2.max(axis=1) * not_done)


def dqn_train_step(agent: DqnAgent, batch):
    """One regression step of the taken-action values toward their targets."""
    batch = as_batch(batch)
    n = batch.states.shape[0]
    y = dqn_targets(agent, batch)
    taken = np.argmax(batch.surrogate_actions, axis=1)

    agent.q_net.zero_grads()
    q = agent.q_net.forward(batch.states)
    pred = q[np.arange(n), taken]
    diff = pred - y
    loss = float((diff * diff).mean())
    gq = np.zeros_like(q)
    gq[np.arange(n), taken] = (2.0 / n) * diff
    agent.q_net.backward(gq)
    agent.q_net.adam_step(agent.hp.learning_rate, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)
    return loss


def target_update(agent, mode="hard"):
    """hard: bit-exact copy onto the targets. soft: tau-blend toward online."""
    if mode == "hard":
        for online, target in agent.network_pairs():
            target.copy_from(online)
    elif mode == "soft":
        for online, target in agent.network_pairs():
            target.soft_update_from(online, agent.hp.tau)
    else:
        raise ValueError("mode must be 'hard' or 'soft', got %r" % (mode,))


def act_greedy(agent: DqnAgent, s):
    """Highest-value action; ties go to the lowest index."""
    s = np.asarray(s, dtype=np.float64)
    q = agent.q_net.forward(s[None, :])[0]
    return int(np.argmax(q))


def eval_action(agent: PsadpgAgent, s, mode="argmax", rng=None):
    """Evaluation-time action: the policy's mode, or a draw from it."""
    p = actor_probabilities(agent, s)
    if mode == "argmax":
        return int(np.argmax(p))
    if mode == "sample":
        if rng is None:
            raise ValueError("mode='sample' needs an rng")
        return sample_action(p, 0.0, rng)
    raise ValueError("mode must be 'argmax' or 'sample', got %r" % (mode,))
