"""Run orchestration: config parsing, seeding, the training loop, and curves.

Everything an experiment emits (curve CSV, checkpoint, metadata sidecar) is a
pure function of (config, seed): streams are derived from the seed by name,
the loop is single-threaded, floats are written with repr so they round-trip
exactly, and the metadata contains no timestamps. Two runs with the same
config produce byte-identical artifacts; that property is load-bearing and
pinned by tests.
"""

import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import backends
from .agents import (
    DqnAgent,
    Hyperparams,
    PsadpgAgent,
    act_greedy,
    actor_probabilities,
    dqn_train_step,
    epsilon_at,
    eval_action,
    psadpg_train_step,
    sample_action,
    target_update,
)
from .envs import AcrobotEnv, TabularEnv
from .errors import ConfigError, TrainingDiverged
from .replay import ReplayBuffer, Transition, one_hot
from .rng import derive_rng_streams, rng_metadata
from .theorem import parse_mdp

AGENT_KINDS = ("psadpg", "dqn")
EVAL_MODES = ("sample", "argmax")

ACROBOT_SEMANTICS = "acrobot-book-rk4-dt0.2; reward -1 per step, 0 at termination; 500-step truncation"


@dataclass
class CurvePoint:
    episode: int
    reward: float
    mean100: float


@dataclass
class RunConfig:
    agent: str = "psadpg"
    env: str = "acrobot"
    episodes: int = 100
    seed: int = 0
    output_path: str = None
    eval_mode: str = "sample"
    tabular_start: int = 0
    tabular_horizon: int = 100
    hyperparams: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ConfigError("agent must be one of %s, got %r" % (AGENT_KINDS, self.agent))
        if self.eval_mode not in EVAL_MODES:
            raise ConfigError("eval_mode must be one of %s, got %r" % (EVAL_MODES, self.eval_mode))
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")


_RUN_KEY_TYPES = {
    "agent": str,
    "env": str,
    "episodes": int,
    "seed": int,
    "out": str,
    "eval_mode": str,
    "tabular_start": int,
    "tabular_horizon": int,
}
_HP_KEY_TYPES = {f.name: f.type for f in fields(Hyperparams)}


def _coerce(key, value, typ):
    try:
        if typ is int or typ == "int":
            out = int(value)
            if isinstance(value, str) or isinstance(value, (int, np.integer)) or float(value) == out:
                return out
            raise ValueError("not an integer")
        if typ is float or typ == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigError("bad value for %r: %r (%s)" % (key, value, e)) from None


def parse_config(path=None, overrides=None):
    """Merge built-in defaults, an optional JSON file, and override pairs.

    Precedence: overrides > file > defaults. Keys are flat; hyperparameter
    names sit next to run-level names. Unknown keys fail loudly so a typo
    cannot silently train with a default.
    """
    merged = {}
    if path is not None:
        try:
            with open(path) as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError("cannot read config %s: %s" % (path, e)) from None
        except json.JSONDecodeError as e:
            raise ConfigError("%s is not valid JSON: %s" % (path, e)) from None
        if not isinstance(data, dict):
            raise ConfigError("%s must contain a JSON object" % path)
        merged.update(data)
    if overrides:
        merged.update(overrides)

    run_kwargs = {}
    hp_kwargs = {}
    for key, value in merged.items():
        if key in _RUN_KEY_TYPES:
            field_name = "output_path" if key == "out" else key
            run_kwargs[field_name] = _coerce(key, value, _RUN_KEY_TYPES[key])
        elif key in _HP_KEY_TYPES:
            hp_kwargs[key] = _coerce(key, value, _HP_KEY_TYPES[key])
        else:
            raise ConfigError("unknown config key %r" % key)
    try:
        hp = Hyperparams(**hp_kwargs)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return RunConfig(hyperparams=hp, **run_kwargs)


def make_env(name, rng, tabular_start=0, tabular_horizon=100):
    """Resolve an environment by name: 'acrobot' or 'tabular:<mdp file>'."""
    if name == "acrobot":
        return AcrobotEnv(rng)
    if name.startswith("tabular:"):
        mdp = parse_mdp(name.split(":", 1)[1])
        return TabularEnv(mdp, rng, start_state=tabular_start, max_episode_steps=tabular_horizon)
    raise ConfigError("unknown environment %r" % name)


def build_agent(config: RunConfig, streams, obs_dim, action_count):
    if config.agent == "psadpg":
        return PsadpgAgent(
            obs_dim, action_count, config.hyperparams,
            streams["actor-init"], streams["critic-init"],
        )
    return DqnAgent(obs_dim, action_count, config.hyperparams, streams["critic-init"])


@dataclass
class TrainingResult:
    points: list
    agent: object
    buffer: ReplayBuffer
    target_sync_steps: list
    csv_path: str = None
    checkpoint_path: str = None
    metadata_path: str = None


def run_training(config: RunConfig, progress=None):
    """Train per the config, one curve point per episode, artifacts at the end.

    The loop: act with epsilon wrapped around the policy, store the one-hot of
    the sampled action, train once per environment step after warm-up, and
    hard-copy the target networks every target_update_period steps. `progress`
    (if given) is called with each finished CurvePoint.
    """
    hp = config.hyperparams
    streams = derive_rng_streams(config.seed)
    env = make_env(config.env, streams["env"], config.tabular_start, config.tabular_horizon)
    agent = build_agent(config, streams, env.obs_dim, env.action_count)
    buffer = ReplayBuffer(hp.buffer_capacity, env.obs_dim, env.action_count)
    is_psadpg = config.agent == "psadpg"
    ready_at = max(hp.warmup, hp.batch_size)

    points = []
    window = deque(maxlen=100)
    syncs = []
    for episode in range(1, config.episodes + 1):
        obs = env.reset()
        total = 0.0
        while True:
            if is_psadpg:
                p = actor_probabilities(agent, obs)
            else:
                p = one_hot(act_greedy(agent, obs), env.action_count)
            eps = epsilon_at(hp, agent.global_step)
            a = sample_action(p, eps, streams["sampling"])
            res = env.step(a)
            buffer.push(Transition(obs, one_hot(a, env.action_count), res.reward,
                                   res.observation, res.done))
            agent.global_step += 1
            if len(buffer) >= ready_at:
                batch = buffer.sample_arrays(hp.batch_size, streams["replay"])
                if is_psadpg:
                    loss, objective = psadpg_train_step(agent, batch)
                    healthy = math.isfinite(loss) and math.isfinite(objective)
                else:
                    loss = dqn_train_step(agent, batch)
                    healthy = math.isfinite(loss)
                if not healthy:
                    raise TrainingDiverged(
                        "non-finite loss at step %d (episode %d)" % (agent.global_step, episode)
                    )
            if agent.global_step % hp.target_update_period == 0:
                target_update(agent, "hard")
                syncs.append(agent.global_step)
            total += res.reward
            obs = res.observation
            if res.done or res.truncated:
                break
        window.append(total)
        points.append(CurvePoint(episode, total, float(np.mean(window))))
        if progress is not None:
            progress(points[-1])

    result = TrainingResult(points, agent, buffer, syncs)
    if config.output_path:
        from .checkpoint import save_agent

        result.csv_path = config.output_path
        result.checkpoint_path = config.output_path + ".ckpt"
        result.metadata_path = config.output_path + ".meta.json"
        emit_curve(points, result.csv_path)
        save_agent(agent, result.checkpoint_path)
        write_metadata(config, result.metadata_path)
    return result


def evaluate(agent, env, episodes, mode, rng):
    """Greedy or sampled rollouts without learning; returns episode returns."""
    returns = []
    for _ in range(episodes):
        obs = env.reset()
        total = 0.0
        while True:
            if isinstance(agent, PsadpgAgent):
                a = eval_action(agent, obs, mode, rng)
            else:
                a = act_greedy(agent, obs)
            res = env.step(a)
            total += res.reward
            obs = res.observation
            if res.done or res.truncated:
                break
        returns.append(total)
    return returns


def moving_mean_100(rewards):
    """Trailing mean over the most recent (up to) 100 entries, per position."""
    out = []
    arr = [float(r) for r in rewards]
    for i in range(len(arr)):
        lo = max(0, i - 99)
        out.append(float(np.mean(arr[lo : i + 1])))
    return out


def emit_curve(points, path):
    """CSV with header episode,reward,mean100; floats via repr, so a parse
    back reproduces the numbers bit for bit."""
    try:
        with open(path, "w") as f:
            f.write("episode,reward,mean100\n")
            for p in points:
                f.write("%d,%r,%r\n" % (p.episode, p.reward, p.mean100))
    except OSError as e:
        raise OSError("while writing curve to %s: %s" % (path, e)) from None


def emit_plot_data(points, path):
    """Two-column series (episode, mean100), the thing a plot actually needs."""
    try:
        with open(path, "w") as f:
            f.write("episode,mean100\n")
            for p in points:
                f.write("%d,%r\n" % (p.episode, p.mean100))
    except OSError as e:
        raise OSError("while writing plot data to %s: %s" % (path, e)) from None


def parse_curve(path):
    points = []
    with open(path) as f:
        header = f.readline().strip()
        if header != "episode,reward,mean100":
            raise ValueError("%s does not look like a curve CSV" % path)
        for line in f:
            ep, r, m = line.strip().split(",")
            points.append(CurvePoint(int(ep), float(r), float(m)))
    return points


def _package_version():
    try:
        from importlib.metadata import version

        return version("psadpg")
    except Exception:
        return "unknown"


def write_metadata(config: RunConfig, path):
    """Sidecar describing the run; deliberately timestamp-free so artifacts
    of identical runs are byte-identical."""
    meta = {
        "config": asdict(config),
        "rng": rng_metadata(),
        "backend": backends.ACTIVE,
        "package_version": _package_version(),
        "env_semantics": ACROBOT_SEMANTICS if config.env == "acrobot" else config.env,
    }
    with open(path, "w") as f:
        json.dump(meta, f, sort_keys=True, indent=2)
        f.write("\n")
