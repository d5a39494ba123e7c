"""Deterministic-policy-gradient control of discrete actions via probability
surrogates, with a value-iteration check of the underlying equivalence and a
DQN baseline, on a small dual-backend (numpy / numba) numeric core."""

__version__ = "0.1.0"

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
from .checkpoint import load_agent, save_agent
from .envs import AcrobotEnv, StepResult, TabularEnv
from .errors import ConfigError, DimensionError, StateError, TrainingDiverged
from .harness import RunConfig, parse_config, run_training
from .nn import Network, NetworkSpec, softmax
from .replay import ReplayBuffer, Transition, one_hot
from .rng import derive_rng_streams
from .theorem import (
    TabularMdp,
    enumerate_simplex_grid,
    parse_mdp,
    run_verification,
    surrogate_value_iteration,
    task_value_iteration,
    verify_equivalence,
    write_mdp,
)

__all__ = [
    "__version__",
    "AcrobotEnv",
    "ConfigError",
    "DimensionError",
    "DqnAgent",
    "Hyperparams",
    "Network",
    "NetworkSpec",
    "PsadpgAgent",
    "ReplayBuffer",
    "RunConfig",
    "StateError",
    "StepResult",
    "TabularEnv",
    "TabularMdp",
    "TrainingDiverged",
    "Transition",
    "act_greedy",
    "actor_probabilities",
    "derive_rng_streams",
    "dqn_train_step",
    "enumerate_simplex_grid",
    "epsilon_at",
    "eval_action",
    "load_agent",
    "one_hot",
    "parse_config",
    "parse_mdp",
    "psadpg_train_step",
    "run_training",
    "run_verification",
    "sample_action",
    "save_agent",
    "softmax",
    "surrogate_value_iteration",
    "target_update",
    "task_value_iteration",
    "verify_equivalence",
    "write_mdp",
]
