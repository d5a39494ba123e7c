"""Command line entry points.

    psadpg train --agent psadpg --env acrobot --episodes 1500 --seed 3 --out run.csv
    psadpg eval --checkpoint run.csv.ckpt --env acrobot --episodes 10 --mode argmax
    psadpg verify-theorem --mdps 20 --k 8 --seed 0
    psadpg gradcheck --seed 0 --coords 100

Exit codes: 0 success, 1 bad configuration or input, 2 a check failed or
training diverged.
"""

import argparse
import sys

import numpy as np

from .errors import ConfigError, TrainingDiverged
from .gradcheck import run_all_checks
from .harness import evaluate, make_env, parse_config, run_training
from .rng import derive_rng_streams
from .theorem import enumerate_simplex_grid, parse_mdp, run_verification, verify_equivalence


def _parse_set_pairs(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError("--set expects key=value, got %r" % item)
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _collect_overrides(args):
    """--set pairs first, then explicit flags on top (most specific wins)."""
    overrides = _parse_set_pairs(getattr(args, "set", None))
    for key in ("agent", "env", "episodes", "seed", "out", "eval_mode"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _cmd_train(args):
    config = parse_config(args.config, _collect_overrides(args))
    every = args.log_every

    def progress(point):
        if every and point.episode % every == 0:
            print("episode %d reward %.1f mean100 %.2f"
                  % (point.episode, point.reward, point.mean100))

    result = run_training(config, progress=progress)
    last = result.points[-1]
    print("done: %d episodes, final reward %.1f, final mean100 %.2f"
          % (last.episode, last.reward, last.mean100))
    if result.csv_path:
        print("curve: %s" % result.csv_path)
        print("checkpoint: %s" % result.checkpoint_path)
        print("metadata: %s" % result.metadata_path)
    return 0


def _cmd_eval(args):
    from .checkpoint import load_agent

    try:
        agent = load_agent(args.checkpoint)
    except OSError as e:
        raise ConfigError("cannot read checkpoint %s: %s" % (args.checkpoint, e)) from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    streams = derive_rng_streams(args.seed)
    env = make_env(args.env, streams["env"])
    returns = evaluate(agent, env, args.episodes, args.mode, streams["sampling"])
    for i, r in enumerate(returns, start=1):
        print("episode %d return %.1f" % (i, r))
    print("mean return %.2f over %d episodes" % (float(np.mean(returns)), len(returns)))
    return 0


def _cmd_verify_theorem(args):
    if args.file:
        mdp = parse_mdp(args.file)
        grid = enumerate_simplex_grid(mdp.n_actions, args.k)
        rep = verify_equivalence(mdp, grid)
        for s in range(mdp.n_states):
            print("state %d: task V*=%r surrogate V*=%r gap=%.3e vertex=%s greedy-match=%s"
                  % (s, rep.task_values[s], rep.surrogate_values[s], rep.value_gap[s],
                     "yes" if rep.argmax_is_vertex[s] else "NO",
                     "yes" if rep.vertex_matches_task_greedy[s] else "NO"))
        ok = rep.all_flags() and rep.max_gap <= args.gap_tol
        print("max gap %.3e (tol %g): %s" % (rep.max_gap, args.gap_tol,
                                             "PASS" if ok else "FAIL"))
        return 0 if ok else 2

    rng = np.random.default_rng(args.seed)
    summary = run_verification(rng, n_mdps=args.mdps, k=args.k, gamma=args.gamma,
                               gap_tol=args.gap_tol)
    for i, (S, A, gap, vertex, match) in enumerate(summary.per_mdp, start=1):
        print("mdp %02d/%02d S=%d A=%d gap=%.3e vertex=%s greedy-match=%s"
              % (i, len(summary.per_mdp), S, A, gap,
                 "yes" if vertex else "NO", "yes" if match else "NO"))
    print("max gap %.3e (tol %g)" % (summary.max_gap, args.gap_tol))
    print("tie case: gap %.3e, edge gap %.3e" % (summary.tie_gap, summary.tie_edge_gap))
    print("PASS" if summary.passed else "FAIL")
    return 0 if summary.passed else 2


def _cmd_gradcheck(args):
    reports = run_all_checks(seed=args.seed, n_coords=args.coords, tol=args.tol)
    ok = True
    for rep in reports:
        print("%s: max rel err %.3e over %d coords (tol %g) %s"
              % (rep.label, rep.max_rel_err, rep.n_coords, rep.tolerance,
                 "PASS" if rep.passed else "FAIL"))
        ok = ok and rep.passed
    return 0 if ok else 2


def build_parser():
    parser = argparse.ArgumentParser(prog="psadpg",
                                     description="Surrogate-action policy gradient lab")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train an agent and emit artifacts")
    train.add_argument("--config", help="JSON config file")
    train.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
    train.add_argument("--agent", choices=("psadpg", "dqn"))
    train.add_argument("--env", help="acrobot or tabular:<mdp file>")
    train.add_argument("--episodes", type=int)
    train.add_argument("--seed", type=int)
    train.add_argument("--out", help="curve CSV path; checkpoint and metadata sit next to it")
    train.add_argument("--eval-mode", dest="eval_mode", choices=("sample", "argmax"))
    train.add_argument("--log-every", type=int, default=100,
                       help="progress print period in episodes; 0 silences")
    train.set_defaults(fn=_cmd_train)

    ev = sub.add_parser("eval", help="roll out a checkpoint without learning")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--env", default="acrobot")
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--mode", choices=("sample", "argmax"), default="argmax")
    ev.set_defaults(fn=_cmd_eval)

    vt = sub.add_parser("verify-theorem",
                        help="numerical check that the wrapped process keeps the optimum")
    vt.add_argument("--mdps", type=int, default=20)
    vt.add_argument("--k", type=int, default=8, help="simplex grid resolution")
    vt.add_argument("--seed", type=int, default=0)
    vt.add_argument("--gamma", type=float, default=0.9)
    vt.add_argument("--gap-tol", dest="gap_tol", type=float, default=1e-8)
    vt.add_argument("--file", help="check one MDP file instead of random ones")
    vt.set_defaults(fn=_cmd_verify_theorem)

    gc = sub.add_parser("gradcheck", help="finite-difference audit of the backward passes")
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--coords", type=int, default=100)
    gc.add_argument("--tol", type=float, default=1e-4)
    gc.set_defaults(fn=_cmd_gradcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 1
    except TrainingDiverged as e:
        print("training diverged: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
