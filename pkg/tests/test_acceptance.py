"""Acceptance gate: one test per shipped claim, at the stated tolerances.

Each test prints a single criterion line on success; under `pytest -v` the
test names double as the pass/fail report. The desk-scale control study
(criterion 4) runs six full training jobs and takes tens of minutes on one
core; it sits last so everything cheap fails first.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from psadpg.agents import (
    Hyperparams,
    PsadpgAgent,
    actor_probabilities,
    epsilon_at,
    psadpg_train_step,
    sample_action,
    target_update,
)
from psadpg.envs import TabularEnv
from psadpg.errors import ConfigError
from psadpg.gradcheck import run_all_checks
from psadpg.harness import RunConfig, make_env, run_training
from psadpg.replay import ReplayBuffer, Transition, one_hot
from psadpg.rng import derive_rng_streams
from psadpg.theorem import parse_mdp, run_verification, task_value_iteration

REPO = Path(__file__).resolve().parent.parent
CHAIN_MDP = str(REPO / "mdps" / "chain2.mdp")


def test_criterion_1_gradient_fidelity():
    t0 = time.monotonic()
    reports = run_all_checks(seed=0, n_coords=100, h=1e-5, tol=1e-4)
    elapsed = time.monotonic() - t0

    assert [r.label for r in reports] == ["actor-through-critic", "critic", "dqn"]
    for rep in reports:
        assert rep.n_coords >= 100
        assert rep.max_rel_err <= 1e-4, "%s: %g" % (rep.label, rep.max_rel_err)
        assert rep.passed
    assert elapsed < 60.0
    print("criterion 1: reverse-mode vs central differences, "
          "max rel err %.2e over %d coords x 3 networks in %.1fs PASS"
          % (max(r.max_rel_err for r in reports), reports[0].n_coords, elapsed))


def test_criterion_2_optimum_preserved_under_probability_actions():
    t0 = time.monotonic()
    summary = run_verification(np.random.default_rng(0), n_mdps=20,
                               max_states=5, max_actions=4, k=8, gamma=0.9,
                               gap_tol=1e-8, tie_tol=1e-9)
    elapsed = time.monotonic() - t0

    assert len(summary.per_mdp) == 20
    for S, A, gap, vertex_ok, match_ok in summary.per_mdp:
        assert 2 <= S <= 5 and 2 <= A <= 4
        assert gap <= 1e-8
        assert vertex_ok    # an optimal grid point sits on a simplex vertex
        assert match_ok     # and that vertex is the one-hot of a greedy action
    assert summary.max_gap <= 1e-8
    assert summary.all_vertex_flags and summary.all_match_flags
    # degenerate tie: the whole mixture edge between the tied actions is optimal
    assert summary.tie_gap <= 1e-9
    assert summary.tie_edge_gap <= 1e-9
    assert summary.passed
    assert elapsed < 60.0
    print("criterion 2: 20 random MDPs max gap %.2e, tie edge gap %.2e "
          "in %.1fs PASS" % (summary.max_gap, summary.tie_edge_gap, elapsed))


def test_criterion_3_update_mechanics():
    # 1.0 at step 0 and 0.02 from the horizon on, as float equalities
    hp = Hyperparams()
    assert epsilon_at(hp, 0) == 1.0
    assert epsilon_at(hp, 100_000) == 0.02
    assert epsilon_at(hp, 100_001) == 0.02
    assert epsilon_at(hp, 10**9) == 0.02

    # live loop with the stock one-update-per-1000-iterations schedule
    hp = Hyperparams(gamma=0.9, warmup=64, buffer_capacity=5000)
    assert hp.target_update_period == 1000
    streams = derive_rng_streams(7)
    env = TabularEnv(parse_mdp(CHAIN_MDP), streams["env"],
                     start_state=0, max_episode_steps=50)
    agent = PsadpgAgent(2, 2, hp, streams["actor-init"], streams["critic-init"])
    buffer = ReplayBuffer(hp.buffer_capacity, 2, 2)

    syncs = 0
    obs = env.reset()
    while agent.global_step < 2200:
        p = actor_probabilities(agent, obs)
        a = sample_action(p, epsilon_at(hp, agent.global_step), streams["sampling"])
        res = env.step(a)
        buffer.push(Transition(obs, one_hot(a, 2), res.reward, res.observation, res.done))
        agent.global_step += 1
        if len(buffer) >= hp.warmup:
            psadpg_train_step(agent, buffer.sample_arrays(hp.batch_size, streams["replay"]))
        if agent.global_step % hp.target_update_period == 0:
            for online, target in agent.network_pairs():
                assert not np.array_equal(online.theta, target.theta)  # drifted since last copy
            target_update(agent, "hard")
            for online, target in agent.network_pairs():
                assert np.array_equal(online.theta, target.theta)  # bit-equal after the update
            syncs += 1
        obs = env.reset() if (res.done or res.truncated) else res.observation
    assert syncs == 2

    # replay scan: every stored surrogate action in 2200 live transitions is one-hot
    assert len(buffer) == 2200
    assert buffer.all_one_hot()
    print("criterion 3: replay 100%% one-hot over %d transitions, targets "
          "bit-equal at both hard updates, epsilon rails exact PASS" % len(buffer))


def test_criterion_5_chain_reaches_value_iteration_optimum():
    t0 = time.monotonic()
    chain = parse_mdp(CHAIN_MDP)
    vf = task_value_iteration(chain)
    optimum = vf.values[0]
    # single terminal reward, so the discounted optimum and the undiscounted
    # episode return are the same number
    assert optimum == 1.0

    config = RunConfig(
        agent="psadpg",
        env="tabular:" + CHAIN_MDP,
        episodes=500,
        seed=0,
        tabular_horizon=100,
        hyperparams=Hyperparams(
            learning_rate=0.02,
            gamma=0.9,
            target_update_period=100,
            warmup=100,
            buffer_capacity=5000,
            epsilon_horizon=800,
        ),
    )
    result = run_training(config)
    elapsed = time.monotonic() - t0
    final = result.points[-1].mean100

    assert abs(final - optimum) <= 0.05 * abs(optimum)
    assert elapsed < 60.0
    print("criterion 5: chain mean100 %.3f vs optimum %.1f (within 5%%) "
          "after %d episodes in %.1fs PASS"
          % (final, optimum, config.episodes, elapsed))


def test_criterion_6_identical_runs_are_byte_identical(tmp_path):
    def run(tag):
        out = tmp_path / tag / "run.csv"
        out.parent.mkdir()
        config = RunConfig(agent="psadpg", env="acrobot", episodes=12, seed=11,
                           output_path=str(out))
        run_training(config)
        return out

    first = run("a")
    second = run("b")
    assert first.read_bytes() == second.read_bytes()
    ckpt_a = Path(str(first) + ".ckpt").read_bytes()
    ckpt_b = Path(str(second) + ".ckpt").read_bytes()
    assert ckpt_a == ckpt_b

    meta_a = json.loads(Path(str(first) + ".meta.json").read_text())
    meta_b = json.loads(Path(str(second) + ".meta.json").read_text())
    meta_a["config"].pop("output_path")
    meta_b["config"].pop("output_path")
    assert meta_a == meta_b
    print("criterion 6: same config and seed twice, curve CSV %d bytes and "
          "checkpoint %d bytes identical PASS" % (len(first.read_bytes()), len(ckpt_a)))


def test_criterion_7_no_arcade_scale_claims():
    # the large-scale arcade result is out of desk-scale scope by design:
    # the lab ships exactly two environments and nothing in the sources or
    # the other tests names that benchmark. The tokens are assembled at
    # runtime so this file stays out of its own scan.
    tokens = ["".join(("ami", "dar")), "".join(("ata", "ri"))]
    scanned = []
    for pattern in ("src/psadpg/*.py", "benchmarks/*.py", "tests/*.py", "README.md"):
        scanned.extend(REPO.glob(pattern))
    scanned = [p for p in scanned if p.name != "test_acceptance.py"]
    assert len(scanned) >= 10
    for path in scanned:
        text = path.read_text().lower()
        for token in tokens:
            assert token not in text, "%s mentions %s" % (path, token)

    streams = derive_rng_streams(0)
    with pytest.raises(ConfigError):
        make_env("pong", streams["env"])
    print("criterion 7: no arcade-scale reproduction attempted or referenced "
          "(%d files scanned) PASS" % len(scanned))


@pytest.mark.slow
def test_criterion_4_desk_scale_control_study():
    # six full runs at stock settings; tens of minutes on one core
    t0 = time.monotonic()
    curves = {}
    for agent in ("psadpg", "dqn"):
        per_seed = []
        for seed in (0, 1, 2):
            config = RunConfig(agent=agent, env="acrobot", episodes=1500, seed=seed)
            assert config.hyperparams == Hyperparams()  # stock settings, nothing tuned
            result = run_training(config)
            per_seed.append([p.mean100 for p in result.points])
            del result
        curves[agent] = np.mean(np.asarray(per_seed), axis=0)  # seed-averaged curve

    for agent, curve in curves.items():
        start = curve[:100].min()
        best = curve.max()
        assert start <= -450.0, "%s starts at %.1f" % (agent, start)
        assert best >= -150.0, "%s only reaches %.1f" % (agent, best)

    final_gap = abs(curves["psadpg"][-1] - curves["dqn"][-1])
    assert final_gap <= 50.0
    elapsed = time.monotonic() - t0
    print("criterion 4: mean100 over 3 seeds rises from <= -450 to >= -150 "
          "for both agents within 1500 episodes; finals %.1f vs %.1f "
          "(gap %.1f <= 50) in %.0fs PASS"
          % (curves["psadpg"][-1], curves["dqn"][-1], final_gap, elapsed))
