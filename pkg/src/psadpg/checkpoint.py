"""Self-describing weight checkpoints.

Layout: one JSON header line (sorted keys, so identical agents serialize to
identical bytes), then the flat little-endian float64 parameter vector of each
network, concatenated in the order the header lists them. Weights of online
and target networks are both stored; optimizer moments are not, this is a
weight checkpoint, not a resume file. Round-trips are bit-exact.
"""

import json

import numpy as np

from .agents import DqnAgent, Hyperparams, PsadpgAgent
from .nn import NetworkSpec

FORMAT_NAME = "psadpg-checkpoint"
FORMAT_VERSION = 1


def save_agent(agent, path):
    networks = agent.named_networks()
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": agent.kind,
        "obs_dim": agent.obs_dim,
        "action_count": agent.action_count,
        "global_step": agent.global_step,
        "hyperparams": agent.hp.__dict__.copy(),
        "dtype": "<f8",
        "networks": [
            {"name": name, "spec": net.spec.to_dict(), "count": net.n_params}
            for name, net in networks
        ],
    }
    with open(path, "wb") as f:
        f.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        for _, net in networks:
            f.write(net.theta.astype("<f8", copy=False).tobytes())


def load_agent(path):
    """Rebuild an agent from a checkpoint; weights match the saved bits."""
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        if header.get("format") != FORMAT_NAME:
            raise ValueError("%s is not a recognized checkpoint" % path)
        hp = Hyperparams(**header["hyperparams"])
        specs = {e["name"]: NetworkSpec.from_dict(e["spec"]) for e in header["networks"]}
        seed_rng = np.random.default_rng(0)  # placeholder init, overwritten below
        if header["kind"] == "psadpg":
            agent = PsadpgAgent(
                header["obs_dim"], header["action_count"], hp, seed_rng, seed_rng,
                actor_spec=specs["actor"],
                critic_trunk_spec=specs["critic_trunk"],
                critic_head_spec=specs["critic_head"],
            )
        elif header["kind"] == "dqn":
            agent = DqnAgent(
                header["obs_dim"], header["action_count"], hp, seed_rng,
                q_spec=specs["q_net"],
            )
        else:
            raise ValueError("unknown agent kind %r" % header["kind"])
        agent.global_step = int(header["global_step"])
        by_name = dict(agent.named_networks())
        for entry in header["networks"]:
            net = by_name[entry["name"]]
            count = int(entry["count"])
            if net.n_params != count:
                raise ValueError(
                    "network %s holds %d params, checkpoint has %d"
                    % (entry["name"], net.n_params, count)
                )
            raw = f.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError("checkpoint truncated inside %s" % entry["name"])
            net.theta[:] = np.frombuffer(raw, dtype="<f8")
        trailing = f.read(1)
        if trailing:
            raise ValueError("checkpoint has trailing bytes after the last network")
    return agent
