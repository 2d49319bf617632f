"""Agent checkpoints: one text file per network plus ``manifest.txt``.

The manifest holds ``key: value`` lines: ``agent`` (class name), ``steps``,
``buffer_capacity``, ``buffer_size``, ``buffer_next`` and ``networks`` (space
separated names, each stored as ``<name>.txt`` in the neural checkpoint layout).
Buffer contents are not saved.
"""

from __future__ import annotations

from pathlib import Path

from ..neural import load_mlp, save_mlp
from .ddpg import DdpgAgent
from .dqn import DqnAgent


def agent_networks(agent) -> dict:
    if isinstance(agent, DqnAgent):
        return {"online": agent.online, "target": agent.target}
    if isinstance(agent, DdpgAgent):
        nets = {"actor": agent.actor, "actor_target": agent.actor_target}
        for i, (c, t) in enumerate(zip(agent.critics, agent.critic_targets)):
            nets[f"critic{i}"] = c
            nets[f"critic{i}_target"] = t
        return nets
    raise TypeError(f"no checkpoint layout for {type(agent).__name__}")


def save_agent(agent, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nets = agent_networks(agent)
    for name, net in nets.items():
        save_mlp(net, directory / f"{name}.txt")
    meta = agent.buffer.metadata()
    lines = [
        f"agent: {type(agent).__name__}",
        f"steps: {agent.steps}",
        f"buffer_capacity: {meta['capacity']}",
        f"buffer_size: {meta['size']}",
        f"buffer_next: {meta['next']}",
        "networks: " + " ".join(nets),
    ]
    path = directory / "manifest.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(directory) -> dict[str, str]:
    out = {}
    for line in (Path(directory) / "manifest.txt").read_text(encoding="utf-8").splitlines():
        if ":" in line:
            key, value = line.split(":", 1)
            out[key.strip()] = value.strip()
    return out


def load_agent(agent, directory) -> dict[str, str]:
    """Restore network parameters and the step counter into an agent of the same shape."""
    manifest = read_manifest(directory)
    if manifest.get("agent") != type(agent).__name__:
        raise ValueError(f"checkpoint holds {manifest.get('agent')}, not {type(agent).__name__}")
    nets = agent_networks(agent)
    for name in manifest["networks"].split():
        nets[name].load_from(load_mlp(Path(directory) / f"{name}.txt"))
    agent.steps = int(manifest["steps"])
    return manifest
