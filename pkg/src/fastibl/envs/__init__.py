"""Task environments."""

from __future__ import annotations

from .binary import BinaryChoice, binary_step
from .coopnav import CooperativeNavigation, coopnav_reward
from .fireman import Fireman, fireman_payoff
from .grid import GridMap, encode_grid_observation, load_map, parse_map
from .insider import InsiderAttack, insider_trial, load_scenario
from .minimap import EnvStep, Minimap

TASKS = ("binary", "insider", "minimap", "fireman", "coopnav")
SINGLE_STEP_TASKS = ("binary", "insider")


def make_task(name: str, rng, map_path=None, scenario_path=None):
    """Build a fresh environment for one run."""
    if name == "binary":
        return BinaryChoice(rng)
    if name == "insider":
        return InsiderAttack(load_scenario(scenario_path), rng)
    if name == "minimap":
        return Minimap(load_map(map_path, default="minimap.txt"), rng)
    if name == "fireman":
        return Fireman(load_map(map_path, default="fireman.txt"), rng)
    if name == "coopnav":
        grid = load_map(map_path) if map_path is not None else None
        return CooperativeNavigation(grid, rng)
    raise ValueError(f"unknown task {name!r}; expected one of {', '.join(TASKS)}")


__all__ = [
    "BinaryChoice", "CooperativeNavigation", "EnvStep", "Fireman", "GridMap",
    "InsiderAttack", "Minimap", "SINGLE_STEP_TASKS", "TASKS", "binary_step",
    "coopnav_reward", "encode_grid_observation", "fireman_payoff", "insider_trial",
    "load_map", "load_scenario", "make_task", "parse_map",
]
