"""Repeated binary choice between a safe and a risky option."""

from __future__ import annotations

import numpy as np

from ..core import state_from_features

SAFE, RISKY = 0, 1
ACTIONS = (SAFE, RISKY)
SAFE_OUTCOME = 3.0
RISKY_HIGH, RISKY_LOW, P_HIGH = 4.0, 0.0, 0.8
STATE = state_from_features(())


def binary_step(action: int, draw: float) -> float:
    if action == SAFE:
        return SAFE_OUTCOME
    if action == RISKY:
        return RISKY_HIGH if draw < P_HIGH else RISKY_LOW
    raise ValueError(f"unknown action {action}")


class BinaryChoice:
    """One trial per episode.  The episode metric is 1 when the option with
    the higher expected value (risky, 3.2 vs 3.0) was chosen."""

    name = "binary"
    n_agents = 1
    default_utility = 4.4
    similarity_groups = ()

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def step(self, action: int) -> float:
        # one draw per trial whatever the action, so replay consumption is fixed
        return binary_step(action, self.rng.random())

    def play_episode(self, agents, step_limit: int = 1) -> float:
        agent = agents[0]
        agent.reset_episode()
        action = agent.choose(STATE, ACTIONS)
        agent.respond(self.step(action))
        return 1.0 if action == RISKY else 0.0
