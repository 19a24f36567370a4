"""Search and rescue on a single floor plan."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..core import StateKey, state_from_grid
from .grid import (ACTIONS, GREEN, MINIMAP_CODES, START, YELLOW, GridMap,
                   encode_grid_observation, load_map, move)

YELLOW_REWARD = 0.75
GREEN_REWARD = 0.25
WALL_PENALTY = -0.05
STEP_PENALTY = -0.01


class EnvStep(NamedTuple):
    observations: tuple
    rewards: tuple
    delayed: bool
    done: bool


class Minimap:
    """Victims are rescued by stepping onto them.  Feedback is delayed until
    a rescue; the episode metric is the total rescue reward collected."""

    name = "minimap"
    n_agents = 1
    default_utility = 0.1
    similarity_groups = ()

    def __init__(self, grid: GridMap | None = None, rng: np.random.Generator | None = None,
                 step_limit: int = 2500):
        self.grid = grid if grid is not None else load_map(default="minimap.txt")
        starts = self.grid.positions(START)
        if len(starts) != 1:
            raise ValueError(f"minimap needs exactly one start cell, found {len(starts)}")
        self.start = starts[0]
        self.initial_victims = {p: YELLOW for p in self.grid.positions(YELLOW)}
        self.initial_victims.update({p: GREEN for p in self.grid.positions(GREEN)})
        self.n_victims = len(self.initial_victims)
        self.step_limit = step_limit
        self.reset()

    def reset(self, step_limit: int | None = None) -> StateKey:
        if step_limit is not None:
            self.step_limit = step_limit
        self.victims = dict(self.initial_victims)
        self.pos = self.start
        self.steps = 0
        self.rescued = 0
        self.done = False
        self.obs = encode_grid_observation("minimap", self.grid, [self.pos], victims=self.victims)
        return self.observe()

    def observe(self) -> StateKey:
        return state_from_grid(self.obs)

    def step(self, action: int) -> EnvStep:
        if self.done:
            raise RuntimeError("episode is over; call reset()")
        new, blocked = move(self.grid, self.pos, action)
        delayed = False
        if blocked:
            reward = WALL_PENALTY
        else:
            kind = self.victims.pop(new, None)
            if kind is None:
                reward = STEP_PENALTY
            else:
                reward = YELLOW_REWARD if kind == YELLOW else GREEN_REWARD
                self.rescued += 1
                delayed = True
            self.obs[self.pos[1], self.pos[0]] = 0
            self.obs[new[1], new[0]] = MINIMAP_CODES["agent"]
            self.pos = new
        self.steps += 1
        self.done = not self.victims or self.steps >= self.step_limit
        return EnvStep((self.observe(),), (reward,), delayed, self.done)

    def play_episode(self, agents, step_limit: int | None = None) -> float:
        agent = agents[0]
        state = self.reset(step_limit)
        agent.reset_episode()
        collected = 0.0
        while True:
            action = agent.choose(state, ACTIONS)
            result = self.step(action)
            reward = result.rewards[0]
            agent.respond(reward, result.delayed)
            if reward > 0:
                collected += reward
            if result.done:
                return collected
            state = result.observations[0]
