"""Three agents spread out to cover three landmarks."""

from __future__ import annotations

import numpy as np

from ..core import StateKey, state_from_grid
from .grid import ACTIONS, WALL, GridMap, encode_grid_observation, move, parse_map
from .minimap import EnvStep

N_AGENTS = 3


def coopnav_reward(agent_positions, landmark_positions) -> float:
    occupied = set(map(tuple, agent_positions))
    return float(sum(1 for lm in landmark_positions if tuple(lm) in occupied))


def open_grid(width: int = 10, height: int = 10) -> GridMap:
    return parse_map(f"{width} {height}\n" + "\n".join("." * width for _ in range(height)))


class CooperativeNavigation:
    """Landmarks and starts are redrawn every episode.  Feedback is delayed
    until a step with positive collective reward; the episode ends once
    every landmark holds a distinct agent.  The episode metric is the
    collective reward on the final step."""

    name = "coopnav"
    n_agents = N_AGENTS
    default_utility = 3.3
    similarity_groups = ()

    def __init__(self, grid: GridMap | None = None, rng: np.random.Generator | None = None,
                 step_limit: int = 2500):
        self.grid = grid if grid is not None else open_grid()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.free = [(int(x), int(y)) for y, x in zip(*np.nonzero(self.grid.cells != WALL))]
        if len(self.free) < 2 * N_AGENTS:
            raise ValueError("grid too small for three agents and three landmarks")
        self.step_limit = step_limit
        self.reset()

    def reset(self, step_limit: int | None = None) -> StateKey:
        if step_limit is not None:
            self.step_limit = step_limit
        picks = self.rng.choice(len(self.free), size=2 * N_AGENTS, replace=False)
        self.landmarks = [self.free[int(i)] for i in picks[:N_AGENTS]]
        self.pos = [self.free[int(i)] for i in picks[N_AGENTS:]]
        self.steps = 0
        self.done = False
        return self.observe()

    def observe(self) -> StateKey:
        obs = encode_grid_observation("coopnav", self.grid, self.pos, landmarks=self.landmarks)
        return state_from_grid(obs)

    def step(self, actions) -> EnvStep:
        if self.done:
            raise RuntimeError("episode is over; call reset()")
        self.pos = [move(self.grid, p, a)[0] for p, a in zip(self.pos, actions)]
        reward = coopnav_reward(self.pos, self.landmarks)
        self.steps += 1
        self.done = reward == N_AGENTS or self.steps >= self.step_limit
        state = self.observe()
        return EnvStep((state,) * N_AGENTS, (reward,) * N_AGENTS, reward > 0, self.done)

    def play_episode(self, agents, step_limit: int | None = None) -> float:
        state = self.reset(step_limit)
        for agent in agents:
            agent.reset_episode()
        while True:
            actions = [agent.choose(state, ACTIONS) for agent in agents]
            result = self.step(actions)
            for agent, reward in zip(agents, result.rewards):
                agent.respond(reward, result.delayed)
            if result.done:
                return result.rewards[0]
            state = result.observations[0]
