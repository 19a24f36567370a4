"""Two agents fetch firefighting equipment and meet at a randomly placed fire."""

from __future__ import annotations

import numpy as np

from ..core import StateKey, state_from_grid
from .grid import (ACTIONS, EMPTY, FIRE_REGION, FIREMAN_CODES, ITEMS, START, GridMap,
                   encode_grid_observation, load_map, move)
from .minimap import EnvStep

E1, E2, E3 = 0, 1, 2

# rows: agent 1's item, columns: agent 2's item; None marks the stochastic cell
PAYOFF = (
    (11.0, -30.0, 0.0),
    (-30.0, None, 6.0),
    (0.0, 0.0, 5.0),
)
STOCHASTIC_HIGH, STOCHASTIC_P = 14.0, 0.5


def fireman_payoff(item1: int, item2: int, rng: np.random.Generator) -> float:
    draw = rng.random()
    value = PAYOFF[item1][item2]
    if value is None:
        return STOCHASTIC_HIGH if draw < STOCHASTIC_P else 0.0
    return value


class Fireman:
    """Stepping onto an equipment cell picks that item up (once).  An agent
    holding an item that reaches the fire waits there and stops deciding.
    When both wait, the collective payoff is paid and credited."""

    name = "fireman"
    n_agents = 2
    default_utility = 15.0
    similarity_groups = ()

    def __init__(self, grid: GridMap | None = None, rng: np.random.Generator | None = None,
                 step_limit: int = 2500):
        self.grid = grid if grid is not None else load_map(default="fireman.txt")
        self.rng = rng if rng is not None else np.random.default_rng()
        self.starts = self.grid.positions(START)
        if len(self.starts) != 2:
            raise ValueError("fireman map needs two start cells")
        self.item_cells = [self.grid.positions(sym) for sym in ITEMS]
        if not all(self.item_cells):
            raise ValueError("fireman map needs equipment cells 1, 2 and 3")
        self.item_at = {p: i for i, cells in enumerate(self.item_cells) for p in cells}
        self.fire_region = self.grid.positions(FIRE_REGION) or self.grid.positions(EMPTY)
        self.step_limit = step_limit
        self.reset()

    def reset(self, step_limit: int | None = None) -> None:
        if step_limit is not None:
            self.step_limit = step_limit
        self.fire = self.fire_region[int(self.rng.integers(len(self.fire_region)))]
        self.pos = list(self.starts)
        self.holding: list[int | None] = [None, None]
        self.waiting = [False, False]
        self.steps = 0
        self.done = False
        self.payoff = 0.0
        self.base = encode_grid_observation("fireman", self.grid, [], fire=self.fire,
                                            items=self.item_cells)

    def observe(self, i: int) -> StateKey:
        x, y = self.pos[i]
        under = self.base[y, x]
        self.base[y, x] = FIREMAN_CODES["agents"][i]
        state = state_from_grid(self.base)
        self.base[y, x] = under
        return state

    def step(self, actions) -> EnvStep:
        """``actions[i]`` is ignored for an agent that is already waiting."""
        if self.done:
            raise RuntimeError("episode is over; call reset()")
        for i, action in enumerate(actions):
            if self.waiting[i] or action is None:
                continue
            self.pos[i], _ = move(self.grid, self.pos[i], action)
        for i in range(2):
            if self.waiting[i]:
                continue
            if self.holding[i] is None and self.pos[i] in self.item_at:
                self.holding[i] = self.item_at[self.pos[i]]
            if self.holding[i] is not None and self.pos[i] == self.fire:
                self.waiting[i] = True
        self.steps += 1
        finished = all(self.waiting)
        if finished:
            self.payoff = fireman_payoff(self.holding[0], self.holding[1], self.rng)
        self.done = finished or self.steps >= self.step_limit
        reward = self.payoff if finished else 0.0
        return EnvStep((self.observe(0), self.observe(1)), (reward, reward), finished, self.done)

    def play_episode(self, agents, step_limit: int | None = None) -> float:
        self.reset(step_limit)
        for agent in agents:
            agent.reset_episode()
        while True:
            acting = [i for i in range(2) if not self.waiting[i]]
            states = [self.observe(i) for i in acting]
            actions = [None, None]
            for i, state in zip(acting, states):
                actions[i] = agents[i].choose(state, ACTIONS)
            result = self.step(actions)
            for i in range(2):
                if i in acting:
                    agents[i].respond(result.rewards[i], result.delayed)
                elif result.delayed:
                    agents[i].assign_credit(result.rewards[i])
            if result.done:
                return self.payoff if result.delayed else 0.0
