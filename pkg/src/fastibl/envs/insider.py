"""Two-stage insider attack game: pick a computer, see a signal, then
continue or withdraw."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..core import SimilarityGroup, state_from_features

N_COMPUTERS = 6
WITHDRAW, CONTINUE = 6, 7
STAGE1_ACTIONS = tuple(range(N_COMPUTERS))
STAGE2_ACTIONS = (WITHDRAW, CONTINUE)
NO_SIGNAL, WARNING, CLEAR = 0, 1, 2


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Computer:
    reward: float
    penalty: float
    monitor_prob: float

    def features(self, signal: int = NO_SIGNAL) -> tuple:
        return (float(self.reward), float(self.penalty), float(self.monitor_prob), signal)


@dataclass(frozen=True)
class InsiderScenario:
    layouts: tuple[tuple[Computer, ...], ...]
    p_signal_if_monitored: float
    p_signal_if_unmonitored: float
    attribute_ranges: tuple[float, float, float]

    @property
    def max_reward(self) -> float:
        return max(c.reward for layout in self.layouts for c in layout)

    def similarity_groups(self) -> tuple[SimilarityGroup, ...]:
        return (SimilarityGroup((0, 1, 2), "linear", self.attribute_ranges),
                SimilarityGroup((3,), "exact"))


def _probability(value, what) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ScenarioError(f"{what} must lie in [0, 1], got {value}")
    return value


def parse_scenario(data: dict) -> InsiderScenario:
    try:
        layouts = []
        for i, layout in enumerate(data["layouts"]):
            computers = layout["computers"]
            if len(computers) != N_COMPUTERS:
                raise ScenarioError(f"layout {i} has {len(computers)} computers, expected 6")
            layouts.append(tuple(
                Computer(float(c["reward"]), float(c["penalty"]),
                         _probability(c["monitor_prob"], "monitor_prob"))
                for c in computers))
        signaling = data["signaling"]
        ranges = tuple(float(r) for r in data.get("attribute_ranges", (10.0, 10.0, 1.0)))
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    if not layouts:
        raise ScenarioError("scenario has no layouts")
    if len(ranges) != 3 or any(r <= 0 for r in ranges):
        raise ScenarioError("attribute_ranges needs three positive values")
    return InsiderScenario(
        tuple(layouts),
        _probability(signaling.get("p_signal_if_monitored", 1.0), "p_signal_if_monitored"),
        _probability(signaling.get("p_signal_if_unmonitored", 0.0), "p_signal_if_unmonitored"),
        ranges)


def load_scenario(path: str | Path | None = None) -> InsiderScenario:
    if path is None:
        text = resources.files("fastibl.data").joinpath("insider.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from None
    return parse_scenario(data)


class TrialOutcome(NamedTuple):
    layout: int
    computer: int
    monitored: bool
    signal: int
    decision: int
    outcome: float


def attack_outcome(computer: Computer, decision: int, monitored: bool) -> float:
    if decision == WITHDRAW:
        return 0.0
    return -computer.penalty if monitored else computer.reward


def insider_trial(agent, scenario: InsiderScenario, rng: np.random.Generator) -> TrialOutcome:
    """Two decisions, one delayed feedback.  The stage-one choice is stored
    with outcome 0 and re-credited with the final outcome."""
    layout_id = int(rng.integers(len(scenario.layouts)))
    u_monitor, u_signal = rng.random(), rng.random()
    layout = scenario.layouts[layout_id]

    states = [state_from_features(c.features()) for c in layout]
    target = agent.choose(states, STAGE1_ACTIONS)
    agent.respond(0.0)

    computer = layout[target]
    monitored = u_monitor < computer.monitor_prob
    p_signal = scenario.p_signal_if_monitored if monitored else scenario.p_signal_if_unmonitored
    signal = WARNING if u_signal < p_signal else CLEAR

    decision = agent.choose(state_from_features(computer.features(signal)), STAGE2_ACTIONS)
    outcome = attack_outcome(computer, decision, monitored)
    agent.respond(outcome, delayed=True)
    return TrialOutcome(layout_id, target, monitored, signal, decision, outcome)


class InsiderAttack:
    name = "insider"
    n_agents = 1

    def __init__(self, scenario: InsiderScenario | None = None,
                 rng: np.random.Generator | None = None):
        self.scenario = scenario if scenario is not None else load_scenario()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.default_utility = round(1.1 * self.scenario.max_reward, 10)
        self.similarity_groups = self.scenario.similarity_groups()
        self.last: TrialOutcome | None = None

    def play_episode(self, agents, step_limit: int | None = None) -> float:
        agent = agents[0]
        agent.reset_episode()
        self.last = insider_trial(agent, self.scenario, self.rng)
        return self.last.outcome
