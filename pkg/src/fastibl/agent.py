"""The decision loop around a memory engine."""

from __future__ import annotations

from typing import Sequence

from .baseline import BaselineMemory
from .core import AgentParams, OptionKey, StateKey, select_action
from .rng import NoiseStream, TieBreakStream
from .speedy import SpeedyMemory

ENGINES = {"baseline": BaselineMemory, "speedy": SpeedyMemory}


class Agent:
    """An IBL agent with one memory and one global time counter.

    ``t`` starts at 1, advances once per ``respond`` and is never reset;
    episodes only clear the pending-feedback buffer.
    """

    def __init__(self, params: AgentParams, engine="speedy", run_seed: int = 0,
                 agent_id: int = 0, backend=None):
        cls = ENGINES[engine] if isinstance(engine, str) else engine
        self.params = params
        self.agent_id = agent_id
        self.memory = cls(params, backend=backend)
        self.noise = NoiseStream(run_seed, agent_id)
        self.ties = TieBreakStream(run_seed, agent_id)
        self.t = 1
        self.last_values: list[float] | None = None
        self._option: OptionKey | None = None

    @property
    def engine(self) -> str:
        return getattr(self.memory, "name", type(self.memory).__name__)

    def choose(self, state: StateKey | Sequence[StateKey], actions: Sequence[int]) -> int:
        """Pick an action.  ``state`` may also be one state per action."""
        if isinstance(state, StateKey):
            options = [OptionKey(state, a) for a in actions]
        else:
            options = [OptionKey(s, a) for s, a in zip(state, actions)]
        values = self.memory.evaluate(options, self.t, self.noise)
        action = select_action(dict(zip(actions, values)), self.ties.draw(self.t))
        self._option = options[list(actions).index(action)]
        self.last_values = values
        return action

    def respond(self, outcome: float, delayed: bool = False) -> None:
        if self._option is None:
            raise RuntimeError("respond() called without a preceding choose()")
        self.memory.respond(self._option, outcome, self.t, delayed)
        self._option = None
        self.t += 1

    def assign_credit(self, outcome: float) -> None:
        """Delayed feedback that arrives without a new decision."""
        self.memory.assign_credit(outcome)

    def reset_episode(self) -> None:
        self.memory.pending.clear()
