"""Loop-based reference engine.

One record per occurrence, appended to a flat list and scanned from the
start at every query.  Nothing is cached between time steps and no index is
kept; this is the slow path the vectorized engine is measured against, so
keep it that way.
"""

from __future__ import annotations

import math
from array import array
from typing import NamedTuple

from . import kernels
from .core import (AgentParams, MemoryConsistencyError, OptionKey, PendingStep,
                   StateKey, digest_words, select_action, similarity_term)
from .rng import fold, to_unit


class EventRecord(NamedTuple):
    option: OptionKey
    outcome: float
    timestamp: int


class BaselineMemory:
    name = "baseline"

    def __init__(self, params: AgentParams, backend=None):
        self.params = params
        self.kernels = kernels.resolve(backend)
        # parallel columns of the record list
        self.h0 = array("Q")
        self.h1 = array("Q")
        self.act = array("q")
        self.out = array("d")
        self.ts = array("q")
        self.states: list[StateKey] = []
        self.pending: list[PendingStep] = []

    def __len__(self):
        return len(self.ts)

    def records(self) -> list[EventRecord]:
        return [EventRecord(OptionKey(s, a), x, t)
                for s, a, x, t in zip(self.states, self.act, self.out, self.ts)]

    def _append(self, option: OptionKey, outcome: float, t: int) -> None:
        w0, w1 = digest_words(option.state.digest)
        self.h0.append(w0)
        self.h1.append(w1)
        self.act.append(option.action)
        self.out.append(outcome)
        self.ts.append(t)
        self.states.append(option.state)

    def has_option(self, option: OptionKey) -> bool:
        digest, action = option.state.digest, option.action
        for state, a in zip(self.states, self.act):
            if a == action and state.digest == digest:
                return True
        return False

    def prepopulate(self, option: OptionKey, default_utility: float, t: int = 0) -> None:
        if self.has_option(option):
            raise ValueError(f"option {option!r} already has instances")
        self._append(option, float(default_utility), t)

    def evaluate(self, options: list[OptionKey], t: int, noise) -> list[float]:
        if self.params.partial_matching:
            for option in options:
                if not self.has_option(option):
                    self.prepopulate(option, self.params.default_utility)
            return [self._blend_partial(option, t, noise) for option in options]
        p = self.params
        query = self.kernels.baseline_query
        step_prefix = noise.step_prefix(t)
        values = []
        for option in options:
            q0, q1 = digest_words(option.state.digest)
            ordinal, value = query(self.h0, self.h1, self.act, self.out, self.ts, len(self.ts),
                                   q0, q1, option.action, t, p.decay, p.noise, p.tau, step_prefix)
            if ordinal < 0:
                self._append(option, float(p.default_utility), 0)
                ordinal, value = query(self.h0, self.h1, self.act, self.out, self.ts,
                                       len(self.ts), q0, q1, option.action, t,
                                       p.decay, p.noise, p.tau, step_prefix)
            values.append(value)
        return values

    def _blend_partial(self, option: OptionKey, t: int, noise) -> float:
        """Scan every record of ``option.action`` and blend them all, weighted
        by similarity to the queried state."""
        p = self.params
        action = option.action
        query = option.state.features
        step_prefix = noise.step_prefix(t)
        zeros = 0
        sources: list[list] = []  # [digest, ordinal, sim, groups]
        for i in range(len(self.ts)):
            stamp = self.ts[i]
            if self.act[i] == action:
                state = self.states[i]
                src = None
                for s in sources:
                    if s[0] == state.digest:
                        src = s
                        break
                if src is None:
                    src = [state.digest, zeros,
                           similarity_term(query, state.features, p.similarity_groups), []]
                    sources.append(src)
                x = self.out[i]
                group = None
                for g in src[3]:
                    if g[0] == x:
                        group = g
                        break
                if group is None:
                    group = [x, 0.0]
                    src[3].append(group)
                group[1] += (t - stamp) ** -p.decay
            if stamp == 0:
                zeros += 1
        activations, outcomes = [], []
        for digest, ordinal, sim, groups in sources:
            prefix = fold(step_prefix, ordinal)
            for j, (x, total) in enumerate(groups):
                a = math.log(total) + p.mismatch_penalty * sim
                if p.noise != 0.0:
                    u = to_unit(fold(prefix, j))
                    a += p.noise * math.log((1.0 - u) / u)
                activations.append(a)
                outcomes.append(x)
        top = max(activations)
        weights = [math.exp((a - top) / p.tau) for a in activations]
        total = 0.0
        for w in weights:
            total += w
        value = 0.0
        for w, x in zip(weights, outcomes):
            value += w / total * x
        return value

    def respond(self, option: OptionKey, outcome: float, t: int, delayed: bool = False) -> None:
        outcome = float(outcome)
        self._append(option, outcome, t)
        self.pending.append(PendingStep(option, outcome, t))
        if delayed:
            self.assign_credit(outcome)

    def assign_credit(self, outcome: float) -> None:
        """Equal credit by rewriting the outcome of every buffered record in place."""
        if not self.pending:
            return
        stamps = sorted(step.timestamp for step in self.pending)
        hits = self.kernels.baseline_rewrite(self.ts, self.out, len(self.ts), stamps, float(outcome))
        if hits != len(stamps):
            raise MemoryConsistencyError(
                f"rewrote {hits} records for {len(stamps)} buffered steps")
        self.pending.clear()

    def as_dict(self) -> dict:
        grouped: dict = {}
        for rec in self.records():
            grouped.setdefault(rec.option, {}).setdefault(rec.outcome, []).append(rec.timestamp)
        return grouped

    def ordinals_for(self, option: OptionKey) -> tuple[int, dict[float, int]]:
        seen: list[OptionKey] = []
        outcomes: dict[float, int] = {}
        ordinal = -1
        for rec in self.records():
            key = (rec.option.state.digest, rec.option.action)
            if key not in seen:
                seen.append(key)
            if rec.option.state.digest == option.state.digest and rec.option.action == option.action:
                if ordinal < 0:
                    ordinal = seen.index(key)
                if rec.outcome not in outcomes:
                    outcomes[rec.outcome] = len(outcomes)
        if ordinal < 0:
            raise KeyError(option)
        return ordinal, outcomes


def baseline_choose(memory: BaselineMemory, state, actions, t, noise, ties):
    options = [OptionKey(state, a) for a in actions]
    values = memory.evaluate(options, t, noise)
    return select_action(dict(zip(actions, values)), ties.draw(t))


def baseline_respond(memory: BaselineMemory, option, outcome, t, delayed=False) -> BaselineMemory:
    memory.respond(option, outcome, t, delayed)
    return memory
