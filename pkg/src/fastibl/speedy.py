"""Vectorized memory engine.

Memory is the nested dictionary ``{option: {outcome: timestamps}}`` with each
timestamp set held in a contiguous, sorted int64 array.  A query touches only
the arrays of the options being evaluated, and each array is reduced in one
bulk kernel call.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .core import (AgentParams, ConfigurationError, MemoryConsistencyError, OptionKey,
                   PendingStep, select_action)

_INITIAL_CAPACITY = 4


class OptionSlot:
    """Every instance recorded for one option, in first-insertion order."""

    __slots__ = ("option", "ordinal", "outcomes", "index", "arrays", "counts",
                 "_outcome_arr", "_feature_arr")

    def __init__(self, option: OptionKey, ordinal: int):
        self.option = option
        self.ordinal = ordinal
        self.outcomes: list[float] = []
        self.index: dict[float, int] = {}
        self.arrays: list[np.ndarray] = []
        self.counts: list[int] = []
        self._outcome_arr = None
        self._feature_arr = None

    @property
    def outcome_array(self) -> np.ndarray:
        if self._outcome_arr is None:
            self._outcome_arr = np.array(self.outcomes, dtype=np.float64)
        return self._outcome_arr

    @property
    def feature_array(self) -> np.ndarray:
        if self._feature_arr is None:
            self._feature_arr = np.array(self.option.state.features, dtype=np.float64)
        return self._feature_arr

    def timestamps(self, outcome: float) -> np.ndarray:
        i = self.index[outcome]
        return self.arrays[i][:self.counts[i]]

    def add(self, outcome: float, t: int) -> None:
        i = self.index.get(outcome)
        if i is None:
            arr = np.empty(_INITIAL_CAPACITY, dtype=np.int64)
            arr[0] = t
            self.index[outcome] = len(self.outcomes)
            self.outcomes.append(outcome)
            self.arrays.append(arr)
            self.counts.append(1)
            self._outcome_arr = None
            return
        arr = self.arrays[i]
        c = self.counts[i]
        if c == len(arr):
            grown = np.empty(2 * c, dtype=np.int64)
            grown[:c] = arr
            self.arrays[i] = arr = grown
        if arr[c - 1] < t:
            arr[c] = t
        else:
            pos = int(np.searchsorted(arr[:c], t))
            arr[pos + 1:c + 1] = arr[pos:c].copy()
            arr[pos] = t
        self.counts[i] = c + 1

    def remove(self, outcome: float, t: int) -> None:
        i = self.index.get(outcome)
        if i is None:
            raise MemoryConsistencyError(f"{self.option!r} has no outcome {outcome}")
        arr = self.arrays[i]
        c = self.counts[i]
        pos = int(np.searchsorted(arr[:c], t))
        if pos == c or arr[pos] != t:
            raise MemoryConsistencyError(
                f"{self.option!r} / {outcome} does not hold timestamp {t}")
        arr[pos:c - 1] = arr[pos + 1:c].copy()
        c -= 1
        if c:
            self.counts[i] = c
            return
        del self.outcomes[i], self.arrays[i], self.counts[i]
        self.index = {x: j for j, x in enumerate(self.outcomes)}
        self._outcome_arr = None


class DecayTable:
    """Memoized ``k ** -d`` for integer ages; grown by doubling."""

    def __init__(self, decay: float, backend=None):
        self.decay = decay
        self.kernels = kernels.resolve(backend)
        self.values = self.kernels.decay_table(1024, decay)

    def covering(self, t: int) -> np.ndarray:
        if t >= len(self.values):
            self.values = self.kernels.decay_table(max(2 * len(self.values), t + 1), self.decay)
        return self.values


class SpeedyMemory:
    name = "speedy"

    def __init__(self, params: AgentParams, backend=None):
        self.params = params
        self.kernels = kernels.resolve(backend)
        self.decay_table = DecayTable(params.decay, self.kernels)
        self.slots: dict[tuple[bytes, int], OptionSlot] = {}
        self.by_action: dict[int, list[OptionSlot]] = {}
        self.pending: list[PendingStep] = []

    def __len__(self):
        return sum(len(s.outcomes) for s in self.slots.values())

    def has_option(self, option: OptionKey) -> bool:
        return (option.state.digest, option.action) in self.slots

    def _slot(self, option: OptionKey) -> OptionSlot:
        key = (option.state.digest, option.action)
        slot = self.slots.get(key)
        if slot is None:
            slot = OptionSlot(option, len(self.slots))
            self.slots[key] = slot
            self.by_action.setdefault(option.action, []).append(slot)
        return slot

    def prepopulate(self, option: OptionKey, default_utility: float, t: int = 0) -> None:
        if self.has_option(option):
            raise ValueError(f"option {option!r} already has instances")
        self._slot(option).add(float(default_utility), t)

    def evaluate(self, options: list[OptionKey], t: int, noise) -> list[float]:
        """Prepopulate unseen options, then return each option's blended value."""
        slots = self.slots
        x0 = self.params.default_utility
        for option in options:
            if (option.state.digest, option.action) not in slots:
                self.prepopulate(option, x0)
        if self.params.partial_matching:
            return [self._blend_partial(option, t, noise) for option in options]
        p = self.params
        k = self.kernels
        step_prefix = noise.step_prefix(t)
        table = self.decay_table.covering(t)
        values = []
        for option in options:
            slot = slots[(option.state.digest, option.action)]
            if len(slot.arrays) == 1:
                values.append(slot.outcomes[0])
                continue
            values.append(k.blend_option(
                slot.arrays, slot.counts, slot.outcome_array, t, table, p.noise, p.tau,
                k.fold(step_prefix, slot.ordinal)))
        return values

    def _similarity(self, query: np.ndarray, slot: OptionSlot) -> float:
        feats = slot.feature_array
        if len(feats) != len(query):
            raise ConfigurationError("feature tuples must have the same arity")
        total = 0.0
        for group in self.params.similarity_groups:
            idx = list(group.indices)
            if group.kind == "exact":
                total += float(np.sum(query[idx] == feats[idx]))
            else:
                total += float(np.sum(1.0 - np.abs(query[idx] - feats[idx])
                                      / np.asarray(group.ranges)))
        return total

    def _blend_partial(self, option: OptionKey, t: int, noise) -> float:
        p = self.params
        k = self.kernels
        query = np.array(option.state.features, dtype=np.float64)
        step_prefix = noise.step_prefix(t)
        table = self.decay_table.covering(t)
        acts, outs = [], []
        for slot in self.by_action[option.action]:
            n = len(slot.arrays)
            a = k.base_levels(slot.arrays, slot.counts, t, table)
            a += p.mismatch_penalty * self._similarity(query, slot)
            if p.noise != 0.0:
                a += p.noise * k.noise_logits(k.fold(step_prefix, slot.ordinal), n)
            acts.append(a)
            outs.append(slot.outcome_array)
        act = np.concatenate(acts)
        x = np.concatenate(outs)
        v = np.exp((act - act.max()) / p.tau)
        return float(np.sum(x * (v / np.sum(v))))

    def respond(self, option: OptionKey, outcome: float, t: int, delayed: bool = False) -> None:
        outcome = float(outcome)
        self._slot(option).add(outcome, t)
        self.pending.append(PendingStep(option, outcome, t))
        if delayed:
            self.assign_credit(outcome)

    def assign_credit(self, outcome: float) -> None:
        """Equal credit: move every buffered timestamp under ``outcome``."""
        outcome = float(outcome)
        slots = self.slots
        for step in self.pending:
            if step.immediate_outcome == outcome:
                continue
            slot = slots.get((step.option.state.digest, step.option.action))
            if slot is None:
                raise MemoryConsistencyError(f"unknown option {step.option!r}")
            slot.remove(step.immediate_outcome, step.timestamp)
            slot.add(outcome, step.timestamp)
        self.pending.clear()

    def as_dict(self) -> dict:
        return {slot.option: {x: [int(v) for v in slot.timestamps(x)] for x in slot.outcomes}
                for slot in self.slots.values()}

    def ordinals_for(self, option: OptionKey) -> tuple[int, dict[float, int]]:
        slot = self.slots[(option.state.digest, option.action)]
        return slot.ordinal, {x: i for i, x in enumerate(slot.outcomes)}


def speedy_base_level(timestamps, t: int, decay: float, backend=None) -> float:
    arr = np.ascontiguousarray(timestamps, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("instance has no timestamps")
    if int(arr.max()) >= t:
        raise ValueError("timestamps must precede t")
    k = kernels.resolve(backend)
    return float(k.base_levels([arr], [arr.size], t, k.decay_table(t + 1, decay))[0])


def speedy_probabilities(activations, tau: float) -> np.ndarray:
    act = np.asarray(activations, dtype=np.float64)
    if act.size == 0:
        raise ValueError("no instances to retrieve from")
    v = np.exp((act - act.max()) / tau)
    return v / np.sum(v)


def speedy_blend(outcomes, probabilities) -> float:
    x = np.asarray(outcomes, dtype=np.float64)
    p = np.asarray(probabilities, dtype=np.float64)
    if x.shape != p.shape:
        raise ValueError("probabilities and outcomes differ in length")
    return float(np.sum(x * p))


def speedy_choose(memory: SpeedyMemory, state, actions, t, noise, ties):
    options = [OptionKey(state, a) for a in actions]
    values = memory.evaluate(options, t, noise)
    return select_action(dict(zip(actions, values)), ties.draw(t))


def speedy_respond(memory: SpeedyMemory, option, outcome, t, delayed=False) -> SpeedyMemory:
    memory.respond(option, outcome, t, delayed)
    return memory
