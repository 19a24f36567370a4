"""Domain types and the scalar reference math shared by both engines.

The functions here are written as plain loops over Python floats.  They are
the contract the engines must reproduce and double as the brute-force
oracle in ``oracle_check`` and the tests, so keep them free of numpy.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class ConfigurationError(ValueError):
    pass


class MemoryConsistencyError(RuntimeError):
    """Raised when an engine's memory contradicts its own pending buffer."""


SIMILARITY_KINDS = ("exact", "linear")


@dataclass(frozen=True)
class SimilarityGroup:
    """Attributes sharing one similarity function.

    ``kind="linear"`` uses ``1 - |u - v| / range`` with one range per index.
    """

    indices: tuple[int, ...]
    kind: str = "exact"
    ranges: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in SIMILARITY_KINDS:
            raise ConfigurationError(f"unknown similarity function {self.kind!r}")
        if not self.indices:
            raise ConfigurationError("similarity group needs at least one attribute")
        if self.kind == "linear":
            if self.ranges is None or len(self.ranges) != len(self.indices):
                raise ConfigurationError("linear similarity needs one range per attribute")
            if any(r <= 0 for r in self.ranges):
                raise ConfigurationError("similarity ranges must be positive")


@dataclass(frozen=True)
class AgentParams:
    decay: float = 0.5
    noise: float = 0.25
    mismatch_penalty: float = 1.0
    temperature: float | None = None
    default_utility: float = 0.0
    similarity_groups: tuple[SimilarityGroup, ...] = ()

    def __post_init__(self):
        if self.decay < 0:
            raise ConfigurationError("decay must be nonnegative")
        if self.noise < 0:
            raise ConfigurationError("noise must be nonnegative")
        if self.tau <= 0:
            raise ConfigurationError(
                "temperature must be positive; pass it explicitly when noise is 0"
            )
        seen: set[int] = set()
        for group in self.similarity_groups:
            for i in group.indices:
                if i < 0 or i in seen:
                    raise ConfigurationError(f"attribute {i} appears in two similarity groups")
                seen.add(i)

    @property
    def tau(self) -> float:
        if self.temperature is not None:
            return self.temperature
        return self.noise * math.sqrt(2.0)

    @property
    def partial_matching(self) -> bool:
        return bool(self.similarity_groups)


class StateKey(NamedTuple):
    """A hashable state.  ``digest`` is 16 bytes; ``features`` is kept only
    when the task uses partial matching."""

    digest: bytes
    features: tuple | None = None


class OptionKey(NamedTuple):
    state: StateKey
    action: int


class PendingStep(NamedTuple):
    option: OptionKey
    immediate_outcome: float
    timestamp: int


@dataclass
class InstanceEntry:
    option: OptionKey
    outcome: float
    timestamps: list[int] = field(default_factory=list)


def state_from_features(features: Iterable, keep_features: bool = True) -> StateKey:
    features = tuple(features)
    digest = hashlib.blake2b(repr(features).encode(), digest_size=16).digest()
    return StateKey(digest, features if keep_features else None)


def state_from_grid(grid: np.ndarray) -> StateKey:
    """BLAKE2b-128 over the grid's shape followed by its row-major bytes."""
    h = hashlib.blake2b(digest_size=16)
    h.update(np.asarray(grid.shape, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(grid, dtype=np.uint8).tobytes())
    return StateKey(h.digest(), None)


def digest_words(digest: bytes) -> tuple[int, int]:
    return int.from_bytes(digest[:8], "little"), int.from_bytes(digest[8:16], "little")


# -- similarity --------------------------------------------------------------

def _sim(kind: str, u, v, rng: float | None) -> float:
    if kind == "exact":
        return 1.0 if u == v else 0.0
    return 1.0 - abs(u - v) / rng


def similarity_term(query: Sequence, instance: Sequence,
                    groups: Sequence[SimilarityGroup]) -> float:
    if not groups:
        return 0.0
    if query is None or instance is None or len(query) != len(instance):
        raise ConfigurationError("feature tuples must have the same arity")
    total = 0.0
    for group in groups:
        for pos, i in enumerate(group.indices):
            if i >= len(query):
                raise ConfigurationError(f"attribute index {i} out of range")
            rng = group.ranges[pos] if group.ranges is not None else None
            total += _sim(group.kind, query[i], instance[i], rng)
    return total


# -- activation, retrieval, blending ----------------------------------------

def base_level(timestamps: Iterable[int], t: int, decay: float) -> float:
    total = 0.0
    n = 0
    for tp in timestamps:
        if tp >= t:
            raise ValueError(f"timestamp {tp} is not in the past of t={t}")
        total += (t - tp) ** -decay
        n += 1
    if n == 0:
        raise ValueError("instance has no timestamps")
    return math.log(total)


def activation(timestamps: Iterable[int], t: int, sim: float, xi: float,
               params: AgentParams) -> float:
    if not 0.0 < xi < 1.0:
        raise ValueError("noise draw must lie strictly inside (0, 1)")
    return (base_level(timestamps, t, params.decay)
            + params.mismatch_penalty * sim
            + params.noise * math.log((1.0 - xi) / xi))


def retrieval_probabilities(activations: Sequence[float], tau: float) -> list[float]:
    if not activations:
        raise ValueError("no instances to retrieve from")
    if tau <= 0:
        raise ValueError("temperature must be positive")
    top = max(activations)
    weights = [math.exp((a - top) / tau) for a in activations]
    total = 0.0
    for w in weights:
        total += w
    return [w / total for w in weights]


def blended_value(probabilities: Sequence[float], outcomes: Sequence[float]) -> float:
    if len(probabilities) != len(outcomes):
        raise ValueError("probabilities and outcomes differ in length")
    total = 0.0
    for p, x in zip(probabilities, outcomes):
        total += p * x
    return total


def select_action(blended: dict, rng_draw: float):
    """Argmax over ``blended``; exact ties are split uniformly using ``rng_draw``."""
    if not blended:
        raise ValueError("no actions to choose from")
    best = max(blended.values())
    tied = [a for a, v in blended.items() if v == best]
    if len(tied) == 1:
        return tied[0]
    return tied[min(int(rng_draw * len(tied)), len(tied) - 1)]


# -- memory updates on the plain nested-dict representation -----------------
#
# ``{option: {outcome: [timestamps]}}`` is the reference form both engines
# regroup into for comparison.

def prepopulate_default(memory: dict, option: OptionKey, default_utility: float,
                        t: int = 0) -> dict:
    if option in memory:
        raise ValueError(f"option {option!r} already has instances")
    memory[option] = {float(default_utility): [t]}
    return memory


def equal_credit_update(memory: dict, buffer: list[PendingStep], outcome: float) -> dict:
    outcome = float(outcome)
    for step in buffer:
        groups = memory.get(step.option)
        stamps = None if groups is None else groups.get(step.immediate_outcome)
        if stamps is None or step.timestamp not in stamps:
            raise MemoryConsistencyError(
                f"no timestamp {step.timestamp} under {step.option!r} / {step.immediate_outcome}")
        if step.immediate_outcome == outcome:
            continue
        stamps.remove(step.timestamp)
        if not stamps:
            del groups[step.immediate_outcome]
        target = groups.setdefault(outcome, [])
        target.append(step.timestamp)
        target.sort()
    buffer.clear()
    return memory
