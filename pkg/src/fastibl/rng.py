"""Named, counter-based random streams.

Every random quantity an agent consumes is a pure function of a key
``(run_seed, kind, agent_id, *counters)``.  Nothing is drawn sequentially,
so two engines that visit instances in different orders still see the same
noise for the same ``(t, option, instance)`` triple.

The mixer is the SplitMix64 finalizer folded over the key words.  The same
arithmetic is reproduced in the compiled kernels and in the numpy fallback;
``tests/test_rng.py`` pins all three against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_UNIT = 2.0 ** -52


class StreamKind(IntEnum):
    RUN = 0
    NOISE = 1
    TIE_BREAK = 2
    ENVIRONMENT = 3


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def fold(h: int, word: int) -> int:
    """Absorb one key word into hash state ``h``."""
    return mix64(h ^ mix64((word + GOLDEN) & MASK64))


def hash_key(run_seed: int, *words: int) -> int:
    h = mix64(run_seed & MASK64)
    for w in words:
        h = fold(h, w)
    return h


def to_unit(h: int) -> float:
    """Map a 64-bit hash to the open interval (0, 1).

    Uses the top 52 bits plus a half-ulp offset, so the extremes are
    2**-53 and 1 - 2**-53 and ``log((1 - u) / u)`` is always finite.
    """
    return ((h >> 12) + 0.5) * _UNIT


@dataclass(frozen=True)
class StreamKey:
    run_seed: int
    kind: StreamKind
    agent_id: int = 0
    counters: tuple[int, ...] = ()

    def digest(self) -> int:
        return hash_key(self.run_seed, int(self.kind), self.agent_id, *self.counters)


def noise_draw(key: StreamKey) -> float:
    return to_unit(key.digest())


def derive_run_seed(seed: int, run: int) -> int:
    return hash_key(seed, int(StreamKind.RUN), run)


class NoiseStream:
    """Activation noise for one agent.

    The draw for instance ``i`` of option ``k`` at time ``t`` is
    ``to_unit(fold(option_prefix(t, k), i))``; kernels receive the option
    prefix and fold the instance ordinal themselves.
    """

    __slots__ = ("run_seed", "agent_id", "_base")

    def __init__(self, run_seed: int, agent_id: int = 0):
        self.run_seed = run_seed
        self.agent_id = agent_id
        self._base = fold(mix64(run_seed & MASK64), int(StreamKind.NOISE))
        self._base = fold(self._base, agent_id)

    def step_prefix(self, t: int) -> int:
        return fold(self._base, t)

    def option_prefix(self, t: int, option_ordinal: int) -> int:
        return fold(fold(self._base, t), option_ordinal)

    def draw(self, t: int, option_ordinal: int, instance_ordinal: int) -> float:
        return to_unit(fold(self.option_prefix(t, option_ordinal), instance_ordinal))


class TieBreakStream:
    __slots__ = ("_base",)

    def __init__(self, run_seed: int, agent_id: int = 0):
        self._base = fold(fold(mix64(run_seed & MASK64), int(StreamKind.TIE_BREAK)), agent_id)

    def draw(self, t: int) -> float:
        return to_unit(fold(self._base, t))


def environment_rng(run_seed: int) -> np.random.Generator:
    """Sequential generator for task randomness, independent of agent streams."""
    return np.random.default_rng(np.random.SeedSequence([run_seed & MASK64, int(StreamKind.ENVIRONMENT)]))
