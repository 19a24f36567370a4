import math

import numpy as np
import pytest

from fastibl import kernels
from fastibl.rng import (GOLDEN, MASK64, NoiseStream, StreamKey, StreamKind, TieBreakStream,
                         derive_run_seed, environment_rng, fold, hash_key, mix64, noise_draw,
                         to_unit)


def splitmix64_reference(state):
    """Textbook SplitMix64 ``next()``: advance by the golden gamma, then finalize."""
    z = (state + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def test_mix64_matches_splitmix64_output():
    # seed 0: the published first output of SplitMix64
    assert splitmix64_reference(0) == 0xE220A8397B1DCDAF
    for s in (0, 1, 12345, MASK64 - 7):
        assert mix64((s + GOLDEN) & MASK64) == splitmix64_reference(s)


def test_same_key_same_value():
    key = StreamKey(7, StreamKind.NOISE, 1, (10, 2, 3))
    assert noise_draw(key) == noise_draw(StreamKey(7, StreamKind.NOISE, 1, (10, 2, 3)))


def test_distinct_keys_differ():
    base = StreamKey(7, StreamKind.NOISE, 0, (10, 2, 3))
    others = [StreamKey(8, StreamKind.NOISE, 0, (10, 2, 3)),
              StreamKey(7, StreamKind.TIE_BREAK, 0, (10, 2, 3)),
              StreamKey(7, StreamKind.NOISE, 1, (10, 2, 3)),
              StreamKey(7, StreamKind.NOISE, 0, (10, 3, 2))]
    assert len({noise_draw(k) for k in [base] + others}) == 5


def test_open_interval_extremes():
    assert to_unit(0) == 2.0 ** -53
    assert to_unit(MASK64) == 1.0 - 2.0 ** -53
    for h in (0, MASK64):
        u = to_unit(h)
        assert math.isfinite(math.log((1 - u) / u))


def test_noise_stream_matches_stream_key():
    stream = NoiseStream(99, 2)
    for t, k, i in [(1, 0, 0), (5, 3, 1), (1000, 17, 4)]:
        assert stream.draw(t, k, i) == noise_draw(StreamKey(99, StreamKind.NOISE, 2, (t, k, i)))


def test_tie_break_stream_matches_stream_key():
    ties = TieBreakStream(3, 1)
    assert ties.draw(42) == noise_draw(StreamKey(3, StreamKind.TIE_BREAK, 1, (42,)))


def test_kernel_fold_matches_python(backend):
    k = kernels.resolve(backend)
    for h, w in [(0, 0), (MASK64, 1), (123456789, 987654321)]:
        assert k.fold(h, w) == fold(h, w)


def test_kernel_noise_logits_match_scalar(backend):
    k = kernels.resolve(backend)
    stream = NoiseStream(5, 0)
    prefix = stream.option_prefix(11, 4)
    got = k.noise_logits(prefix, 6)
    want = [math.log((1 - u) / u) for u in (stream.draw(11, 4, i) for i in range(6))]
    np.testing.assert_array_equal(got, want)


def test_million_draws_mean():
    prefix = NoiseStream(2024, 0).option_prefix(1, 0)
    logits = kernels.python.noise_logits(prefix, 1_000_000)
    u = 1.0 / (1.0 + np.exp(logits))  # invert log((1-u)/u)
    assert abs(u.mean() - 0.5) < 0.002
    assert u.min() > 0 and u.max() < 1


def test_run_seed_derivation():
    assert derive_run_seed(0, 1) == hash_key(0, int(StreamKind.RUN), 1)
    assert derive_run_seed(0, 1) != derive_run_seed(0, 2)


def test_environment_rng_reproducible():
    a = environment_rng(17).random(5)
    b = environment_rng(17).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, environment_rng(18).random(5))


@pytest.mark.parametrize("seed", [0, 1, 2 ** 63])
def test_hash_is_64_bit(seed):
    assert 0 <= hash_key(seed, 1, 2, 3) <= MASK64
