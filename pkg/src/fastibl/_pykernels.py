"""Pure-Python/numpy implementations of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function.  Used when the compiled
module is missing or ``FASTIBL_PURE_PYTHON`` is set.
"""

import math

import numpy as np

BACKEND = "python"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S12 = (np.uint64(s) for s in (30, 27, 31, 12))
_UNIT = 2.0 ** -52
_MASK = (1 << 64) - 1


def _mix64_arr(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _fold(h, w):
    return _mix64(h ^ _mix64((w + 0x9E3779B97F4A7C15) & _MASK))


def fold(h, w):
    return _fold(h, w)


def noise_logits(prefix, n):
    """``log((1 - u) / u)`` for instance ordinals ``0 .. n-1`` under ``prefix``."""
    words = np.arange(n, dtype=np.uint64) + _GOLDEN
    h = _mix64_arr(np.uint64(prefix) ^ _mix64_arr(words))
    u = ((h >> _S12).astype(np.float64) + 0.5) * _UNIT
    return np.log((1.0 - u) / u)


def decay_table(n, d):
    """``k ** -d`` for ages ``k = 0 .. n-1`` (entry 0 is unused)."""
    out = np.empty(n)
    if n:
        out[0] = np.inf
        out[1:] = [float(k) ** -d for k in range(1, n)]
    return out


def base_levels(arrays, counts, t, table):
    out = np.empty(len(arrays))
    for i in range(len(arrays)):
        out[i] = math.log(np.sum(table[t - arrays[i][:counts[i]]]))
    return out


def blend_option(arrays, counts, outcomes, t, table, sigma, tau, prefix):
    n = len(arrays)
    if n == 1:
        return float(outcomes[0])
    act = base_levels(arrays, counts, t, table)
    if sigma != 0.0:
        act += sigma * noise_logits(prefix, n)
    v = np.exp((act - act.max()) / tau)
    return float(np.sum(outcomes * (v / np.sum(v))))


def baseline_query(h0, h1, act, out, ts, n, q0, q1, action, t, d, sigma, tau, step_prefix):
    """Linear scan of the flat record list for one option.

    Returns ``(option_ordinal, blended)``; ordinal is -1 when the option has
    no records.  The option ordinal counts prepopulated (timestamp 0)
    records ahead of this option's own, which equals first-insertion order
    because every option's first record is its prepopulated default.
    """
    zeros = 0
    ordinal = -1
    g_out = []
    g_sum = []
    for i in range(n):
        stamp = ts[i]
        if h0[i] == q0 and h1[i] == q1 and act[i] == action:
            if ordinal < 0:
                ordinal = zeros
            x = out[i]
            j = 0
            while j < len(g_out):
                if g_out[j] == x:
                    break
                j += 1
            if j == len(g_out):
                g_out.append(x)
                g_sum.append(0.0)
            g_sum[j] += (t - stamp) ** -d
        if stamp == 0:
            zeros += 1
    if ordinal < 0:
        return -1, 0.0
    m = len(g_out)
    if m == 1:
        return ordinal, g_out[0]
    prefix = _fold(step_prefix, ordinal)
    acts = []
    for j in range(m):
        a = math.log(g_sum[j])
        if sigma != 0.0:
            u = ((_fold(prefix, j) >> 12) + 0.5) * _UNIT
            a += sigma * math.log((1.0 - u) / u)
        acts.append(a)
    top = acts[0]
    for a in acts:
        if a > top:
            top = a
    total = 0.0
    weights = []
    for a in acts:
        w = math.exp((a - top) / tau)
        weights.append(w)
        total += w
    value = 0.0
    for j in range(m):
        value += weights[j] / total * g_out[j]
    return ordinal, value


def baseline_rewrite(ts, out, n, stamps, x):
    """Set the outcome of every record whose timestamp is in ``stamps``."""
    wanted = set(stamps)
    hits = 0
    for i in range(n):
        if ts[i] in wanted:
            out[i] = x
            hits += 1
    return hits
