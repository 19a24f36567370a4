# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Same signatures and semantics as ``_pykernels``."""

from libc.math cimport exp, log, pow
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc, realloc

import numpy as np

BACKEND = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double UNIT = 2.220446049250313e-16  # 2**-52


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _fold(uint64_t h, uint64_t w) noexcept nogil:
    return _mix64(h ^ _mix64(w + GOLDEN))


cdef inline double _logit(uint64_t h) noexcept nogil:
    cdef double u = (<double>(h >> 12) + 0.5) * UNIT
    return log((1.0 - u) / u)


cdef inline double _decay_sum(const int64_t[::1] a, Py_ssize_t n, int64_t t,
                              const double[::1] table) noexcept nogil:
    # table[k] == k ** -d; four partial sums for throughput
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t j = 0
    while j + 4 <= n:
        s0 += table[t - a[j]]
        s1 += table[t - a[j + 1]]
        s2 += table[t - a[j + 2]]
        s3 += table[t - a[j + 3]]
        j += 4
    while j < n:
        s0 += table[t - a[j]]
        j += 1
    return (s0 + s1) + (s2 + s3)


def decay_table(Py_ssize_t n, double d):
    """``k ** -d`` for ages ``k = 0 .. n-1`` (entry 0 is unused)."""
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    if n:
        o[0] = np.inf
    for k in range(1, n):
        o[k] = pow(<double>k, -d)
    return out


def fold(uint64_t h, uint64_t w):
    return _fold(h, w)


def noise_logits(uint64_t prefix, Py_ssize_t n):
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    for j in range(n):
        o[j] = _logit(_fold(prefix, <uint64_t>j))
    return out


def base_levels(list arrays, list counts, int64_t t, const double[::1] table):
    cdef Py_ssize_t m = len(arrays), i
    cdef const int64_t[::1] a
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(m):
        a = arrays[i]
        o[i] = log(_decay_sum(a, counts[i], t, table))
    return out


def blend_option(list arrays, list counts, const double[::1] outcomes, int64_t t,
                 const double[::1] table, double sigma, double tau, uint64_t prefix):
    cdef Py_ssize_t m = len(arrays), i
    if m == 1:
        return outcomes[0]
    cdef const int64_t[::1] a
    cdef double *act = <double *> malloc(m * sizeof(double))
    cdef double top, total, value
    try:
        for i in range(m):
            a = arrays[i]
            act[i] = log(_decay_sum(a, counts[i], t, table))
            if sigma != 0.0:
                act[i] += sigma * _logit(_fold(prefix, <uint64_t>i))
        top = act[0]
        for i in range(1, m):
            if act[i] > top:
                top = act[i]
        total = 0.0
        for i in range(m):
            act[i] = exp((act[i] - top) / tau)
            total += act[i]
        value = 0.0
        for i in range(m):
            value += act[i] / total * outcomes[i]
        return value
    finally:
        free(act)


def baseline_query(const uint64_t[::1] h0, const uint64_t[::1] h1, const int64_t[::1] act,
                   const double[::1] out, const int64_t[::1] ts, Py_ssize_t n,
                   uint64_t q0, uint64_t q1, int64_t action, int64_t t,
                   double d, double sigma, double tau, uint64_t step_prefix):
    cdef Py_ssize_t i, j, m = 0, cap = 4
    cdef int64_t zeros = 0, ordinal = -1
    cdef double x, top, total, value, w
    cdef uint64_t prefix
    cdef double *g_out = <double *> malloc(cap * sizeof(double))
    cdef double *g_sum = <double *> malloc(cap * sizeof(double))
    try:
        for i in range(n):
            if h0[i] == q0 and h1[i] == q1 and act[i] == action:
                if ordinal < 0:
                    ordinal = zeros
                x = out[i]
                j = 0
                while j < m:
                    if g_out[j] == x:
                        break
                    j += 1
                if j == m:
                    if m == cap:
                        cap *= 2
                        g_out = <double *> realloc(g_out, cap * sizeof(double))
                        g_sum = <double *> realloc(g_sum, cap * sizeof(double))
                    g_out[m] = x
                    g_sum[m] = 0.0
                    m += 1
                g_sum[j] += pow(<double>(t - ts[i]), -d)
            if ts[i] == 0:
                zeros += 1
        if ordinal < 0:
            return -1, 0.0
        if m == 1:
            return ordinal, g_out[0]
        prefix = _fold(step_prefix, <uint64_t>ordinal)
        for j in range(m):
            g_sum[j] = log(g_sum[j])
            if sigma != 0.0:
                g_sum[j] += sigma * _logit(_fold(prefix, <uint64_t>j))
        top = g_sum[0]
        for j in range(1, m):
            if g_sum[j] > top:
                top = g_sum[j]
        total = 0.0
        for j in range(m):
            g_sum[j] = exp((g_sum[j] - top) / tau)
            total += g_sum[j]
        value = 0.0
        for j in range(m):
            value += g_sum[j] / total * g_out[j]
        return ordinal, value
    finally:
        free(g_out)
        free(g_sum)


def baseline_rewrite(const int64_t[::1] ts, double[::1] out, Py_ssize_t n, stamps, double x):
    cdef const int64_t[::1] s = np.asarray(stamps, dtype=np.int64)
    cdef Py_ssize_t i, lo, hi, mid, k = s.shape[0], hits = 0
    cdef int64_t v
    for i in range(n):
        v = ts[i]
        lo = 0
        hi = k
        while lo < hi:
            mid = (lo + hi) >> 1
            if s[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        if lo < k and s[lo] == v:
            out[i] = x
            hits += 1
    return hits
