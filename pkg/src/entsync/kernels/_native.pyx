# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot-decoding and shift-scoring kernels.

Must stay arithmetic-identical to ``fallback.py``: same operand order for
every float expression, same decode rules. The equivalence tests compare
outputs bit for bit.
"""

import numpy as np


def score_shifts(
    const signed char[::1] ref_status,
    const long long[::1] indices,
    const signed char[::1] bits,
    long l_min,
    long l_max,
):
    cdef Py_ssize_t n = ref_status.shape[0]
    cdef Py_ssize_t x = indices.shape[0]
    cdef Py_ssize_t n_shifts = l_max - l_min + 1
    out = np.zeros(n_shifts, dtype=np.int64)
    cdef long long[::1] out_v = out
    cdef Py_ssize_t s, j
    cdef long long shift, target, total
    for s in range(n_shifts):
        shift = l_min + s
        total = 0
        for j in range(x):
            target = indices[j] - shift
            if 0 <= target < n:
                if ref_status[target] == bits[j]:
                    total += 1
        out_v[s] = total
    return out


def decode_user_slots(
    const long long[::1] pair_counts,
    const signed char[::1] pair_bits,
    const double[::1] src_phase,
    const long long[::1] photon_offsets,
    const double[::1] survival_u,
    const double[::1] signal_jitter,
    double detect_prob,
    double sub_slot,
    long slot_shift,
    const long long[::1] bg_offsets,
    const signed char[::1] bg_bits,
    const double[::1] bg_phase,
):
    cdef Py_ssize_t n = pair_counts.shape[0]
    status = np.full(n, -1, dtype=np.int8)
    phase = np.full(n, np.nan, dtype=np.float64)
    signal_clicks = np.zeros(n, dtype=np.int64)
    cdef signed char[::1] status_v = status
    cdef double[::1] phase_v = phase
    cdef long long[::1] clicks_v = signal_clicks

    cdef Py_ssize_t k, m
    cdef long long source
    cdef long long c0, c1
    cdef int channel
    cdef double t, base, t0, t1
    cdef double inf = float("inf")

    for k in range(n):
        c0 = 0
        c1 = 0
        t0 = inf
        t1 = inf
        source = k - slot_shift
        if 0 <= source < n and pair_counts[source] > 0:
            channel = pair_bits[source]
            base = src_phase[source] + sub_slot
            for m in range(photon_offsets[source], photon_offsets[source + 1]):
                if survival_u[m] < detect_prob:
                    t = base + signal_jitter[m]
                    clicks_v[k] += 1
                    if channel == 0:
                        c0 += 1
                        if t < t0:
                            t0 = t
                    else:
                        c1 += 1
                        if t < t1:
                            t1 = t
        for m in range(bg_offsets[k], bg_offsets[k + 1]):
            t = bg_phase[m]
            if bg_bits[m] == 0:
                c0 += 1
                if t < t0:
                    t0 = t
            else:
                c1 += 1
                if t < t1:
                    t1 = t
        if c0 > 0 and c1 == 0:
            status_v[k] = 0
            phase_v[k] = t0
        elif c1 > 0 and c0 == 0:
            status_v[k] = 1
            phase_v[k] = t1
    return status, phase, signal_clicks
