"""Pure-numpy implementations of the hot kernels.

These mirror the compiled versions in ``_native.pyx`` operation for
operation. Both consume the same pre-drawn variate arrays and perform the
same arithmetic in the same order, so their outputs are bit-identical; the
equivalence is enforced by tests.
"""

from __future__ import annotations

import numpy as np

__all__ = ["score_shifts", "decode_user_slots"]


def score_shifts(
    ref_status: np.ndarray,
    indices: np.ndarray,
    bits: np.ndarray,
    l_min: int,
    l_max: int,
) -> np.ndarray:
    """Bit-agreement counts for every candidate shift in [l_min, l_max].

    ``ref_status`` holds -1 for failed slots and 0/1 otherwise; ``indices``
    are 0-based positions of the valid user bits. A pair contributes when
    the shifted reference slot is in range, not failed, and carries the
    same bit.
    """
    n = ref_status.shape[0]
    shifts = np.arange(l_min, l_max + 1, dtype=np.int64)
    if indices.size == 0:
        return np.zeros(shifts.size, dtype=np.int64)
    targets = indices[None, :] - shifts[:, None]
    in_range = (targets >= 0) & (targets < n)
    clipped = np.clip(targets, 0, n - 1)
    matches = in_range & (ref_status[clipped] == bits[None, :])
    return matches.sum(axis=1, dtype=np.int64)


def decode_user_slots(
    pair_counts: np.ndarray,
    pair_bits: np.ndarray,
    src_phase: np.ndarray,
    photon_offsets: np.ndarray,
    survival_u: np.ndarray,
    signal_jitter: np.ndarray,
    detect_prob: float,
    sub_slot: float,
    slot_shift: int,
    bg_offsets: np.ndarray,
    bg_bits: np.ndarray,
    bg_phase: np.ndarray,
):
    """Tri-state decode of every user slot from pre-drawn event arrays.

    Signal photons of source slot s land in user slot s + slot_shift, each
    surviving with probability ``detect_prob`` (its survival uniform is
    compared against that threshold). Clicks in exactly one polarization
    channel give that channel's bit and the earliest click phase; clicks in
    both channels, or none, give a failed slot.

    Returns (status int8, phase float64, signal_clicks int64) per slot.
    """
    n = pair_counts.shape[0]
    status = np.full(n, -1, dtype=np.int8)
    phase = np.full(n, np.nan, dtype=np.float64)

    src_slot = np.repeat(np.arange(n, dtype=np.int64), pair_counts)
    user_slot = src_slot + slot_shift
    detected = (survival_u < detect_prob) & (user_slot >= 0) & (user_slot < n)

    sig_slot = user_slot[detected]
    sig_src = src_slot[detected]
    sig_channel = pair_bits[sig_src]
    sig_phase = (src_phase[sig_src] + sub_slot) + signal_jitter[detected]
    signal_clicks = np.bincount(sig_slot, minlength=n).astype(np.int64)

    bg_slot = np.repeat(np.arange(n, dtype=np.int64), np.diff(bg_offsets))

    slot = np.concatenate([sig_slot, bg_slot])
    channel = np.concatenate([sig_channel, bg_bits])
    click_phase = np.concatenate([sig_phase, bg_phase])

    key = slot * 2 + channel
    counts = np.bincount(key, minlength=2 * n)
    earliest = np.full(2 * n, np.inf)
    np.minimum.at(earliest, key, click_phase)

    c0 = counts[0::2]
    c1 = counts[1::2]
    only0 = (c0 > 0) & (c1 == 0)
    only1 = (c1 > 0) & (c0 == 0)
    status[only0] = 0
    status[only1] = 1
    phase[only0] = earliest[0::2][only0]
    phase[only1] = earliest[1::2][only1]
    return status, phase, signal_clicks
