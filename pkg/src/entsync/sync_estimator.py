"""Two-stage offset recovery: sparse bit-pattern alignment, then averaging.

Stage one slides the sparse user bit pattern across the reference pattern
and counts bit agreements per candidate shift; stage two averages the
timestamp differences over the matched slots at the winning shift. Trials
with fewer than two matched bits are reported as failed rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EstimationError
from .photon_channel import ReferenceSequence, UserSequence

__all__ = [
    "ValidView",
    "ShiftWindow",
    "SyncResult",
    "extract_valid",
    "matching_score",
    "score_profile",
    "best_shift",
    "matched_indices",
    "estimate_offset",
    "synchronize",
]


@dataclass(frozen=True, eq=False)
class ValidView:
    """Positions (1-based) and bit values of the non-failed user slots."""

    indices: np.ndarray
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.indices.shape != self.bits.shape:
            raise ValueError("indices and bits must have equal length")
        if self.indices.size and np.any(np.diff(self.indices) <= 0):
            raise ValueError("indices must be strictly increasing")
        if self.bits.size and not np.isin(self.bits, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class ShiftWindow:
    """Inclusive range of candidate integer slot shifts."""

    l_min: int
    l_max: int

    def __post_init__(self) -> None:
        if self.l_min > self.l_max:
            raise ValueError("empty shift window: l_min must be <= l_max")

    def shifts(self) -> np.ndarray:
        return np.arange(self.l_min, self.l_max + 1, dtype=np.int64)

    def __contains__(self, shift: int) -> bool:
        return self.l_min <= shift <= self.l_max


@dataclass(frozen=True, eq=False)
class SyncResult:
    """Outcome of one synchronization attempt.

    ``failed`` is set exactly when fewer than two slots matched, in which
    case ``offset_estimate`` is None. ``score_profile`` holds the matching
    score for every shift in ``window`` (diagnostics).
    """

    best_shift: int
    offset_estimate: float | None
    matched_count: int
    score_profile: np.ndarray
    window: ShiftWindow
    failed: bool


def extract_valid(user_seq: UserSequence) -> ValidView:
    """Indices and bits of all non-failed user slots, in slot order."""
    positions = np.flatnonzero(user_seq.status >= 0)
    return ValidView(
        indices=(positions + 1).astype(np.int64),
        bits=user_seq.status[positions].astype(np.int8),
    )


def score_profile(ref_seq: ReferenceSequence, view: ValidView, window: ShiftWindow) -> np.ndarray:
    """Matching score for every candidate shift in the window."""
    return kernels.score_shifts(
        np.ascontiguousarray(ref_seq.status, dtype=np.int8),
        np.ascontiguousarray(view.indices - 1, dtype=np.int64),
        np.ascontiguousarray(view.bits, dtype=np.int8),
        int(window.l_min),
        int(window.l_max),
    )


def matching_score(ref_seq: ReferenceSequence, view: ValidView, shift: int) -> int:
    """Number of valid user bits that agree with the shift-aligned reference.

    A user bit at slot i contributes when reference slot i - shift is in
    range, not failed, and carries the same bit.
    """
    profile = score_profile(ref_seq, view, ShiftWindow(int(shift), int(shift)))
    return int(profile[0])


def _pick_best(profile: np.ndarray, window: ShiftWindow) -> int:
    shifts = window.shifts()
    top = profile.max()
    candidates = shifts[profile == top]
    order = np.lexsort((candidates, np.abs(candidates)))
    return int(candidates[order[0]])


def best_shift(ref_seq: ReferenceSequence, view: ValidView, window: ShiftWindow) -> int:
    """Shift with the highest matching score.

    Ties are broken toward the smallest magnitude, then the smaller value
    (a stationary-clock prior).
    """
    return _pick_best(score_profile(ref_seq, view, window), window)


def matched_indices(ref_seq: ReferenceSequence, view: ValidView, shift: int) -> np.ndarray:
    """1-based user slot indices whose bits agree with the aligned reference."""
    idx0 = view.indices - 1
    target = idx0 - int(shift)
    in_range = (target >= 0) & (target < len(ref_seq))
    safe = np.where(in_range, target, 0)
    agree = in_range & (ref_seq.status[safe] == view.bits)
    return view.indices[agree].copy()


def estimate_offset(
    ref_seq: ReferenceSequence,
    user_seq: UserSequence,
    matched: np.ndarray,
    shift: int,
) -> float:
    """Average timestamp difference over the matched slots at the given shift.

    Computed as shift * T_qs plus the mean phase difference, anchored at the
    first element so the residual sum carries no slot-scale magnitude: an
    all-equal difference set averages to exactly that value.
    """
    m = np.asarray(matched, dtype=np.int64)
    if m.size == 0:
        raise EstimationError("no matched slots; offset estimate undefined")
    shift = int(shift)
    diffs = shift * ref_seq.slot_duration + (user_seq.phase[m - 1] - ref_seq.phase[m - 1 - shift])
    anchor = float(diffs[0])
    return anchor + math.fsum(diffs - anchor) / diffs.size


def synchronize(
    ref_seq: ReferenceSequence,
    user_seq: UserSequence,
    window: ShiftWindow,
) -> SyncResult:
    """Full two-stage recovery over one pair of slot sequences."""
    if len(ref_seq) != len(user_seq):
        raise ValueError("reference and user sequences must cover the same slots")
    view = extract_valid(user_seq)
    profile = score_profile(ref_seq, view, window)
    best = _pick_best(profile, window)
    matched = matched_indices(ref_seq, view, best)
    failed = matched.size < 2
    offset = None if failed else estimate_offset(ref_seq, user_seq, matched, best)
    return SyncResult(
        best_shift=best,
        offset_estimate=offset,
        matched_count=int(matched.size),
        score_profile=profile,
        window=window,
        failed=failed,
    )
