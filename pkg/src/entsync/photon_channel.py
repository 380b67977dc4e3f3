"""Slot-level simulation of pair generation, detection, and timestamping.

Both sides of the link share a grid of quantum slots of duration T_qs. The
source emits a Poisson-distributed number of photon pairs per slot; a slot
is usable on the reference side only when exactly one pair was generated
and the retained photon was detected. Each pair carries one random bit
(the measured polarization of the reference photon); a correctly received
user photon reproduces that bit.

Timestamps are stored as *phases*: offsets from the slot's nominal pump
center (k - 1/2) * T_qs rather than absolute times. Phases are a few
nanoseconds at most, so cross-side differences keep full double precision
even for millisecond-long sequences, and the noise-free case cancels
exactly. Absolute times are available through ``timestamps()``.

Each simulation draws its variates through the supplied generator in a
fixed order, which is part of the determinism contract:

* reference side: pair counts, pair bits, generation jitter, detection
  uniforms, detection jitter (one vectorized draw each);
* user side: survival uniforms, signal jitter, background counts,
  background channels, background positions, background jitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import kernels

__all__ = [
    "SlotStatus",
    "SourceConfig",
    "DetectorConfig",
    "LinkConfig",
    "TruthOffset",
    "RefSlot",
    "UserSlot",
    "ReferenceSequence",
    "UserSequence",
    "simulate_reference_sequence",
    "simulate_user_sequence",
    "effective_signal_rate",
]


class SlotStatus(IntEnum):
    """Tri-state outcome of one quantum slot."""

    FAIL = -1
    BIT0 = 0
    BIT1 = 1


@dataclass(frozen=True)
class SourceConfig:
    """Pulsed pair source and the slot grid it drives.

    mu_t is the mean number of pairs per slot, sigma_t the 1-sigma spread
    of the generation time around the pump pulse center, both seconds where
    dimensional.
    """

    mu_t: float
    sigma_t: float
    slot_duration: float
    slot_count: int

    def __post_init__(self) -> None:
        if self.mu_t < 0.0:
            raise ValueError("mu_t must be >= 0")
        if self.sigma_t < 0.0:
            raise ValueError("sigma_t must be >= 0")
        if not self.slot_duration > 0.0:
            raise ValueError("slot_duration must be > 0")
        if not isinstance(self.slot_count, int) or self.slot_count < 1:
            raise ValueError("slot_count must be a positive integer")


@dataclass(frozen=True)
class DetectorConfig:
    """Single-photon detector timing jitter and efficiencies.

    eta_d applies to the user-side detector, eta_r to the reference side.
    """

    sigma_d: float
    eta_d: float
    eta_r: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma_d < 0.0:
            raise ValueError("sigma_d must be >= 0")
        for name in ("eta_d", "eta_r"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class LinkConfig:
    """Per-photon reception probability and mean background clicks per slot."""

    p_recept: float
    mu_b: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_recept <= 1.0:
            raise ValueError("p_recept must lie in [0, 1]")
        if self.mu_b < 0.0:
            raise ValueError("mu_b must be >= 0")


@dataclass(frozen=True)
class TruthOffset:
    """Ground-truth synchronization offset, decomposed for simulation.

    tau_sync = slot_shift * T_qs + sub_slot, with sub_slot in [0, T_qs).
    The decomposition is a simulation device: the estimator sees only the
    combined offset.
    """

    slot_shift: int
    sub_slot: float
    tau_sync: float

    def __post_init__(self) -> None:
        if self.sub_slot < 0.0:
            raise ValueError("sub_slot must be >= 0")

    @classmethod
    def from_parts(cls, slot_shift: int, sub_slot: float, slot_duration: float) -> "TruthOffset":
        if not 0.0 <= sub_slot < slot_duration:
            raise ValueError("sub_slot must lie in [0, slot_duration)")
        tau = slot_shift * slot_duration + sub_slot
        return cls(slot_shift=int(slot_shift), sub_slot=float(sub_slot), tau_sync=float(tau))


@dataclass(frozen=True)
class RefSlot:
    """View of one reference-side slot; index is the 1-based slot number."""

    index: int
    status: SlotStatus
    timestamp: float | None
    pair_count: int
    pair_bit: int
    gen_time: float


@dataclass(frozen=True)
class UserSlot:
    """View of one user-side slot; index is the 1-based slot number."""

    index: int
    status: SlotStatus
    timestamp: float | None


def _normalize_index(k: int, n: int) -> int:
    k = int(k)
    if k < 0:
        k += n
    if not 0 <= k < n:
        raise IndexError(f"slot index {k} out of range for {n} slots")
    return k


@dataclass(frozen=True, eq=False)
class ReferenceSequence:
    """Array-backed reference-side record of every slot.

    ``status`` and ``phase`` are what the protocol transmits; pair_count,
    pair_bit and gen_phase are hidden ground truth consumed by the user-side
    simulation. Arrays are owned by the sequence and must not be mutated.
    """

    slot_duration: float
    status: np.ndarray
    phase: np.ndarray
    pair_count: np.ndarray
    pair_bit: np.ndarray
    gen_phase: np.ndarray

    def __post_init__(self) -> None:
        n = self.status.shape[0]
        for name in ("phase", "pair_count", "pair_bit", "gen_phase"):
            if getattr(self, name).shape[0] != n:
                raise ValueError("all per-slot arrays must have equal length")

    def __len__(self) -> int:
        return self.status.shape[0]

    def __getitem__(self, k: int) -> RefSlot:
        k = _normalize_index(k, len(self))
        status = SlotStatus(int(self.status[k]))
        ts = None if status is SlotStatus.FAIL else float(self.pump_time(k) + self.phase[k])
        return RefSlot(
            index=k + 1,
            status=status,
            timestamp=ts,
            pair_count=int(self.pair_count[k]),
            pair_bit=int(self.pair_bit[k]),
            gen_time=float(self.pump_time(k) + self.gen_phase[k]),
        )

    def pump_time(self, k: int) -> float:
        """Nominal pump pulse center of 0-based slot k."""
        return (k + 0.5) * self.slot_duration

    def pump_times(self) -> np.ndarray:
        return (np.arange(len(self)) + 0.5) * self.slot_duration

    def timestamps(self) -> np.ndarray:
        """Absolute detection times; NaN on failed slots."""
        return self.pump_times() + self.phase

    @property
    def valid_mask(self) -> np.ndarray:
        return self.status >= 0


@dataclass(frozen=True, eq=False)
class UserSequence:
    """Array-backed user-side record of every slot.

    ``signal_clicks`` counts detected signal photons per slot and exists for
    diagnostics; the protocol itself only sees status and phase.
    """

    slot_duration: float
    status: np.ndarray
    phase: np.ndarray
    signal_clicks: np.ndarray

    def __post_init__(self) -> None:
        n = self.status.shape[0]
        for name in ("phase", "signal_clicks"):
            if getattr(self, name).shape[0] != n:
                raise ValueError("all per-slot arrays must have equal length")

    def __len__(self) -> int:
        return self.status.shape[0]

    def __getitem__(self, k: int) -> UserSlot:
        k = _normalize_index(k, len(self))
        status = SlotStatus(int(self.status[k]))
        ts = None if status is SlotStatus.FAIL else float(self.pump_time(k) + self.phase[k])
        return UserSlot(index=k + 1, status=status, timestamp=ts)

    def pump_time(self, k: int) -> float:
        return (k + 0.5) * self.slot_duration

    def pump_times(self) -> np.ndarray:
        return (np.arange(len(self)) + 0.5) * self.slot_duration

    def timestamps(self) -> np.ndarray:
        return self.pump_times() + self.phase

    @property
    def valid_mask(self) -> np.ndarray:
        return self.status >= 0


def _offsets(counts: np.ndarray) -> np.ndarray:
    out = np.zeros(counts.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=out[1:])
    return out


def simulate_reference_sequence(
    src: SourceConfig,
    det: DetectorConfig,
    rng: np.random.Generator,
) -> ReferenceSequence:
    """Simulate pair generation and reference-side detection for every slot.

    A slot is valid only when exactly one pair was generated and the
    reference photon was detected; its status is then the pair bit and its
    phase carries generation jitter plus detector jitter. Multi-pair and
    empty slots fail, as do single-pair slots whose reference photon was
    missed (a missed photon leaves no timestamp to anchor).
    """
    n = src.slot_count
    pair_count = rng.poisson(src.mu_t, n)
    pair_bit = rng.integers(0, 2, n).astype(np.int8)
    gen_phase = rng.normal(0.0, src.sigma_t, n)
    detect_u = rng.random(n)
    det_jitter = rng.normal(0.0, det.sigma_d, n)

    valid = (pair_count == 1) & (detect_u < det.eta_r)
    status = np.where(valid, pair_bit, np.int8(SlotStatus.FAIL)).astype(np.int8)
    phase = np.where(valid, gen_phase + det_jitter, np.nan)
    return ReferenceSequence(
        slot_duration=src.slot_duration,
        status=status,
        phase=phase,
        pair_count=pair_count.astype(np.int64),
        pair_bit=pair_bit,
        gen_phase=gen_phase,
    )


def simulate_user_sequence(
    ref: ReferenceSequence,
    link: LinkConfig,
    det: DetectorConfig,
    truth: TruthOffset,
    src: SourceConfig,
    rng: np.random.Generator,
) -> UserSequence:
    """Simulate user-side reception of the transmitted photons.

    User slot k receives the photons generated in reference slot
    k - slot_shift (none when that index falls outside the sequence). Every
    generated photon is transmitted, including those of multi-pair slots
    that the reference already marked as failed; each survives the link and
    detector with probability p_recept * eta_d. Background clicks land in a
    uniformly random position within the slot's acceptance window and pick
    either polarization channel with probability one half. Slots decode to a bit only when all
    clicks fall in a single channel; the timestamp is the earliest click in
    that channel.
    """
    n = len(ref)
    if n != src.slot_count:
        raise ValueError("reference sequence length does not match the source slot count")
    expected_tau = truth.slot_shift * src.slot_duration + truth.sub_slot
    if expected_tau != truth.tau_sync:
        raise ValueError("offset does not decompose into slot shift and sub-slot remainder")

    pair_count = ref.pair_count
    total_photons = int(pair_count.sum())
    survival_u = rng.random(total_photons)
    signal_jitter = rng.normal(0.0, det.sigma_d, total_photons)

    bg_count = rng.poisson(link.mu_b, n)
    total_bg = int(bg_count.sum())
    bg_bit = rng.integers(0, 2, total_bg).astype(np.int8)
    bg_pos = rng.random(total_bg)
    bg_jitter = rng.normal(0.0, det.sigma_d, total_bg)
    # A slot's acceptance window on the user clock is centered where its
    # signal photons land, i.e. shifted by the sub-slot offset; background
    # is uniform over that same window.
    bg_phase = ((bg_pos - 0.5) * src.slot_duration + truth.sub_slot) + bg_jitter

    status, phase, signal_clicks = kernels.decode_user_slots(
        pair_count,
        ref.pair_bit,
        ref.gen_phase,
        _offsets(pair_count),
        survival_u,
        signal_jitter,
        float(link.p_recept * det.eta_d),
        float(truth.sub_slot),
        int(truth.slot_shift),
        _offsets(bg_count),
        bg_bit,
        bg_phase,
    )
    return UserSequence(
        slot_duration=src.slot_duration,
        status=status,
        phase=phase,
        signal_clicks=signal_clicks,
    )


def effective_signal_rate(src: SourceConfig, link: LinkConfig, det: DetectorConfig) -> float:
    """Mean detected signal photons per slot: mu_t * p_recept * eta_d."""
    return src.mu_t * link.p_recept * det.eta_d
