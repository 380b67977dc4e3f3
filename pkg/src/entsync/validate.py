"""Built-in invariant suite behind the ``validate`` CLI subcommand.

Each check is small enough to run in well under a second and exercises one
load-bearing property through the public API. Checks call through the
module objects (``geometry.rotation_to_beam_frame`` and friends) so fault
injection via monkeypatching is visible to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import beam_optics, geometry
from .beam_optics import Aperture
from .geometry import GridLayout, RoomSpec, Vec3
from .photon_channel import (
    DetectorConfig,
    LinkConfig,
    ReferenceSequence,
    SourceConfig,
    TruthOffset,
    simulate_reference_sequence,
    simulate_user_sequence,
)
from .sync_estimator import ShiftWindow, ValidView, best_shift, score_profile, synchronize

__all__ = ["CheckResult", "run_all"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _default_layout() -> GridLayout:
    return GridLayout(RoomSpec(6.0, 6.0, 3.0, 1.0), 15, 15)


def _check(name: str, fn) -> CheckResult:
    try:
        detail = fn()
    except Exception as exc:  # noqa: BLE001 - a failed check must not stop the suite
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, True, detail or "ok")


def _rotation_orthonormality() -> str:
    layout = _default_layout()
    rng = np.random.default_rng(0)
    worst = 0.0
    directions = [
        geometry.beam_direction(layout, i, j)
        for i in range(1, layout.nx + 1)
        for j in range(1, layout.ny + 1)
    ]
    directions += [Vec3.from_array(v) for v in rng.normal(size=(100, 3)) if np.linalg.norm(v) > 1e-6]
    for direction in directions:
        rot = geometry.rotation_to_beam_frame(direction)
        m = rot.matrix
        worst = max(worst, float(np.max(np.abs(m @ m.T - np.eye(3)))))
        worst = max(worst, abs(float(np.linalg.det(m)) - 1.0))
    if worst >= 1e-12:
        raise AssertionError(f"orthonormality deviation {worst:.3e} >= 1e-12")
    return f"max deviation {worst:.2e}"


def _rotation_maps_beam_axis_to_z() -> str:
    layout = _default_layout()
    worst = 0.0
    for i in range(1, layout.nx + 1):
        for j in range(1, layout.ny + 1):
            direction = geometry.beam_direction(layout, i, j)
            rot = geometry.rotation_to_beam_frame(direction)
            unit = direction.as_array() / direction.norm()
            mapped = rot.matrix @ unit
            worst = max(worst, float(np.max(np.abs(mapped - np.array([0.0, 0.0, 1.0])))))
    if worst >= 1e-12:
        raise AssertionError(f"beam axis maps {worst:.3e} away from +z")
    return f"max deviation {worst:.2e}"


def _grid_center_fixed_point() -> str:
    for layout in (GridLayout(RoomSpec(6.0, 6.0, 3.0, 1.0), 5, 5), _default_layout()):
        for i in range(1, layout.nx + 1):
            for j in range(1, layout.ny + 1):
                got = geometry.select_grid(layout, geometry.grid_center(layout, i, j))
                if got != (i, j):
                    raise AssertionError(f"center of {(i, j)} selected {got}")
    return "all cell centers map to their own cell"


def _select_grid_bruteforce() -> str:
    layout = _default_layout()
    rng = np.random.default_rng(7)
    for _ in range(200):
        pos = Vec3(
            float(rng.uniform(-3.0, 3.0)),
            float(rng.uniform(-3.0, 3.0)),
            layout.plane_z + float(rng.uniform(-0.2, 0.2)),
        )
        expected = None
        expected_angle = None
        u = pos.as_array()
        for i in range(1, layout.nx + 1):
            for j in range(1, layout.ny + 1):
                d = geometry.grid_center(layout, i, j).as_array()
                cosang = float(d @ u / (np.linalg.norm(d) * np.linalg.norm(u)))
                angle = math.acos(max(-1.0, min(1.0, cosang)))
                if expected_angle is None or angle < expected_angle:
                    expected_angle = angle
                    expected = (i, j)
        got = geometry.select_grid(layout, pos)
        if got != expected:
            raise AssertionError(f"position {pos} selected {got}, brute force says {expected}")
    return "200 random positions agree with exhaustive search"


def _density_normalization() -> str:
    width = 0.37
    span = 6.0 * width
    xs = np.linspace(-span, span, 801)
    grid_x, grid_y = np.meshgrid(xs, xs)
    values = beam_optics.spatial_density(grid_x, grid_y, width)
    integral = float(np.trapezoid(np.trapezoid(values, xs, axis=1), xs))
    if abs(integral - 1.0) >= 1e-6:
        raise AssertionError(f"plane integral {integral!r} deviates from 1 by >= 1e-6")
    return f"plane integral {integral:.9f}"


def _on_axis_reception_closed_form() -> str:
    worst = 0.0
    for width in (0.05, 0.2, 0.4, 1.2):
        for radius in (0.002, 0.02, 0.08):
            exact = beam_optics.reception_prob_exact((0.0, 0.0), width, Aperture(radius))
            closed = -math.expm1(-2.0 * radius * radius / (width * width))
            worst = max(worst, abs(exact - closed))
    if worst >= 1e-9:
        raise AssertionError(f"on-axis quadrature deviates {worst:.3e} from closed form")
    return f"max deviation {worst:.2e}"


def _noiseless_channel_roundtrip() -> str:
    rng = np.random.default_rng(11)
    slot = 10e-9
    src = SourceConfig(mu_t=0.5, sigma_t=0.0, slot_duration=slot, slot_count=600)
    det = DetectorConfig(sigma_d=0.0, eta_d=1.0, eta_r=1.0)
    truth = TruthOffset.from_parts(7, 0.3 * slot, slot)
    ref = simulate_reference_sequence(src, det, rng)
    user = simulate_user_sequence(ref, LinkConfig(1.0, 0.0), det, truth, src, rng)
    result = synchronize(ref, user, ShiftWindow(-50, 50))
    if result.failed:
        raise AssertionError("noiseless link reported failure")
    if result.best_shift != truth.slot_shift:
        raise AssertionError(f"shift {result.best_shift} != {truth.slot_shift}")
    if result.offset_estimate != truth.tau_sync:
        raise AssertionError(f"offset {result.offset_estimate!r} != {truth.tau_sync!r}")
    return "noise-free estimate is exact"


def _score_matches_bruteforce() -> str:
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(5, 31))
        status = rng.choice(np.array([-1, 0, 1], dtype=np.int8), size=n)
        ref = ReferenceSequence(
            slot_duration=1.0,
            status=status,
            phase=np.zeros(n),
            pair_count=np.ones(n, dtype=np.int64),
            pair_bit=np.maximum(status, 0).astype(np.int8),
            gen_phase=np.zeros(n),
        )
        k = int(rng.integers(0, n + 1))
        positions = np.sort(rng.choice(n, size=k, replace=False)) + 1
        bits = rng.integers(0, 2, k).astype(np.int8)
        view = ValidView(indices=positions.astype(np.int64), bits=bits)
        window = ShiftWindow(-8, 8)
        profile = score_profile(ref, view, window)
        for pos, shift in enumerate(range(window.l_min, window.l_max + 1)):
            manual = 0
            for idx, bit in zip(positions, bits):
                target = idx - shift
                if 1 <= target <= n and status[target - 1] == bit:
                    manual += 1
            if manual != profile[pos]:
                raise AssertionError(f"score at shift {shift}: kernel {profile[pos]}, loop {manual}")
        chosen = best_shift(ref, view, window)
        ranked = sorted(
            range(window.l_min, window.l_max + 1),
            key=lambda s: (-profile[s - window.l_min], abs(s), s),
        )
        if chosen != ranked[0]:
            raise AssertionError(f"best shift {chosen} != brute-force {ranked[0]}")
    return "50 random instances agree with the double-loop scorer"


def run_all() -> list[CheckResult]:
    """Run every invariant check and report one result per check."""
    return [
        _check("rotation_orthonormality", _rotation_orthonormality),
        _check("rotation_maps_beam_axis_to_z", _rotation_maps_beam_axis_to_z),
        _check("grid_center_fixed_point", _grid_center_fixed_point),
        _check("select_grid_bruteforce", _select_grid_bruteforce),
        _check("density_normalization", _density_normalization),
        _check("on_axis_reception_closed_form", _on_axis_reception_closed_form),
        _check("noiseless_channel_roundtrip", _noiseless_channel_roundtrip),
        _check("score_matches_bruteforce", _score_matches_bruteforce),
    ]
