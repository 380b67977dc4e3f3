"""Monte Carlo trials and parameter sweeps over the full link.

A trial places a user, selects a beam from the noisy position estimate,
derives the reception probability against the true position, simulates both
slot sequences, and runs the estimator. Everything is a pure function of
(scenario, seed): per-trial seeds are derived from (master seed, point
index, trial index), so adding sweep points or changing the worker count
never perturbs existing results.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import beam_optics, geometry
from .beam_optics import Aperture, BeamModel
from .errors import EstimationError
from .geometry import GridLayout, PositionNoise, Vec3
from .photon_channel import (
    DetectorConfig,
    LinkConfig,
    SourceConfig,
    TruthOffset,
    simulate_reference_sequence,
    simulate_user_sequence,
)
from .sync_estimator import ShiftWindow, synchronize

__all__ = [
    "UniformPlacement",
    "FixedPlacement",
    "GridCenterPlacement",
    "BeamSpec",
    "Scenario",
    "TrialResult",
    "SweepSpec",
    "SweepPointResult",
    "run_trial",
    "failure_probability",
    "mean_abs_error",
    "run_sweep",
]

SWEEP_AXES = ("seq_duration", "grid_size", "mu_t")


@dataclass(frozen=True)
class UniformPlacement:
    """User drawn uniformly over the coverage plane inside the footprint."""

    def sample(self, layout: GridLayout, rng: np.random.Generator) -> Vec3:
        room = layout.room
        x = float(rng.uniform(-room.length / 2.0, room.length / 2.0))
        y = float(rng.uniform(-room.width / 2.0, room.width / 2.0))
        return Vec3(x, y, layout.plane_z)


@dataclass(frozen=True)
class FixedPlacement:
    """User pinned to one point; draws nothing."""

    point: Vec3

    def sample(self, layout: GridLayout, rng: np.random.Generator) -> Vec3:
        return self.point


@dataclass(frozen=True)
class GridCenterPlacement:
    """User pinned to the center of cell (i, j); draws nothing."""

    i: int
    j: int

    def sample(self, layout: GridLayout, rng: np.random.Generator) -> Vec3:
        return geometry.grid_center(layout, self.i, self.j)


Placement = UniformPlacement | FixedPlacement | GridCenterPlacement


@dataclass(frozen=True)
class BeamSpec:
    """Beam parameterization that may track the grid geometry.

    With ``width`` None in direct mode the 1/e^2 radius at the coverage
    plane follows the cell width (room width / nx), so grid sweeps keep the
    footprint matched to the cells.
    """

    mode: str = beam_optics.DIRECT_WIDTH
    width: float | None = None
    waist: float | None = None
    wavelength: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in (beam_optics.DIRECT_WIDTH, beam_optics.PROPAGATED):
            raise ValueError(f"unknown beam mode {self.mode!r}")
        if self.mode == beam_optics.PROPAGATED and (self.waist is None or self.wavelength is None):
            raise ValueError("propagated mode requires waist and wavelength")

    def resolve(self, layout: GridLayout) -> BeamModel:
        if self.mode == beam_optics.DIRECT_WIDTH:
            width = self.width if self.width is not None else layout.room.width / layout.nx
            return BeamModel.direct(width)
        return BeamModel.propagated(self.waist, self.wavelength)


@dataclass(frozen=True)
class Scenario:
    """Complete experiment configuration for one operating point."""

    layout: GridLayout
    beam: BeamSpec
    aperture: Aperture
    mu_t: float
    sigma_t: float
    slot_duration: float
    sigma_d: float
    eta_d: float
    eta_r: float
    mu_b: float
    sigma_p: float
    placement: Placement
    window: ShiftWindow
    seq_duration: float
    p_recept_override: float | None = None

    def __post_init__(self) -> None:
        # Nested dataclasses validate themselves; check the flat fields and
        # the derived slot count here.
        DetectorConfig(self.sigma_d, self.eta_d, self.eta_r)
        if self.mu_t < 0.0:
            raise ValueError("mu_t must be >= 0")
        if self.sigma_t < 0.0:
            raise ValueError("sigma_t must be >= 0")
        if self.mu_b < 0.0:
            raise ValueError("mu_b must be >= 0")
        if self.sigma_p < 0.0:
            raise ValueError("sigma_p must be >= 0")
        if not self.slot_duration > 0.0:
            raise ValueError("slot_duration must be > 0")
        if self.slot_count < 1:
            raise ValueError("seq_duration must cover at least one slot")
        if self.p_recept_override is not None and not 0.0 <= self.p_recept_override <= 1.0:
            raise ValueError("p_recept_override must lie in [0, 1]")

    @property
    def slot_count(self) -> int:
        return int(round(self.seq_duration / self.slot_duration))

    def source_config(self) -> SourceConfig:
        return SourceConfig(self.mu_t, self.sigma_t, self.slot_duration, self.slot_count)

    def detector_config(self) -> DetectorConfig:
        return DetectorConfig(self.sigma_d, self.eta_d, self.eta_r)


@dataclass(frozen=True)
class TrialResult:
    """Per-trial metrics; abs_error and shift_correct are None when failed."""

    failed: bool
    abs_error: float | None
    shift_correct: bool | None
    matched_count: int
    selected_grid: tuple[int, int]
    p_recept: float


def _reception_probability(scenario: Scenario, local: Vec3) -> float:
    beam = scenario.beam.resolve(scenario.layout)
    width = beam_optics.beam_width_at(beam, local.z)
    offset = (local.x, local.y)
    # The constant-density approximation is used in its nominal regime and
    # full quadrature outside it.
    if width >= 4.0 * scenario.aperture.radius:
        return beam_optics.reception_prob_approx(offset, width, scenario.aperture)
    return beam_optics.reception_prob_exact(offset, width, scenario.aperture)


def run_trial(scenario: Scenario, seed) -> TrialResult:
    """One end-to-end trial, fully determined by (scenario, seed).

    Draw order: placement, position noise, true shift, sub-slot offset,
    reference sequence, user sequence.
    """
    rng = np.random.default_rng(seed)
    layout = scenario.layout

    true_pos = scenario.placement.sample(layout, rng)
    est_pos = geometry.perturb_position(true_pos, PositionNoise(scenario.sigma_p), rng)
    cell = geometry.select_grid(layout, est_pos)
    rot = geometry.rotation_to_beam_frame(geometry.beam_direction(layout, *cell))
    local = geometry.to_beam_frame(rot, true_pos)

    if scenario.p_recept_override is not None:
        p_recept = scenario.p_recept_override
    else:
        p_recept = _reception_probability(scenario, local)

    window = scenario.window
    shift = int(rng.integers(window.l_min, window.l_max + 1))
    sub_slot = float(rng.uniform(0.0, scenario.slot_duration))
    truth = TruthOffset.from_parts(shift, sub_slot, scenario.slot_duration)

    src = scenario.source_config()
    det = scenario.detector_config()
    ref = simulate_reference_sequence(src, det, rng)
    user = simulate_user_sequence(ref, LinkConfig(p_recept, scenario.mu_b), det, truth, src, rng)
    result = synchronize(ref, user, window)

    if result.failed:
        return TrialResult(
            failed=True,
            abs_error=None,
            shift_correct=None,
            matched_count=result.matched_count,
            selected_grid=cell,
            p_recept=p_recept,
        )
    return TrialResult(
        failed=False,
        abs_error=abs(result.offset_estimate - truth.tau_sync),
        shift_correct=result.best_shift == truth.slot_shift,
        matched_count=result.matched_count,
        selected_grid=cell,
        p_recept=p_recept,
    )


def failure_probability(results: list[TrialResult]) -> float:
    """Fraction of failed trials."""
    if not results:
        raise ValueError("failure_probability needs at least one trial")
    return sum(r.failed for r in results) / len(results)


def mean_abs_error(results: list[TrialResult]) -> float:
    """Mean absolute offset error over the non-failed trials."""
    errors = [r.abs_error for r in results if not r.failed]
    if not errors:
        raise EstimationError("all trials failed; mean error undefined")
    return math.fsum(errors) / len(errors)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis, its values, and the shared base scenario."""

    axis: str
    values: tuple
    trials: int
    base: Scenario
    master_seed: int

    def __post_init__(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one axis value")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be >= 0")


@dataclass(frozen=True)
class SweepPointResult:
    """Aggregated metrics for one sweep point.

    mean_error, err_ci and shift_accuracy are None when no trial produced
    an estimate (err_ci additionally needs two); all times are seconds.
    """

    axis: str
    value: float
    failure_prob: float
    failure_ci: float
    mean_error: float | None
    shift_accuracy: float | None
    matched_mean: float
    err_ci: float | None
    trials: int
    seed: int


def scenario_for_value(base: Scenario, axis: str, value) -> Scenario:
    """Base scenario with one axis value applied."""
    if axis == "seq_duration":
        return replace(base, seq_duration=float(value))
    if axis == "grid_size":
        n = int(value)
        return replace(base, layout=GridLayout(base.layout.room, n, n))
    if axis == "mu_t":
        return replace(base, mu_t=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}")


def trial_seed(master_seed: int, point_index: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, point_index, trial_index])


def _run_task(args) -> tuple[int, int, TrialResult]:
    point_index, trial_index, scenario, master_seed = args
    seed = trial_seed(master_seed, point_index, trial_index)
    return point_index, trial_index, run_trial(scenario, seed)


def _aggregate(
    spec: SweepSpec,
    value,
    results: list[TrialResult],
) -> SweepPointResult:
    n = len(results)
    failures = sum(r.failed for r in results)
    failure_prob = failures / n
    failure_ci = 1.96 * math.sqrt(failure_prob * (1.0 - failure_prob) / n)
    matched_mean = math.fsum(r.matched_count for r in results) / n

    estimated = [r for r in results if not r.failed]
    if estimated:
        errors = [r.abs_error for r in estimated]
        mean_error = math.fsum(errors) / len(errors)
        shift_accuracy = sum(r.shift_correct for r in estimated) / len(estimated)
        if len(errors) >= 2:
            err_ci = 1.96 * statistics.stdev(errors) / math.sqrt(len(errors))
        else:
            err_ci = None
    else:
        mean_error = None
        shift_accuracy = None
        err_ci = None

    return SweepPointResult(
        axis=spec.axis,
        value=float(value),
        failure_prob=failure_prob,
        failure_ci=failure_ci,
        mean_error=mean_error,
        shift_accuracy=shift_accuracy,
        matched_mean=matched_mean,
        err_ci=err_ci,
        trials=spec.trials,
        seed=spec.master_seed,
    )


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepPointResult]:
    """Run every sweep point and aggregate per-point metrics.

    Trials are embarrassingly parallel; results are keyed by (point, trial)
    and aggregated in index order, so the output is identical for any
    worker count.
    """
    scenarios = [scenario_for_value(spec.base, spec.axis, v) for v in spec.values]
    tasks = [
        (p, t, scenarios[p], spec.master_seed)
        for p in range(len(spec.values))
        for t in range(spec.trials)
    ]
    per_point: dict[int, dict[int, TrialResult]] = {p: {} for p in range(len(spec.values))}
    if workers <= 1:
        outcomes = map(_run_task, tasks)
        for p, t, result in outcomes:
            per_point[p][t] = result
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for p, t, result in pool.map(_run_task, tasks, chunksize=chunk):
                per_point[p][t] = result

    rows = []
    for p, value in enumerate(spec.values):
        ordered = [per_point[p][t] for t in sorted(per_point[p])]
        rows.append(_aggregate(spec, value, ordered))
    return rows
