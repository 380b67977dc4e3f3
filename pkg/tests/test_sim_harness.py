import math
from dataclasses import replace

import numpy as np
import pytest

from entsync.beam_optics import Aperture
from entsync.errors import EstimationError
from entsync.geometry import GridLayout, RoomSpec, Vec3
from entsync.sim_harness import (
    BeamSpec,
    FixedPlacement,
    GridCenterPlacement,
    Scenario,
    SweepSpec,
    TrialResult,
    UniformPlacement,
    failure_probability,
    mean_abs_error,
    run_sweep,
    run_trial,
    scenario_for_value,
    trial_seed,
)
from entsync.sync_estimator import ShiftWindow

ROOM = RoomSpec(6.0, 6.0, 3.0, 1.0)


def _scenario(**overrides):
    base = dict(
        layout=GridLayout(ROOM, 15, 15),
        beam=BeamSpec(),
        aperture=Aperture(0.02),
        mu_t=0.5,
        sigma_t=50e-12,
        slot_duration=10e-9,
        sigma_d=200e-12,
        eta_d=0.6,
        eta_r=1.0,
        mu_b=5e-6,
        sigma_p=0.06,
        placement=UniformPlacement(),
        window=ShiftWindow(-50, 50),
        seq_duration=1e-3,
    )
    base.update(overrides)
    return Scenario(**base)


def test_scenario_slot_count():
    sc = _scenario(seq_duration=1e-3)
    assert sc.slot_count == 100_000
    with pytest.raises(ValueError):
        _scenario(seq_duration=1e-9)


def test_beam_spec_tracks_grid_width():
    beam = BeamSpec()
    assert beam.resolve(GridLayout(ROOM, 15, 15)).width == pytest.approx(0.4)
    assert beam.resolve(GridLayout(ROOM, 5, 5)).width == pytest.approx(1.2)
    pinned = BeamSpec(width=0.25)
    assert pinned.resolve(GridLayout(ROOM, 5, 5)).width == 0.25


def test_noise_free_trial_is_exact():
    sc = _scenario(
        sigma_t=0.0,
        sigma_d=0.0,
        eta_d=1.0,
        mu_b=0.0,
        sigma_p=0.0,
        placement=GridCenterPlacement(8, 8),
        seq_duration=1e-4,
    )
    result = run_trial(sc, trial_seed(0, 0, 0))
    assert not result.failed
    assert result.abs_error == 0.0
    assert result.shift_correct is True
    assert result.selected_grid == (8, 8)


def test_zero_reception_always_fails():
    sc = _scenario(p_recept_override=0.0, mu_b=0.0, seq_duration=1e-5)
    for t in range(10):
        result = run_trial(sc, trial_seed(3, 0, t))
        assert result.failed
        assert result.abs_error is None
        assert result.shift_correct is None


def test_trial_determinism():
    sc = _scenario(seq_duration=5e-5)
    a = run_trial(sc, trial_seed(7, 0, 0))
    b = run_trial(sc, trial_seed(7, 0, 0))
    assert a == b
    c = run_trial(sc, trial_seed(7, 0, 1))
    assert a != c


def test_fixed_placement_reception_probability():
    # on-axis user: p = 2 r^2 / w^2 with w = 0.4
    sc = _scenario(
        sigma_p=0.0,
        placement=FixedPlacement(Vec3(0.0, 0.0, -2.0)),
        seq_duration=1e-5,
    )
    result = run_trial(sc, trial_seed(1, 0, 0))
    assert result.selected_grid == (8, 8)
    assert result.p_recept == pytest.approx(0.005, rel=1e-9)


def _fake_results(flags, errors=None, shifts=None, matched=12):
    errors = errors or [None if f else 1e-12 for f in flags]
    shifts = shifts or [None if f else True for f in flags]
    return [
        TrialResult(
            failed=f,
            abs_error=e,
            shift_correct=s,
            matched_count=matched,
            selected_grid=(1, 1),
            p_recept=0.005,
        )
        for f, e, s in zip(flags, errors, shifts)
    ]


def test_failure_probability_counting():
    assert failure_probability(_fake_results([True] * 4)) == 1.0
    assert failure_probability(_fake_results([False] * 4)) == 0.0
    assert failure_probability(_fake_results([True] * 3 + [False] * 7)) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        failure_probability([])


def test_mean_abs_error_counting():
    results = _fake_results([False, False], errors=[10e-12, 20e-12])
    assert mean_abs_error(results) == pytest.approx(15e-12, rel=1e-12)
    single = _fake_results([False], errors=[7e-12])
    assert mean_abs_error(single) == pytest.approx(7e-12, rel=1e-12)
    with pytest.raises(EstimationError):
        mean_abs_error(_fake_results([True, True]))


def test_mean_abs_error_matches_independent_accumulator():
    rng = np.random.default_rng(12)
    errors = rng.uniform(1e-12, 1e-9, size=500)
    results = _fake_results([False] * 500, errors=list(errors))
    assert mean_abs_error(results) == pytest.approx(float(np.mean(errors)), rel=1e-12)


def test_scenario_for_value_axes():
    base = _scenario()
    assert scenario_for_value(base, "seq_duration", 1e-4).slot_count == 10_000
    grid = scenario_for_value(base, "grid_size", 5)
    assert grid.layout.nx == 5 and grid.layout.ny == 5
    assert grid.beam.resolve(grid.layout).width == pytest.approx(1.2)
    assert scenario_for_value(base, "mu_t", 2.5).mu_t == 2.5
    with pytest.raises(ValueError):
        scenario_for_value(base, "bogus", 1)


def test_sweep_spec_validation():
    base = _scenario()
    with pytest.raises(ValueError):
        SweepSpec(axis="bogus", values=(1,), trials=1, base=base, master_seed=0)
    with pytest.raises(ValueError):
        SweepSpec(axis="mu_t", values=(), trials=1, base=base, master_seed=0)
    with pytest.raises(ValueError):
        SweepSpec(axis="mu_t", values=(1.0,), trials=0, base=base, master_seed=0)


def _small_spec(values=(1e-5, 5e-5), trials=20, seed=11):
    base = _scenario()
    return SweepSpec(axis="seq_duration", values=values, trials=trials, base=base, master_seed=seed)


def test_adding_sweep_points_preserves_existing_rows():
    short = run_sweep(_small_spec(values=(1e-5,)))
    longer = run_sweep(_small_spec(values=(1e-5, 5e-5)))
    assert short[0] == longer[0]


def test_parallel_and_serial_sweeps_agree():
    spec = _small_spec()
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert serial == parallel


def test_failure_probability_consistent_across_master_seeds():
    spec_a = _small_spec(values=(2e-5,), trials=150, seed=1)
    spec_b = _small_spec(values=(2e-5,), trials=150, seed=2)
    pa = run_sweep(spec_a)[0].failure_prob
    pb = run_sweep(spec_b)[0].failure_prob
    se = math.sqrt(pa * (1 - pa) / 150 + pb * (1 - pb) / 150)
    assert abs(pa - pb) <= 3.0 * max(se, 0.02)


def test_mean_error_decreases_with_duration():
    spec = SweepSpec(
        axis="seq_duration",
        values=(1e-4, 1e-3),
        trials=60,
        base=_scenario(mu_b=0.0),
        master_seed=4,
    )
    rows = run_sweep(spec, workers=2)
    assert rows[0].mean_error > rows[1].mean_error


def test_aggregate_handles_all_failed_point():
    base = _scenario(p_recept_override=0.0, mu_b=0.0, seq_duration=1e-5)
    spec = SweepSpec(axis="mu_t", values=(0.5,), trials=5, base=base, master_seed=0)
    row = run_sweep(spec)[0]
    assert row.failure_prob == 1.0
    assert row.mean_error is None
    assert row.shift_accuracy is None
    assert row.err_ci is None
