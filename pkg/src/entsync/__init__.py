"""Seedable Monte Carlo simulator for entanglement-assisted clock
synchronization over an indoor grid-of-beams optical wireless link.

The package models a ceiling-mounted pair source steering one photon of
each pair toward the user's estimated grid cell while timestamping the
retained photon, and recovers the clock offset from the sparse tri-state
detection records on both sides.
"""

from .beam_optics import (
    Aperture,
    BeamModel,
    beam_width_at,
    reception_prob_approx,
    reception_prob_exact,
    spatial_density,
)
from .config import default_document, load_config, save_config
from .errors import ConfigError, EstimationError, QuadratureError
from .geometry import (
    GridLayout,
    PositionNoise,
    RoomSpec,
    RotationMatrix,
    Vec3,
    beam_direction,
    grid_center,
    perturb_position,
    rotation_to_beam_frame,
    select_grid,
    to_beam_frame,
)
from .kernels import BACKEND as kernel_backend
from .photon_channel import (
    DetectorConfig,
    LinkConfig,
    RefSlot,
    ReferenceSequence,
    SlotStatus,
    SourceConfig,
    TruthOffset,
    UserSequence,
    UserSlot,
    effective_signal_rate,
    simulate_reference_sequence,
    simulate_user_sequence,
)
from .sim_harness import (
    BeamSpec,
    FixedPlacement,
    GridCenterPlacement,
    Scenario,
    SweepPointResult,
    SweepSpec,
    TrialResult,
    UniformPlacement,
    failure_probability,
    mean_abs_error,
    run_sweep,
    run_trial,
)
from .sync_estimator import (
    ShiftWindow,
    SyncResult,
    ValidView,
    best_shift,
    estimate_offset,
    extract_valid,
    matched_indices,
    matching_score,
    score_profile,
    synchronize,
)

__version__ = "0.1.0"
