"""JSON configuration documents with explicit unit suffixes.

Every duration or length key names its unit (``sigma_d_ps``, ``r_a`` style
keys are avoided in favor of ``radius_m``), values are converted to SI on
load, and unknown keys are rejected with their full path. Missing keys fall
back to the built-in defaults. A document describes a single scenario; an
optional ``sweep`` block turns it into a sweep specification.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .beam_optics import Aperture
from .errors import ConfigError
from .geometry import GridLayout, RoomSpec, Vec3
from .sim_harness import (
    BeamSpec,
    FixedPlacement,
    GridCenterPlacement,
    Scenario,
    SweepSpec,
    UniformPlacement,
)
from .sync_estimator import ShiftWindow

__all__ = [
    "DEFAULT_SEED",
    "DEFAULT_TRIALS",
    "default_document",
    "load_document",
    "scenario_from_document",
    "sweep_from_document",
    "document_from_scenario",
    "document_from_sweep",
    "load_config",
    "save_config",
]

# Exact powers of ten used as scale factors; loading divides, saving
# multiplies, so round trips through the document stay bit-stable for the
# short decimal values used in practice.
_US = 1e6
_NS = 1e9
_PS = 1e12
_NM = 1e9

DEFAULT_SEED = 1
DEFAULT_TRIALS = 200

_DEFAULTS = {
    "seed": DEFAULT_SEED,
    "trials": DEFAULT_TRIALS,
    "room": {"length_m": 6.0, "width_m": 6.0, "height_m": 3.0, "coverage_height_m": 1.0},
    "grid": {"nx": 15, "ny": 15},
    "beam": {"mode": "direct_width", "width_m": None, "waist_m": None, "wavelength_nm": 1550.0},
    "aperture": {"radius_m": 0.02},
    "source": {"mu_t": 0.5, "sigma_t_ps": 50.0, "slot_duration_ns": 10.0},
    "detector": {"sigma_d_ps": 200.0, "eta_d": 0.6, "eta_r": 1.0},
    "background": {"mu_b": 5e-06},
    "position_error": {"sigma_p_m": 0.06},
    "placement": {"policy": "uniform", "point_m": None, "cell": None},
    "shift_window": {"l_min": -50, "l_max": 50},
    "seq_duration_us": 1000.0,
    "reception_override": None,
    "sweep": None,
}

_SWEEP_VALUE_KEYS = {"seq_duration": "values_us", "grid_size": "values", "mu_t": "values"}


def default_document() -> dict:
    """Fully explicit default configuration document."""
    return copy.deepcopy(_DEFAULTS)


def _require_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected an object, got {type(node).__name__}")
    return node


def _reject_unknown(node: dict, allowed, path: str) -> None:
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(repr(k) for k in unknown)}")


def _number(
    node: dict,
    key: str,
    path: str,
    default,
    minimum=None,
    maximum=None,
    exclusive_min: bool = False,
    allow_none: bool = False,
):
    value = node.get(key, default)
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"{path}.{key}: value required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    value = float(value)
    if minimum is not None:
        if exclusive_min and not value > minimum:
            raise ConfigError(f"{path}.{key}: must be > {minimum}")
        if not exclusive_min and value < minimum:
            raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{path}.{key}: must be <= {maximum}")
    return value


def _integer(node: dict, key: str, path: str, default, minimum=None):
    value = node.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}")
    return value


def load_document(path) -> dict:
    """Read, validate, and default-fill a configuration file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return validate_document(raw)


def validate_document(raw) -> dict:
    """Validate a parsed document and fill in defaults."""
    doc = _require_mapping(raw, "config")
    _reject_unknown(doc, _DEFAULTS, "config")
    merged = default_document()
    for key, value in doc.items():
        if isinstance(_DEFAULTS.get(key), dict) and value is not None:
            block = _require_mapping(value, key)
            _reject_unknown(block, _DEFAULTS[key], key)
            merged[key].update(block)
        else:
            merged[key] = copy.deepcopy(value)
    # Structural checks happen in the builders below; run them now so a bad
    # document fails on load rather than first use.
    scenario_from_document(merged)
    sweep_from_document(merged)
    return merged


def _placement_from(node: dict):
    path = "placement"
    policy = node.get("policy", "uniform")
    if policy == "uniform":
        return UniformPlacement()
    if policy == "fixed":
        point = node.get("point_m")
        if not isinstance(point, (list, tuple)) or len(point) != 3:
            raise ConfigError(f"{path}.point_m: fixed placement needs [x, y, z] metres")
        try:
            return FixedPlacement(Vec3(float(point[0]), float(point[1]), float(point[2])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.point_m: {exc}") from exc
    if policy == "grid_center":
        cell = node.get("cell")
        if not isinstance(cell, (list, tuple)) or len(cell) != 2:
            raise ConfigError(f"{path}.cell: grid_center placement needs [i, j]")
        return GridCenterPlacement(int(cell[0]), int(cell[1]))
    raise ConfigError(f"{path}.policy: expected uniform, fixed, or grid_center, got {policy!r}")


def scenario_from_document(doc: dict) -> Scenario:
    """Build the scenario described by a validated document."""
    room_node = doc["room"]
    room = RoomSpec(
        length=_number(room_node, "length_m", "room", 6.0, minimum=0.0, exclusive_min=True),
        width=_number(room_node, "width_m", "room", 6.0, minimum=0.0, exclusive_min=True),
        height=_number(room_node, "height_m", "room", 3.0, minimum=0.0, exclusive_min=True),
        coverage_height=_number(room_node, "coverage_height_m", "room", 1.0, minimum=0.0, exclusive_min=True),
    )
    try:
        layout = GridLayout(
            room,
            _integer(doc["grid"], "nx", "grid", 15, minimum=1),
            _integer(doc["grid"], "ny", "grid", 15, minimum=1),
        )
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    beam_node = doc["beam"]
    mode = beam_node.get("mode", "direct_width")
    if mode not in ("direct_width", "propagated"):
        raise ConfigError(f"beam.mode: expected direct_width or propagated, got {mode!r}")
    width = _number(beam_node, "width_m", "beam", None, minimum=0.0, exclusive_min=True, allow_none=True)
    wavelength_nm = _number(beam_node, "wavelength_nm", "beam", 1550.0, minimum=0.0, exclusive_min=True, allow_none=True)
    waist = _number(beam_node, "waist_m", "beam", None, minimum=0.0, exclusive_min=True, allow_none=True)
    if mode == "propagated" and (waist is None or wavelength_nm is None):
        raise ConfigError("beam: propagated mode requires waist_m and wavelength_nm")
    beam = BeamSpec(
        mode=mode,
        width=width,
        waist=waist,
        wavelength=None if wavelength_nm is None else wavelength_nm / _NM,
    )

    aperture = Aperture(_number(doc["aperture"], "radius_m", "aperture", 0.02, minimum=0.0, exclusive_min=True))

    source_node = doc["source"]
    mu_t = _number(source_node, "mu_t", "source", 0.5, minimum=0.0)
    sigma_t = _number(source_node, "sigma_t_ps", "source", 50.0, minimum=0.0) / _PS
    slot_duration = _number(source_node, "slot_duration_ns", "source", 10.0, minimum=0.0, exclusive_min=True) / _NS

    det_node = doc["detector"]
    sigma_d = _number(det_node, "sigma_d_ps", "detector", 200.0, minimum=0.0) / _PS
    eta_d = _number(det_node, "eta_d", "detector", 0.6, minimum=0.0, maximum=1.0)
    eta_r = _number(det_node, "eta_r", "detector", 1.0, minimum=0.0, maximum=1.0)

    mu_b = _number(doc["background"], "mu_b", "background", 5e-06, minimum=0.0)
    sigma_p = _number(doc["position_error"], "sigma_p_m", "position_error", 0.06, minimum=0.0)

    placement = _placement_from(_require_mapping(doc["placement"], "placement"))

    window_node = doc["shift_window"]
    try:
        window = ShiftWindow(
            _integer(window_node, "l_min", "shift_window", -50),
            _integer(window_node, "l_max", "shift_window", 50),
        )
    except ValueError as exc:
        raise ConfigError(f"shift_window: {exc}") from exc

    seq_duration = _number(doc, "seq_duration_us", "config", 1000.0, minimum=0.0, exclusive_min=True) / _US
    override = _number(doc, "reception_override", "config", None, minimum=0.0, maximum=1.0, allow_none=True)

    try:
        return Scenario(
            layout=layout,
            beam=beam,
            aperture=aperture,
            mu_t=mu_t,
            sigma_t=sigma_t,
            slot_duration=slot_duration,
            sigma_d=sigma_d,
            eta_d=eta_d,
            eta_r=eta_r,
            mu_b=mu_b,
            sigma_p=sigma_p,
            placement=placement,
            window=window,
            seq_duration=seq_duration,
            p_recept_override=override,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_from_document(doc: dict) -> SweepSpec | None:
    """Build the sweep described by a validated document, if any."""
    node = doc.get("sweep")
    if node is None:
        return None
    node = _require_mapping(node, "sweep")
    _reject_unknown(node, ("axis", "values", "values_us", "trials_per_point"), "sweep")
    axis = node.get("axis")
    if axis not in _SWEEP_VALUE_KEYS:
        raise ConfigError(f"sweep.axis: expected one of {sorted(_SWEEP_VALUE_KEYS)}, got {axis!r}")
    value_key = _SWEEP_VALUE_KEYS[axis]
    for other in set(_SWEEP_VALUE_KEYS.values()) - {value_key}:
        if node.get(other) is not None:
            raise ConfigError(f"sweep.{other}: not valid for axis {axis!r} (use {value_key!r})")
    raw_values = node.get(value_key)
    if not isinstance(raw_values, (list, tuple)) or not raw_values:
        raise ConfigError(f"sweep.{value_key}: expected a non-empty list")

    values = []
    for pos, item in enumerate(raw_values):
        where = f"sweep.{value_key}[{pos}]"
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {item!r}")
        if axis == "seq_duration":
            if not item > 0:
                raise ConfigError(f"{where}: must be > 0")
            values.append(float(item) / _US)
        elif axis == "grid_size":
            if not isinstance(item, int) or item < 1:
                raise ConfigError(f"{where}: must be a positive integer")
            values.append(item)
        else:
            if item < 0:
                raise ConfigError(f"{where}: must be >= 0")
            values.append(float(item))

    trials = _integer(node, "trials_per_point", "sweep", _integer(doc, "trials", "config", DEFAULT_TRIALS, minimum=1), minimum=1)
    seed = _integer(doc, "seed", "config", DEFAULT_SEED, minimum=0)
    try:
        return SweepSpec(
            axis=axis,
            values=tuple(values),
            trials=trials,
            base=scenario_from_document(doc),
            master_seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from exc


def document_seed(doc: dict) -> int:
    return _integer(doc, "seed", "config", DEFAULT_SEED, minimum=0)


def document_trials(doc: dict) -> int:
    return _integer(doc, "trials", "config", DEFAULT_TRIALS, minimum=1)


def _placement_block(placement) -> dict:
    if isinstance(placement, UniformPlacement):
        return {"policy": "uniform", "point_m": None, "cell": None}
    if isinstance(placement, FixedPlacement):
        p = placement.point
        return {"policy": "fixed", "point_m": [p.x, p.y, p.z], "cell": None}
    return {"policy": "grid_center", "point_m": None, "cell": [placement.i, placement.j]}


def document_from_scenario(scenario: Scenario, seed: int = DEFAULT_SEED, trials: int = DEFAULT_TRIALS) -> dict:
    """Serialize a scenario back into a fully explicit document."""
    room = scenario.layout.room
    beam = scenario.beam
    return {
        "seed": seed,
        "trials": trials,
        "room": {
            "length_m": room.length,
            "width_m": room.width,
            "height_m": room.height,
            "coverage_height_m": room.coverage_height,
        },
        "grid": {"nx": scenario.layout.nx, "ny": scenario.layout.ny},
        "beam": {
            "mode": beam.mode,
            "width_m": beam.width,
            "waist_m": beam.waist,
            "wavelength_nm": None if beam.wavelength is None else beam.wavelength * _NM,
        },
        "aperture": {"radius_m": scenario.aperture.radius},
        "source": {
            "mu_t": scenario.mu_t,
            "sigma_t_ps": scenario.sigma_t * _PS,
            "slot_duration_ns": scenario.slot_duration * _NS,
        },
        "detector": {
            "sigma_d_ps": scenario.sigma_d * _PS,
            "eta_d": scenario.eta_d,
            "eta_r": scenario.eta_r,
        },
        "background": {"mu_b": scenario.mu_b},
        "position_error": {"sigma_p_m": scenario.sigma_p},
        "placement": _placement_block(scenario.placement),
        "shift_window": {"l_min": scenario.window.l_min, "l_max": scenario.window.l_max},
        "seq_duration_us": scenario.seq_duration * _US,
        "reception_override": scenario.p_recept_override,
        "sweep": None,
    }


def document_from_sweep(spec: SweepSpec) -> dict:
    """Serialize a sweep specification back into a document."""
    doc = document_from_scenario(spec.base, seed=spec.master_seed, trials=spec.trials)
    value_key = _SWEEP_VALUE_KEYS[spec.axis]
    if spec.axis == "seq_duration":
        values = [v * _US for v in spec.values]
    elif spec.axis == "grid_size":
        values = [int(v) for v in spec.values]
    else:
        values = list(spec.values)
    doc["sweep"] = {"axis": spec.axis, value_key: values, "trials_per_point": spec.trials}
    return doc


def load_config(path) -> Scenario | SweepSpec:
    """Load a configuration file into a scenario or, with a sweep block, a sweep."""
    doc = load_document(path)
    sweep = sweep_from_document(doc)
    return sweep if sweep is not None else scenario_from_document(doc)


def save_config(obj: Scenario | SweepSpec, path) -> None:
    """Write a scenario or sweep back out as a configuration document."""
    if isinstance(obj, SweepSpec):
        doc = document_from_sweep(obj)
    else:
        doc = document_from_scenario(obj)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
