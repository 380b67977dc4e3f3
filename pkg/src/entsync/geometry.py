"""Room and grid geometry for a ceiling-mounted grid-of-beams transmitter.

The transmitter sits at the origin of a right-handed global frame. The
floor lies at z = -H and beams point at the centers of rectangular grid
cells drawn on the coverage plane z = -H + h_cov. All functions are pure;
the only randomness lives in :func:`perturb_position`, which takes an
explicit generator handle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Vec3",
    "RoomSpec",
    "GridLayout",
    "PositionNoise",
    "RotationMatrix",
    "grid_center",
    "beam_direction",
    "perturb_position",
    "select_grid",
    "rotation_to_beam_frame",
    "to_beam_frame",
]

# Reference-vector fallback kicks in when the beam axis is this close to
# vertical (in |dot| with z-hat). Anything well above float noise works.
PARALLEL_EPS = 1e-6

ORTHONORMAL_TOL = 1e-12


@dataclass(frozen=True)
class Vec3:
    """Point or direction in the global frame, metres."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"Vec3 components must be finite, got {(self.x, self.y, self.z)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "Vec3":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class RoomSpec:
    """Rectangular room dimensions and the optical coverage height, metres."""

    length: float
    width: float
    height: float
    coverage_height: float

    def __post_init__(self) -> None:
        for name in ("length", "width", "height"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"room {name} must be > 0")
        if not 0.0 < self.coverage_height < self.height:
            raise ValueError("coverage_height must lie strictly between 0 and the room height")


@dataclass(frozen=True)
class GridLayout:
    """Partition of the coverage plane into nx-by-ny equal cells."""

    room: RoomSpec
    nx: int
    ny: int

    def __post_init__(self) -> None:
        for name in ("nx", "ny"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    @property
    def dx(self) -> float:
        return self.room.length / self.nx

    @property
    def dy(self) -> float:
        return self.room.width / self.ny

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def plane_z(self) -> float:
        """z coordinate of the coverage plane."""
        return -self.room.height + self.room.coverage_height


@dataclass(frozen=True)
class PositionNoise:
    """Per-axis standard deviation of the user position estimate, metres."""

    sigma_p: float

    def __post_init__(self) -> None:
        if self.sigma_p < 0.0:
            raise ValueError("sigma_p must be >= 0")


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """Global-to-beam-frame rotation; rows are the beam frame axes."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation matrix must be 3x3, got shape {m.shape}")
        err = float(np.max(np.abs(m @ m.T - np.eye(3))))
        if err >= ORTHONORMAL_TOL:
            raise ValueError(f"rows are not orthonormal (max deviation {err:.3e})")
        det = float(np.linalg.det(m))
        if abs(det - 1.0) >= ORTHONORMAL_TOL:
            raise ValueError(f"rotation must be right-handed (det {det!r})")
        object.__setattr__(self, "matrix", m)

    @property
    def row_x(self) -> Vec3:
        return Vec3.from_array(self.matrix[0])

    @property
    def row_y(self) -> Vec3:
        return Vec3.from_array(self.matrix[1])

    @property
    def row_z(self) -> Vec3:
        return Vec3.from_array(self.matrix[2])


def grid_center(layout: GridLayout, i: int, j: int) -> Vec3:
    """Center of cell (i, j) on the coverage plane, 1-based indices."""
    if not (1 <= i <= layout.nx and 1 <= j <= layout.ny):
        raise ValueError(f"cell index ({i}, {j}) outside 1..{layout.nx} x 1..{layout.ny}")
    x = (i - 0.5) * layout.dx - layout.room.length / 2.0
    y = (j - 0.5) * layout.dy - layout.room.width / 2.0
    return Vec3(x, y, layout.plane_z)


def beam_direction(layout: GridLayout, i: int, j: int) -> Vec3:
    """Direction from the transmitter (the origin) to the center of cell (i, j)."""
    return grid_center(layout, i, j)


def perturb_position(p: Vec3, noise: PositionNoise, rng: np.random.Generator) -> Vec3:
    """Add independent zero-mean Gaussian noise to each coordinate.

    Draws exactly three normal variates regardless of sigma_p, so the
    consumed random stream does not depend on the noise level.
    """
    offsets = rng.normal(0.0, noise.sigma_p, size=3)
    return Vec3.from_array(p.as_array() + offsets)


def _cell_grid(layout: GridLayout):
    """All cell indices and beam directions in (i, j)-lexicographic order."""
    i = np.repeat(np.arange(1, layout.nx + 1), layout.ny)
    j = np.tile(np.arange(1, layout.ny + 1), layout.nx)
    x = (i - 0.5) * layout.dx - layout.room.length / 2.0
    y = (j - 0.5) * layout.dy - layout.room.width / 2.0
    z = np.full(i.shape, layout.plane_z)
    return i, j, np.stack([x, y, z], axis=1)


def select_grid(layout: GridLayout, est_pos: Vec3) -> tuple[int, int]:
    """Cell whose beam axis is angularly closest to the estimated user direction.

    Ties are broken toward the smallest i, then smallest j.
    """
    u = est_pos.as_array()
    u_norm = float(np.linalg.norm(u))
    if u_norm == 0.0:
        raise ValueError("estimated position coincides with the transmitter; direction undefined")
    i, j, dirs = _cell_grid(layout)
    cos = (dirs @ u) / (np.linalg.norm(dirs, axis=1) * u_norm)
    k = int(np.argmax(cos))
    return int(i[k]), int(j[k])


def rotation_to_beam_frame(direction: Vec3) -> RotationMatrix:
    """Orthonormal frame whose z axis points along the given beam direction."""
    d = direction.as_array()
    n = float(np.linalg.norm(d))
    if n == 0.0:
        raise ValueError("beam direction must be nonzero")
    z_axis = d / n
    if abs(z_axis[2]) > 1.0 - PARALLEL_EPS:
        v_ref = np.array([1.0, 0.0, 0.0])
    else:
        v_ref = np.array([0.0, 0.0, 1.0])
    x_axis = np.cross(v_ref, z_axis)
    x_axis = x_axis / np.linalg.norm(x_axis)
    y_axis = np.cross(z_axis, x_axis)
    return RotationMatrix(np.stack([x_axis, y_axis, z_axis]))


def to_beam_frame(rot: RotationMatrix, p: Vec3) -> Vec3:
    """Express a global point in the beam frame (transmitter at the origin).

    The z component is the axial distance along the beam; x and y are the
    transverse offsets from the beam axis.
    """
    return Vec3.from_array(rot.matrix @ p.as_array())
