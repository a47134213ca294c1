"""Transverse grid, complex fields, momentum-ladder states and field I/O.

Arrays are indexed [iz, iy]: axis 0 runs along z, axis 1 along y, so a
C-order flattening walks y fastest.  Grid axes are FFT-periodic (cell
centers, no endpoint duplication) and are precomputed both in meters and
in internal recoil-units of length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import SimulationError
from .units import UnitSystem

DUMP_SCHEMA_VERSION = 1

# scipy.fft worker count used by every transform in the package.  One
# worker keeps runs bitwise reproducible; more workers stay deterministic
# to rounding because each 1D line is still summed in a fixed order.
_FFT_WORKERS = 1


def set_fft_workers(n: int) -> None:
    global _FFT_WORKERS
    if n < 1:
        raise ValueError("fft worker count must be >= 1")
    _FFT_WORKERS = int(n)


def fft_workers() -> int:
    return _FFT_WORKERS


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


class Grid2D:
    """Uniform periodic (y, z) grid with precomputed spectral axes.

    Args:
        n_y, n_z: sample counts, powers of two.
        extent_y_m, extent_z_m: physical box sides in meters.
        units: recoil unit system used for the internal axes.

    Attributes (all arrays read-only):
        y_m, z_m: 1D axes in meters, centered on zero.
        y, z: the same axes in internal lengths.
        mesh_y, mesh_z: 2D meshes, shape (n_z, n_y), internal lengths.
        k_y, k_z: angular wavenumbers per internal length (FFT order).
        mesh_ksq: k_y^2 + k_z^2 mesh.
        cell_area: internal area element dy * dz.
        pitch_y_m, pitch_z_m: sample spacing in meters.
    """

    def __init__(self, n_y: int, n_z: int, extent_y_m: float, extent_z_m: float,
                 units: UnitSystem):
        if not _is_power_of_two(n_y) or not _is_power_of_two(n_z):
            raise ValueError(f"grid sizes must be powers of two, got {n_y} x {n_z}")
        if extent_y_m <= 0.0 or extent_z_m <= 0.0:
            raise ValueError("grid extents must be positive")
        self.n_y = int(n_y)
        self.n_z = int(n_z)
        self.extent_y_m = float(extent_y_m)
        self.extent_z_m = float(extent_z_m)
        self.units = units

        self.pitch_y_m = self.extent_y_m / self.n_y
        self.pitch_z_m = self.extent_z_m / self.n_z
        self.y_m = (np.arange(self.n_y) - self.n_y // 2) * self.pitch_y_m
        self.z_m = (np.arange(self.n_z) - self.n_z // 2) * self.pitch_z_m

        scale = 1.0 / units.length_m
        self.y = self.y_m * scale
        self.z = self.z_m * scale
        self.dy = self.pitch_y_m * scale
        self.dz = self.pitch_z_m * scale
        self.cell_area = self.dy * self.dz

        self.mesh_z, self.mesh_y = np.meshgrid(self.z, self.y, indexing="ij")
        ky = 2.0 * math.pi * np.fft.fftfreq(self.n_y, d=self.dy)
        kz = 2.0 * math.pi * np.fft.fftfreq(self.n_z, d=self.dz)
        self.k_y = ky
        self.k_z = kz
        mesh_kz, mesh_ky = np.meshgrid(kz, ky, indexing="ij")
        self.mesh_ky = mesh_ky
        self.mesh_kz = mesh_kz
        self.mesh_ksq = mesh_ky**2 + mesh_kz**2

        for arr in (self.y_m, self.z_m, self.y, self.z, self.mesh_y, self.mesh_z,
                    self.k_y, self.k_z, self.mesh_ky, self.mesh_kz, self.mesh_ksq):
            arr.flags.writeable = False

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_z, self.n_y)

    def same_geometry(self, other: "Grid2D") -> bool:
        return (self.n_y == other.n_y and self.n_z == other.n_z
                and self.extent_y_m == other.extent_y_m
                and self.extent_z_m == other.extent_z_m)

    def padded(self, factor: float) -> "Grid2D":
        """Grid with >= factor times the extent at identical spacing."""
        if factor < 1.0:
            raise ValueError("padding factor must be >= 1")
        n_y = self.n_y
        n_z = self.n_z
        while n_y < self.n_y * factor:
            n_y *= 2
        while n_z < self.n_z * factor:
            n_z *= 2
        return Grid2D(n_y, n_z, self.pitch_y_m * n_y, self.pitch_z_m * n_z, self.units)

    def __repr__(self):
        return (f"Grid2D({self.n_y}x{self.n_z}, "
                f"{self.extent_y_m * 1e6:.1f}x{self.extent_z_m * 1e6:.1f} um)")


@dataclass(frozen=True)
class TransverseField:
    """One complex field on a Grid2D.

    values has shape (n_z, n_y).  For atomic fields the normalization
    convention is sum |psi|^2 * cell_area = 1 (a unit fraction); optical
    mode fields are unit-peak instead.  values is stored read-only; every
    operation returns a new field.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise SimulationError(
                f"field shape {vals.shape} does not match grid {self.grid.shape}")
        if not vals.flags.owndata or vals.flags.writeable:
            vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.grid.cell_area)

    def normalized(self) -> "TransverseField":
        n = self.norm()
        if n <= 0.0:
            raise SimulationError("cannot normalize an empty field")
        return TransverseField(self.grid, self.values / math.sqrt(n))


class LadderState:
    """Coupled momentum-order fields psi_n, n in [-n_max, n_max].

    Order n carries axial momentum 2 n hbar k.  Components are stored as a
    stacked (2 n_max + 1, n_z, n_y) complex array; component(n) exposes a
    single order as a TransverseField.  axial_shift_m, when set by time of
    flight, records each order's axial displacement for the separation
    bookkeeping used by imaging.
    """

    def __init__(self, grid: Grid2D, n_max: int, values: np.ndarray | None = None,
                 axial_shift_m: dict[int, float] | None = None):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.grid = grid
        self.n_max = int(n_max)
        k = 2 * self.n_max + 1
        if values is None:
            values = np.zeros((k,) + grid.shape, dtype=np.complex128)
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (k,) + grid.shape:
            raise SimulationError(
                f"ladder shape {values.shape} does not match "
                f"({k},) + {grid.shape}")
        self.values = values
        self.axial_shift_m = dict(axial_shift_m) if axial_shift_m else None

    @classmethod
    def from_single_order(cls, field: TransverseField, n_max: int,
                          order: int = 0) -> "LadderState":
        state = cls(field.grid, n_max)
        state.values[state.index(order)] = field.values
        return state

    @property
    def orders(self) -> range:
        return range(-self.n_max, self.n_max + 1)

    def index(self, n: int) -> int:
        if not -self.n_max <= n <= self.n_max:
            raise SimulationError(f"order {n} outside ladder (n_max={self.n_max})")
        return n + self.n_max

    def component(self, n: int) -> TransverseField:
        return TransverseField(self.grid, self.values[self.index(n)])

    def copy(self) -> "LadderState":
        return LadderState(self.grid, self.n_max, self.values.copy(),
                           self.axial_shift_m)

    def total_density(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=0)

    def population(self, n: int) -> float:
        return float(np.sum(np.abs(self.values[self.index(n)]) ** 2)
                     * self.grid.cell_area)


def field_norm(state):
    """Populations of a state.

    For a TransverseField returns the scalar norm integral.  For a
    LadderState returns (per-order dict, total).
    """
    if isinstance(state, TransverseField):
        return state.norm()
    if isinstance(state, LadderState):
        pops = {n: state.population(n) for n in state.orders}
        return pops, float(sum(pops.values()))
    raise SimulationError(f"field_norm expects a field or ladder state, got {type(state)!r}")


def spectral_transform(field: TransverseField, direction: str) -> TransverseField:
    """Unitary 2D DFT of a field ('forward') or its inverse ('inverse').

    Uses the orthonormal normalization, so sum |psi|^2 is preserved to
    rounding and forward followed by inverse is the identity.
    """
    if direction == "forward":
        out = scipy.fft.fft2(field.values, norm="ortho", workers=_FFT_WORKERS)
    elif direction == "inverse":
        out = scipy.fft.ifft2(field.values, norm="ortho", workers=_FFT_WORKERS)
    else:
        raise SimulationError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return TransverseField(field.grid, out)


def _fft2_stack(values: np.ndarray) -> np.ndarray:
    # Orthonormal so Parseval sums need no grid-size factors.
    return scipy.fft.fft2(values, axes=(-2, -1), norm="ortho",
                          workers=_FFT_WORKERS)


def _ifft2_stack(values: np.ndarray) -> np.ndarray:
    return scipy.fft.ifft2(values, axes=(-2, -1), norm="ortho",
                           workers=_FFT_WORKERS)


def bilinear_sample(values: np.ndarray, y_axis: np.ndarray, z_axis: np.ndarray,
                    y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of values[iz, iy] at points (y, z).

    Axes must be uniform ascending. Points outside the axes raise, since
    every caller is expected to keep its loops inside the grid.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    dy = y_axis[1] - y_axis[0]
    dz = z_axis[1] - z_axis[0]
    fy = (y - y_axis[0]) / dy
    fz = (z - z_axis[0]) / dz
    # Tolerate float rounding for points sitting exactly on the last sample.
    tol = 1e-9
    if (fy.min() < -tol or fy.max() > len(y_axis) - 1 + tol
            or fz.min() < -tol or fz.max() > len(z_axis) - 1 + tol):
        raise SimulationError("sample points fall outside the grid")
    fy = np.clip(fy, 0.0, len(y_axis) - 1)
    fz = np.clip(fz, 0.0, len(z_axis) - 1)
    iy0 = np.clip(np.floor(fy).astype(int), 0, len(y_axis) - 2)
    iz0 = np.clip(np.floor(fz).astype(int), 0, len(z_axis) - 2)
    ty = fy - iy0
    tz = fz - iz0
    v00 = values[iz0, iy0]
    v01 = values[iz0, iy0 + 1]
    v10 = values[iz0 + 1, iy0]
    v11 = values[iz0 + 1, iy0 + 1]
    return ((1 - tz) * ((1 - ty) * v00 + ty * v01)
            + tz * ((1 - ty) * v10 + ty * v11))


# ---------------------------------------------------------------------------
# Binary field dump: little-endian float64 (re, im) pairs, row-major with y
# fastest, plus a key=value text sidecar carrying grid geometry and units.
# ---------------------------------------------------------------------------

def _sidecar_path(path: str) -> str:
    return str(path) + ".meta"


def save_field(field: TransverseField, path: str, units: UnitSystem,
               component_index: int | None = None, label: str = "") -> None:
    """Write a field to `path` (binary) and `path`.meta (text sidecar).

    Values are stored in SI units of 1/m (internal amplitudes times k) so
    that the file is self-describing: sum |psi|^2 dy dz over the stated
    extents is the stored fraction of the cloud.
    """
    grid = field.grid
    si_values = field.values * units.wavenumber_per_m
    pairs = np.empty(grid.shape + (2,), dtype="<f8")
    pairs[..., 0] = si_values.real
    pairs[..., 1] = si_values.imag
    with open(path, "wb") as f:
        f.write(pairs.tobytes(order="C"))
    meta = [
        f"schema_version={DUMP_SCHEMA_VERSION}",
        "kind=field_dump",
        "dtype=float64_le_re_im_pairs",
        "layout=row_major_y_fastest",
        "value_units=m^-1",
        f"n_y={grid.n_y}",
        f"n_z={grid.n_z}",
        f"extent_y_m={grid.extent_y_m!r}",
        f"extent_z_m={grid.extent_z_m!r}",
        f"length_unit_m={units.length_m!r}",
        f"component_index={'' if component_index is None else component_index}",
        f"label={label}",
    ]
    with open(_sidecar_path(path), "w") as f:
        f.write("\n".join(meta) + "\n")


def read_sidecar(path: str) -> dict[str, str]:
    meta = {}
    with open(_sidecar_path(path)) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            meta[key] = value
    return meta


def load_field(path: str, units: UnitSystem) -> tuple[TransverseField, dict[str, str]]:
    """Read a dumped field back; returns the field and its sidecar dict."""
    meta = read_sidecar(path)
    n_y = int(meta["n_y"])
    n_z = int(meta["n_z"])
    grid = Grid2D(n_y, n_z, float(meta["extent_y_m"]), float(meta["extent_z_m"]), units)
    raw = np.fromfile(path, dtype="<f8")
    expected = 2 * n_y * n_z
    if raw.size != expected:
        raise SimulationError(
            f"field dump {path} holds {raw.size} floats, expected {expected}")
    pairs = raw.reshape(n_z, n_y, 2)
    si_values = pairs[..., 0] + 1j * pairs[..., 1]
    values = si_values / units.wavenumber_per_m
    return TransverseField(grid, values), meta
