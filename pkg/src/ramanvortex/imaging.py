"""Time-of-flight expansion, absorption images, analytic interference
patterns and 16-bit PGM export.

Expansion happens on a zero-padded copy of the grid: an optional short
nonlinear window converts interaction energy into kinetic energy, then the
remainder of the flight is a single exact spectral propagation.  Orders of
the momentum ladder fly apart along the (ungridded) beam axis at
2 hbar k / M per order; imaging only needs the bookkeeping of who has
separated from whom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridOverflowError, SimulationError
from .grid import (Grid2D, LadderState, bilinear_sample, _fft2_stack,
                   _ifft2_stack)

IMAGE_SCHEMA_VERSION = 1

# Population below which a ladder component is skipped during the nonlinear
# window. A zero field stays exactly zero under this Hamiltonian, so the
# pruning is exact at this threshold's scale.
_PRUNE_POPULATION = 1e-12

# Fraction of the norm allowed within two samples of the padded boundary.
_BOUNDARY_MASS_LIMIT = 1e-6


@dataclass(frozen=True)
class ImagePlane:
    """A real, nonnegative image on square pixels.

    Fields:
        pixels: (rows, cols) float array, rows along z, columns along y,
            row 0 at the most negative z (origin lower).
        pitch_m: pixel pitch in meters.
        label: free-form description.
    """

    pixels: np.ndarray
    pitch_m: float
    label: str = ""

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2:
            raise SimulationError("image pixels must be 2D")
        if not np.all(np.isfinite(px)) or np.any(px < 0.0):
            raise SimulationError("image pixels must be finite and nonnegative")
        if self.pitch_m <= 0.0:
            raise SimulationError("pixel pitch must be positive")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def axes_m(self) -> tuple[np.ndarray, np.ndarray]:
        """Centered (y, z) pixel-center axes in meters."""
        rows, cols = self.pixels.shape
        y = (np.arange(cols) - cols // 2) * self.pitch_m
        z = (np.arange(rows) - rows // 2) * self.pitch_m
        return y, z


def _require_square_pixels(grid: Grid2D) -> float:
    if not math.isclose(grid.pitch_y_m, grid.pitch_z_m, rel_tol=1e-12):
        raise SimulationError(
            "this operation needs square grid pixels; "
            f"got {grid.pitch_y_m} x {grid.pitch_z_m} m")
    return grid.pitch_y_m


# ---------------------------------------------------------------------------
# Time of flight
# ---------------------------------------------------------------------------

def _embed(values: np.ndarray, grid: Grid2D, padded: Grid2D) -> np.ndarray:
    out = np.zeros((values.shape[0],) + padded.shape, dtype=np.complex128)
    z0 = (padded.n_z - grid.n_z) // 2
    y0 = (padded.n_y - grid.n_y) // 2
    out[:, z0:z0 + grid.n_z, y0:y0 + grid.n_y] = values
    return out


def _boundary_mass_fraction(state: LadderState) -> float:
    dens = state.total_density()
    total = dens.sum()
    if total <= 0.0:
        return 0.0
    edge = (dens[:2, :].sum() + dens[-2:, :].sum()
            + dens[2:-2, :2].sum() + dens[2:-2, -2:].sum())
    return float(edge / total)


def time_of_flight(state: LadderState, t_s: float, meanfield_window_s: float,
                   g2d_j_m2: float, pad_factor: float = 2.0,
                   max_phase: float = 0.1) -> LadderState:
    """Free expansion for t_s seconds on a zero-padded grid.

    The trap is off throughout.  For the first meanfield_window_s the
    interaction term is kept (split-step), afterwards propagation is exact
    and linear in one spectral multiplication.  Returns a new state on the
    padded grid with per-order axial displacements recorded for the
    separation bookkeeping.

    Raises GridOverflowError if the expanded cloud reaches the padded
    boundary.
    """
    if t_s < 0.0:
        raise SimulationError("time of flight must be nonnegative")
    if pad_factor < 2.0:
        raise SimulationError("pad_factor must be >= 2 (zero-embedding rule)")
    units = state.grid.units
    window_s = min(max(meanfield_window_s, 0.0), t_s)

    padded = state.grid.padded(pad_factor)
    values = _embed(state.values, state.grid, padded)
    g = units.coupling2d_to_internal(g2d_j_m2)
    t = units.time_to_internal(t_s)
    t_window = units.time_to_internal(window_s) if g != 0.0 else 0.0

    if t_window > 0.0:
        pops = np.sum(np.abs(values) ** 2, axis=(1, 2)) * padded.cell_area
        active = np.flatnonzero(pops > _PRUNE_POPULATION)
        work = values[active]
        ksq = padded.mesh_ksq
        rho = np.sum(np.abs(work) ** 2, axis=0)
        rate = float(ksq.max() + g * rho.max())
        n_steps = max(1, math.ceil(t_window * rate / max_phase))
        dt = t_window / n_steps
        half_kin = np.exp(-0.5j * dt * ksq)
        full_kin = half_kin * half_kin
        work = _ifft2_stack(_fft2_stack(work) * half_kin)
        for step in range(n_steps):
            rho = np.sum(np.abs(work) ** 2, axis=0)
            work *= np.exp(-1j * dt * g * rho)
            spec = _fft2_stack(work)
            spec *= full_kin if step < n_steps - 1 else half_kin
            work = _ifft2_stack(spec)
        values[active] = work

    remainder = t - t_window
    if remainder > 0.0:
        spec = _fft2_stack(values)
        spec *= np.exp(-1j * remainder * padded.mesh_ksq)
        values = _ifft2_stack(spec)

    # Axial kinetic phase 4 n^2 E_r per order, global over the plane.
    n_axis = np.arange(-state.n_max, state.n_max + 1)
    values *= np.exp(-4.0j * t * n_axis**2)[:, None, None]

    # Axial displacement per order: 2 hbar k / M = 4 length units per time
    # unit in recoil units.
    v_si = 4.0 * units.length_m / units.time_s
    shifts = {int(n): float(n * v_si * t_s) for n in n_axis}

    out = LadderState(padded, state.n_max, values, axial_shift_m=shifts)
    frac = _boundary_mass_fraction(out)
    if frac > _BOUNDARY_MASS_LIMIT:
        raise GridOverflowError(
            f"expanded cloud reached the padded boundary "
            f"(boundary mass fraction {frac:.2e}); rerun with pad_factor "
            f">= {2.0 * pad_factor:g}")
    return out


# ---------------------------------------------------------------------------
# Absorption imaging
# ---------------------------------------------------------------------------

def _cloud_radius_y_m(state: LadderState) -> float:
    """Thomas-Fermi-equivalent y semi-axis sqrt(6 <y^2>) in meters."""
    dens = state.total_density()
    total = dens.sum()
    if total <= 0.0:
        return 0.0
    y2 = float(np.sum(dens * state.grid.mesh_y**2) / total)
    return math.sqrt(6.0 * y2) * state.grid.units.length_m


def absorption_image(state: LadderState, select, pitch_m: float,
                     blur_sigma_m: float = 0.0, noise_rms: float = 0.0,
                     seed: int = 0, label: str = "") -> ImagePlane:
    """Column-density image of the selected momentum orders.

    Orders that are still axially co-located are summed coherently
    (|sum psi_n|^2); orders that have flown apart are summed as densities.
    A mixed selection is refused: pick orders that are either all together
    or all separated.  The result is resampled to the requested square
    pixel pitch.  blur_sigma_m applies an optional Gaussian blur and
    noise_rms adds seeded Gaussian noise; both default off.
    """
    orders = sorted(set(int(n) for n in select))
    if not orders:
        raise SimulationError("empty order selection for imaging")
    for n in orders:
        state.index(n)

    if state.axial_shift_m is None or len(orders) == 1:
        coherent = True
    else:
        threshold = 2.0 * _cloud_radius_y_m(state)
        seps = [abs(state.axial_shift_m[a] - state.axial_shift_m[b])
                for i, a in enumerate(orders) for b in orders[i + 1:]]
        if all(s > threshold for s in seps):
            coherent = False
        elif all(s <= threshold for s in seps):
            coherent = True
        else:
            raise SimulationError(
                "selected orders are neither all separated nor all "
                "co-located; image them in consistent groups")

    stack = state.values[[state.index(n) for n in orders]]
    if coherent:
        dens = np.abs(np.sum(stack, axis=0)) ** 2
    else:
        dens = np.sum(np.abs(stack) ** 2, axis=0)

    grid = state.grid
    if pitch_m <= 0.0:
        raise SimulationError("pixel pitch must be positive")
    same_pitch = (math.isclose(pitch_m, grid.pitch_y_m, rel_tol=1e-12)
                  and math.isclose(pitch_m, grid.pitch_z_m, rel_tol=1e-12))
    if same_pitch:
        pixels = dens
    else:
        n_y = max(2, int(round(grid.extent_y_m / pitch_m)))
        n_z = max(2, int(round(grid.extent_z_m / pitch_m)))
        y = (np.arange(n_y) - n_y // 2) * pitch_m
        z = (np.arange(n_z) - n_z // 2) * pitch_m
        yy = np.clip(y, grid.y_m[0], grid.y_m[-1])
        zz = np.clip(z, grid.z_m[0], grid.z_m[-1])
        zz_mesh, yy_mesh = np.meshgrid(zz, yy, indexing="ij")
        pixels = bilinear_sample(dens, grid.y_m, grid.z_m, yy_mesh, zz_mesh)

    if blur_sigma_m > 0.0:
        from scipy.ndimage import gaussian_filter
        pixels = gaussian_filter(pixels, sigma=blur_sigma_m / pitch_m, mode="constant")
    if noise_rms > 0.0:
        rng = np.random.default_rng(seed)
        pixels = pixels + rng.normal(0.0, noise_rms * pixels.max(), pixels.shape)
        pixels = np.maximum(pixels, 0.0)

    return ImagePlane(pixels, pitch_m, label=label)


# ---------------------------------------------------------------------------
# Analytic interference patterns
# ---------------------------------------------------------------------------

PATTERN_KINDS = ("counter_rotating", "rot_vs_nonrot", "doubly_vs_nonrot")


def _as_profile(profile):
    if callable(profile):
        return profile
    r_axis, amp = profile
    r_axis = np.asarray(r_axis, dtype=float)
    amp = np.asarray(amp, dtype=float)
    return lambda r: np.interp(r, r_axis, amp, left=amp[0], right=0.0)


def analytic_pattern(kind: str, radial_profiles, grid: Grid2D,
                     theta: float = 0.0) -> ImagePlane:
    """Reference two-path interference pattern on the given grid.

    kind selects the superposition imaged:
      counter_rotating:  |f e^{i(phi + theta)} + f e^{-i phi}|^2
                         = 4 f^2 cos^2(phi + theta/2)
      rot_vs_nonrot:     |f0 + f1 e^{i(phi + theta)}|^2
      doubly_vs_nonrot:  |f0 + f2 e^{i(2 phi + theta)}|^2

    radial_profiles is one profile (counter_rotating) or a pair; each is a
    callable amplitude of radius in meters or a sampled (r_m, amp) pair.
    The image is scaled to unit maximum.
    """
    if kind not in PATTERN_KINDS:
        raise SimulationError(f"unknown pattern kind {kind!r}")
    pitch = _require_square_pixels(grid)
    zz, yy = np.meshgrid(grid.z_m, grid.y_m, indexing="ij")
    rho = np.hypot(yy, zz)
    phi = np.arctan2(zz, yy)

    if kind == "counter_rotating":
        f = _as_profile(radial_profiles)(rho)
        intensity = np.abs(f * np.exp(1j * (phi + theta)) + f * np.exp(-1j * phi)) ** 2
    else:
        try:
            prof_a, prof_b = radial_profiles
        except (TypeError, ValueError):
            raise SimulationError(f"{kind} needs two radial profiles")
        f0 = _as_profile(prof_a)(rho)
        fl = _as_profile(prof_b)(rho)
        winding = 1 if kind == "rot_vs_nonrot" else 2
        intensity = np.abs(f0 + fl * np.exp(1j * (winding * phi + theta))) ** 2

    peak = intensity.max()
    if peak > 0.0:
        intensity = intensity / peak
    return ImagePlane(intensity, pitch, label=kind)


def radial_profile(image: ImagePlane, center_m: tuple[float, float] = (0.0, 0.0),
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Azimuthal mean of an image: returns (radii_m, mean_intensity).

    Bin width is one pixel pitch; only bins that contain pixels appear.
    """
    y, z = image.axes_m()
    zz, yy = np.meshgrid(z, y, indexing="ij")
    r = np.hypot(yy - center_m[0], zz - center_m[1])
    idx = np.floor(r / image.pitch_m).astype(int).ravel()
    sums = np.bincount(idx, weights=image.pixels.ravel())
    counts = np.bincount(idx)
    keep = counts > 0
    radii = (np.flatnonzero(keep) + 0.5) * image.pitch_m
    return radii, sums[keep] / counts[keep]


# ---------------------------------------------------------------------------
# 16-bit PGM export with a text sidecar
# ---------------------------------------------------------------------------

def write_pgm(image: ImagePlane, path: str) -> None:
    """Write a 16-bit binary PGM plus `path`.meta with scale and geometry."""
    px = image.pixels
    lo = float(px.min())
    hi = float(px.max())
    if hi > lo:
        quant = np.round((px - lo) / (hi - lo) * 65535.0).astype(">u2")
    else:
        quant = np.zeros(px.shape, dtype=">u2")
    rows, cols = px.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        f.write(quant.tobytes(order="C"))
    meta = [
        f"schema_version={IMAGE_SCHEMA_VERSION}",
        "kind=absorption_image",
        f"pitch_m={image.pitch_m!r}",
        f"rows={rows}",
        f"cols={cols}",
        f"min_value={lo!r}",
        f"max_value={hi!r}",
        "origin=lower",
        "normalization=linear_min_max_to_uint16",
        f"label={image.label}",
    ]
    with open(str(path) + ".meta", "w") as f:
        f.write("\n".join(meta) + "\n")


def read_pgm(path: str) -> tuple[ImagePlane, dict[str, str]]:
    """Read back a PGM written by write_pgm, dequantized via its sidecar."""
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"P5":
            raise SimulationError(f"{path} is not a binary PGM file")
        dims = f.readline().split()
        cols, rows = int(dims[0]), int(dims[1])
        maxval = int(f.readline())
        if maxval != 65535:
            raise SimulationError(f"{path}: expected 16-bit maxval, got {maxval}")
        raw = np.frombuffer(f.read(rows * cols * 2), dtype=">u2")
    if raw.size != rows * cols:
        raise SimulationError(f"{path}: truncated pixel data")
    meta = {}
    with open(str(path) + ".meta") as f:
        for line in f:
            line = line.strip()
            if line:
                key, _, value = line.partition("=")
                meta[key] = value
    lo = float(meta.get("min_value", 0.0))
    hi = float(meta.get("max_value", 1.0))
    pixels = lo + raw.reshape(rows, cols).astype(float) / 65535.0 * (hi - lo)
    pixels = np.maximum(pixels, 0.0)
    image = ImagePlane(pixels, float(meta.get("pitch_m", 1.0)),
                       label=meta.get("label", ""))
    return image, meta
