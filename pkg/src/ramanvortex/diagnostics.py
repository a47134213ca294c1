"""Vortex detection and phase-transfer statistics.

Winding numbers come from the phase circulation around a sampled loop,
angular momentum from the spectral operator y p_z - z p_y, and hole angles
from inverted-intensity circular statistics over an annulus.  The phase
correlation study ties these together: it reruns the two-pulse experiment
over a list of beam phases and fits the hole angle against the imprinted
phase, whose signature is a circular-linear slope of -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .condensate import TrapSpec, g2d_from_tf_radius, thomas_fermi_profile
from .dynamics import PulseSpec, SequenceSpec, run_sequence
from .errors import (AmbiguousHoleError, ContrastError, DensityFloorError,
                     SimulationError)
from .grid import Grid2D, LadderState, TransverseField, bilinear_sample
from .imaging import ImagePlane, absorption_image
from .optics import BeamSpec, coupling_map, phase_readout_pattern
from .units import (SODIUM_MASS_KG, SODIUM_WAVELENGTH_M, PhysicalParams,
                    make_recoil_units)

DENSITY_FLOOR_FRACTION = 1e-6
MIN_LOOP_SAMPLES = 64
MIN_HOLE_CONTRAST = 0.2
# below this first-moment fraction the annulus has no single minimum;
# a pure one-hole fringe gives pi/4 ~ 0.79, opposite holes give ~ 0
MIN_RESULTANT_FRACTION = 0.35
IMAG_RESIDUAL_LIMIT = 1e-10


@dataclass(frozen=True)
class VortexReport:
    """winding from phase circulation, l_z_expect in hbar units,
    core_location in meters, confidence = rms radians between the sampled
    phase steps and a uniform winding ramp (0 for a clean vortex)."""

    winding: int
    l_z_expect: float
    core_location: tuple[float, float]
    confidence: float


def _loop_phases(field_values, grid: Grid2D, loop_radius_m: float,
                 center_m: tuple[float, float], n_samples: int) -> np.ndarray:
    if loop_radius_m <= 0.0:
        raise SimulationError("loop radius must be positive")
    if n_samples < MIN_LOOP_SAMPLES:
        raise SimulationError(
            f"winding loop needs >= {MIN_LOOP_SAMPLES} samples")
    scale = grid.units.length_m
    angles = np.linspace(0.0, 2.0 * math.pi, n_samples, endpoint=False)
    y = (center_m[0] + loop_radius_m * np.cos(angles)) / scale
    z = (center_m[1] + loop_radius_m * np.sin(angles)) / scale
    samples = bilinear_sample(field_values, grid.y, grid.z, y, z)
    floor = DENSITY_FLOOR_FRACTION * float(np.abs(field_values).max()) ** 2
    weakest = float(np.abs(samples).min()) ** 2
    if weakest < floor:
        raise DensityFloorError(
            f"loop sample density {weakest:.3g} is below {floor:.3g} "
            f"(1e-6 of peak); the phase there is not trustworthy")
    return np.angle(samples)


def winding_number(fld: TransverseField, loop_radius_m: float,
                   center_m: tuple[float, float] = (0.0, 0.0),
                   n_samples: int = 128) -> int:
    """Net phase circulation, in turns, around the given loop."""
    phases = _loop_phases(fld.values, fld.grid, loop_radius_m, center_m,
                          n_samples)
    steps = np.diff(phases, append=phases[0])
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(float(steps.sum()) / (2.0 * math.pi)))


def oam_expectation(fld: TransverseField,
                    center_m: tuple[float, float] = (0.0, 0.0)) -> float:
    """<L_z> in hbar units about the given center, computed spectrally.

    The discrete operator is exactly Hermitian (y and p_z act on different
    axes), so the imaginary part of the expectation must vanish to
    rounding; anything above the residue limit signals corrupted input or
    a broken transform and raises rather than returning a real part that
    cannot be trusted.
    """
    grid = fld.grid
    values = fld.values
    spec_y = scipy.fft.fft(values, axis=1)
    p_y = scipy.fft.ifft(grid.k_y[None, :] * spec_y, axis=1)
    spec_z = scipy.fft.fft(values, axis=0)
    p_z = scipy.fft.ifft(grid.k_z[:, None] * spec_z, axis=0)
    y0 = center_m[0] / grid.units.length_m
    z0 = center_m[1] / grid.units.length_m
    integrand = np.conj(values) * ((grid.mesh_y - y0) * p_z
                                   - (grid.mesh_z - z0) * p_y)
    norm = float(np.sum(np.abs(values) ** 2))
    if norm == 0.0:
        raise SimulationError("cannot take <L_z> of an empty field")
    lz = complex(np.sum(integrand)) / norm
    if abs(lz.imag) > IMAG_RESIDUAL_LIMIT:
        raise SimulationError(
            f"<L_z> has imaginary residue {lz.imag:.3g}; field is not "
            f"resolved well enough to trust")
    return lz.real


def vortex_report(fld: TransverseField, loop_radius_m: float,
                  center_m: tuple[float, float] = (0.0, 0.0),
                  n_samples: int = 128) -> VortexReport:
    grid = fld.grid
    phases = _loop_phases(fld.values, grid, loop_radius_m, center_m,
                          n_samples)
    steps = np.diff(phases, append=phases[0])
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    winding = int(round(float(steps.sum()) / (2.0 * math.pi)))
    ramp = 2.0 * math.pi * winding / n_samples
    confidence = float(np.sqrt(np.mean((steps - ramp) ** 2)))

    scale = grid.units.length_m
    rho2 = ((grid.mesh_y - center_m[0] / scale) ** 2
            + (grid.mesh_z - center_m[1] / scale) ** 2)
    density = np.abs(fld.values) ** 2
    inside = rho2 <= (loop_radius_m / scale) ** 2
    masked = np.where(inside, density, np.inf)
    iz, iy = np.unravel_index(int(np.argmin(masked)), masked.shape)
    core = (float(grid.y_m[iy]), float(grid.z_m[iz]))
    return VortexReport(winding, oam_expectation(fld, center_m), core,
                        confidence)


def hole_angle(image: ImagePlane, annulus_m: tuple[float, float],
               center_m: tuple[float, float] = (0.0, 0.0)) -> float:
    """Azimuth of the intensity minimum inside the annulus, in (-pi, pi].

    Each pixel is weighted by how far it sits below the mean of its own
    pixel-wide ring (so the radial falloff of the cloud drops out), and
    the angle of the resultant of those weights is the hole.  A washed-out
    annulus raises ContrastError, and a weight distribution with no first
    harmonic (two opposite holes, say) raises AmbiguousHoleError.
    """
    rho_min, rho_max = annulus_m
    if not 0.0 <= rho_min < rho_max:
        raise SimulationError("annulus needs 0 <= rho_min < rho_max")
    y_axis, z_axis = image.axes_m()
    yy = y_axis[None, :] - center_m[0]
    zz = z_axis[:, None] - center_m[1]
    rho2 = yy**2 + zz**2
    mask = (rho2 >= rho_min**2) & (rho2 <= rho_max**2)
    if int(mask.sum()) < 16:
        raise SimulationError("annulus covers fewer than 16 pixels")
    intensity = image.pixels[mask]
    i_min, i_max = float(intensity.min()), float(intensity.max())
    if i_max <= 0.0 or (i_max - i_min) / (i_max + i_min) <= MIN_HOLE_CONTRAST:
        raise ContrastError(
            f"annulus contrast "
            f"{0.0 if i_max <= 0.0 else (i_max - i_min) / (i_max + i_min):.3g}"
            f" too low to locate a hole (needs > {MIN_HOLE_CONTRAST})")
    ring = np.floor((np.sqrt(rho2[mask]) - rho_min) / image.pitch_m)
    ring = ring.astype(int)
    ring_mean = (np.bincount(ring, weights=intensity)
                 / np.bincount(ring))
    weights = ring_mean[ring] - intensity
    phi = np.arctan2(np.broadcast_to(zz, rho2.shape)[mask],
                     np.broadcast_to(yy, rho2.shape)[mask])
    resultant = complex(np.sum(weights * np.exp(1j * phi)))
    fraction = abs(resultant) / float(np.sum(np.abs(weights)))
    if fraction < MIN_RESULTANT_FRACTION:
        raise AmbiguousHoleError(
            f"annulus intensity has no single minimum (resultant fraction "
            f"{fraction:.3g} < {MIN_RESULTANT_FRACTION}); more than one "
            f"hole or none")
    return float(np.angle(resultant))


def _wrap(angle):
    return (np.asarray(angle) + math.pi) % (2.0 * math.pi) - math.pi


def fit_circular_slope(phases_rad, angles_rad
                       ) -> tuple[float, float, np.ndarray]:
    """Least-squares slope of periodic angles against phases.

    Tries integer slopes -2..2 to pick the unwrap branch (largest circular
    resultant), unwraps the angles about that branch and refines by
    ordinary least squares.  Returns (slope, intercept, residuals_rad).
    """
    phases = np.asarray(phases_rad, dtype=float)
    angles = np.asarray(angles_rad, dtype=float)
    if phases.size < 2:
        raise SimulationError("slope fit needs at least two points")
    branches = {}
    for m in range(-2, 3):
        branches[m] = abs(complex(np.mean(np.exp(1j * (angles - m * phases)))))
    m = max(branches, key=branches.get)
    offsets = angles - m * phases
    mean_offset = math.atan2(float(np.mean(np.sin(offsets))),
                             float(np.mean(np.cos(offsets))))
    unwrapped = m * phases + mean_offset + _wrap(offsets - mean_offset)
    slope, intercept = np.polyfit(phases, unwrapped, 1)
    residuals = _wrap(angles - (slope * phases + intercept))
    return float(slope), float(intercept), residuals


@dataclass(frozen=True)
class StudyResult:
    """Rows of the phase study plus the fitted hole-angle response."""

    rows: tuple[dict, ...]
    slope: float
    intercept_rad: float
    residuals_rad: np.ndarray = field(repr=False)

    def table_text(self) -> str:
        lines = ["trial\tbeam_phase_rad\treadout_angle_rad\thole_angle_rad"]
        for row in self.rows:
            lines.append(
                f"{row['trial']}\t{row['beam_phase_rad']:.9f}\t"
                f"{row['readout_angle_rad']:.9f}\t{row['hole_angle_rad']:.9f}")
        return "\n".join(lines) + "\n"


def _default_study_grid() -> Grid2D:
    params = PhysicalParams(SODIUM_MASS_KG, SODIUM_WAVELENGTH_M)
    return Grid2D(256, 256, 160e-6, 160e-6, make_recoil_units(params))


def phase_correlation_study(n_trials: int = 18,
                            phase_list=None,
                            *,
                            grid: Grid2D | None = None,
                            ground: TransverseField | None = None,
                            trap: TrapSpec | None = None,
                            g2d_j_m2: float | None = None,
                            first_peak_rate_rad_s: float = 1.2e5,
                            second_peak_rate_rad_s: float = 3.5e4,
                            pulse_duration_s: float = 30e-6,
                            second_duration_s: float | None = None,
                            lg_waist_m: float = 85e-6,
                            gauss_a_waist_m: float = 175e-6,
                            gauss_b_waist_m: float = 200e-6,
                            detuning_recoils: float = 4.0,
                            annulus_m: tuple[float, float] = (5e-6, 12e-6),
                            n_max: int = 3) -> StudyResult:
    """Rerun the two-pulse interference experiment once per beam phase.

    Each trial imprints the vortex with an l = 1 beam carrying the trial
    phase, tops up the stationary component with a second, structureless
    pulse, and reads the azimuth of the resulting density hole in trap.
    The expected response is hole = pi - phase: slope -1 against the
    imprinted phase, which is what the fit quantifies.

    The default annulus stays well inside the cloud: further out the
    anisotropic envelope's second harmonic mixes with the fringe and biases
    the circular mean by several degrees.
    """
    if phase_list is None:
        phases = [2.0 * math.pi * k / n_trials for k in range(n_trials)]
    else:
        phases = [float(p) for p in phase_list]
        if len(phases) != n_trials:
            raise SimulationError(
                f"phase_list has {len(phases)} entries for {n_trials} trials")
    if grid is None:
        grid = _default_study_grid()
    if trap is None:
        trap = TrapSpec(40.0 / math.sqrt(2.0), 40.0)
    if g2d_j_m2 is None:
        g2d_j_m2 = g2d_from_tf_radius(trap, 30e-6, grid.units)
    if ground is None:
        ground = thomas_fermi_profile(trap, g2d_j_m2, grid).field
    if second_duration_s is None:
        second_duration_s = pulse_duration_s

    gauss_a = BeamSpec("gaussian", gauss_a_waist_m)
    gauss_b = BeamSpec("gaussian", gauss_b_waist_m)
    rows = []
    for trial, phase in enumerate(phases):
        lg = BeamSpec("lg", lg_waist_m, winding=1, phase=phase)
        first = coupling_map(lg, gauss_a, first_peak_rate_rad_s, 0.0, grid)
        # both pulses emit into the shared counter-propagating beam, so its
        # phase cancels out of the interference
        second = coupling_map(gauss_b, gauss_a, second_peak_rate_rad_s, 0.0,
                              grid)
        seq = SequenceSpec((
            PulseSpec(first, detuning_recoils, pulse_duration_s),
            PulseSpec(second, detuning_recoils, second_duration_s),
        ))
        state = LadderState.from_single_order(ground, n_max)
        final, _ = run_sequence(state, seq, trap, g2d_j_m2)
        image = absorption_image(final, (0, 1), grid.pitch_y_m)
        hole = hole_angle(image, annulus_m)
        # lg already carries the trial phase, so no extra offset here
        _, readout = phase_readout_pattern(lg, gauss_a, 0.0, grid)
        rows.append({
            "trial": trial,
            "beam_phase_rad": phase,
            "readout_angle_rad": readout,
            "hole_angle_rad": hole,
        })

    slope, intercept, residuals = fit_circular_slope(
        [r["beam_phase_rad"] for r in rows],
        [r["hole_angle_rad"] for r in rows])
    return StudyResult(tuple(rows), slope, intercept, residuals)
