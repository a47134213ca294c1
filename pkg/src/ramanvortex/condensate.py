"""Trapped ground-state preparation for the 2D transverse model.

The interaction strength is not derived from 3D scattering theory; it is
calibrated so the Thomas-Fermi cloud has a chosen transverse radius, which
pins the reduced model to the observable geometry.  In recoil units the
effective mass is 1/2, the trap reads V = (omega_y^2 y^2 + omega_z^2 z^2)/4
and the 2D Thomas-Fermi normalization gives

    mu = sqrt(g * omega_y * omega_z / (2 pi)),   R_i = 2 sqrt(mu) / omega_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SimulationError, StepSizeError
from .grid import Grid2D, TransverseField, _fft2_stack, _ifft2_stack
from .units import UnitSystem


@dataclass(frozen=True)
class TrapSpec:
    """Transverse harmonic trap, V = M/2 [(2 pi nu_y y)^2 + (2 pi nu_z z)^2]."""

    nu_y_hz: float
    nu_z_hz: float

    def __post_init__(self):
        if self.nu_y_hz < 0.0 or self.nu_z_hz < 0.0:
            raise SimulationError("trap frequencies must be nonnegative")

    def omegas_internal(self, units: UnitSystem) -> tuple[float, float]:
        return (units.trap_omega_internal(self.nu_y_hz),
                units.trap_omega_internal(self.nu_z_hz))

    def potential_internal(self, grid: Grid2D) -> np.ndarray:
        wy, wz = self.omegas_internal(grid.units)
        return 0.25 * ((wy * grid.mesh_y) ** 2 + (wz * grid.mesh_z) ** 2)


@dataclass(frozen=True)
class GroundState:
    """Prepared n = 0 condensate: unit norm, phase fixed to 0 at the peak."""

    field: TransverseField
    chemical_potential_j: float
    tf_radii_m: tuple[float, float]


def _tf_mu_internal(g: float, wy: float, wz: float) -> float:
    return math.sqrt(g * wy * wz / (2.0 * math.pi))


def _tf_radii_m(mu: float, wy: float, wz: float, units: UnitSystem
                ) -> tuple[float, float]:
    ry = 2.0 * math.sqrt(mu) / wy if wy > 0.0 else math.inf
    rz = 2.0 * math.sqrt(mu) / wz if wz > 0.0 else math.inf
    return (ry * units.length_m, rz * units.length_m)


def g2d_from_tf_radius(trap: TrapSpec, radius_y_m: float,
                       units: UnitSystem) -> float:
    """Interaction strength (J m^2) that puts the TF edge at radius_y_m."""
    if radius_y_m <= 0.0:
        raise SimulationError("target radius must be positive")
    wy, wz = trap.omegas_internal(units)
    if wy <= 0.0 or wz <= 0.0:
        raise SimulationError("radius calibration needs a confining trap")
    mu = (radius_y_m / units.length_m * wy / 2.0) ** 2
    g = 2.0 * math.pi * mu * mu / (wy * wz)
    return units.coupling2d_to_si(g)


def thomas_fermi_profile(trap: TrapSpec, g2d_j_m2: float,
                         grid: Grid2D) -> GroundState:
    """Analytic inverted-parabola density, renormalized on the grid.

    The chemical potential and radii are the continuum values; the grid
    field is renormalized to unit norm, so its edge carries the usual
    pixel-level truncation of the parabola.
    """
    units = grid.units
    g = units.coupling2d_to_internal(g2d_j_m2)
    if g <= 0.0:
        raise SimulationError("Thomas-Fermi profile needs g2d > 0")
    wy, wz = trap.omegas_internal(units)
    if wy <= 0.0 or wz <= 0.0:
        raise SimulationError("Thomas-Fermi profile needs a confining trap")
    mu = _tf_mu_internal(g, wy, wz)
    density = np.maximum(0.0, mu - trap.potential_internal(grid)) / g
    norm = np.sum(density) * grid.cell_area
    if norm <= 0.0:
        raise SimulationError("Thomas-Fermi cloud does not resolve on grid")
    psi = np.sqrt(density / norm).astype(np.complex128)
    return GroundState(TransverseField(grid, psi),
                       units.energy_to_si(mu), _tf_radii_m(mu, wy, wz, units))


def gaussian_profile(trap: TrapSpec, grid: Grid2D) -> GroundState:
    """Non-interacting harmonic-oscillator ground state (relaxation seed)."""
    units = grid.units
    wy, wz = trap.omegas_internal(units)
    if wy <= 0.0 or wz <= 0.0:
        raise SimulationError("Gaussian seed needs a confining trap")
    psi = np.exp(-(wy * grid.mesh_y**2 + wz * grid.mesh_z**2) / 4.0)
    psi = psi.astype(np.complex128)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.cell_area)
    mu = 0.5 * (wy + wz)
    return GroundState(TransverseField(grid, psi),
                       units.energy_to_si(mu), _tf_radii_m(mu, wy, wz, units))


def _split_energies(values: np.ndarray, potential: np.ndarray, g: float,
                    grid: Grid2D) -> tuple[float, float, float]:
    spec = _fft2_stack(values)
    dens = np.abs(values) ** 2
    e_kin = float(np.sum(grid.mesh_ksq * np.abs(spec) ** 2) * grid.cell_area)
    e_pot = float(np.sum(potential * dens) * grid.cell_area)
    quartic = float(np.sum(dens * dens) * grid.cell_area)
    return e_kin, e_pot, g * quartic


def gpe_energy(field: TransverseField, trap: TrapSpec,
               g2d_j_m2: float) -> float:
    """Total energy per particle (J): kinetic + trap + interaction/2."""
    grid = field.grid
    g = grid.units.coupling2d_to_internal(g2d_j_m2)
    e_kin, e_pot, e_int2 = _split_energies(field.values,
                                           trap.potential_internal(grid),
                                           g, grid)
    return grid.units.energy_to_si(e_kin + e_pot + 0.5 * e_int2)


def relax_ground_state(seed: GroundState, trap: TrapSpec, g2d_j_m2: float,
                       dt_s: float = 2e-6, tol: float = 1e-9,
                       max_steps: int = 10000,
                       energy_log: list | None = None) -> GroundState:
    """Imaginary-time split-step relaxation with per-step renormalization.

    Stops when the relative energy change per step falls below tol.  The
    energy sequence is non-increasing (gradient flow); a rise beyond float
    noise means the step is too large, which the entry guard rejects up
    front: dt * max(V_max, kinetic at Nyquist) must stay below 1/2.
    energy_log, if given, collects the per-step energies (internal units).
    """
    grid = seed.field.grid
    units = grid.units
    g = units.coupling2d_to_internal(g2d_j_m2)
    dt = units.time_to_internal(dt_s)
    potential = trap.potential_internal(grid)
    stiffest = max(float(potential.max()), float(grid.mesh_ksq.max()))
    if dt <= 0.0 or dt * stiffest >= 0.5:
        raise StepSizeError(
            f"imaginary-time step {dt_s} s is unstable here: "
            f"dt * stiffest rate = {dt * stiffest:.3g} >= 0.5")

    half_kin = np.exp(-0.5 * dt * grid.mesh_ksq)
    psi = seed.field.values.copy()
    e_kin, e_pot, e_int2 = _split_energies(psi, potential, g, grid)
    energy = e_kin + e_pot + 0.5 * e_int2
    residual = math.inf
    for _ in range(max_steps):
        psi = _ifft2_stack(half_kin * _fft2_stack(psi))
        psi *= np.exp(-dt * (potential + g * np.abs(psi) ** 2))
        psi = _ifft2_stack(half_kin * _fft2_stack(psi))
        psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.cell_area)
        e_kin, e_pot, e_int2 = _split_energies(psi, potential, g, grid)
        new_energy = e_kin + e_pot + 0.5 * e_int2
        if energy_log is not None:
            energy_log.append(new_energy)
        residual = abs(new_energy - energy) / max(abs(new_energy), 1e-300)
        energy = new_energy
        if residual < tol:
            break
    else:
        raise ConvergenceError(
            f"ground state not converged after {max_steps} steps; "
            f"last relative energy change {residual:.3g} (tol {tol:g})")

    # Fix the global phase to 0 at the density peak.
    peak = np.unravel_index(np.argmax(np.abs(psi)), psi.shape)
    psi *= np.exp(-1j * np.angle(psi[peak]))
    mu = e_kin + e_pot + e_int2
    wy, wz = trap.omegas_internal(units)
    return GroundState(TransverseField(grid, psi), units.energy_to_si(mu),
                       _tf_radii_m(mu, wy, wz, units))
