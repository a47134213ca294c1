"""Momentum-ladder GPE evolution under two-photon coupling pulses.

Model: orders n carry axial momentum 2 n hbar k and live on one transverse
grid.  In the frame rotating with a pulse's beam-frequency difference dnu,

    i d/dt psi_n = [-lap + V + g sum_m |psi_m|^2 + D_n] psi_n
                   + (omega/2) psi_{n-1} + (conj(omega)/2) psi_{n+1},

with D_n = 4 n^2 - n * (dnu / nu_r) in recoil units (axial kinetic energy
minus the photon energy bookkeeping).  dnu is carried as the ratio
dnu / nu_r so the resonances D_1(4) = D_2(8) = [D_2 - D_1](12) = 0 hold
exactly in floating point.

Splitting: spectral half-steps for the transverse kinetic term around a
position-space step in which trap + meanfield (an identity in order space)
commutes exactly with the per-point ladder matrix.  That matrix, detunings
included, is exponentiated exactly through one batched symmetric
eigendecomposition per pulse: the phase of omega is peeled off first by
conjugation with diag(e^{i n arg omega}), leaving a real tridiagonal.  The
only splitting error left is the soft kinetic commutator, so the default
step is set by the 0.1 rad guard on kinetic and potential phase rates, not by
omega or D_n.  Each pulse references the coupling phase at its own start;
only phase differences between pulses are physical, matching how the beams
are actually used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .condensate import GroundState, TrapSpec
from .errors import (CalibrationError, SimulationError, StepSizeError,
                     TruncationError)
from .grid import LadderState, TransverseField, _fft2_stack, _ifft2_stack
from .optics import CouplingMap

# Phase advance allowed per substep for the split-residual rates.
MAX_PHASE_PER_STEP = 0.1
# Hard cap on the internal step, keeping the dt-halving headroom.
MAX_INTERNAL_STEP = 0.03
# Edge-of-ladder population above which truncation is unsound.
EDGE_POPULATION_LIMIT = 1e-3
NORM_DRIFT_LIMIT = 1e-9


@dataclass(frozen=True)
class PulseSpec:
    """One square pulse: coupling map, beam frequency difference, duration.

    delta_nu_recoils is dnu / nu_r (signed); resonance values -4, 4, 8, 12
    and 0 are then exact machine numbers.
    """

    coupling: CouplingMap
    delta_nu_recoils: float
    duration_s: float
    trap_on: bool = True

    def __post_init__(self):
        if self.duration_s <= 0.0:
            raise SimulationError("pulse duration must be positive")

    def delta_nu_hz(self, units) -> float:
        return self.delta_nu_recoils * units.recoil_frequency_hz


@dataclass(frozen=True)
class SequenceSpec:
    """Ordered pulses with optional free-evolution delays between them."""

    pulses: tuple[PulseSpec, ...]
    delays_s: tuple[float, ...] = ()

    def __post_init__(self):
        pulses = tuple(self.pulses)
        delays = tuple(self.delays_s)
        if delays and len(delays) != len(pulses) - 1:
            raise SimulationError(
                f"{len(pulses)} pulses take {len(pulses) - 1} inter-pulse "
                f"delays, got {len(delays)}")
        if any(d < 0.0 for d in delays):
            raise SimulationError("delays must be nonnegative")
        object.__setattr__(self, "pulses", pulses)
        object.__setattr__(self, "delays_s", delays)


def detuning_ladder(delta_nu_recoils: float, n_max: int) -> np.ndarray:
    """Rotating-frame energies D_n / E_r for n = -n_max .. n_max."""
    if n_max < 1:
        raise SimulationError("n_max must be >= 1")
    n = np.arange(-n_max, n_max + 1, dtype=float)
    return 4.0 * n * n - n * delta_nu_recoils


def _position_rate_bound(potential, g: float, density) -> float:
    rho_max = float(density.max())
    if potential is None:
        return g * rho_max
    return float(potential.max()) + g * rho_max


def _resolve_steps(t_total: float, rate: float, dt_s, units) -> tuple[int, float]:
    """Step count and internal dt honoring the phase guard and the cap."""
    if dt_s is None:
        dt_limit = min(MAX_INTERNAL_STEP, MAX_PHASE_PER_STEP / max(rate, 1e-12))
        n_steps = max(1, math.ceil(t_total / dt_limit))
        return n_steps, t_total / n_steps
    dt = units.time_to_internal(dt_s)
    if dt <= 0.0:
        raise StepSizeError("dt must be positive")
    if dt * rate > MAX_PHASE_PER_STEP:
        raise StepSizeError(
            f"dt = {dt_s} s advances the stiffest split phase by "
            f"{dt * rate:.3g} rad > {MAX_PHASE_PER_STEP} per substep")
    n_steps = max(1, math.ceil(t_total / dt))
    return n_steps, t_total / n_steps


class _LadderPropagator:
    """Per-pulse precomputation of the exact pointwise ladder exponential."""

    def __init__(self, coupling: CouplingMap, delta_recoils: np.ndarray,
                 n_max: int, dt: float, units):
        omega = units.rate_to_internal(1.0) * coupling.omega.values.ravel()
        s = 0.5 * np.abs(omega)
        n_pts = s.size
        dim = 2 * n_max + 1
        tri = np.zeros((n_pts, dim, dim))
        idx = np.arange(dim)
        tri[:, idx, idx] = delta_recoils
        tri[:, idx[1:], idx[:-1]] = s[:, None]
        tri[:, idx[:-1], idx[1:]] = s[:, None]
        w, v = np.linalg.eigh(tri)
        self.vectors = v
        self.eigenphase = np.exp(-1j * dt * w).T.copy()  # (dim, n_pts)
        n_orders = np.arange(-n_max, n_max + 1, dtype=float)
        alpha = np.angle(omega)
        self.unwind = np.exp(-1j * n_orders[:, None] * alpha[None, :])

    def apply(self, flat: np.ndarray) -> np.ndarray:
        """flat: (dim, n_pts) component stack at each grid point."""
        a = flat * self.unwind
        c = np.einsum("nij,in->jn", self.vectors, a)
        c *= self.eigenphase
        d = np.einsum("nij,jn->in", self.vectors, c)
        return d * np.conj(self.unwind)


def _check_norm(before: float, after: float):
    if abs(after - before) > NORM_DRIFT_LIMIT * max(before, 1.0):
        raise SimulationError(
            f"norm drifted by {after - before:.3g} during a pulse")


def _check_edges(state: LadderState):
    for n in (-state.n_max, state.n_max):
        pop = state.population(n)
        if pop > EDGE_POPULATION_LIMIT:
            raise TruncationError(
                f"population {pop:.3g} reached ladder edge n = {n}; raise "
                f"n_max above {state.n_max}")


def evolve_pulse(state: LadderState, pulse: PulseSpec, trap: TrapSpec,
                 g2d_j_m2: float, dt_s: float | None = None) -> LadderState:
    """Apply one square pulse; returns a new state, input untouched."""
    grid = state.grid
    units = grid.units
    if not pulse.coupling.omega.grid.same_geometry(grid):
        raise SimulationError("coupling map and state use different grids")
    g = units.coupling2d_to_internal(g2d_j_m2)
    potential = trap.potential_internal(grid) if pulse.trap_on else None
    t_total = units.time_to_internal(pulse.duration_s)

    values = state.values.copy()
    norm_before = float(np.sum(np.abs(values) ** 2) * grid.cell_area)
    rate = max(float(grid.mesh_ksq.max()),
               _position_rate_bound(potential, g, state.total_density()))
    n_steps, dt = _resolve_steps(t_total, rate, dt_s, units)

    deltas = detuning_ladder(pulse.delta_nu_recoils, state.n_max)
    ladder = _LadderPropagator(pulse.coupling, deltas, state.n_max, dt, units)

    dim = 2 * state.n_max + 1
    flat_shape = (dim, grid.n_z * grid.n_y)
    half_kin = np.exp(-0.5j * dt * grid.mesh_ksq)
    full_kin = half_kin * half_kin
    v_flat = None if potential is None else potential.ravel()

    spec = _fft2_stack(values) * half_kin
    values = _ifft2_stack(spec)
    for step in range(n_steps):
        flat = values.reshape(flat_shape)
        rho = np.sum(np.abs(flat) ** 2, axis=0)
        scalar = g * rho if v_flat is None else v_flat + g * rho
        flat = ladder.apply(flat) * np.exp(-1j * dt * scalar)
        values = flat.reshape((dim,) + grid.shape)
        spec = _fft2_stack(values)
        spec *= full_kin if step < n_steps - 1 else half_kin
        values = _ifft2_stack(spec)

    out = LadderState(grid, state.n_max, values)
    norm_after = float(np.sum(np.abs(values) ** 2) * grid.cell_area)
    _check_norm(norm_before, norm_after)
    _check_edges(out)
    return out


def evolve_free(state: LadderState, duration_s: float, trap: TrapSpec | None,
                g2d_j_m2: float, dt_s: float | None = None) -> LadderState:
    """Lab-frame evolution with the beams off.

    The axial kinetic energy 4 n^2 E_r is a global per-order phase applied
    exactly; the transverse terms use the same splitting as a pulse.
    """
    if duration_s < 0.0:
        raise SimulationError("duration must be nonnegative")
    grid = state.grid
    units = grid.units
    g = units.coupling2d_to_internal(g2d_j_m2)
    potential = trap.potential_internal(grid) if trap is not None else None
    t_total = units.time_to_internal(duration_s)
    values = state.values.copy()
    if t_total == 0.0:
        return LadderState(grid, state.n_max, values)

    rate = max(float(grid.mesh_ksq.max()),
               _position_rate_bound(potential, g, state.total_density()))
    n_steps, dt = _resolve_steps(t_total, rate, dt_s, units)
    half_kin = np.exp(-0.5j * dt * grid.mesh_ksq)
    full_kin = half_kin * half_kin

    spec = _fft2_stack(values) * half_kin
    values = _ifft2_stack(spec)
    for step in range(n_steps):
        rho = np.sum(np.abs(values) ** 2, axis=0)
        scalar = g * rho if potential is None else potential + g * rho
        values *= np.exp(-1j * dt * scalar)[None, :, :]
        spec = _fft2_stack(values)
        spec *= full_kin if step < n_steps - 1 else half_kin
        values = _ifft2_stack(spec)

    n_orders = np.arange(-state.n_max, state.n_max + 1)
    values *= np.exp(-4.0j * t_total * n_orders**2)[:, None, None]
    return LadderState(grid, state.n_max, values)


def run_sequence(state: LadderState, seq: SequenceSpec, trap: TrapSpec,
                 g2d_j_m2: float, dt_s: float | None = None
                 ) -> tuple[LadderState, list[dict]]:
    """Apply the pulses in order; log populations after each pulse.

    Log records carry pulse index, delta_nu_recoils, duration_s and the
    per-order populations.
    """
    log = []
    current = state
    for i, pulse in enumerate(seq.pulses):
        current = evolve_pulse(current, pulse, trap, g2d_j_m2, dt_s)
        log.append({
            "pulse": i,
            "delta_nu_recoils": pulse.delta_nu_recoils,
            "duration_s": pulse.duration_s,
            "populations": {n: current.population(n) for n in current.orders},
        })
        if seq.delays_s and i < len(seq.pulses) - 1 and seq.delays_s[i] > 0.0:
            current = evolve_free(current, seq.delays_s[i],
                                  trap if pulse.trap_on else None,
                                  g2d_j_m2, dt_s)
    return current, log


def _rescaled(coupling: CouplingMap, peak_rate_rad_s: float) -> CouplingMap:
    scale = peak_rate_rad_s / coupling.peak_rate_rad_s
    return CouplingMap(
        TransverseField(coupling.omega.grid, coupling.omega.values * scale),
        coupling.oam_step, peak_rate_rad_s)


def calibrate_pi_pulse(state: GroundState, coupling_shape: CouplingMap,
                       delta_nu_recoils: float, duration_s: float,
                       trap: TrapSpec, g2d_j_m2: float, n_max: int = 3,
                       scan_span: tuple[float, float] = (0.5, 2.5),
                       coarse_points: int = 9, tol: float = 0.005
                       ) -> tuple[float, float]:
    """Peak rate maximizing one-pulse transfer into order +1.

    Scans peak rates around the uniform-coupling value pi / duration
    (coarse grid over scan_span multiples, then golden-section refinement
    until the bracketed transfer varies by less than tol).  Returns
    (peak_rate_rad_s, achieved transfer).  Raises CalibrationError when
    the best point sits at the scan edge.
    """
    if duration_s <= 0.0:
        raise SimulationError("pulse duration must be positive")
    base = math.pi / duration_s
    initial = LadderState.from_single_order(state.field, n_max)

    def transfer(rate: float) -> float:
        pulse = PulseSpec(_rescaled(coupling_shape, rate),
                          delta_nu_recoils, duration_s)
        return evolve_pulse(initial, pulse, trap, g2d_j_m2).population(1)

    rates = np.linspace(scan_span[0] * base, scan_span[1] * base,
                        coarse_points)
    transfers = [transfer(r) for r in rates]
    best = int(np.argmax(transfers))
    if best in (0, len(rates) - 1):
        raise CalibrationError(
            f"transfer keeps rising at the scan edge ({scan_span} times "
            f"pi/duration); widen the scan")

    # Golden-section refinement inside the bracketing pair.
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = rates[best - 1], rates[best + 1]
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = transfer(x1), transfer(x2)
    candidates = {rates[best]: transfers[best], x1: f1, x2: f2}
    for _ in range(40):
        if abs(f1 - f2) < tol and abs(hi - lo) < 0.2 * base:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = transfer(x2)
            candidates[x2] = f2
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = transfer(x1)
            candidates[x1] = f1
    best_rate = max(candidates, key=candidates.get)
    return float(best_rate), float(candidates[best_rate])
