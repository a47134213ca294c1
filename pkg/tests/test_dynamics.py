"""Pulse evolution checks against closed-form two-level physics.

With a spatially uniform coupling the trap and meanfield act as the
identity in order space, so total populations obey the textbook two-level
formulas exactly; those serve as machine-precision oracles.  Structured
beams are checked through conserved quantities, step-halving consistency
and the winding they imprint.
"""

import math

import numpy as np
import pytest

from ramanvortex.condensate import (TrapSpec, g2d_from_tf_radius,
                                    gaussian_profile, thomas_fermi_profile)
from ramanvortex.dynamics import (PulseSpec, SequenceSpec, calibrate_pi_pulse,
                                  detuning_ladder, evolve_free, evolve_pulse,
                                  run_sequence)
from ramanvortex.errors import (CalibrationError, SimulationError,
                                StepSizeError, TruncationError)
from ramanvortex.grid import Grid2D, LadderState, bilinear_sample
from ramanvortex.optics import BeamSpec, coupling_map, mode_field, uniform_coupling

NU_Y_HZ = 40.0 / math.sqrt(2.0)
NU_Z_HZ = 40.0


@pytest.fixture(scope="module")
def trap():
    return TrapSpec(NU_Y_HZ, NU_Z_HZ)


@pytest.fixture(scope="module")
def g2d(trap, units):
    return g2d_from_tf_radius(trap, 30e-6, units)


def packet_state(grid, trap, n_max=3):
    return LadderState.from_single_order(gaussian_profile(trap, grid).field,
                                         n_max)


def lg_g_coupling(grid, peak_rate, rel_phase=0.0, winding=1):
    lg = BeamSpec("lg", 85e-6, winding=winding)
    g = BeamSpec("gaussian", 175e-6)
    return coupling_map(lg, g, peak_rate, rel_phase, grid)


def loop_winding(values, grid, radius_m):
    angles = np.linspace(0.0, 2.0 * np.pi, 128, endpoint=False)
    r = radius_m / grid.units.length_m
    samples = bilinear_sample(values, grid.y, grid.z,
                              r * np.cos(angles), r * np.sin(angles))
    steps = np.diff(np.angle(samples), append=np.angle(samples[0]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return steps.sum() / (2.0 * np.pi)


class TestDetuningLadder:
    def test_single_step_resonance_is_exact(self):
        ladder = detuning_ladder(4.0, 3)
        assert ladder[3 + 1] == 0.0

    def test_direct_double_step_resonance_is_exact(self):
        ladder = detuning_ladder(8.0, 3)
        assert ladder[3 + 2] == 0.0

    def test_sequential_double_step_resonance_is_exact(self):
        ladder = detuning_ladder(12.0, 3)
        assert ladder[3 + 2] - ladder[3 + 1] == 0.0

    def test_zero_detuning_is_symmetric(self):
        ladder = detuning_ladder(0.0, 2)
        assert ladder[2 - 1] == ladder[2 + 1] == 4.0

    def test_formula(self):
        ladder = detuning_ladder(5.5, 3)
        for i, n in enumerate(range(-3, 4)):
            assert ladder[i] == 4.0 * n * n - n * 5.5

    def test_bad_n_max(self):
        with pytest.raises(SimulationError):
            detuning_ladder(4.0, 0)


class TestUniformRabi:
    """Trap off, no interactions: populations are exactly two-level."""

    def run_segments(self, grid, trap, omega_int, delta, n_segments,
                     t_total_int, dt_int):
        units = grid.units
        rate = omega_int / units.time_s
        state = packet_state(grid, trap)
        seg_s = units.time_to_si(t_total_int / n_segments)
        pulse = PulseSpec(uniform_coupling(rate, grid), delta, seg_s,
                          trap_on=False)
        dt_s = units.time_to_si(dt_int)
        out = []
        for k in range(n_segments):
            state = evolve_pulse(state, pulse, trap, 0.0, dt_s)
            out.append((t_total_int * (k + 1) / n_segments,
                        state.population(1)))
        return out

    def test_resonant_populations_follow_sin_squared(self, grid64, trap):
        omega = 0.004
        t_total = 2.0 * (2.0 * math.pi / omega)  # two Rabi cycles
        for t, p1 in self.run_segments(grid64, trap, omega, 4.0, 12,
                                       t_total, 3.0):
            assert p1 == pytest.approx(math.sin(omega * t / 2.0) ** 2,
                                       abs=1e-6)

    def test_detuned_peak_is_half_at_generalized_frequency(self, grid64, trap):
        omega = 0.02
        delta = 4.0 - omega  # ladder detuning of order 1 equals omega
        gen = math.sqrt(2.0) * omega
        t_total = 2.0 * math.pi / gen  # one generalized cycle
        history = self.run_segments(grid64, trap, omega, delta, 8,
                                    t_total, 2.0)
        for t, p1 in history:
            assert p1 == pytest.approx(0.5 * math.sin(gen * t / 2.0) ** 2,
                                       abs=1e-4)
        peak = max(p for _, p in history)
        assert peak == pytest.approx(0.5, abs=1e-4)


class TestStrangConsistency:
    def test_halving_dt_changes_state_below_tolerance(self, grid128, trap,
                                                      g2d, units):
        state = packet_state(grid128, trap)
        coupling = lg_g_coupling(grid128, 2.0e4)
        pulse = PulseSpec(coupling, 4.0, 30e-6)
        coarse = evolve_pulse(state, pulse, trap, g2d)
        fine = evolve_pulse(state, pulse, trap, g2d,
                            dt_s=units.time_to_si(0.015))
        diff = coarse.values - fine.values
        l2 = math.sqrt(float(np.sum(np.abs(diff) ** 2) * grid128.cell_area))
        assert l2 < 1e-6

    def test_pulse_splits_into_two_half_pulses(self, grid64, trap, g2d, units):
        state = packet_state(grid64, trap)
        coupling = lg_g_coupling(grid64, 3.0e4)
        dt_s = units.time_to_si(0.04)
        whole = evolve_pulse(state, PulseSpec(coupling, 4.0, 40e-6), trap,
                             g2d, dt_s)
        half = PulseSpec(coupling, 4.0, 20e-6)
        parts = evolve_pulse(evolve_pulse(state, half, trap, g2d, dt_s),
                             half, trap, g2d, dt_s)
        assert np.allclose(whole.values, parts.values, atol=1e-10)


class TestConservation:
    def test_norm_through_interacting_pulse(self, grid128, trap, g2d):
        state = LadderState.from_single_order(
            thomas_fermi_profile(trap, g2d, grid128).field, 3)
        pulse = PulseSpec(lg_g_coupling(grid128, 1.0e5), 4.0, 30e-6)
        final = evolve_pulse(state, pulse, trap, g2d)
        total = sum(final.population(n) for n in final.orders)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_energy_conserved_without_trap_or_coupling(self, grid64, trap,
                                                       g2d, units):
        from ramanvortex.grid import _fft2_stack

        def energy(state):
            g = units.coupling2d_to_internal(g2d)
            spec = _fft2_stack(state.values)
            kin = float(np.sum(grid64.mesh_ksq * np.abs(spec) ** 2))
            n = np.arange(-state.n_max, state.n_max + 1, dtype=float)
            pops = np.array([state.population(m) for m in state.orders])
            axial = float(np.sum(4.0 * n * n * pops)) / grid64.cell_area
            rho = state.total_density()
            inter = 0.5 * g * float(np.sum(rho * rho))
            return (kin + axial + inter) * grid64.cell_area

        seed = packet_state(grid64, trap)
        ring = mode_field(BeamSpec("lg", 20e-6, winding=1), grid64).values
        mixed = seed.values.copy()
        mixed[seed.index(1)] = 0.6 * ring * np.abs(mixed[seed.index(0)]).max()
        norm = math.sqrt(float(np.sum(np.abs(mixed) ** 2)
                               * grid64.cell_area))
        state = LadderState(grid64, 3, mixed / norm)

        before = energy(state)
        after = energy(evolve_free(state, 3e-4, None, g2d))
        assert after == pytest.approx(before, rel=1e-6)

    def test_free_evolution_conserves_populations(self, grid64, trap, g2d):
        state = packet_state(grid64, trap)
        pulsed = evolve_pulse(state, PulseSpec(lg_g_coupling(grid64, 4.0e4),
                                               4.0, 30e-6), trap, g2d)
        delayed = evolve_free(pulsed, 50e-6, trap, g2d)
        for n in pulsed.orders:
            assert delayed.population(n) == pytest.approx(
                pulsed.population(n), abs=1e-11)


class TestVortexImprint:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_transferred_order_carries_beam_winding(self, grid128, trap, g2d,
                                                    sign):
        state = LadderState.from_single_order(
            thomas_fermi_profile(trap, g2d, grid128).field, 3)
        coupling = lg_g_coupling(grid128, 1.2e5, winding=sign)
        final = evolve_pulse(state, PulseSpec(coupling, 4.0, 30e-6), trap, g2d)
        p1 = final.population(1)
        assert 0.05 < p1 < 0.7
        circulation = loop_winding(final.component(1).values, grid128, 15e-6)
        assert circulation == pytest.approx(sign, abs=1e-6)

    def test_coupling_phase_shifts_transferred_order_globally(self, grid64,
                                                              trap):
        state = packet_state(grid64, trap)
        theta = 1.1
        base = PulseSpec(uniform_coupling(5.0e4, grid64), 4.0, 20e-6,
                         trap_on=False)
        shifted = PulseSpec(uniform_coupling(5.0e4, grid64, rel_phase=theta),
                            4.0, 20e-6, trap_on=False)
        a = evolve_pulse(state, base, trap, 0.0)
        b = evolve_pulse(state, shifted, trap, 0.0)
        assert np.allclose(b.component(1).values,
                           a.component(1).values * np.exp(1j * theta),
                           atol=1e-12)
        assert np.allclose(b.component(0).values, a.component(0).values,
                           atol=1e-12)

    def test_grid_mismatch_rejected(self, grid64, grid128, trap):
        state = packet_state(grid128, trap)
        pulse = PulseSpec(uniform_coupling(1.0e4, grid64), 4.0, 1e-5)
        with pytest.raises(SimulationError):
            evolve_pulse(state, pulse, trap, 0.0)


class TestSequence:
    def test_log_records_per_pulse_populations(self, grid64, trap, g2d):
        state = packet_state(grid64, trap)
        seq = SequenceSpec((
            PulseSpec(lg_g_coupling(grid64, 4.0e4), 4.0, 30e-6),
            PulseSpec(uniform_coupling(2.0e4, grid64), 4.0, 30e-6),
        ))
        final, log = run_sequence(state, seq, trap, g2d)
        assert [rec["pulse"] for rec in log] == [0, 1]
        assert log[0]["delta_nu_recoils"] == 4.0
        assert log[1]["duration_s"] == 30e-6
        for rec in log:
            assert sum(rec["populations"].values()) == pytest.approx(
                1.0, abs=1e-9)
        assert final.population(1) == pytest.approx(
            log[1]["populations"][1], abs=0.0)

    def test_inter_pulse_delay_matches_explicit_free_evolution(self, grid64,
                                                               trap, g2d):
        state = packet_state(grid64, trap)
        p1 = PulseSpec(lg_g_coupling(grid64, 4.0e4), 4.0, 20e-6)
        p2 = PulseSpec(uniform_coupling(2.0e4, grid64), 0.0, 20e-6)
        with_delay, _ = run_sequence(
            state, SequenceSpec((p1, p2), delays_s=(40e-6,)), trap, g2d)
        manual = evolve_pulse(
            evolve_free(evolve_pulse(state, p1, trap, g2d), 40e-6, trap, g2d),
            p2, trap, g2d)
        assert np.allclose(with_delay.values, manual.values, atol=1e-12)

    def test_sequence_validation(self, grid64):
        pulse = PulseSpec(uniform_coupling(1.0e4, grid64), 4.0, 1e-5)
        with pytest.raises(SimulationError):
            SequenceSpec((pulse, pulse), delays_s=(1e-5, 1e-5))
        with pytest.raises(SimulationError):
            SequenceSpec((pulse, pulse), delays_s=(-1e-5,))
        with pytest.raises(SimulationError):
            PulseSpec(uniform_coupling(1.0e4, grid64), 4.0, 0.0)


class TestResonanceSweep:
    def test_transfer_peaks_at_single_step_resonance(self, grid64, trap,
                                                     units):
        omega = 0.05
        rate = omega / units.time_s
        duration = units.time_to_si(math.pi / omega)
        state = packet_state(grid64, trap)
        detunings = np.linspace(2.0, 6.0, 9)
        transfers = []
        for delta in detunings:
            pulse = PulseSpec(uniform_coupling(rate, grid64), float(delta),
                              duration, trap_on=False)
            transfers.append(
                evolve_pulse(state, pulse, trap, 0.0,
                             units.time_to_si(1.5)).population(1))
        assert detunings[int(np.argmax(transfers))] == 4.0
        assert max(transfers) > 0.9
        assert transfers[3] == pytest.approx(transfers[5], abs=0.05)


class TestCalibration:
    # populations are grid-independent for uniform coupling, so a coarse
    # grid keeps the many probe pulses cheap
    @pytest.fixture()
    def grid32(self, units):
        return Grid2D(32, 32, 160e-6, 160e-6, units)

    def test_uniform_coupling_calibrates_to_pi_over_duration(self, grid32,
                                                             trap):
        gs = gaussian_profile(trap, grid32)
        duration = 100e-6
        rate, achieved = calibrate_pi_pulse(
            gs, uniform_coupling(1.0e4, grid32), 4.0, duration, trap, 0.0)
        assert rate == pytest.approx(math.pi / duration, rel=0.05)
        assert achieved > 0.995

    def test_monotone_edge_raises(self, grid32, trap):
        gs = gaussian_profile(trap, grid32)
        with pytest.raises(CalibrationError):
            calibrate_pi_pulse(gs, uniform_coupling(1.0e4, grid32), 4.0,
                               100e-6, trap, 0.0, scan_span=(0.2, 0.6),
                               coarse_points=5)


class TestGuards:
    def test_oversized_explicit_dt_rejected(self, grid128, trap):
        state = packet_state(grid128, trap)
        pulse = PulseSpec(uniform_coupling(1.0e4, grid128), 4.0, 1e-4)
        with pytest.raises(StepSizeError):
            evolve_pulse(state, pulse, trap, 0.0, dt_s=2e-5)

    def test_ladder_edge_population_raises(self, grid64, trap, units):
        state = packet_state(grid64, trap, n_max=2)
        rate = 40.0 / units.time_s
        duration = units.time_to_si(7.0 / 40.0)
        pulse = PulseSpec(uniform_coupling(rate, grid64), 0.0, duration,
                          trap_on=False)
        with pytest.raises(TruncationError):
            evolve_pulse(state, pulse, trap, 0.0)
