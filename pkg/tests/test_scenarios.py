"""Scenario bundles: artifact inventory, determinism, and wiring."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from ramanvortex.config import ExperimentConfig
from ramanvortex.grid import load_field
from ramanvortex.imaging import read_pgm
from ramanvortex.scenarios import run_scenario

BEAMS = {
    "lg": {"kind": "lg", "waist_m": 85e-6, "winding": 1},
    "g": {"kind": "gaussian", "waist_m": 175e-6},
    "wide": {"kind": "gaussian", "waist_m": 200e-6},
}


def small(scenario, pulses, tmp_path, **extra):
    data = {
        "schema_version": 1,
        "scenario": scenario,
        "output_dir": str(tmp_path / scenario),
        "grid": {"points_y": 64, "points_z": 64},
        "beams": dict(BEAMS),
        "pulses": pulses,
    }
    data.update(extra)
    return data


def vortex_pulse(**overrides):
    pulse = {"absorb": "lg", "emit": "g", "rabi_rate_rad_s": 7.3e4,
             "detuning_recoils": 4.0, "duration_s": 3.0e-5}
    pulse.update(overrides)
    return pulse


class TestCustomIdentity:
    def test_empty_sequence_returns_prepared_ground_state(self, tmp_path):
        config = small("custom", [], tmp_path,
                       imaging={"time_of_flight_s": 0.0})
        result = run_scenario(config)
        assert result.summary["population_order_0"] == pytest.approx(1.0)
        for n in (-3, -2, -1, 1, 2, 3):
            assert result.summary[f"population_order_{_tag(n)}"] == 0.0

        # the dumped field is the ground state itself
        cfg = ExperimentConfig.from_mapping(config)
        ground = cfg.ground_state(cfg.make_grid())
        dumped, _ = load_field(
            str(Path(result.output_dir) / "field_order_0.bin"), cfg.units())
        np.testing.assert_allclose(dumped.values, ground.field.values,
                                   rtol=0, atol=1e-12)


def _tag(n):
    return f"m{-n}" if n < 0 else (str(n) if n == 0 else f"p{n}")


class TestDeterminism:
    def test_identical_runs_produce_identical_bytes(self, tmp_path):
        pulses = [vortex_pulse(duration_s=1.5e-5)]
        paths = []
        for name in ("a", "b"):
            config = small("single_vortex", pulses, tmp_path)
            config["output_dir"] = str(tmp_path / name)
            config["imaging"] = {"time_of_flight_s": 2e-3,
                                 "meanfield_window_s": 2e-4}
            result = run_scenario(config)
            paths.append((Path(result.output_dir), result.artifacts))
        (dir_a, names_a), (dir_b, names_b) = paths
        assert names_a == names_b
        for name in names_a:
            if name == "config_echo.json":
                # echoes differ only in the output_dir they record
                a = json.loads((dir_a / name).read_text())
                b = json.loads((dir_b / name).read_text())
                a.pop("output_dir"), b.pop("output_dir")
                assert a == b
                continue
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes(), name

    def test_seed_changes_only_noisy_images(self, tmp_path):
        pulses = [vortex_pulse(duration_s=1.5e-5)]
        summaries = []
        for seed in (1, 2):
            config = small("single_vortex", pulses, tmp_path)
            config["output_dir"] = str(tmp_path / f"seed{seed}")
            config["seed"] = seed
            config["imaging"] = {"time_of_flight_s": 0.0, "noise_rms": 0.02}
            summaries.append(run_scenario(config))
        pops = [s.summary["population_order_p1"] for s in summaries]
        assert pops[0] == pops[1]
        images = [read_pgm(str(Path(s.output_dir) / "ground_density.pgm"))[0]
                  for s in summaries]
        assert not np.array_equal(images[0].pixels, images[1].pixels)


class TestSingleVortex:
    def test_bundle_and_winding(self, tmp_path):
        config = small("single_vortex", [vortex_pulse()], tmp_path,
                       imaging={"time_of_flight_s": 2e-3,
                                "meanfield_window_s": 2e-4})
        result = run_scenario(config)
        assert result.summary["winding_order_p1"] == 1
        assert result.summary["l_z_order_p1"] == pytest.approx(1.0, abs=0.05)
        assert 0.1 < result.summary["population_order_p1"] < 0.35
        for name in ("config_echo.json", "ground_density.pgm",
                     "populations.tsv", "density_order_p1.pgm",
                     "tof_order_0.pgm", "tof_order_p1.pgm",
                     "summary.tsv", "summary.tsv.meta"):
            assert name in result.artifacts
            assert (Path(result.output_dir) / name).exists()

    def test_config_echo_is_normalized_and_loadable(self, tmp_path):
        config = small("single_vortex", [vortex_pulse()], tmp_path,
                       imaging={"time_of_flight_s": 0.0})
        result = run_scenario(config)
        echo = json.loads(
            (Path(result.output_dir) / "config_echo.json").read_text())
        assert echo["grid"]["points_y"] == 64
        assert echo["pulses"][0]["rabi_rate_rad_s"] == 7.3e4
        # echo re-runs to the same summary
        echo["output_dir"] = str(tmp_path / "echo_rerun")
        rerun = run_scenario(echo)
        assert rerun.summary == result.summary


class TestResonanceSweep:
    def test_peak_sits_at_the_ladder_resonance(self, tmp_path):
        config = small(
            "resonance_sweep", [vortex_pulse(duration_s=6e-5)], tmp_path,
            sweep={"detuning_recoils_start": 2.0,
                   "detuning_recoils_stop": 6.0, "points": 5})
        result = run_scenario(config)
        assert result.summary["n_points"] == 5
        assert result.summary["peak_detuning_recoils"] == 4.0
        table = (Path(result.output_dir) / "sweep_table.tsv").read_text()
        lines = [l for l in table.strip().split("\n") if l]
        assert len(lines) == 6
        header = lines[0].split("\t")
        assert header[0] == "detuning_recoils"
        assert "p_p1" in header
        for i in range(5):
            point = Path(result.output_dir) / f"point_{i:02d}/populations.tsv"
            assert point.exists()


class TestCounterRotating:
    def test_ports_balance_and_pattern_matches(self, tmp_path):
        config = small("counter_rotating", [
            vortex_pulse(),
            vortex_pulse(rabi_rate_rad_s=6.0e4, detuning_recoils=-4.0,
                         duration_s=6.0e-5),
            {"absorb": "wide", "emit": "wide", "rabi_rate_rad_s": 1.4e5,
             "detuning_recoils": 0.0, "duration_s": 1.0e-4},
        ], tmp_path, imaging={"time_of_flight_s": 3e-3,
                              "meanfield_window_s": 3e-4})
        result = run_scenario(config)
        p_minus = result.summary["population_order_m1"]
        p_plus = result.summary["population_order_p1"]
        assert 0.2 < p_minus + p_plus < 0.6
        assert abs(p_minus - p_plus) < 0.05
        assert result.summary["pattern_xcorr_order_p1"] > 0.85
        assert "pattern_counter_rotating.pgm" in result.artifacts


class TestDoubleCharge:
    def test_winding_two_and_minima(self, tmp_path):
        config = small("double_charge", [
            vortex_pulse(rabi_rate_rad_s=6.9e4),
            vortex_pulse(rabi_rate_rad_s=6.8e4, detuning_recoils=12.0,
                         duration_s=7.0e-5),
            {"absorb": "wide", "emit": "wide", "rabi_rate_rad_s": 1.6e5,
             "detuning_recoils": 8.0, "duration_s": 4.0e-5},
        ], tmp_path, grid={"points_y": 64, "points_z": 64, "n_max": 4},
            imaging={"time_of_flight_s": 3e-3, "meanfield_window_s": 3e-4})
        result = run_scenario(config)
        assert result.summary["winding_order_p2"] == 2
        assert result.summary["l_z_order_p2"] == pytest.approx(2.0, abs=0.05)
        sep = result.summary["minima_separation_rad"]
        assert sep == pytest.approx(math.pi, abs=0.3)
        assert result.summary["pattern_xcorr_order_p2"] > 0.8
        p2 = result.summary["population_before_readout_order_p2"]
        p1_after_first = 0.18
        assert 0.6 < p2 / p1_after_first < 0.95


class TestPhaseCoherence:
    def test_slope_minus_one(self, tmp_path):
        config = small("phase_coherence", [
            vortex_pulse(),
            {"absorb": "wide", "emit": "g", "rabi_rate_rad_s": 7.0e4,
             "detuning_recoils": 4.0, "duration_s": 1.5e-5},
        ], tmp_path, study={"n_trials": 4},
            imaging={"time_of_flight_s": 0.0})
        result = run_scenario(config)
        assert result.summary["slope"] == pytest.approx(-1.0, abs=0.05)
        assert result.summary["max_residual_rad"] < math.radians(5.0)
        table = (Path(result.output_dir) / "study_table.tsv").read_text()
        lines = table.strip().split("\n")
        assert len(lines) == 5
        assert "hole_angle_rad" in lines[0].split("\t")
