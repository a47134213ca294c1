"""Scenario runner: one validated config in, one artifact bundle out.

Each scenario prepares the condensate, applies its pulse sequence, and
writes a deterministic bundle into the output directory: 16-bit PGM images
with text sidecars, delimited tables (per-pulse populations, study and
sweep tables), binary field dumps of the populated orders, the normalized
config echo, and a key/value machine summary.  With a fixed config and
single-threaded execution the bundle is bit-identical across runs.

Scenario shapes:
  single_vortex    pulse sequence, vortex diagnostics on order +1, TOF.
  counter_rotating sequence ending in the structureless mixer; the order
                   +1 image is compared against the analytic two-lobe
                   pattern built from its own radial profile.
  phase_coherence  per-trial hole-angle study plus one imaged trial.
  double_charge    vortex diagnostics on order +2 taken before the final
                   pulse (the interference readout), then the readout and
                   the comparison against the two-profile pattern.
  resonance_sweep  first-pulse detuning swept across sweep.*, one point
                   per isolated subdirectory, no TOF.
  custom           generic pipeline: whatever the sequence produces is
                   diagnosed and imaged; an empty sequence is the identity
                   and reproduces the prepared ground state.
"""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .condensate import GroundState, TrapSpec
from .config import ExperimentConfig, dumps
from .diagnostics import (oam_expectation, phase_correlation_study,
                          vortex_report)
from .dynamics import PulseSpec, SequenceSpec, evolve_free, run_sequence
from .errors import SimulationError
from .grid import Grid2D, LadderState, save_field
from .imaging import (ImagePlane, absorption_image, analytic_pattern,
                      radial_profile, time_of_flight, write_pgm)
from .optics import coupling_map, phase_readout_pattern
from .units import UnitSystem

logger = logging.getLogger("ramanvortex.scenarios")

IMAGE_POPULATION_FLOOR = 0.01
REPORT_POPULATION_FLOOR = 0.05
DUMP_POPULATION_FLOOR = 1e-3
PATTERN_SUPPORT_FLOOR = 0.01


def order_tag(n: int) -> str:
    """Filesystem-safe order label: -2 -> m2, 0 -> 0, +1 -> p1."""
    if n == 0:
        return "0"
    return f"p{n}" if n > 0 else f"m{-n}"


@dataclass(frozen=True)
class ScenarioResult:
    """Machine summary plus the relative paths written under output_dir."""

    scenario: str
    output_dir: str
    summary: dict
    artifacts: tuple[str, ...]


class _Bundle:
    """Artifact writer that remembers what it wrote, in order."""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        self.names: list[str] = []
        os.makedirs(output_dir, exist_ok=True)

    def path(self, name: str) -> str:
        sub = os.path.dirname(name)
        if sub:
            os.makedirs(os.path.join(self.output_dir, sub), exist_ok=True)
        return os.path.join(self.output_dir, name)

    def add_text(self, name: str, text: str) -> None:
        with open(self.path(name), "w", encoding="utf-8") as fh:
            fh.write(text)
        self.names.append(name)

    def add_image(self, name: str, image: ImagePlane) -> None:
        write_pgm(image, self.path(name))
        self.names.append(name)

    def add_field(self, name: str, field, units: UnitSystem,
                  component_index: int, label: str) -> None:
        save_field(field, self.path(name), units,
                   component_index=component_index, label=label)
        self.names.append(name)


@dataclass(frozen=True)
class _Context:
    cfg: ExperimentConfig
    units: UnitSystem
    grid: Grid2D
    trap: TrapSpec
    g2d_j_m2: float
    ground: GroundState

    @property
    def imaging(self) -> Mapping:
        return self.cfg.data["imaging"]

    def initial_state(self) -> LadderState:
        return LadderState.from_single_order(self.ground.field,
                                             self.cfg.n_max)

    def report_loop_radius_m(self) -> float:
        # inside the transferred annulus for both charge 1 and charge 2
        return 0.4 * self.ground.tf_radii_m[0]

    def display_image(self, state: LadderState, orders, label: str
                      ) -> ImagePlane:
        im = self.imaging
        return absorption_image(state, orders, im["pixel_m"],
                                blur_sigma_m=im["blur_sigma_m"],
                                noise_rms=im["noise_rms"],
                                seed=self.cfg.seed, label=label)

    def analysis_image(self, state: LadderState, orders, label: str
                       ) -> ImagePlane:
        # grid-pitch raster: exact match with analytic_pattern rasters
        return absorption_image(state, orders, state.grid.pitch_y_m,
                                label=label)

    def expand(self, state: LadderState) -> LadderState:
        im = self.imaging
        return time_of_flight(state, im["time_of_flight_s"],
                              im["meanfield_window_s"], self.g2d_j_m2,
                              pad_factor=im["pad_factor"])


def _prepare(cfg: ExperimentConfig) -> _Context:
    units = cfg.units()
    grid = cfg.make_grid(units)
    trap = cfg.trap()
    g2d = cfg.g2d_j_m2(units)
    logger.info("preparing %s ground state on %dx%d grid",
                cfg.data["condensate"]["profile"], grid.n_y, grid.n_z)
    ground = cfg.ground_state(grid)
    return _Context(cfg, units, grid, trap, g2d, ground)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _table(header: list[str], rows: list[list]) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def _populations_table(log: list[dict], n_max: int) -> str:
    orders = range(-n_max, n_max + 1)
    header = (["pulse", "delta_nu_recoils", "duration_s"]
              + [f"p_{order_tag(n)}" for n in orders])
    rows = [[entry["pulse"], entry["delta_nu_recoils"], entry["duration_s"]]
            + [entry["populations"][n] for n in orders]
            for entry in log]
    return _table(header, rows)


def _add_populations(summary: dict, state: LadderState) -> None:
    for n in state.orders:
        summary[f"population_order_{order_tag(n)}"] = state.population(n)


def _add_vortex_report(summary: dict, ctx: _Context, state: LadderState,
                       order: int) -> None:
    report = vortex_report(state.component(order),
                           ctx.report_loop_radius_m())
    tag = order_tag(order)
    summary[f"winding_order_{tag}"] = report.winding
    summary[f"l_z_order_{tag}"] = report.l_z_expect
    summary[f"core_y_m_order_{tag}"] = report.core_location[0]
    summary[f"core_z_m_order_{tag}"] = report.core_location[1]
    summary[f"winding_confidence_rad_order_{tag}"] = report.confidence


def _populated_orders(state: LadderState, floor: float) -> list[int]:
    return [n for n in state.orders if state.population(n) >= floor]


def _dump_fields(bundle: _Bundle, ctx: _Context, state: LadderState) -> None:
    for n in _populated_orders(state, DUMP_POPULATION_FLOOR):
        tag = order_tag(n)
        bundle.add_field(f"field_order_{tag}.bin", state.component(n),
                         ctx.units, n, f"final in-trap order {n}")


def _tof_images(bundle: _Bundle, ctx: _Context, state: LadderState,
                prefix: str = "tof_order_") -> LadderState | None:
    if ctx.imaging["time_of_flight_s"] <= 0.0:
        return None
    flown = ctx.expand(state)
    for n in _populated_orders(flown, IMAGE_POPULATION_FLOOR):
        tag = order_tag(n)
        bundle.add_image(f"{prefix}{tag}.pgm",
                         ctx.display_image(flown, (n,), f"{prefix}{tag}"))
    return flown


def _support_radius_m(image: ImagePlane) -> float:
    radii, mean = radial_profile(image)
    peak = float(mean.max())
    if peak <= 0.0:
        raise SimulationError("empty image: no pattern support")
    inside = radii[mean >= PATTERN_SUPPORT_FLOOR * peak]
    return 1.1 * float(inside.max())


def _centered_ncc(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    if denom == 0.0:
        return 0.0
    return float(np.sum(da * db) / denom)


def _best_pattern_match(image: ImagePlane, kind: str, profiles,
                        grid: Grid2D) -> tuple[float, float]:
    """Max centered cross-correlation over the pattern orientation.

    The fringe orientation is set by accumulated pulse phases, so it is a
    free parameter of the comparison: the analytic pattern is regenerated
    on the image's own raster for a scan of theta and the best match wins.
    Correlation is restricted to the disc where the image's azimuthal mean
    is above 1% of peak; the empty frame outside would flatter the score.
    """
    if image.pixels.shape != grid.shape:
        raise SimulationError("pattern comparison needs the grid-pitch "
                              "analysis image")
    zz, yy = np.meshgrid(grid.z_m, grid.y_m, indexing="ij")
    mask = np.hypot(yy, zz) <= _support_radius_m(image)
    measured = image.pixels[mask]

    def score(theta: float) -> float:
        pattern = analytic_pattern(kind, profiles, grid, theta=theta)
        return _centered_ncc(measured, pattern.pixels[mask])

    thetas = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    scores = [score(t) for t in thetas]
    best = int(np.argmax(scores))
    lo = thetas[best] - 2.0 * math.pi / 64
    hi = thetas[best] + 2.0 * math.pi / 64
    fine = np.linspace(lo, hi, 17)
    fine_scores = [score(t) for t in fine]
    k = int(np.argmax(fine_scores))
    return float(fine_scores[k]), float(fine[k] % (2.0 * math.pi))


def _azimuthal_minima(image: ImagePlane, annulus_m: tuple[float, float],
                      n_bins: int | None = None) -> list[float]:
    """Angles of local minima of the azimuthal intensity profile.

    The profile is the mean intensity per angular bin over the annulus;
    minima are bins below both circular neighbours, deepest first.  The
    bin count follows the pixel pitch (about three pixels per bin along
    the annulus midline, capped at 90) so coarse grids stay usable.
    """
    if n_bins is None:
        mid_circumference = math.pi * (annulus_m[0] + annulus_m[1])
        n_bins = int(mid_circumference / image.pitch_m / 3.0)
        n_bins = max(12, min(90, n_bins))
    y, z = image.axes_m()
    zz, yy = np.meshgrid(z, y, indexing="ij")
    rho = np.hypot(yy, zz)
    mask = (rho >= annulus_m[0]) & (rho <= annulus_m[1])
    phi = np.arctan2(zz, yy)[mask]
    bins = ((phi + math.pi) / (2.0 * math.pi) * n_bins).astype(int) % n_bins
    counts = np.bincount(bins, minlength=n_bins)
    if counts.min() == 0:
        raise SimulationError("annulus too thin for the angular binning")
    profile = np.bincount(bins, weights=image.pixels[mask],
                          minlength=n_bins) / counts
    left = np.roll(profile, 1)
    right = np.roll(profile, -1)
    minima = np.flatnonzero((profile < left) & (profile < right))
    angles = (minima + 0.5) / n_bins * 2.0 * math.pi - math.pi
    order = np.argsort(profile[minima])
    return [float(angles[i]) for i in order]


def _base_summary(ctx: _Context) -> dict:
    return {
        "scenario": ctx.cfg.scenario,
        "schema_version": ctx.cfg.data["schema_version"],
        "seed": ctx.cfg.seed,
        "chemical_potential_j": ctx.ground.chemical_potential_j,
        "tf_radius_y_m": ctx.ground.tf_radii_m[0],
        "tf_radius_z_m": ctx.ground.tf_radii_m[1],
    }


def _run_pulse_pipeline(ctx: _Context, bundle: _Bundle
                        ) -> tuple[LadderState, list[dict]]:
    seq, hold_s = ctx.cfg.sequence_spec(ctx.grid)
    state = ctx.initial_state()
    bundle.add_image("ground_density.pgm",
                     ctx.display_image(state, (0,), "ground_density"))
    logger.info("running %d pulse(s)", len(seq.pulses))
    state, log = run_sequence(state, seq, ctx.trap, ctx.g2d_j_m2)
    if hold_s > 0.0:
        state = evolve_free(state, hold_s, ctx.trap, ctx.g2d_j_m2)
    bundle.add_text("populations.tsv",
                    _populations_table(log, ctx.cfg.n_max))
    return state, log


def _run_single_vortex(ctx: _Context, bundle: _Bundle) -> dict:
    state, _ = _run_pulse_pipeline(ctx, bundle)
    summary = _base_summary(ctx)
    _add_populations(summary, state)
    _add_vortex_report(summary, ctx, state, 1)
    bundle.add_image("density_order_p1.pgm",
                     ctx.display_image(state, (1,), "density_order_p1"))
    _dump_fields(bundle, ctx, state)
    _tof_images(bundle, ctx, state)
    return summary


def _run_counter_rotating(ctx: _Context, bundle: _Bundle) -> dict:
    state, _ = _run_pulse_pipeline(ctx, bundle)
    summary = _base_summary(ctx)
    _add_populations(summary, state)
    summary["l_z_order_p1"] = oam_expectation(state.component(1))
    _dump_fields(bundle, ctx, state)
    flown = _tof_images(bundle, ctx, state)
    if flown is None:
        return summary
    analysis = ctx.analysis_image(flown, (1,), "interference_order_p1")
    radii, mean = radial_profile(analysis)
    # azimuthal mean of 4 f^2 cos^2 is 2 f^2, so f = sqrt(mean / 2)
    amplitude = np.sqrt(np.maximum(mean, 0.0) / 2.0)
    xcorr, theta = _best_pattern_match(analysis, "counter_rotating",
                                       (radii, amplitude), flown.grid)
    bundle.add_image("pattern_counter_rotating.pgm",
                     analytic_pattern("counter_rotating",
                                      (radii, amplitude), flown.grid,
                                      theta=theta))
    summary["pattern_xcorr_order_p1"] = xcorr
    summary["pattern_theta_rad"] = theta
    return summary


def _run_double_charge(ctx: _Context, bundle: _Bundle) -> dict:
    seq, hold_s = ctx.cfg.sequence_spec(ctx.grid)
    generation = SequenceSpec(seq.pulses[:-1], seq.delays_s[:-1]
                              if seq.delays_s else ())
    pre_readout_delay_s = seq.delays_s[-1] if seq.delays_s else 0.0
    readout = seq.pulses[-1]
    state = ctx.initial_state()
    bundle.add_image("ground_density.pgm",
                     ctx.display_image(state, (0,), "ground_density"))
    logger.info("running %d generation pulse(s)", len(generation.pulses))
    state, log = run_sequence(state, generation, ctx.trap, ctx.g2d_j_m2)
    if pre_readout_delay_s > 0.0:
        state = evolve_free(state, pre_readout_delay_s, ctx.trap,
                            ctx.g2d_j_m2)

    summary = _base_summary(ctx)
    _add_vortex_report(summary, ctx, state, 2)
    p0_before = state.population(0)
    p2_before = state.population(2)
    summary["population_before_readout_order_0"] = p0_before
    summary["population_before_readout_order_p1"] = state.population(1)
    summary["population_before_readout_order_p2"] = p2_before
    bundle.add_image("density_order_p2.pgm",
                     ctx.display_image(state, (2,), "density_order_p2"))
    before = _tof_images(bundle, ctx, state, prefix="tof_before_readout_")

    logger.info("running the interference readout pulse")
    final, read_log = run_sequence(state, SequenceSpec((readout,)),
                                   ctx.trap, ctx.g2d_j_m2)
    if hold_s > 0.0:
        final = evolve_free(final, hold_s, ctx.trap, ctx.g2d_j_m2)
    bundle.add_text("populations.tsv",
                    _populations_table(log + read_log, ctx.cfg.n_max))
    _add_populations(summary, final)
    _dump_fields(bundle, ctx, final)
    flown = _tof_images(bundle, ctx, final)
    if flown is None or before is None:
        return summary

    # mixing weights of the 0<->2 readout from the population balance;
    # winding orthogonality makes the cross term norm-free
    p2_after = final.population(2)
    if abs(p0_before - p2_before) < 1e-12:
        s_sq = 0.5
    else:
        s_sq = min(1.0, max(0.0, (p2_after - p2_before)
                            / (p0_before - p2_before)))
    c_sq = 1.0 - s_sq
    radii0, mean0 = radial_profile(ctx.analysis_image(before, (0,),
                                                      "nonrot_profile"))
    radii2, mean2 = radial_profile(ctx.analysis_image(before, (2,),
                                                      "rot_profile"))
    prof_nonrot = (radii0, math.sqrt(s_sq) * np.sqrt(np.maximum(mean0, 0.0)))
    prof_rot = (radii2, math.sqrt(c_sq) * np.sqrt(np.maximum(mean2, 0.0)))
    analysis = ctx.analysis_image(flown, (2,), "interference_order_p2")
    xcorr, theta = _best_pattern_match(analysis, "doubly_vs_nonrot",
                                       (prof_nonrot, prof_rot), flown.grid)
    bundle.add_image("pattern_doubly_vs_nonrot.pgm",
                     analytic_pattern("doubly_vs_nonrot",
                                      (prof_nonrot, prof_rot), flown.grid,
                                      theta=theta))
    summary["readout_mixed_fraction"] = s_sq
    summary["pattern_xcorr_order_p2"] = xcorr
    summary["pattern_theta_rad"] = theta

    # the two interference holes, measured mid-cloud where both components
    # have support; the radius scale comes from the image itself so TOF
    # magnification drops out
    support = _support_radius_m(analysis)
    minima = _azimuthal_minima(analysis, (0.25 * support, 0.6 * support))
    if len(minima) >= 2:
        a, b = minima[0], minima[1]
        summary["interference_minimum_1_rad"] = a
        summary["interference_minimum_2_rad"] = b
        gap = abs(a - b) % (2.0 * math.pi)
        summary["minima_separation_rad"] = min(gap, 2.0 * math.pi - gap)
    return summary


def _run_phase_coherence(ctx: _Context, bundle: _Bundle) -> dict:
    cfg = ctx.cfg
    pulses = cfg.data["pulses"]
    study = cfg.data["study"]
    beams = cfg.data["beams"]
    first, second = pulses
    phases = study["phases_rad"]
    n_trials = study["n_trials"]

    logger.info("running %d phase trials", n_trials)
    result = phase_correlation_study(
        n_trials, phases,
        grid=ctx.grid, ground=ctx.ground.field, trap=ctx.trap,
        g2d_j_m2=ctx.g2d_j_m2,
        first_peak_rate_rad_s=first["rabi_rate_rad_s"],
        second_peak_rate_rad_s=second["rabi_rate_rad_s"],
        pulse_duration_s=first["duration_s"],
        second_duration_s=second["duration_s"],
        lg_waist_m=beams[first["absorb"]]["waist_m"],
        gauss_a_waist_m=beams[first["emit"]]["waist_m"],
        gauss_b_waist_m=beams[second["absorb"]]["waist_m"],
        detuning_recoils=first["detuning_recoils"],
        annulus_m=(study["annulus_inner_m"], study["annulus_outer_m"]),
        n_max=cfg.n_max)
    bundle.add_text("study_table.tsv", result.table_text())

    # image the first trial: the hole and the optical readout that
    # references its angle
    trial_phase = result.rows[0]["beam_phase_rad"]
    lg = cfg.beam_spec(first["absorb"], extra_phase_rad=trial_phase)
    readout_image, readout_angle = phase_readout_pattern(
        lg, cfg.beam_spec(first["emit"]), 0.0, ctx.grid)
    bundle.add_image("readout_pattern.pgm", readout_image)

    state = ctx.initial_state()
    bundle.add_image("ground_density.pgm",
                     ctx.display_image(state, (0,), "ground_density"))
    seq, _ = cfg.sequence_spec(ctx.grid)
    trial_coupling = coupling_map(lg, cfg.beam_spec(first["emit"]),
                                  first["rabi_rate_rad_s"],
                                  first["relative_phase_rad"], ctx.grid)
    trial_first = PulseSpec(trial_coupling, first["detuning_recoils"],
                            first["duration_s"], trap_on=first["trap_on"])
    state, log = run_sequence(state, SequenceSpec((trial_first,
                                                   seq.pulses[1]),
                                                  seq.delays_s),
                              ctx.trap, ctx.g2d_j_m2)
    bundle.add_text("populations.tsv",
                    _populations_table(log, cfg.n_max))
    hole = absorption_image(state, (0, 1), ctx.grid.pitch_y_m,
                            label="hole_image")
    bundle.add_image("hole_image.pgm", hole)

    summary = _base_summary(ctx)
    _add_populations(summary, state)
    summary["n_trials"] = n_trials
    summary["slope"] = result.slope
    summary["intercept_rad"] = result.intercept_rad
    summary["max_residual_rad"] = float(np.max(np.abs(result.residuals_rad)))
    summary["trial_0_readout_angle_rad"] = readout_angle
    summary["trial_0_hole_angle_rad"] = result.rows[0]["hole_angle_rad"]
    return summary


def _run_resonance_sweep(ctx: _Context, bundle: _Bundle) -> dict:
    cfg = ctx.cfg
    seq, _ = cfg.sequence_spec(ctx.grid)
    detunings = cfg.sweep_detunings()
    initial = ctx.initial_state()
    bundle.add_image("ground_density.pgm",
                     ctx.display_image(initial, (0,), "ground_density"))

    orders = range(-cfg.n_max, cfg.n_max + 1)
    rows = []
    for i, detuning in enumerate(detunings):
        logger.info("sweep point %d/%d: detuning %.3f recoils",
                    i + 1, len(detunings), detuning)
        first = cfg.pulse_spec(0, ctx.grid, detuning_recoils=detuning)
        point_seq = SequenceSpec((first,) + seq.pulses[1:], seq.delays_s)
        state, log = run_sequence(initial, point_seq, ctx.trap,
                                  ctx.g2d_j_m2)
        bundle.add_text(f"point_{i:02d}/populations.tsv",
                        _populations_table(log, cfg.n_max))
        rows.append([detuning] + [state.population(n) for n in orders])

    header = ["detuning_recoils"] + [f"p_{order_tag(n)}" for n in orders]
    bundle.add_text("sweep_table.tsv", _table(header, rows))

    transfers = [row[header.index("p_p1")] for row in rows]
    best = int(np.argmax(transfers))
    summary = _base_summary(ctx)
    summary["n_points"] = len(detunings)
    summary["peak_detuning_recoils"] = detunings[best]
    summary["peak_transfer"] = transfers[best]
    return summary


def _run_custom(ctx: _Context, bundle: _Bundle) -> dict:
    state, _ = _run_pulse_pipeline(ctx, bundle)
    summary = _base_summary(ctx)
    _add_populations(summary, state)
    for n in _populated_orders(state, REPORT_POPULATION_FLOOR):
        if n != 0:
            _add_vortex_report(summary, ctx, state, n)
    for n in _populated_orders(state, IMAGE_POPULATION_FLOOR):
        tag = order_tag(n)
        bundle.add_image(f"density_order_{tag}.pgm",
                         ctx.display_image(state, (n,),
                                           f"density_order_{tag}"))
    _dump_fields(bundle, ctx, state)
    _tof_images(bundle, ctx, state)
    return summary


_RUNNERS = {
    "single_vortex": _run_single_vortex,
    "counter_rotating": _run_counter_rotating,
    "phase_coherence": _run_phase_coherence,
    "double_charge": _run_double_charge,
    "resonance_sweep": _run_resonance_sweep,
    "custom": _run_custom,
}


def _summary_text(summary: dict) -> str:
    lines = [f"{key}\t{_format_value(value)}" for key, value in
             summary.items()]
    return "\n".join(lines) + "\n"


def run_scenario(config, output_dir: str | None = None) -> ScenarioResult:
    """Run the scenario a config describes and write its artifact bundle.

    config may be an ExperimentConfig, a mapping, or a path to a config
    file.  output_dir overrides the config's own output directory.
    """
    if isinstance(config, ExperimentConfig):
        cfg = config
    elif isinstance(config, Mapping):
        cfg = ExperimentConfig.from_mapping(config)
    else:
        cfg = ExperimentConfig.from_file(config)

    out = output_dir if output_dir is not None else cfg.output_dir
    bundle = _Bundle(out)
    bundle.add_text("config_echo.json", dumps(cfg.data))

    ctx = _prepare(cfg)
    logger.info("scenario %s -> %s", cfg.scenario, out)
    summary = _RUNNERS[cfg.scenario](ctx, bundle)

    bundle.add_text("summary.tsv", _summary_text(summary))
    bundle.add_text("summary.tsv.meta",
                    "format: key\\tvalue per line\n"
                    f"scenario: {cfg.scenario}\n"
                    f"schema_version: {cfg.data['schema_version']}\n"
                    "floats: repr round-trip precision\n")
    logger.info("wrote %d artifacts", len(bundle.names))
    return ScenarioResult(cfg.scenario, out, summary, tuple(bundle.names))
