"""Command-line orchestration: configs, presets, experiments, artifacts.

Subcommands: ``run`` (full pipeline from an INI config), ``validate``
(admissibility report for a material at given kernel scales), ``oracle``
(randomized exhaustive minimization suite), ``probe`` (measure a snapshot),
and ``experiment`` (named acceptance experiments with stored tolerances).
Exit codes: 0 pass, 1 failure, 2 usage; on failure the last output line is a
single machine-parsable ``ERROR kind=... detail="..."`` record.
"""

import argparse
import configparser
import json
import math
import os
import sys
import time as _time
from dataclasses import dataclass, field as _field

import numpy as np
import scipy.fft as sfft

from .energetics import approximate_energy, write_metrics
from .errors import ConfigError, ThresholdFlowError
from .geometry_probes import (
    disk_radius,
    interface_length,
    junction_angles,
    shrink_rate_fit,
    write_probes_csv,
    young_angles,
    young_force_residual,
)
from .kernel_synthesis import (
    MaterialSpec,
    compute_coefficients,
    suggest_scales,
    uniform_material,
    validate,
)
from .spectral_field import (
    GridSpec,
    LabelField,
    check_resolution,
    read_labels,
    write_labels,
)
from .thresholding_engine import SchemeConfig, run

__all__ = [
    "InitialCondition",
    "RunConfig",
    "build_initial",
    "parse_config",
    "main",
    "cli_main",
    "EXPERIMENTS",
]

PRESETS = ("disk", "stripe", "mercedes", "voronoi", "raw")
MIN_RUN_SIZE = 8


@dataclass
class InitialCondition:
    """Named initial-condition preset with its parameters and RNG seed."""

    kind: str
    params: dict = _field(default_factory=dict)
    seed: int = 0


@dataclass
class RunConfig:
    """Fully resolved run description (scales already concrete numbers)."""

    material: MaterialSpec
    gamma: float
    beta: float
    auto_scales: bool
    grid: GridSpec
    scheme: SchemeConfig
    initial: InitialCondition
    outdir: str = "out"
    probes: dict = _field(default_factory=dict)


# ---------------------------------------------------------------------------
# Initial conditions


def build_initial(grid, num_phases, init):
    """Materialize an InitialCondition into a LabelField."""
    if init.kind not in PRESETS:
        raise ConfigError(
            f"initial.kind: unknown preset {init.kind!r}; available: "
            + ", ".join(PRESETS))
    builder = {
        "disk": _build_disk,
        "stripe": _build_stripe,
        "mercedes": _build_mercedes,
        "voronoi": _build_voronoi,
        "raw": _build_raw,
    }[init.kind]
    labels = builder(grid, num_phases, init)
    return LabelField(grid, labels.astype(np.uint8), num_phases)


def _param(init, key, default):
    return init.params.get(key, default)


def _build_disk(grid, num_phases, init):
    radius = float(_param(init, "radius", 0.25))
    center = _param(init, "center", [0.5] * grid.dim)
    phase_in = int(_param(init, "phase_in", 1))
    phase_out = int(_param(init, "phase_out", 0))
    for name, phase in (("phase_in", phase_in), ("phase_out", phase_out)):
        if not (0 <= phase < num_phases):
            raise ConfigError(f"initial.{name}: phase {phase} out of range")
    axes = grid.cell_centers()
    dist_sq = np.zeros(grid.sizes)
    for ax, (coords, c) in enumerate(zip(axes, center)):
        delta = np.abs(coords - float(c))
        delta = np.minimum(delta, 1.0 - delta)
        shape = [1] * grid.dim
        shape[ax] = len(coords)
        dist_sq = dist_sq + (delta ** 2).reshape(shape)
    labels = np.full(grid.sizes, phase_out, dtype=np.uint8)
    labels[dist_sq <= radius * radius] = phase_in
    return labels


def _build_stripe(grid, num_phases, init):
    axis = int(_param(init, "axis", 0))
    width = float(_param(init, "width", 0.5))
    offset = float(_param(init, "offset", (1.0 - width) / 2.0))
    phase_in = int(_param(init, "phase_in", 1))
    phase_out = int(_param(init, "phase_out", 0))
    if not (0 <= axis < grid.dim):
        raise ConfigError(f"initial.axis: {axis} out of range for dim {grid.dim}")
    coords = grid.cell_centers()[axis]
    inside = ((coords - offset) % 1.0) < width
    shape = [1] * grid.dim
    shape[axis] = len(coords)
    labels = np.where(inside.reshape(shape), phase_in, phase_out)
    return np.broadcast_to(labels, grid.sizes).copy()


def _build_mercedes(grid, num_phases, init):
    if grid.dim != 2:
        raise ConfigError("initial.kind: mercedes preset requires a 2D grid")
    if num_phases < 3:
        raise ConfigError("initial.kind: mercedes preset needs at least 3 phases")
    center = _param(init, "center", [0.5, 0.5])
    start_deg = float(_param(init, "start_angle", 90.0))
    xs, ys = grid.cell_centers()
    dx = xs[:, None] - float(center[0])
    dy = ys[None, :] - float(center[1])
    dx = (dx + 0.5) % 1.0 - 0.5
    dy = (dy + 0.5) % 1.0 - 0.5
    theta = np.degrees(np.arctan2(dy, dx))
    sector = np.floor(((theta - start_deg) % 360.0) / 120.0).astype(np.uint8)
    return np.minimum(sector, 2)


def _build_voronoi(grid, num_phases, init):
    count = int(_param(init, "k", num_phases))
    if count < 1:
        raise ConfigError(f"initial.k: need at least one seed, got {count}")
    rng = np.random.default_rng(init.seed)
    seeds = rng.random((count, grid.dim))
    seed_phase = (np.arange(count) % num_phases).astype(np.uint8)
    axes = grid.cell_centers()
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    labels = np.empty(grid.cells, dtype=np.uint8)
    chunk = 65536
    for start in range(0, grid.cells, chunk):
        block = points[start:start + chunk]
        delta = np.abs(block[:, None, :] - seeds[None, :, :])
        delta = np.minimum(delta, 1.0 - delta)
        nearest = np.argmin((delta ** 2).sum(axis=2), axis=1)
        labels[start:start + len(block)] = seed_phase[nearest]
    return labels.reshape(grid.sizes)


def _build_raw(grid, num_phases, init):
    path = _param(init, "path", None)
    if path is None:
        raise ConfigError("initial.path: raw preset requires a snapshot path")
    field, _, _ = read_labels(_strip_snapshot_suffix(path))
    if field.grid != grid:
        raise ConfigError(
            f"initial.path: snapshot grid {field.grid.sizes} does not match "
            f"configured grid {grid.sizes}")
    if int(field.labels.max(initial=0)) >= num_phases:
        raise ConfigError(
            "initial.path: snapshot labels exceed the configured phase count")
    return field.labels


def _strip_snapshot_suffix(path):
    path = str(path)
    for suffix in (".hdr", ".bin"):
        if path.endswith(suffix):
            return path[: -len(suffix)]
    return path


# ---------------------------------------------------------------------------
# Config parsing


def parse_config(text):
    """Parse the INI run schema into a fully resolved RunConfig.

    Sections: [material] N, sigma, mu (matrices as JSON row lists);
    [scales] gamma, beta (numbers or "auto"); [grid] dim, sizes;
    [scheme] h, steps, tie_break, record_every; [initial] kind + parameters
    + seed; [output] directory; optional [probes] disk_phase / interface /
    junctions / window.  "auto" scales are resolved through the suggested
    admissible pair and echoed.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from exc

    for section in ("material", "grid", "scheme", "initial"):
        if not parser.has_section(section):
            raise ConfigError(f"{section}: section missing")

    material = _parse_material(parser["material"])
    grid = _parse_grid(parser["grid"])
    gamma, beta, auto = _parse_scales(parser, material)
    scheme = _parse_scheme(parser["scheme"])
    initial = _parse_initial(parser["initial"])
    outdir = "out"
    if parser.has_section("output"):
        outdir = parser["output"].get("directory", "out")
    probes = _parse_probes(parser["probes"]) if parser.has_section("probes") else {}
    return RunConfig(material=material, gamma=gamma, beta=beta, auto_scales=auto,
                     grid=grid, scheme=scheme, initial=initial, outdir=outdir,
                     probes=probes)


def _get(section, key, path, convert, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{path}: key missing")
        return default
    raw = section[key]
    try:
        return convert(raw)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _matrix(raw):
    value = json.loads(raw)
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix (list of rows), got shape {arr.shape}")
    return arr


def _parse_material(section):
    n = _get(section, "N", "material.N", int, required=True)
    sigma = _get(section, "sigma", "material.sigma", _matrix, required=True)
    mu = _get(section, "mu", "material.mu", _matrix, required=True)
    for name, arr in (("sigma", sigma), ("mu", mu)):
        if arr.shape != (n, n):
            raise ConfigError(
                f"material.{name}: shape {arr.shape} does not match N={n}")
        if not np.array_equal(arr, arr.T):
            raise ConfigError(f"material.{name}: matrix is not symmetric")
    try:
        return MaterialSpec(n, sigma, mu)
    except ThresholdFlowError as exc:
        raise ConfigError(f"material: {exc}") from exc


def _parse_grid(section):
    dim = _get(section, "dim", "grid.dim", int, required=True)
    sizes = _get(section, "sizes", "grid.sizes", json.loads, required=True)
    if not isinstance(sizes, list) or len(sizes) != dim:
        raise ConfigError(f"grid.sizes: expected a list of {dim} sizes")
    sizes = tuple(int(s) for s in sizes)
    if any(s < MIN_RUN_SIZE for s in sizes):
        raise ConfigError(
            f"grid.sizes: run grids need at least {MIN_RUN_SIZE} cells per axis")
    try:
        return GridSpec(dim, sizes)
    except ThresholdFlowError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _parse_scales(parser, material):
    gamma_raw = beta_raw = "auto"
    if parser.has_section("scales"):
        gamma_raw = parser["scales"].get("gamma", "auto").strip()
        beta_raw = parser["scales"].get("beta", "auto").strip()
    auto = gamma_raw == "auto" or beta_raw == "auto"
    suggestion = None
    if auto:
        try:
            suggestion = suggest_scales(material)
        except ThresholdFlowError as exc:
            raise ConfigError(f"scales: auto resolution failed: {exc}") from exc
    try:
        gamma = suggestion[0] if gamma_raw == "auto" else float(gamma_raw)
        beta = suggestion[1] if beta_raw == "auto" else float(beta_raw)
    except ValueError as exc:
        raise ConfigError(f"scales: {exc}") from exc
    if not gamma > beta > 0.0:
        raise ConfigError(f"scales: need gamma > beta > 0, got ({gamma}, {beta})")
    return gamma, beta, auto


def _parse_scheme(section):
    h = _get(section, "h", "scheme.h", float, required=True)
    steps = _get(section, "steps", "scheme.steps", int, required=True)
    tie_break = section.get("tie_break", "lowest-index")
    record_every = _get(section, "record_every", "scheme.record_every", int,
                        default=0)
    try:
        return SchemeConfig(h=h, steps=steps, tie_break=tie_break,
                            record_every=record_every)
    except (ThresholdFlowError, ValueError) as exc:
        raise ConfigError(f"scheme: {exc}") from exc


def _parse_initial(section):
    kind = section.get("kind")
    if kind is None:
        raise ConfigError("initial.kind: key missing")
    kind = kind.strip()
    if kind not in PRESETS:
        raise ConfigError(
            f"initial.kind: unknown preset {kind!r}; available: "
            + ", ".join(PRESETS))
    seed = _get(section, "seed", "initial.seed", int, default=0)
    params = {}
    for key, raw in section.items():
        if key in ("kind", "seed"):
            continue
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return InitialCondition(kind=kind, params=params, seed=seed)


def _parse_probes(section):
    probes = {}
    if "disk_phase" in section:
        probes["disk_phase"] = _get(section, "disk_phase", "probes.disk_phase", int)
    if "interface" in section:
        pair = _get(section, "interface", "probes.interface", json.loads)
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError("probes.interface: expected a [i, j] pair")
        probes["interface"] = (int(pair[0]), int(pair[1]))
    if "junctions" in section:
        probes["junctions"] = section.getboolean("junctions")
    if "window" in section:
        probes["window"] = _get(section, "window", "probes.window", int)
    if "shrink_phase" in section:
        probes["shrink_phase"] = _get(section, "shrink_phase",
                                      "probes.shrink_phase", int)
    return probes


def config_echo(cfg, seed):
    """INI text of the fully resolved configuration (auto scales replaced)."""
    lines = ["[material]", f"N = {cfg.material.num_phases}",
             f"sigma = {json.dumps(cfg.material.sigma.tolist())}",
             f"mu = {json.dumps(cfg.material.mu.tolist())}",
             "", "[scales]", f"gamma = {cfg.gamma!r}", f"beta = {cfg.beta!r}",
             f"resolved_from_auto = {cfg.auto_scales}",
             "", "[grid]", f"dim = {cfg.grid.dim}",
             f"sizes = {json.dumps(list(cfg.grid.sizes))}",
             "", "[scheme]", f"h = {cfg.scheme.h!r}",
             f"steps = {cfg.scheme.steps}",
             f"tie_break = {cfg.scheme.tie_break}",
             f"record_every = {cfg.scheme.record_every}",
             "", "[initial]", f"kind = {cfg.initial.kind}", f"seed = {seed}"]
    for key, value in sorted(cfg.initial.params.items()):
        lines.append(f"{key} = {json.dumps(value)}")
    lines += ["", "[output]", f"directory = {cfg.outdir}"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Artifacts


def write_pgm(path, labels):
    """8-bit binary PGM of a 2D label field, one gray level per phase."""
    lab = labels.labels
    scale = 255 // max(labels.num_phases - 1, 1)
    img = (lab.astype(np.uint16) * scale).astype(np.uint8)
    with open(path, "wb") as sink:
        sink.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        sink.write(img.tobytes())


def _probe_rows(cfg, trajectory):
    rows = []
    nan = float("nan")
    final = trajectory.final
    final_step = cfg.scheme.steps
    if "disk_phase" in cfg.probes:
        phase = cfg.probes["disk_phase"]
        rows.append(("disk_radius", 0,
                     disk_radius(trajectory.initial, phase), nan, nan))
        for step, labels in trajectory.snapshots:
            rows.append(("disk_radius", step, disk_radius(labels, phase),
                         nan, nan))
    if "interface" in cfg.probes:
        i, j = cfg.probes["interface"]
        measure = interface_length(final, i, j)
        rows.append(("interface_length", final_step, measure.length_estimate,
                     nan, nan))
    if cfg.probes.get("junctions"):
        window = cfg.probes.get("window", 16)
        for report in junction_angles(final, window=window):
            for angle in report.angles:
                rows.append(("junction_angle", final_step, angle, nan, nan))
    if "shrink_phase" in cfg.probes:
        phase = cfg.probes["shrink_phase"]
        slope, rms = shrink_rate_fit(trajectory, phase)
        rows.append(("shrink_rate", final_step, slope, nan, rms))
    return rows


def execute_run(cfg, seed=None):
    """Run the full pipeline for a RunConfig; returns (trajectory, coeffs)."""
    if seed is not None:
        cfg.initial.seed = int(seed)
    coeffs = compute_coefficients(cfg.material, cfg.gamma, cfg.beta)
    report = validate(cfg.material, coeffs)
    if not report.definiteness_pass:
        raise ConfigError(
            "scales: coefficients fail conditional definiteness; "
            "choose wider gamma / narrower beta (see validate)")
    check_resolution(cfg.grid, cfg.beta, cfg.scheme.h)
    initial = build_initial(cfg.grid, cfg.material.num_phases, cfg.initial)
    trajectory = run(initial, coeffs, cfg.scheme)

    os.makedirs(cfg.outdir, exist_ok=True)
    with open(os.path.join(cfg.outdir, "config.echo"), "w",
              encoding="utf-8") as sink:
        sink.write(config_echo(cfg, cfg.initial.seed))
    write_metrics(os.path.join(cfg.outdir, "metrics.csv"), trajectory.reports,
                  cfg.material.num_phases)
    for step, labels in trajectory.snapshots:
        write_labels(os.path.join(cfg.outdir, f"labels_{step:06d}"), labels,
                     step=step, time=step * cfg.scheme.h)
    if cfg.grid.dim == 2:
        write_pgm(os.path.join(cfg.outdir, "final.pgm"), trajectory.final)
    if cfg.probes:
        write_probes_csv(os.path.join(cfg.outdir, "probes.csv"),
                         _probe_rows(cfg, trajectory))
    return trajectory, coeffs


# ---------------------------------------------------------------------------
# Experiments


def _relax_disk(mu, h, steps=120, radius=0.35, size=512, record_every=0):
    spec = uniform_material(2, sigma=1.0, mu=mu)
    gamma, beta = suggest_scales(spec)
    coeffs = compute_coefficients(spec, gamma, beta)
    validate(spec, coeffs)
    grid = GridSpec(2, (size, size))
    initial = build_initial(grid, 2, InitialCondition(
        "disk", {"radius": radius, "phase_in": 1, "phase_out": 0}))
    scheme = SchemeConfig(h=h, steps=steps, record_every=record_every)
    return run(initial, coeffs, scheme)


def _experiment_shrinking_disk(outdir):
    start = _time.perf_counter()
    trajectory = _relax_disk(mu=1.0, h=2e-4, steps=120)
    slope, rms = shrink_rate_fit(trajectory, 1)
    target = -2.0
    rel = abs(slope - target) / abs(target)
    lines = [
        f"fitted slope of r^2(t): {slope:.6f}",
        f"analytic target -2*sigma*mu: {target:.6f}",
        f"relative error: {rel:.4%} (tolerance 5%)",
        f"fit rms residual: {rms:.3e}",
        f"runtime: {_time.perf_counter() - start:.1f}s",
    ]
    _write_experiment_metrics(outdir, trajectory, 2)
    return rel <= 0.05, lines


def _experiment_mobility_ratio(outdir):
    start = _time.perf_counter()
    matched = ((0.5, 4e-4), (1.0, 2e-4), (2.0, 1e-4))
    slopes = {}
    lines = []
    passed = True
    for mu, h in matched:
        trajectory = _relax_disk(mu=mu, h=h, steps=120)
        slope, _ = shrink_rate_fit(trajectory, 1)
        slopes[mu] = slope
        rel = abs(slope + 2.0 * mu) / (2.0 * mu)
        passed &= rel <= 0.05
        lines.append(f"mu={mu}: slope {slope:.6f} target {-2.0 * mu:.6f} "
                     f"rel {rel:.4%}")
    ratio = slopes[2.0] / slopes[0.5]
    ratio_rel = abs(ratio - 4.0) / 4.0
    passed &= ratio_rel <= 0.05
    lines.append(f"slope ratio mu=2 / mu=0.5: {ratio:.6f} target 4 "
                 f"rel {ratio_rel:.4%}")
    lines.append(f"runtime: {_time.perf_counter() - start:.1f}s")
    return passed, lines


def _central_junction(labels, window=16):
    reports = junction_angles(labels, window=window)
    if not reports:
        return None
    def distance_to_center(rep):
        dx = abs(rep.location[0] - 0.5)
        dy = abs(rep.location[1] - 0.5)
        return min(dx, 1 - dx) ** 2 + min(dy, 1 - dy) ** 2
    return min(reports, key=distance_to_center)


# Relaxation schedule for the junction-angle experiment.  The junction is
# measured at several spaced checkpoints and the per-wedge angles averaged:
# a single snapshot of a lattice junction carries ~1-2 degrees of
# rasterization jitter that the average suppresses.  The sector boundaries
# start 10 degrees clockwise of the axis-aligned orientation so that no ray
# lies along a grid axis or diagonal, where staircase locking stalls the
# rotation toward the equilibrium angles.
_JUNCTION_START_ANGLE = 80.0
_JUNCTION_STEP_SIZE = 2e-4
_JUNCTION_CHECKPOINTS = (90, 100, 110, 120, 130)
_JUNCTION_FIT_WINDOW = 48


def _relaxed_junction_angles(sigma_23, size=512):
    """Mean wedge angles (by phase) of a relaxed three-sector junction."""
    if sigma_23 == 1.0:
        spec = uniform_material(3)
    else:
        off = 1.0 - np.eye(3)
        sigma = off.copy()
        sigma[1, 2] = sigma[2, 1] = sigma_23
        spec = MaterialSpec(3, sigma, off)
    gamma, beta = suggest_scales(spec)
    coeffs = compute_coefficients(spec, gamma, beta)
    validate(spec, coeffs)
    grid = GridSpec(2, (size, size))
    labels = build_initial(
        grid, 3,
        InitialCondition("mercedes", {"start_angle": _JUNCTION_START_ANGLE}))
    sums = np.zeros(3)
    count = 0
    step = 0
    for checkpoint in _JUNCTION_CHECKPOINTS:
        cfg = SchemeConfig(h=_JUNCTION_STEP_SIZE, steps=checkpoint - step)
        labels = run(labels, coeffs, cfg).final
        step = checkpoint
        report = _central_junction(labels, window=_JUNCTION_FIT_WINDOW)
        if report is None or set(report.wedge_phases) != {0, 1, 2}:
            continue
        by_phase = dict(zip(report.wedge_phases, report.angles))
        sums += [by_phase[p] for p in range(3)]
        count += 1
    if count == 0:
        return None
    return sums / count


def _experiment_herring_angles(outdir):
    start = _time.perf_counter()
    lines = []
    passed = True

    angles = _relaxed_junction_angles(1.0)
    if angles is None:
        lines.append("equal tensions: no junction found")
        passed = False
    else:
        worst = max(abs(a - 120.0) for a in angles)
        passed &= worst <= 3.0
        lines.append("equal tensions: mean angles "
                     + ", ".join(f"{a:.2f}" for a in angles)
                     + f" target 120.00 worst dev {worst:.2f} (tol 3)")

    targets = young_angles((1.0, 1.0, 1.2))
    residual = young_force_residual((1.0, 1.0, 1.2), targets)
    lines.append("young targets: "
                 + ", ".join(f"{t:.3f}" for t in targets)
                 + f" force residual {residual:.1e}")
    passed &= residual < 1e-10

    angles = _relaxed_junction_angles(1.2)
    if angles is None:
        lines.append("unequal tensions: no junction found")
        passed = False
    else:
        devs = [abs(angles[p] - targets[p]) for p in range(3)]
        worst = max(devs)
        passed &= worst <= 4.0
        lines.append("unequal tensions: mean angles by wedge "
                     + ", ".join(f"{p}:{angles[p]:.2f}" for p in range(3))
                     + f" worst dev {worst:.2f} (tol 4)")
    lines.append(f"runtime: {_time.perf_counter() - start:.1f}s")
    return passed, lines


def _experiment_consistency_sweep(outdir):
    start = _time.perf_counter()
    spec = uniform_material(2)
    gamma, beta = suggest_scales(spec)
    coeffs = compute_coefficients(spec, gamma, beta)
    grid = GridSpec(2, (1024, 1024))
    labels = build_initial(grid, 2, InitialCondition("disk", {"radius": 0.25}))
    target = 2.0 * 2.0 * math.pi * 0.25
    errors = []
    lines = []
    for h in (4e-4, 2e-4, 1e-4):
        energy = approximate_energy(labels, coeffs, h).total
        rel = abs(energy - target) / target
        errors.append(rel)
        lines.append(f"h={h:g}: E_h {energy:.6f} target {target:.6f} "
                     f"rel {rel:.4%}")
    decreasing = all(errors[k + 1] < errors[k] for k in range(len(errors) - 1))
    passed = errors[-1] < 0.02 and decreasing
    lines.append(f"errors decreasing: {decreasing}; final {errors[-1]:.4%} "
                 "(tolerance 2%)")
    lines.append(f"runtime: {_time.perf_counter() - start:.1f}s")
    return passed, lines


def _experiment_grain_growth(outdir):
    start = _time.perf_counter()
    spec = uniform_material(64)
    gamma, beta = suggest_scales(spec)
    coeffs = compute_coefficients(spec, gamma, beta)
    validate(spec, coeffs)
    grid = GridSpec(2, (512, 512))
    initial = build_initial(grid, 64, InitialCondition("voronoi", {"k": 64},
                                                       seed=2024))
    trajectory = run(initial, coeffs, SchemeConfig(h=2e-4, steps=200))
    elapsed = _time.perf_counter() - start

    reports = trajectory.reports
    ledger_ok = all(rep.ledger_lhs <= rep.ledger_rhs * (1.0 + 1e-9)
                    for rep in reports)
    surviving = int(np.count_nonzero(reports[-1].phase_volumes))
    vanished = sum(len(rep.events) for rep in reports)
    passed = ledger_ok and elapsed < 300.0
    lines = [
        f"phases surviving after 200 steps: {surviving}/64 "
        f"({vanished} vanished)",
        f"energy: {reports[0].ledger_rhs:.4f} -> "
        f"{reports[-1].energy_after.total:.4f}",
        f"dissipation ledger holds every step: {ledger_ok}",
        f"runtime: {elapsed:.1f}s (budget 300s)",
    ]
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        write_metrics(os.path.join(outdir, "metrics.csv"), reports, 64)
        write_labels(os.path.join(outdir, "labels_final"), trajectory.final,
                     step=200, time=200 * 2e-4)
        write_pgm(os.path.join(outdir, "final.pgm"), trajectory.final)
    return passed, lines


def _write_experiment_metrics(outdir, trajectory, num_phases):
    if not outdir:
        return
    os.makedirs(outdir, exist_ok=True)
    write_metrics(os.path.join(outdir, "metrics.csv"), trajectory.reports,
                  num_phases)


EXPERIMENTS = {
    "shrinking-disk": _experiment_shrinking_disk,
    "mobility-ratio": _experiment_mobility_ratio,
    "herring-angles": _experiment_herring_angles,
    "consistency-sweep": _experiment_consistency_sweep,
    "grain-growth": _experiment_grain_growth,
}


# ---------------------------------------------------------------------------
# Subcommand drivers


def _cmd_run(args):
    with open(args.config, "r", encoding="utf-8") as source:
        text = source.read()
    cfg = parse_config(text)
    if args.out:
        cfg.outdir = args.out
    trajectory, _ = execute_run(cfg, seed=args.seed)
    final_energy = (trajectory.reports[-1].energy_after.total
                    if trajectory.reports else float("nan"))
    print(f"run complete: steps={cfg.scheme.steps} "
          f"final_energy={final_energy:.6e} outdir={cfg.outdir}")
    return 0


def _cmd_validate(args):
    if args.config:
        with open(args.config, "r", encoding="utf-8") as source:
            cfg = parse_config(source.read())
        spec, gamma, beta = cfg.material, cfg.gamma, cfg.beta
    else:
        if args.uniform is None:
            raise ConfigError("validate: pass --config or --uniform N")
        spec = uniform_material(args.uniform, sigma=args.sigma, mu=args.mu)
        if args.gamma is not None and args.beta is not None:
            gamma, beta = args.gamma, args.beta
        else:
            gamma, beta = suggest_scales(spec)
    coeffs = compute_coefficients(spec, gamma, beta)
    report = validate(spec, coeffs)
    print(f"gamma={gamma!r} beta={beta!r}")
    for line in report.lines():
        print(line)
    print(f"all checks pass: {report.all_pass}")
    return 0 if report.all_pass else 1


def _cmd_oracle(args):
    from .variational_oracle import run_suite

    sizes_list = ((2, 2), (3, 3))
    if args.grid:
        parts = args.grid.lower().split("x")
        sizes_list = (tuple(int(p) for p in parts),)
    phases_list = (2, 3) if args.phases is None else (args.phases,)
    verdicts, failures, max_gap = run_suite(
        args.cases, sizes_list=sizes_list, phases_list=phases_list,
        seed=args.seed or 0)
    print(f"cases={len(verdicts)} failures={failures} max_gap={max_gap:.3e}")
    return 0 if failures == 0 else 1


def _cmd_probe(args):
    field, step, _ = read_labels(_strip_snapshot_suffix(args.snapshot))
    printed = False
    if args.radius_phase is not None:
        value = disk_radius(field, args.radius_phase)
        print(f"kind=disk_radius step={step} phase={args.radius_phase} "
              f"value={value:.8e}")
        printed = True
    if args.pair:
        i, j = args.pair
        measure = interface_length(field, i, j)
        print(f"kind=interface_length step={step} pair=({i},{j}) "
              f"value={measure.length_estimate:.8e}")
        printed = True
    if args.junctions:
        for report in junction_angles(field, window=args.window):
            angles = ",".join(f"{a:.4f}" for a in report.angles)
            print(f"kind=junction_angles step={step} "
                  f"location=({report.location[0]:.4f},{report.location[1]:.4f}) "
                  f"angles=[{angles}]")
        printed = True
    if not printed:
        counts = np.bincount(field.labels.ravel(), minlength=field.num_phases)
        occupied = ",".join(str(int(c)) for c in counts)
        print(f"kind=volumes step={step} cells={field.grid.cells} "
              f"counts=[{occupied}]")
    return 0


def _cmd_experiment(args):
    runner = EXPERIMENTS[args.name]
    outdir = args.out or os.path.join("out", args.name)
    passed, lines = runner(outdir)
    for line in lines:
        print(line)
    print(f"[{args.name}] {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="thresholdflow",
        description="Multiphase thresholding dynamics with independent "
                    "surface tensions and mobilities.")
    parser.add_argument("--threads", type=int, default=1,
                        help="FFT worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the initial-condition RNG seed")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="admissibility report")
    p_val.add_argument("--config", default=None)
    p_val.add_argument("--uniform", type=int, default=None,
                       help="N for a uniform material")
    p_val.add_argument("--sigma", type=float, default=1.0)
    p_val.add_argument("--mu", type=float, default=1.0)
    p_val.add_argument("--gamma", type=float, default=None)
    p_val.add_argument("--beta", type=float, default=None)
    p_val.set_defaults(func=_cmd_validate)

    p_orc = sub.add_parser("oracle", help="exhaustive minimization suite")
    p_orc.add_argument("--cases", type=int, default=300)
    p_orc.add_argument("--grid", default=None, help="e.g. 3x3")
    p_orc.add_argument("--phases", type=int, default=None)
    p_orc.add_argument("--seed", type=int, default=None)
    p_orc.set_defaults(func=_cmd_oracle)

    p_prb = sub.add_parser("probe", help="measure a label snapshot")
    p_prb.add_argument("--snapshot", required=True)
    p_prb.add_argument("--radius-phase", type=int, default=None)
    p_prb.add_argument("--pair", type=int, nargs=2, default=None)
    p_prb.add_argument("--junctions", action="store_true")
    p_prb.add_argument("--window", type=int, default=16)
    p_prb.set_defaults(func=_cmd_probe)

    p_exp = sub.add_parser("experiment", help="named acceptance experiment")
    p_exp.add_argument("name", choices=sorted(EXPERIMENTS))
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(func=_cmd_experiment)
    return parser


def _error_line(exc):
    detail = " ".join(str(exc).split())
    return f'ERROR kind={type(exc).__name__} detail="{detail}"'


def main(argv=None):
    """CLI entry point; returns the process exit code (0 pass/1 fail/2 usage)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return code
    try:
        with sfft.set_workers(max(args.threads, 1)):
            return args.func(args)
    except ThresholdFlowError as exc:
        print(_error_line(exc))
        return 1
    except OSError as exc:
        print(_error_line(exc))
        return 1


def cli_main():
    """Console-script shim."""
    sys.exit(main())
