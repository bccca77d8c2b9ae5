"""Thresholding scheme: convolve, compare, relabel, and multi-step runs.

One step maps a partition to the next one by computing each phase's
comparison function

    psi_i = sum_{j != i} a_ij G_{gamma h} * 1_j + b_ij G_{beta h} * 1_j

and assigning every cell to an argmin of (psi_0, ..., psi_{N-1}), ties to the
smallest phase index.  The step is simultaneously the exact minimizer of the
minimizing-movements objective (1/2h) d_h^2(u, prev) + E_h(u), which run()
certifies per step through a dissipation ledger.
"""

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .energetics import EnergyBreakdown, StepReport, _pair_grams
from .errors import NegativeSquareError, ValidationError
from .spectral_field import (
    GridSpec,
    LabelField,
    ScalarField,
    check_resolution,
    freq_sq,
    heat_multiplier,
    phase_fields,
    phase_volumes,
)

__all__ = ["SchemeConfig", "Trajectory", "VanishedPhase", "threshold_step", "run"]


@dataclass(frozen=True)
class SchemeConfig:
    """Time step, step count, tie rule, and snapshot cadence for a run."""

    h: float
    steps: int
    tie_break: str = "lowest-index"
    record_every: int = 0

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError(f"h must be positive, got {self.h}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.tie_break != "lowest-index":
            raise ValueError(f"unsupported tie_break {self.tie_break!r}")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")


@dataclass(frozen=True)
class VanishedPhase:
    """Event recorded when a phase's cell count drops to zero at some step.

    Not an error: empty phases stay in the relabeling competition and may in
    principle reappear at later steps.
    """

    step: int
    phase: int


@dataclass
class Trajectory:
    """A run's initial state, recorded snapshots, and per-step reports."""

    initial: LabelField
    snapshots: list
    reports: list
    config: SchemeConfig

    @property
    def final(self):
        return self.snapshots[-1][1] if self.snapshots else self.initial


def _require_admissible(coeffs):
    if coeffs.validation is None:
        raise ValidationError("coefficients have not been validated; call validate()")
    if not coeffs.validation.definiteness_pass:
        raise ValidationError(
            "coefficient matrices fail conditional positive definiteness; "
            "the scheme's variational structure does not hold")


def _one_hot(labels_field):
    lab = labels_field.labels
    n = labels_field.num_phases
    stacked = np.zeros((n,) + lab.shape)
    for p in range(n):
        stacked[p][lab == p] = 1.0
    return stacked


def _spectra_of_labels(labels_field):
    grid = labels_field.grid
    stacked = _one_hot(labels_field)
    out = sfft.rfftn(stacked, s=grid.sizes, axes=tuple(range(1, grid.dim + 1)),
                     norm="forward")
    return out.reshape(labels_field.num_phases, -1)


def _uniform_mixing(coeffs):
    """(a, b) scalars when both matrices are constant off the diagonal, else None."""
    n = coeffs.num_phases
    if n < 2:
        return None
    off = ~np.eye(n, dtype=bool)
    a_off, b_off = coeffs.a[off], coeffs.b[off]
    if np.all(a_off == a_off[0]) and np.all(b_off == b_off[0]):
        return float(a_off[0]), float(b_off[0])
    return None


def _mix_psi(spectra, grid, coeffs, h):
    """Comparison functions for all phases from precomputed spectra.

    Returns a (N, cells) real array.  For a uniform material the partition of
    unity collapses the mixing to psi_i = (a + b) - (a g_gamma + b g_beta)*u_i,
    saving the matrix multiply; the generic path mixes the spectra with the
    coefficient matrices directly.
    """
    n = spectra.shape[0]
    g_gamma = heat_multiplier(grid, coeffs.gamma * h).ravel()
    g_beta = heat_multiplier(grid, coeffs.beta * h).ravel()
    uniform = _uniform_mixing(coeffs)
    if uniform is not None:
        a, b = uniform
        mixed = -(a * g_gamma + b * g_beta) * spectra
        offset = a + b
    else:
        mixed = (coeffs.a @ spectra) * g_gamma + (coeffs.b @ spectra) * g_beta
        offset = 0.0
    shape = (n,) + freq_sq(grid).shape
    psi = sfft.irfftn(mixed.reshape(shape), s=grid.sizes,
                      axes=tuple(range(1, grid.dim + 1)), norm="forward")
    return psi.reshape(n, -1) + offset


def _gather_mean(psi_flat, labels_flat):
    """Grid mean of psi_{label(x)}(x), the inner product (u, chi)_h * sqrt(h)."""
    picked = np.take_along_axis(psi_flat, labels_flat[None, :].astype(np.intp), axis=0)
    return float(picked.sum()) / psi_flat.shape[1]


def threshold_step(labels, coeffs, h):
    """One thresholding step.

    Returns (new_labels, psi) where psi is the list of comparison functions
    used for the relabeling.  Every cell receives the smallest phase index
    among the exact minimizers of (psi_0, ..., psi_{N-1}) at that cell; the
    comparison runs on floating-point values with no tolerance band.
    """
    _require_admissible(coeffs)
    check_resolution(labels.grid, coeffs.beta, h)
    grid = labels.grid
    spectra = _spectra_of_labels(labels)
    psi = _mix_psi(spectra, grid, coeffs, h)
    new_flat = np.argmin(psi, axis=0).astype(np.uint8)
    new_field = LabelField(grid, new_flat.reshape(grid.sizes), labels.num_phases)
    psi_fields = [ScalarField(grid, psi[i].reshape(grid.sizes))
                  for i in range(labels.num_phases)]
    return new_field, psi_fields


def run(initial, coeffs, cfg):
    """Drive cfg.steps thresholding steps with a per-step energetics ledger.

    Each StepReport carries the spectral energy breakdowns before and after
    the step, the squared step distance, and the cumulative dissipation sum
    E_h(chi^n) + sum_k (1/2h) d_h^2(chi^k, chi^{k-1}), whose comparison
    against E_h(chi^0) is the discrete gradient-flow certificate.  A phase
    whose volume reaches zero is recorded as a VanishedPhase event, not an
    error; empty phases stay in the competition.
    """
    _require_admissible(coeffs)
    check_resolution(initial.grid, coeffs.beta, cfg.h)
    grid = initial.grid
    n_phases = initial.num_phases
    h = cfg.h
    sqrt_h = math.sqrt(h)

    labels = initial.copy()
    spectra = _spectra_of_labels(labels)

    def breakdown(spec_arr):
        p_gamma, p_beta = _pair_grams(spec_arr, spec_arr, grid, coeffs, h)
        per_pair = (coeffs.a * p_gamma + coeffs.b * p_beta) / sqrt_h
        return EnergyBreakdown(float(per_pair.sum()), per_pair)

    breakdowns = [breakdown(spectra)]
    volumes = [phase_volumes(labels)]
    snapshots = []
    self_products = []   # (chi^n, chi^n)_h for n = 0, 1, ...
    cross_products = []  # (chi^n, chi^{n-1})_h for n = 1, 2, ...
    elapsed = []

    for step in range(1, cfg.steps + 1):
        t0 = _time.perf_counter()
        psi = _mix_psi(spectra, grid, coeffs, h)
        old_flat = labels.labels.ravel()
        self_products.append(_gather_mean(psi, old_flat) / sqrt_h)
        new_flat = np.argmin(psi, axis=0).astype(np.uint8)
        cross_products.append(_gather_mean(psi, new_flat) / sqrt_h)
        labels = LabelField(grid, new_flat.reshape(grid.sizes), n_phases)
        spectra = _spectra_of_labels(labels)
        breakdowns.append(breakdown(spectra))
        volumes.append(phase_volumes(labels))
        elapsed.append(_time.perf_counter() - t0)
        if cfg.record_every and step % cfg.record_every == 0 and step != cfg.steps:
            snapshots.append((step, labels.copy()))

    # One extra evaluation closes the ledger: (chi^n, chi^n)_h of the final state.
    psi = _mix_psi(spectra, grid, coeffs, h)
    self_products.append(_gather_mean(psi, labels.labels.ravel()) / sqrt_h)
    snapshots.append((cfg.steps, labels.copy()))

    reports = []
    dissipation = 0.0
    ledger_rhs = self_products[0]
    for step in range(1, cfg.steps + 1):
        e_prev = self_products[step - 1]
        e_next = self_products[step]
        d2 = 2.0 * h * (2.0 * cross_products[step - 1] - e_prev - e_next)
        if d2 < -1e-10:
            raise NegativeSquareError(
                f"step {step}: d_h^2 = {d2:.3g} < -1e-10")
        d2 = max(d2, 0.0)
        dissipation += d2 / (2.0 * h)
        events = []
        for p in range(n_phases):
            if volumes[step][p] == 0 and volumes[step - 1][p] > 0:
                events.append(VanishedPhase(step=step, phase=p))
        reports.append(StepReport(
            step=step,
            time=step * h,
            energy_before=breakdowns[step - 1],
            energy_after=breakdowns[step],
            dist_sq=d2,
            ledger_lhs=e_next + dissipation,
            ledger_rhs=ledger_rhs,
            phase_volumes=volumes[step],
            events=events,
            elapsed=elapsed[step - 1],
        ))
    return Trajectory(initial=initial.copy(), snapshots=snapshots,
                      reports=reports, config=cfg)
