"""Exhaustive certification of the minimizing-movements characterization.

On grids small enough to enumerate every labeling, the thresholding step can
be compared against the true global minimizer of

    F(u) = (1/2h) d_h^2(u, prev) + E_h(u)

over all hard labelings (sufficient, because F is affine in u so minimizers
of the relaxed problem include extreme points).  A real-space evaluation path
for E_h and d_h — direct double summation against an image-summed periodized
Gaussian table, no transforms — cross-checks the spectral quadratures.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .energetics import (
    approximate_energy,
    movement_objective,
    parseval_weights,
)
from .errors import EnumerationTooLarge
from .kernel_synthesis import (
    MaterialSpec,
    compute_coefficients,
    suggest_scales,
    validate,
)
from .spectral_field import GridSpec, LabelField, freq_sq
from .thresholding_engine import threshold_step

__all__ = [
    "OracleCase",
    "OracleVerdict",
    "exhaustive_minimize",
    "relaxed_sampling_check",
    "realspace_crosscheck",
    "realspace_distance_halftime",
    "random_admissible_material",
    "random_case",
    "random_field_case",
    "run_suite",
]

MAX_ENUMERATION = 100_000
MAX_ORACLE_CELLS = 16
MAX_REALSPACE_CELLS = 4096
TAIL = 1e-16


@dataclass
class OracleCase:
    """A fully specified exhaustive-minimization instance."""

    prev: LabelField
    coeffs: object
    h: float

    def __post_init__(self):
        cells = self.prev.grid.cells
        if cells > MAX_ORACLE_CELLS:
            raise EnumerationTooLarge(
                f"{cells} cells exceed the oracle limit of {MAX_ORACLE_CELLS}")
        if self.enumeration_count > MAX_ENUMERATION:
            raise EnumerationTooLarge(
                f"{self.enumeration_count} labelings exceed the "
                f"enumeration limit of {MAX_ENUMERATION}")

    @property
    def num_phases(self):
        return self.prev.num_phases

    @property
    def enumeration_count(self):
        return self.num_phases ** self.prev.grid.cells


@dataclass
class OracleVerdict:
    """Outcome of one exhaustive minimization against the thresholding step."""

    best_value: float
    best_configs: list
    threshold_value: float
    threshold_labels: np.ndarray
    is_minimizer: bool

    @property
    def gap(self):
        return self.threshold_value - self.best_value


def _all_labelings(num_phases, cells):
    """(count, cells) uint8 array of every labeling, lexicographic order."""
    count = num_phases ** cells
    idx = np.arange(count)
    digits = np.empty((count, cells), dtype=np.uint8)
    for c in range(cells - 1, -1, -1):
        idx, rem = np.divmod(idx, num_phases)
        digits[:, c] = rem
    return digits


def _batched_objective(configs, case):
    """Minimizing-movements objective for a batch of labelings.

    Evaluates the quadratic form F(u) = (1/2h) d_h^2(u, prev) + E_h(u) through
    the spectral Parseval quadrature, vectorized over configurations.
    """
    grid = case.prev.grid
    n = case.num_phases
    count = configs.shape[0]
    one_hot = (configs[:, None, :] == np.arange(n)[None, :, None]).astype(float)
    shaped = one_hot.reshape(count * n, *grid.sizes)
    spectra = sfft.rfftn(shaped, s=grid.sizes,
                         axes=tuple(range(1, grid.dim + 1)), norm="forward")
    spectra = spectra.reshape(count, n, -1)

    prev_hot = (case.prev.labels.ravel()[None, :] ==
                np.arange(n)[:, None]).astype(float)
    prev_spectra = sfft.rfftn(prev_hot.reshape(n, *grid.sizes), s=grid.sizes,
                              axes=tuple(range(1, grid.dim + 1)),
                              norm="forward").reshape(n, -1)

    w = parseval_weights(grid)
    k2 = freq_sq(grid).ravel()
    g_gamma = np.exp(-4.0 * np.pi ** 2 * case.coeffs.gamma * case.h * k2)
    g_beta = np.exp(-4.0 * np.pi ** 2 * case.coeffs.beta * case.h * k2)
    kern = (case.coeffs.a[:, :, None] * (w * g_gamma)[None, None, :]
            + case.coeffs.b[:, :, None] * (w * g_beta)[None, None, :])

    def form(x_spec, y_spec):
        return np.einsum("cif,ijf,cjf->c", x_spec, kern, np.conj(y_spec)).real

    sqrt_h = math.sqrt(case.h)
    energy = form(spectra, spectra) / sqrt_h
    diff = spectra - prev_spectra[None, :, :]
    dist_sq = -2.0 * case.h * form(diff, diff) / sqrt_h
    return dist_sq / (2.0 * case.h) + energy


def exhaustive_minimize(case):
    """Enumerate every labeling and compare the global minimum with thresholding.

    Returns an OracleVerdict whose gap must satisfy
    gap <= 1e-10 * (1 + |best_value|) for the minimizing-movements
    characterization to hold; a single violation is a build-stopping defect.
    """
    grid = case.prev.grid
    configs = _all_labelings(case.num_phases, grid.cells)
    values = _batched_objective(configs, case)
    best_value = float(values.min())
    band = 1e-12 * (1.0 + abs(best_value))
    best_configs = [configs[i].reshape(grid.sizes).copy()
                    for i in np.flatnonzero(values <= best_value + band)]

    new_labels, _ = threshold_step(case.prev, case.coeffs, case.h)
    threshold_value = float(movement_objective(new_labels, case.prev,
                                               case.coeffs, case.h))
    gap = threshold_value - best_value
    return OracleVerdict(
        best_value=best_value,
        best_configs=best_configs,
        threshold_value=threshold_value,
        threshold_labels=new_labels.labels.copy(),
        is_minimizer=gap <= 1e-10 * (1.0 + abs(best_value)),
    )


def relaxed_sampling_check(case, samples, rng=None):
    """Max violation of optimality over random relaxed competitors.

    Draws per-cell points on the probability simplex and returns
    max(threshold_value - F(u)) over the samples; the minimizing-movements
    property requires this to stay at or below roundoff.
    """
    if samples <= 0:
        return 0.0
    rng = np.random.default_rng(rng)
    grid = case.prev.grid
    n = case.num_phases
    new_labels, _ = threshold_step(case.prev, case.coeffs, case.h)
    threshold_value = movement_objective(new_labels, case.prev, case.coeffs, case.h)
    worst = -math.inf
    for _ in range(samples):
        u = rng.dirichlet(np.ones(n), size=grid.cells).T.reshape(n, *grid.sizes)
        value = movement_objective(u.reshape(n, -1), case.prev, case.coeffs,
                                   case.h)
        worst = max(worst, threshold_value - value)
    return worst


def _periodized_kernel_table(grid, t, images=None):
    """Periodized Gaussian G_t sampled at cell-offset vectors, by image summation.

    The table covers every lattice offset; the image range (+-3 periods at
    ordinary kernel widths) grows with sqrt(t) so that every neglected image
    sits below the 1e-16 tail cutoff even for kernels wider than the domain.
    """
    d = grid.dim
    if images is None:
        # (4 pi t)^(-d/2) exp(-s^2 / 4t) < TAIL for all |s| >= images
        margin = 4.0 * t * (-math.log(TAIL) + abs(d / 2.0 * math.log(4.0 * math.pi * t)))
        images = max(3, int(math.ceil(math.sqrt(margin))) + 1)
    shift = np.arange(-images, images + 1)
    parts = []
    for ax, n in enumerate(grid.sizes):
        offs = np.arange(n)[:, None] / n + shift[None, :]
        parts.append(offs ** 2)
    norm = (4.0 * math.pi * t) ** (-d / 2.0)
    if d == 2:
        sq = parts[0][:, None, :, None] + parts[1][None, :, None, :]
        table = norm * np.exp(-sq / (4.0 * t))
        table[table < TAIL] = 0.0
        return table.sum(axis=(2, 3))
    sq = (parts[0][:, None, None, :, None, None]
          + parts[1][None, :, None, None, :, None]
          + parts[2][None, None, :, None, None, :])
    table = norm * np.exp(-sq / (4.0 * t))
    table[table < TAIL] = 0.0
    return table.sum(axis=(3, 4, 5))


def _offset_index(grid):
    """index[x, y] = flattened lattice offset (x - y) mod sizes, for all cell pairs."""
    coords = [np.arange(n) for n in grid.sizes]
    mesh = np.meshgrid(*coords, indexing="ij")
    flat = [m.ravel() for m in mesh]
    cells = grid.cells
    idx = np.zeros((cells, cells), dtype=np.intp)
    for ax, n in enumerate(grid.sizes):
        diff = (flat[ax][:, None] - flat[ax][None, :]) % n
        idx = idx * n + diff
    return idx


def _realspace_form(w_stack, grid, coeffs, h):
    """E_h-form by direct double summation with tabulated periodized kernels."""
    k_gamma = _periodized_kernel_table(grid, coeffs.gamma * h).ravel()
    k_beta = _periodized_kernel_table(grid, coeffs.beta * h).ravel()
    idx = _offset_index(grid)
    cells = grid.cells
    kg = k_gamma[idx]
    kb = k_beta[idx]
    total = 0.0
    for i in range(w_stack.shape[0]):
        for j in range(w_stack.shape[0]):
            if coeffs.a[i, j] == 0.0 and coeffs.b[i, j] == 0.0:
                continue
            pair = coeffs.a[i, j] * (w_stack[i] @ kg @ w_stack[j]) \
                + coeffs.b[i, j] * (w_stack[i] @ kb @ w_stack[j])
            total += pair
    return total / (cells * cells) / math.sqrt(h)


def realspace_crosscheck(u, v, coeffs, h):
    """(E_h(u), d_h(u, v)) by direct real-space summation, no transforms.

    Independent quadrature of the same integrals the spectral path evaluates;
    guarded to grids of at most 4096 cells.
    """
    grid = u.grid if isinstance(u, LabelField) else u[0].grid
    if grid.cells > MAX_REALSPACE_CELLS:
        raise EnumerationTooLarge(
            f"{grid.cells} cells exceed the real-space limit of {MAX_REALSPACE_CELLS}")
    u_stack = _hard_or_soft_stack(u)
    v_stack = _hard_or_soft_stack(v)
    energy = _realspace_form(u_stack, grid, coeffs, h)
    d2 = -2.0 * h * _realspace_form(u_stack - v_stack, grid, coeffs, h)
    return energy, math.sqrt(max(d2, 0.0))


def realspace_distance_halftime(u, v, coeffs, h):
    """d_h via half-time kernels, computed entirely in real space.

    Convolves the difference with tabulated G_{gamma h/2} and G_{beta h/2} by
    direct summation and applies the quadratic forms |.|_A^2 and |.|_B^2
    cellwise.
    """
    grid = u.grid if isinstance(u, LabelField) else u[0].grid
    if grid.cells > MAX_REALSPACE_CELLS:
        raise EnumerationTooLarge(
            f"{grid.cells} cells exceed the real-space limit of {MAX_REALSPACE_CELLS}")
    w_stack = _hard_or_soft_stack(u) - _hard_or_soft_stack(v)
    idx = _offset_index(grid)
    cells = grid.cells
    total = 0.0
    for scale, mix in ((coeffs.gamma, coeffs.a), (coeffs.beta, coeffs.b)):
        table = _periodized_kernel_table(grid, scale * h / 2.0).ravel()[idx]
        smoothed = w_stack @ table.T / cells
        total += -np.einsum("ic,ij,jc->", smoothed, mix, smoothed) / cells
    return math.sqrt(max(2.0 * math.sqrt(h) * total, 0.0))


def _hard_or_soft_stack(u):
    if isinstance(u, LabelField):
        return (u.labels.ravel()[None, :] ==
                np.arange(u.num_phases)[:, None]).astype(float)
    if isinstance(u, np.ndarray):
        return u.reshape(u.shape[0], -1).astype(float, copy=False)
    return np.stack([f.values.ravel() for f in u])


def random_admissible_material(rng, num_phases):
    """Random MaterialSpec that passes every admissibility check.

    Draws from the additive family sigma_ij = s_i + s_j, 1/mu_ij = m_i + m_j
    with positive generators, which satisfies the strict triangle inequality
    and conditional definiteness by construction, with occasional uniform
    draws mixed in; the result is verified before returning.
    """
    rng = np.random.default_rng(rng)
    for _ in range(64):
        if num_phases >= 3 and rng.random() < 0.25:
            spec = _uniform_draw(rng, num_phases)
        else:
            s = rng.uniform(0.5, 1.5, size=num_phases)
            m = rng.uniform(0.5, 1.5, size=num_phases)
            sigma = s[:, None] + s[None, :]
            inv_mu = m[:, None] + m[None, :]
            np.fill_diagonal(sigma, 0.0)
            np.fill_diagonal(inv_mu, 0.0)
            mu = np.zeros_like(inv_mu)
            off = ~np.eye(num_phases, dtype=bool)
            mu[off] = 1.0 / inv_mu[off]
            spec = MaterialSpec(num_phases, sigma, mu)
        try:
            gamma, beta = suggest_scales(spec)
        except Exception:
            continue
        coeffs = compute_coefficients(spec, gamma, beta)
        if validate(spec, coeffs).all_pass:
            return spec
    raise RuntimeError("failed to draw an admissible material")


def _uniform_draw(rng, num_phases):
    off = 1.0 - np.eye(num_phases)
    return MaterialSpec(num_phases,
                        float(rng.uniform(0.5, 2.0)) * off,
                        float(rng.uniform(0.5, 2.0)) * off)


def random_field_case(rng, sizes, num_phases, width_cells=None):
    """Random (labels, coefficients, h) triple on an arbitrary 2D grid.

    The time step is chosen so the narrow kernel spans ``width_cells`` grid
    spacings (default: uniform in [2, 3], which keeps the kernel resolved).
    Carries none of the enumeration guards, so it also serves the evaluation
    crosschecks on grids too large to enumerate.
    """
    rng = np.random.default_rng(rng)
    spec = random_admissible_material(rng, num_phases)
    gamma, beta = suggest_scales(spec)
    coeffs = compute_coefficients(spec, gamma, beta)
    validate(spec, coeffs)
    grid = GridSpec(2, tuple(sizes))
    if width_cells is None:
        width_cells = rng.uniform(2.0, 3.0)
    h = (width_cells * grid.max_spacing) ** 2 / beta
    labels = rng.integers(0, num_phases, size=grid.sizes).astype(np.uint8)
    prev = LabelField(grid, labels, num_phases)
    return prev, coeffs, h


def random_case(rng, sizes, num_phases, width_cells=None):
    """Random oracle case: admissible material, scales, h, and previous labels."""
    prev, coeffs, h = random_field_case(rng, sizes, num_phases, width_cells)
    return OracleCase(prev=prev, coeffs=coeffs, h=h)


def run_suite(num_cases, sizes_list=((2, 2), (3, 3)), phases_list=(2, 3), seed=0):
    """Run a batch of randomized oracle cases.

    Returns (verdicts, failures, max_gap); a failure is any case whose
    thresholded step misses the exhaustive minimum beyond tolerance.
    """
    rng = np.random.default_rng(seed)
    verdicts = []
    failures = 0
    max_gap = 0.0
    for index in range(num_cases):
        sizes = sizes_list[index % len(sizes_list)]
        phases = phases_list[(index // len(sizes_list)) % len(phases_list)]
        case = random_case(rng, sizes, phases)
        verdict = exhaustive_minimize(case)
        verdicts.append(verdict)
        max_gap = max(max_gap, verdict.gap)
        if not verdict.is_minimizer:
            failures += 1
    return verdicts, failures, max_gap
