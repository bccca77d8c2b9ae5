"""Kernel coefficients for two-Gaussian thresholding.

Converts a material description (surface tensions sigma, mobilities mu) and a
pair of Gaussian time scales (gamma, beta) into the coefficient matrices
(a_ij, b_ij) of the combined kernels

    K_ij = a_ij * G_gamma + b_ij * G_beta,

validates every admissibility condition the scheme needs, and suggests scales
that satisfy them.  The coefficients are the unique solution of the linear
system

    sigma_ij = a_ij sqrt(gamma)/sqrt(pi) + b_ij sqrt(beta)/sqrt(pi)
    1/mu_ij  = a_ij/(sqrt(pi) sqrt(gamma)) + b_ij/(sqrt(pi) sqrt(beta))

so that the pair kernel reproduces the surface tension as interfacial energy
and the mobility as the kinetic coefficient of the induced interface motion.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InadmissibleMaterialError, ScaleOrderError

__all__ = [
    "MaterialSpec",
    "KernelCoefficients",
    "CheckResult",
    "ValidationReport",
    "uniform_material",
    "compute_coefficients",
    "validate",
    "suggest_scales",
    "triangle_margins",
]

# Absolute tolerance on the minimal conditional eigenvalue: ties at zero fail,
# strict definiteness is required for the induced distance to be a metric.
EIGENVALUE_TOL = 1e-10


def _check_symmetric_matrix(m, n, name):
    m = np.asarray(m, dtype=float)
    if m.shape != (n, n):
        raise DimensionError(f"{name} must be {n}x{n}, got {m.shape}")
    if not np.array_equal(m, m.T):
        raise DimensionError(f"{name} must be symmetric")
    if np.any(np.diag(m) != 0.0):
        raise DimensionError(f"{name} must have zero diagonal")
    off = m[~np.eye(n, dtype=bool)]
    if np.any(off <= 0.0):
        raise DimensionError(f"{name} must be strictly positive off the diagonal")
    return m


@dataclass(frozen=True)
class MaterialSpec:
    """Symmetric surface-tension and mobility matrices for N phases.

    Both matrices have zero diagonal and strictly positive off-diagonal
    entries; the inverse-mobility matrix keeps the zero diagonal.
    """

    num_phases: int
    sigma: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        n = self.num_phases
        if n < 2:
            raise DimensionError("at least two phases required")
        object.__setattr__(self, "sigma", _check_symmetric_matrix(self.sigma, n, "sigma"))
        object.__setattr__(self, "mu", _check_symmetric_matrix(self.mu, n, "mu"))

    @property
    def inverse_mobility(self):
        """Entrywise 1/mu with the diagonal kept at zero."""
        inv = np.zeros_like(self.mu)
        off = ~np.eye(self.num_phases, dtype=bool)
        inv[off] = 1.0 / self.mu[off]
        return inv


def uniform_material(num_phases, sigma=1.0, mu=1.0):
    """MaterialSpec with constant off-diagonal tensions and mobilities."""
    off = 1.0 - np.eye(num_phases)
    return MaterialSpec(num_phases, sigma * off, mu * off)


@dataclass
class KernelCoefficients:
    """Kernel scales and mixing matrices (gamma, beta, a, b).

    ``validation`` is attached by :func:`validate`; operations that require
    admissible kernels refuse to run until it is present and its conditional
    definiteness checks pass.
    """

    gamma: float
    beta: float
    a: np.ndarray
    b: np.ndarray
    validation: "ValidationReport | None" = field(default=None, compare=False)

    @property
    def num_phases(self):
        return self.a.shape[0]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def line(self):
        status = "pass" if self.passed else "FAIL"
        text = f"{self.name}: {status} margin={self.margin:.6g}"
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of every admissibility check on a coefficient set.

    ``coefficient_signs`` lists negative a/b entries; a negative entry is a
    warning, not a failure — the scheme stays well-defined as long as the
    conditional definiteness checks pass.
    """

    triangle_a: CheckResult
    triangle_b: CheckResult
    posdef_a: CheckResult
    posdef_b: CheckResult
    fourier_positive: CheckResult
    coefficient_signs: list

    @property
    def checks(self):
        return [self.triangle_a, self.triangle_b, self.posdef_a,
                self.posdef_b, self.fourier_positive]

    @property
    def all_pass(self):
        return all(c.passed for c in self.checks)

    @property
    def definiteness_pass(self):
        """The two checks the scheme cannot run without."""
        return self.posdef_a.passed and self.posdef_b.passed

    def lines(self):
        out = [c.line() for c in self.checks]
        if self.coefficient_signs:
            entries = ", ".join(f"{which}[{i},{j}]={val:.4g}"
                                for (i, j, which, val) in self.coefficient_signs)
            out.append(f"coefficient_signs: warning ({entries})")
        else:
            out.append("coefficient_signs: pass (all nonnegative)")
        return out


def compute_coefficients(spec, gamma, beta):
    """Solve the 2x2 linear system for (a_ij, b_ij) at scales (gamma, beta).

    Parameters
    ----------
    spec : MaterialSpec
    gamma, beta : float
        Gaussian time scales with gamma > beta > 0.

    Returns
    -------
    KernelCoefficients
        Unvalidated; pass through :func:`validate` before running the scheme.
    """
    if not (gamma > beta > 0.0):
        raise ScaleOrderError(f"need gamma > beta > 0, got gamma={gamma}, beta={beta}")
    inv_mu = spec.inverse_mobility
    sg, sb = math.sqrt(gamma), math.sqrt(beta)
    sp = math.sqrt(math.pi)
    a = sp * sg / (gamma - beta) * (spec.sigma - beta * inv_mu)
    b = sp * sb / (gamma - beta) * (-spec.sigma + gamma * inv_mu)
    off = ~np.eye(spec.num_phases, dtype=bool)
    a[~off] = 0.0
    b[~off] = 0.0
    return KernelCoefficients(float(gamma), float(beta), a, b)


def triangle_margins(m):
    """Min/max of m_ik + m_kj - m_ij over all distinct triples (i, k, j).

    Returns (min_margin, max_margin, argmin_triple); (None, None, None) when
    fewer than three phases exist (no triples, the condition is vacuous).
    """
    n = m.shape[0]
    if n < 3:
        return None, None, None
    best = math.inf
    worst_triple = None
    top = -math.inf
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                margin = m[i, k] + m[k, j] - m[i, j]
                if margin < best:
                    best = margin
                    worst_triple = (i, k, j)
                if margin > top:
                    top = margin
    return best, top, worst_triple


def _conditional_min_eigenvalue(mat):
    """Minimal eigenvalue of the quadratic form restricted to (1,...,1)^perp.

    Equivalent to the nonzero spectrum of J mat J with J = I - (1/N) 11^T:
    projecting onto an orthonormal basis Q of the orthogonal complement gives
    Q^T mat Q, whose spectrum is exactly the spectrum of J mat J with the
    null direction removed.
    """
    n = mat.shape[0]
    if n == 2:
        # One-dimensional complement spanned by (1,-1)/sqrt(2).
        v = np.array([1.0, -1.0]) / math.sqrt(2.0)
        return float(v @ mat @ v)
    basis = np.linalg.qr(
        np.hstack([np.ones((n, 1)) / math.sqrt(n), np.eye(n)[:, : n - 1]])
    )[0][:, 1:]
    reduced = basis.T @ mat @ basis
    return float(np.linalg.eigvalsh(0.5 * (reduced + reduced.T))[0])


def validate(spec, coeffs):
    """Run every admissibility check and record the outcome on the coefficients.

    Checks, all decided by direct computation (never by sufficient bounds):

    - triangle_a / triangle_b: strict triangle inequality of the coefficient
      matrices over all distinct triples (vacuous for N=2);
    - posdef_a / posdef_b: the negated matrices are strictly positive definite
      on the complement of (1,...,1), via eigenvalues of the projected form;
    - fourier_positive: gamma > max sigma*mu and beta < min sigma*mu, the
      sufficient condition for pointwise-positive kernel transforms;
    - coefficient_signs: negative a/b entries reported as warnings.
    """
    n = spec.num_phases
    off = ~np.eye(n, dtype=bool)

    def triangle_check(mat, name):
        lo, _, triple = triangle_margins(mat)
        if lo is None:
            return CheckResult(name, True, math.inf, "vacuous for N=2")
        return CheckResult(name, lo > 0.0, lo, f"worst triple {triple}")

    def posdef_check(mat, name):
        lam = _conditional_min_eigenvalue(-mat)
        return CheckResult(name, lam > EIGENVALUE_TOL, lam, "min eigenvalue on (1,..,1)^perp")

    sm = spec.sigma * spec.mu
    hi, lo = float(np.max(sm[off])), float(np.min(sm[off]))
    fourier_margin = min(coeffs.gamma - hi, lo - coeffs.beta)
    fourier = CheckResult(
        "fourier_positive", coeffs.gamma > hi and coeffs.beta < lo, fourier_margin,
        f"need gamma > {hi:.6g} and beta < {lo:.6g}",
    )

    signs = []
    for i in range(n):
        for j in range(i + 1, n):
            if coeffs.a[i, j] < 0.0:
                signs.append((i, j, "a", float(coeffs.a[i, j])))
            if coeffs.b[i, j] < 0.0:
                signs.append((i, j, "b", float(coeffs.b[i, j])))

    report = ValidationReport(
        triangle_a=triangle_check(coeffs.a, "triangle_a"),
        triangle_b=triangle_check(coeffs.b, "triangle_b"),
        posdef_a=posdef_check(coeffs.a, "posdef_a"),
        posdef_b=posdef_check(coeffs.b, "posdef_b"),
        fourier_positive=fourier,
        coefficient_signs=signs,
    )
    coeffs.validation = report
    return report


def suggest_scales(spec):
    """Suggest (gamma, beta) passing all checks, with safety factor 2.

    Combines the triangle-margin bounds (beta < m_sigma / M_{1/mu},
    gamma > M_sigma / m_{1/mu}; only defined for N >= 3) with the Fourier
    positivity bounds (gamma > max sigma*mu, beta < min sigma*mu), then takes
    gamma twice the largest lower bound and beta half the smallest upper
    bound.  The suggestion is verified by direct validation before returning.
    """
    n = spec.num_phases
    off = ~np.eye(n, dtype=bool)
    sm = spec.sigma * spec.mu
    gamma_bound = float(np.max(sm[off]))
    beta_bound = float(np.min(sm[off]))

    if n >= 3:
        m_sigma, big_sigma, triple_sigma = triangle_margins(spec.sigma)
        m_inv, big_inv, triple_inv = triangle_margins(spec.inverse_mobility)
        if m_sigma <= 0.0:
            raise InadmissibleMaterialError(
                f"sigma violates the strict triangle inequality "
                f"(margin {m_sigma:.6g} at triple {triple_sigma})")
        if m_inv <= 0.0:
            raise InadmissibleMaterialError(
                f"1/mu violates the strict triangle inequality "
                f"(margin {m_inv:.6g} at triple {triple_inv})")
        gamma_bound = max(gamma_bound, big_sigma / m_inv)
        beta_bound = min(beta_bound, m_sigma / big_inv)

    gamma = 2.0 * gamma_bound
    beta = 0.5 * beta_bound
    coeffs = compute_coefficients(spec, gamma, beta)
    report = validate(spec, coeffs)
    if not report.all_pass:
        raise InadmissibleMaterialError(
            "suggested scales fail direct validation", report=report)
    return gamma, beta
