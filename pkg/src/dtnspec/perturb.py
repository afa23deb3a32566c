"""Lambda-derivatives of branches, small-Lambda fits and the truncated matrix representation.

Derivatives follow the perturbation formulas

    sigma'  = -||U||^2_{L^2(Omega)},
    sigma'' = -2 ( <(-Delta_Dir - Lambda0)^{-1} U, U> + sum_{j != k} <U_j, U_k>^2 / (sigma_j - sigma_k) ),

where U is the bulk eigenfunction whose boundary trace has unit L^2 norm.
The resolvent term is expanded over Dirichlet eigenfunctions using
<U, U_m^Dir> = <u, d_n U_m^Dir> / (Lambda0 - lambda_m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.integrate import quad

from . import canonical as cn
from .canonical import Ball, BranchId, Cuboid, Disk, Interval
from .errors import CapabilityError
from .specfun import BesselKind, bessel_derivative, bessel_scaled, j_zeros


@dataclass(frozen=True)
class BranchDerivatives:
    lambda0: float
    first: float
    second: float | None = None
    method: str = "analytic"
    second_tail: float | None = None


# McMahon-based tail estimates neglect O(1/j^4) corrections; this factor covers them
TAIL_SAFETY = 1.01


def _check_in_branch(branch: BranchId, lam0: float):
    if not branch.contains(lam0):
        raise ValueError(f"lambda0={lam0} lies outside the continuity interval {branch.interval}")


# ------------------------------------------------------------------ first derivative


def _radial_first(dim: int, m: int, x: float) -> float:
    """d sigma / d Lambda for the unit ball (or disk) at Lambda = x."""
    nu = cn._order(dim, m)
    # |U|^2 r^{d-1} with U = r^{1-d/2} C_nu(z r) / C_nu(z) reduces to r (C(zr)/C(z))^2
    if abs(x) <= cn.SMALL_ARGUMENT:
        # C_nu(zr)/C_nu(z) = r^nu 0F1(nu+1; t r^2)/0F1(nu+1; t), t = -x/4, free of underflow
        t = -0.25 * x
        denom = special.hyp0f1(nu + 1.0, t)

        def integrand(r):
            return r ** (2.0 * nu + 1.0) * (special.hyp0f1(nu + 1.0, t * r * r) / denom) ** 2

    elif x < 0:
        z = math.sqrt(-x)
        denom = special.ive(nu, z)

        def integrand(r):
            return r * (special.ive(nu, z * r) / denom) ** 2 * math.exp(2.0 * z * (r - 1.0))

    else:
        z = math.sqrt(x)
        denom = special.jv(nu, z)

        def integrand(r):
            return r * (special.jv(nu, z * r) / denom) ** 2

    return -_integrate01(integrand, x)


def _integrate01(f, x: float, upper: float = 1.0) -> float:
    # for strongly negative Lambda the integrand concentrates near the boundary
    points = None
    if x < -100.0:
        width = 1.0 / math.sqrt(-x)
        points = [max(0.0, upper - c * width) for c in (40.0, 10.0, 3.0)]
        points = sorted(set(p for p in points if 0.0 < p < upper))
    value, _ = quad(f, 0.0, upper, epsabs=1e-14, epsrel=1e-13, limit=400, points=points)
    return value


def _unit_interval_ratio(parity: str, x: float):
    """U(s)/U(1/2) on the unit interval, written to avoid overflow."""
    if x < 0:
        k = math.sqrt(-x)
        if parity == "s":
            return lambda s: (math.exp(k * (s - 0.5)) + math.exp(-k * (s + 0.5))) / (1.0 + math.exp(-k))
        if k < 1.0:
            return lambda s: math.sinh(k * s) / math.sinh(0.5 * k)
        return lambda s: (math.exp(k * (s - 0.5)) - math.exp(-k * (s + 0.5))) / (1.0 - math.exp(-k))
    if x == 0:
        return (lambda s: 1.0) if parity == "s" else (lambda s: 2.0 * s)
    k = math.sqrt(x)
    if parity == "s":
        return lambda s: math.cos(k * s) / math.cos(0.5 * k)
    return lambda s: math.sin(k * s) / math.sin(0.5 * k)


def _unit_interval_first(parity: str, x: float) -> float:
    # two boundary points carry u(+-1/2)^2; by symmetry integrate over (0, 1/2)
    ratio = _unit_interval_ratio(parity, x)
    return -_integrate01(lambda s: ratio(s) ** 2, x, 0.5)


def branch_first_derivative(domain, branch: BranchId, lambda0: float) -> float:
    """d sigma / d Lambda of a labelled branch at lambda0."""
    _check_in_branch(branch, lambda0)
    if isinstance(domain, Interval):
        a = domain.alpha
        cn.interval_branch(branch.parity[0], a, lambda0)
        return a * _unit_interval_first(branch.parity[0], a * a * lambda0)
    if isinstance(domain, (Disk, Ball)):
        r = domain.radius
        cn._radial_sigma(domain.dim, branch.modes[0], lambda0, r)
        return r * _radial_first(domain.dim, branch.modes[0], r * r * lambda0)
    if isinstance(domain, Cuboid):
        sides = domain.sides
        sigma = cn.cuboid_branch(domain.half_widths, branch.parity, branch.modes, lambda0)
        # ||U||^2 / ||u||^2 = 1 / sum_j (1 / |h_j'(mu_j)|) for a product eigenfunction
        total = 0.0
        for side, parity, m in zip(sides, branch.parity, branch.modes):
            x = cn._unit_finv(parity, m, side * sigma)
            total += 1.0 / (side * _unit_interval_first(parity, x))
        return 1.0 / total
    raise CapabilityError(f"no derivative formula for {type(domain).__name__}")


# ------------------------------------------------------------------ second derivative


def _radial_second(dim: int, m: int, x: float, terms: int) -> tuple[float, float]:
    nu = cn._order(dim, m)
    zeros = j_zeros(nu, terms)
    resolvent = []
    for j in zeros:
        lam_dir = j * j
        # normalised Dirichlet mode of the same angular type: <u, d_n U^Dir>^2 = 2 j^2
        overlap = 2.0 * lam_dir / (x - lam_dir) ** 2
        resolvent.append(overlap / (lam_dir - x))
    # eigenfunctions of other angular types are orthogonal to U, so the
    # second sum of the formula vanishes
    value = -2.0 * math.fsum(resolvent)
    a = 0.5 * nu - 0.25
    tail = TAIL_SAFETY * 4.0 / (3.0 * math.pi**4 * (terms + a + 0.5) ** 3)
    return value, tail


def _unit_interval_second(parity: str, x: float, terms: int) -> tuple[float, float]:
    resolvent = []
    for m in range(1, terms + 1):
        lam_dir = cn._unit_dirichlet(parity, m)
        # two boundary points: <u, d_n U^Dir>^2 = 4 lambda
        overlap = 4.0 * lam_dir / (x - lam_dir) ** 2
        resolvent.append(overlap / (lam_dir - x))
    value = -2.0 * math.fsum(resolvent)
    tail = TAIL_SAFETY * 8.0 / (3.0 * math.pi**4 * (2 * terms) ** 3)
    return value, tail


def branch_second_derivative(
    domain, branch: BranchId, lambda0: float, truncation: int = 200, return_tail: bool = False
):
    """d^2 sigma / d Lambda^2 from the truncated resolvent series.

    With ``return_tail`` the estimated size of the neglected tail is returned too.
    """
    if truncation < 50:
        raise ValueError("truncation must be at least 50")
    _check_in_branch(branch, lambda0)
    if isinstance(domain, Interval):
        a = domain.alpha
        cn.interval_branch(branch.parity[0], a, lambda0)
        value, tail = _unit_interval_second(branch.parity[0], a * a * lambda0, truncation)
        value, tail = a**3 * value, a**3 * tail
    elif isinstance(domain, (Disk, Ball)):
        r = domain.radius
        cn._radial_sigma(domain.dim, branch.modes[0], lambda0, r)
        value, tail = _radial_second(domain.dim, branch.modes[0], r * r * lambda0, truncation)
        value, tail = r**3 * value, r**3 * tail
    else:
        # on cuboids distinct branches at the same Lambda need not be orthogonal,
        # so the second sum does not reduce to a single-mode series
        raise CapabilityError(f"second derivative not available for {type(domain).__name__}")
    return (value, tail) if return_tail else value


def branch_derivatives(domain, branch: BranchId, lambda0: float, truncation: int = 200) -> BranchDerivatives:
    first = branch_first_derivative(domain, branch, lambda0)
    try:
        second, tail = branch_second_derivative(domain, branch, lambda0, truncation, return_tail=True)
    except CapabilityError:
        second, tail = None, None
    return BranchDerivatives(lambda0, first, second, "analytic", tail)


def finite_difference_derivatives(domain, branch: BranchId, lambda0: float, h: float = 1e-4) -> BranchDerivatives:
    f = lambda lam: cn.branch_value(domain, branch, lam)  # noqa: E731
    fp, f0, fm = f(lambda0 + h), f(lambda0), f(lambda0 - h)
    return BranchDerivatives(lambda0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h), "finite_difference")


# ------------------------------------------------------------------ matrix representation


@dataclass
class DtnMatrixFactorization:
    lambda0: float
    lam: float
    d0_diag: np.ndarray
    a_matrix: np.ndarray
    b_diag: np.ndarray
    truncation: tuple[int, int]
    row_labels: list[tuple[int, str]] = field(default_factory=list)
    column_labels: list[tuple[int, str, int]] = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        """D_{Lambda0} + A B_Lambda A^T."""
        return np.diag(self.d0_diag) + (self.a_matrix * self.b_diag) @ self.a_matrix.T

    def exact_diagonal(self) -> np.ndarray:
        return np.array([cn.disk_branch(p, self.lam) for p, _ in self.row_labels])


def dmatrix_truncated(lambda0: float, lam: float, n: int, m: int) -> DtnMatrixFactorization:
    """Truncated matrix representation on the unit disk.

    Rows are the DtN eigenfunctions cos(p t), sin(p t) for angular modes
    p < n; columns are the Dirichlet eigenfunctions of the same modes with
    radial index up to m.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    disk = Disk()
    cn.check_not_dirichlet(disk, lambda0)
    cn.check_not_dirichlet(disk, lam)
    rows = [(p, kind) for p in range(n) for kind in (("c",) if p == 0 else ("c", "s"))]
    d0 = {p: cn.disk_branch(p, lambda0) for p in range(n)}
    rows.sort(key=lambda r: (d0[r[0]], r[0], r[1]))
    columns = [(p, kind, k) for p, kind in rows for k in range(1, m + 1)]
    a = np.zeros((len(rows), len(columns)))
    b = np.empty(len(columns))
    col_index = {c: i for i, c in enumerate(columns)}
    for p in range(n):
        zeros = j_zeros(p, m)
        jn1 = special.jv(p + 1, zeros)
        # d_n of J_p(j r) Y(t) / ||.||, traced against the unit-norm Y
        entries = -math.sqrt(2.0) * zeros * np.sign(jn1)
        lam_dir = zeros * zeros
        coeff = (lambda0 - lam) / ((lambda0 - lam_dir) * (lam - lam_dir))
        for i, (q, kind) in enumerate(rows):
            if q != p:
                continue
            for k in range(m):
                c = col_index[(p, kind, k + 1)]
                a[i, c] = entries[k]
                b[c] = coeff[k]
    return DtnMatrixFactorization(
        lambda0,
        lam,
        np.array([d0[p] for p, _ in rows]),
        a,
        b,
        (len(rows), len(columns)),
        rows,
        columns,
    )


def _radial_ratio(k: int, lam: float) -> float:
    """z C_k'(z) / C_k(z) with C = I (lam < 0) or J (lam > 0), z = sqrt(|lam|)."""
    z = math.sqrt(abs(lam))
    if lam < 0:
        return z * bessel_derivative(BesselKind.I, k, z, scaled=True) / bessel_scaled(BesselKind.I, k, z)
    return z * bessel_derivative(BesselKind.J, k, z) / bessel_scaled(BesselKind.J, k, z)



def bessel_identity_check(k: int, lam: float, m_terms: int) -> tuple[float, float, float]:
    """Compare k + 2 lam sum_{m<=M} 1/(lam - j_{k,m}^2) with the Bessel ratio.

    The returned bound covers the neglected terms, estimated from the
    McMahon asymptote j_{k,m} ~ (m + k/2 - 1/4) pi.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    zeros = j_zeros(k, m_terms + 1)
    for j in zeros[:m_terms]:
        cn._check_pole(lam, j * j)
    lhs = k + 2.0 * lam * math.fsum(1.0 / (lam - j * j) for j in zeros[:m_terms])
    rhs = _radial_ratio(k, lam)
    shift = m_terms + 1 + 0.5 * k - 0.25
    tail = 2.0 * abs(lam) * float(special.polygamma(1, shift)) / math.pi**2
    if lam > 0:
        tail /= 1.0 - lam / zeros[m_terms] ** 2
    return lhs, rhs, TAIL_SAFETY * tail


# ------------------------------------------------------------------ small-Lambda fit

FIT_POINTS = (-4e-3, -2e-3, -1e-3, 1e-3, 2e-3, 4e-3)


def small_lambda_fit(domain) -> tuple[float, float]:
    """Least-squares (c1, c2) with sigma_1(Lambda) ~ c1 Lambda + c2 Lambda^2 near 0."""
    if not isinstance(domain, (Interval, Disk, Ball, Cuboid)):
        raise CapabilityError(f"small-Lambda fit needs a canonical domain, got {type(domain).__name__}")
    lams = np.array(FIT_POINTS)
    sig = np.array([cn.eigenvalues_at(domain, float(x), 1).values()[0] for x in lams])
    design = np.column_stack([lams, lams**2])
    (c1, c2), *_ = np.linalg.lstsq(design, sig, rcond=None)
    return float(c1), float(c2)


__all__ = [
    "BranchDerivatives",
    "DtnMatrixFactorization",
    "branch_first_derivative",
    "branch_second_derivative",
    "branch_derivatives",
    "finite_difference_derivatives",
    "dmatrix_truncated",
    "bessel_identity_check",
    "small_lambda_fit",
]
