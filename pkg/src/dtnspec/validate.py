"""Asymptotic, isoperimetric and conjectural checks on computed DtN spectra.

Every probe returns a :class:`ProbeResult` holding a table of
(parameter, lhs, rhs, margin) rows.  For inequality probes lhs <= rhs is the
statement being tested and margin = rhs - lhs; a probe fails only when some
margin is below -SOLVER_TOL.  Probes of conjectures carry ``conjecture=True``
and are evidence, not proof.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.optimize import brentq

from . import canonical as cn
from .bem import BoundaryCurve, GeneralizedEigenSolution, solve_dtn_spectrum
from .branches import duality_roundtrip, nonpositive_count_check
from .canonical import Ball, BranchId, Cuboid, Disk, Interval
from .errors import CapabilityError
from .perturb import (
    bessel_identity_check,
    branch_first_derivative,
    finite_difference_derivatives,
    small_lambda_fit,
)
from .specfun import bessel_j_zero

SOLVER_TOL = 1e-8
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class ProbeRow:
    param: Any
    lhs: float | None
    rhs: float | None
    margin: float | None


@dataclass
class ProbeResult:
    name: str
    status: str
    rows: list[ProbeRow] = field(default_factory=list)
    conjecture: bool = False
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, (float, np.floating)):
                return float(x) if math.isfinite(x) else None
            if isinstance(x, (np.integer,)):
                return int(x)
            return x

        d = asdict(self)
        d["rows"] = [{k: clean(v) for k, v in asdict(r).items()} for r in self.rows]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _inequality_result(name: str, rows: list[ProbeRow], conjecture=False, message="") -> ProbeResult:
    worst = min((r.margin for r in rows if r.margin is not None), default=math.inf)
    status = FAIL if worst < -SOLVER_TOL else PASS
    return ProbeResult(name, status, rows, conjecture, message)


# ------------------------------------------------------------------ spectra access


def _perimeter(source) -> float:
    if isinstance(source, GeneralizedEigenSolution):
        return source.perimeter
    if isinstance(source, BoundaryCurve):
        return source.perimeter()
    return source.boundary_measure()


def _area(source) -> float:
    if isinstance(source, BoundaryCurve):
        return abs(source.signed_area())
    return source.volume()


def _is_planar(source) -> bool:
    if isinstance(source, (BoundaryCurve, GeneralizedEigenSolution, Disk)):
        return True
    return isinstance(source, Cuboid) and source.dim == 2


def _bem_nodes(k_max: int) -> int:
    return max(256, 2 * ((8 * k_max + 1) // 2))


def _sigmas(source, lam: float, k_max: int) -> np.ndarray:
    if isinstance(source, GeneralizedEigenSolution):
        return np.asarray(source.sigmas[:k_max])
    if isinstance(source, BoundaryCurve):
        return solve_dtn_spectrum(source, lam, k_max, _bem_nodes(k_max)).sigmas
    return cn.eigenvalues_at(source, lam, k_max).values(k_max)


# ------------------------------------------------------------------ Weyl law and clustering


def weyl_check(source, lam: float = 0.0, k_range=(2, 101), bound: float = 3.0) -> ProbeResult:
    """Residuals sigma_k - pi k / |boundary| over k_range for a planar source."""
    if not _is_planar(source):
        raise CapabilityError("weyl_check needs a planar source")
    lo, hi = k_range
    try:
        sig = _sigmas(source, lam, hi)
    except ValueError as exc:
        return ProbeResult("weyl", INCONCLUSIVE, message=str(exc))
    if len(sig) < hi:
        return ProbeResult("weyl", INCONCLUSIVE, message=f"only {len(sig)} eigenvalues available")
    per = _perimeter(source)
    rows = []
    for k in range(lo, hi + 1):
        res = sig[k - 1] - math.pi * k / per
        rows.append(ProbeRow(k, float(sig[k - 1]), math.pi * k / per, bound - abs(res)))
    return _inequality_result("weyl", rows, message=f"max |residual| bounded by {bound}")


def cluster_check(curve: BoundaryCurve, lam: float = 0.0, k_range=(4, 40), n_nodes: int | None = None) -> ProbeResult:
    """Gaps sigma_{2k+1} - sigma_{2k}, which decay superpolynomially on smooth curves."""
    lo, hi = k_range
    k_max = 2 * hi + 1
    n_nodes = n_nodes or _bem_nodes(k_max)
    sol = solve_dtn_spectrum(curve, lam, k_max, n_nodes)
    sig = sol.sigmas
    if len(sig) < k_max:
        return ProbeResult("cluster", INCONCLUSIVE, message="not enough eigenvalues resolved")
    tol = SOLVER_TOL * max(1.0, float(np.max(np.abs(sig))))
    if np.any(sol.residuals > tol):
        return ProbeResult("cluster", INCONCLUSIVE, message="BEM residuals above tolerance; raise n_nodes")
    ks = list(range(lo, hi + 1))
    gaps = np.array([sig[2 * k] - sig[2 * k - 1] for k in ks])
    rows = [ProbeRow(k, float(g), None, None) for k, g in zip(ks, gaps)]
    if np.all(np.abs(gaps) <= SOLVER_TOL):
        return ProbeResult("cluster", PASS, rows, message="all gaps vanish (exact pairing)")
    third = max(1, len(gaps) // 3)
    first, last = float(np.median(gaps[:third])), float(np.median(gaps[-third:]))
    rows.append(ProbeRow("median_last_vs_first_over_10", last, first / 10.0, first / 10.0 - last))
    status = PASS if last <= first / 10.0 else FAIL
    return ProbeResult("cluster", status, rows, message="median gap of last third vs first third / 10")


# ------------------------------------------------------------------ Lambda -> -inf


def polygon_coefficient_multiset(angles, pad_to: int | None = None) -> list[float]:
    """Sorted multiset of sin((2j-1) alpha / 2), j <= kbar(alpha), over the corner angles.

    kbar(alpha) is the largest k >= 0 with 2k - 1 < pi / alpha.  With ``pad_to``
    the list is extended with 1s to that length.
    """
    coeffs = []
    for a in angles:
        a = float(a)
        if not 0.0 < a < 2.0 * math.pi:
            raise ValueError(f"corner angle {a} outside (0, 2 pi)")
        kbar = 0
        while 2 * (kbar + 1) - 1 < math.pi / a:
            kbar += 1
        coeffs.extend(math.sin((2 * j - 1) * a / 2.0) for j in range(1, kbar + 1))
    coeffs.sort()
    if pad_to is not None and len(coeffs) < pad_to:
        coeffs.extend([1.0] * (pad_to - len(coeffs)))
    return coeffs


def neg_infty_check(domain, branch_count: int = 1, lambda_grid=None, tol: float = 1e-2) -> ProbeResult:
    """Behaviour of the lowest branches as Lambda -> -inf.

    Balls: sigma_k - sqrt(-Lambda) -> -(d-1)/(2R).  Intervals: sigma/sqrt(-Lambda) -> 1.
    Rectangles: sigma_k/sqrt(-Lambda) -> the corner coefficients (a conjecture for polygons).
    The check uses the deepest grid point and requires the error to shrink along the grid.
    """
    grid = sorted(lambda_grid if lambda_grid is not None else [-1e2, -1e3, -1e4, -1e5, -1e6], reverse=True)
    if min(grid) > -1e4:
        return ProbeResult("neg_infty", INCONCLUSIVE, message="grid not deep enough (needs |Lambda| >= 1e4)")
    conjecture = False
    if isinstance(domain, (Disk, Ball)):
        target = [-(domain.dim - 1) / (2.0 * domain.radius)] * branch_count

        def stat(lam, k):
            return sig_at(lam)[k] - math.sqrt(-lam)

    elif isinstance(domain, Interval):
        target = [1.0] * branch_count

        def stat(lam, k):
            return sig_at(lam)[k] / math.sqrt(-lam)

    elif isinstance(domain, Cuboid) and domain.dim == 2:
        conjecture = True
        target = polygon_coefficient_multiset([math.pi / 2] * 4, pad_to=branch_count)[:branch_count]

        def stat(lam, k):
            return sig_at(lam)[k] / math.sqrt(-lam)

    else:
        raise CapabilityError(f"neg_infty_check does not support {type(domain).__name__}")

    cache: dict[float, np.ndarray] = {}

    def sig_at(lam):
        if lam not in cache:
            cache[lam] = cn.eigenvalues_at(domain, lam, branch_count).values(branch_count)
        return cache[lam]

    rows = []
    ok = True
    for k in range(branch_count):
        errors = []
        for i, lam in enumerate(grid):
            s = stat(lam, k)
            errors.append(abs(s - target[k]))
            # only the deepest point is held to the tolerance
            margin = tol - errors[-1] if i == len(grid) - 1 else None
            rows.append(ProbeRow(f"k={k + 1},lambda={lam:g}", s, target[k], margin))
        ok &= errors[-1] <= tol and errors[-1] <= errors[0] + SOLVER_TOL
    return ProbeResult("neg_infty", PASS if ok else FAIL, rows, conjecture)


# ------------------------------------------------------------------ inequalities


def _steklov(target, k_max: int) -> np.ndarray:
    return _sigmas(target, 0.0, k_max)


def _probe_weinstock(target, **_):
    if not _is_planar(target):
        raise CapabilityError("Weinstock's inequality is planar")
    sig = _steklov(target, 2)
    lhs = float(sig[1]) * _perimeter(target)
    return _inequality_result("weinstock", [ProbeRow(2, lhs, 2 * math.pi, 2 * math.pi - lhs)])


def _probe_hps(target, k_max: int = 10, **_):
    if not _is_planar(target):
        raise CapabilityError("Hersch-Payne-Schiffer is planar")
    sig = _steklov(target, k_max)
    per = _perimeter(target)
    rows = [
        ProbeRow(k, float(sig[k - 1]) * per, 2 * math.pi * (k - 1), 2 * math.pi * (k - 1) - float(sig[k - 1]) * per)
        for k in range(2, k_max + 1)
    ]
    return _inequality_result("hersch_payne_schiffer", rows)


def _first_dirichlet(target) -> float | None:
    if isinstance(target, (BoundaryCurve, GeneralizedEigenSolution)):
        return None
    return cn.laplace_spectrum(target, "dirichlet", 1e4)[0][0]


def _probe_sigma1_volume(target, lambda_grid=None, **_):
    grid = list(lambda_grid or [-50.0, -10.0, -1.0, -0.1, 0.0])
    if lambda_grid is None:
        lam1 = _first_dirichlet(target)
        if lam1 is not None:
            grid += [0.5 * lam1, 0.9 * lam1]
    ratio = _area(target) / _perimeter(target)
    rows = []
    for lam in grid:
        s1 = float(_sigmas(target, lam, 1)[0])
        rows.append(ProbeRow(lam, s1, -lam * ratio, -lam * ratio - s1))
    return _inequality_result("sigma1_volume", rows)


def _probe_sigma1_sqrt(target, lambda_grid=None, **_):
    grid = lambda_grid or [-1e3, -100.0, -10.0, -1.0, -0.01]
    rows = []
    for lam in grid:
        if lam >= 0:
            raise ValueError("sigma1_sqrt needs Lambda < 0")
        s1 = float(_sigmas(target, lam, 1)[0])
        rows.append(ProbeRow(lam, s1, math.sqrt(-lam), math.sqrt(-lam) - s1))
    return _inequality_result("sigma1_sqrt", rows)


def _probe_conj_sqroot(target, lambda_grid=None, k_max: int = 6, **_):
    if isinstance(target, (BoundaryCurve, GeneralizedEigenSolution)):
        raise CapabilityError("branch tracking needs a canonical domain")
    grid = lambda_grid or [-1e3, -100.0, -10.0, -4.0, -1.0, -0.1]
    entries = cn.eigenvalues_at(target, 0.0, k_max).entries
    rows = []
    for e in entries:
        s0 = e.sigma
        for lam in grid:
            if not e.branch.contains(lam):
                continue
            s = cn.branch_value(target, e.branch, lam)
            rows.append(ProbeRow(f"{e.branch.label()},lambda={lam:g}", s - s0, math.sqrt(-lam), math.sqrt(-lam) - (s - s0)))
    return _inequality_result("conj_sqroot", rows, conjecture=True, message="probe, not proof")


def _probe_friedlander(target, k_max: int = 20, **_):
    if isinstance(target, (BoundaryCurve, GeneralizedEigenSolution)):
        raise CapabilityError("Laplacian spectra are only available for canonical domains")
    cap = 50.0
    while True:
        neu = [v for v, m in cn.laplace_spectrum(target, "neumann", cap) for _ in range(m)]
        dirc = [v for v, m in cn.laplace_spectrum(target, "dirichlet", cap) for _ in range(m)]
        if len(neu) > k_max and len(dirc) >= k_max:
            break
        cap *= 2.0
    rows = [ProbeRow(k, neu[k], dirc[k - 1], dirc[k - 1] - neu[k]) for k in range(1, k_max + 1)]
    # the inequality is strict
    worst = min(r.margin for r in rows)
    status = PASS if worst > 0 else FAIL
    return ProbeResult("friedlander", status, rows)


HOERMANDER_GRID = tuple([0.0] + [-(10.0**e) for e in np.linspace(-2.0, 4.0, 61)])


def _circle_laplacian(k_max: int, radius: float) -> list[float]:
    nus = [0.0]
    m = 1
    while len(nus) < k_max:
        nus += [m * m / radius**2] * 2
        m += 1
    return nus[:k_max]


def _probe_hoermander(target, lambda_floor: float = -1e4, k_max: int = 20, bound: float = 2.0, **_):
    if not isinstance(target, Disk):
        raise CapabilityError("boundary Laplacian eigenvalues are only available for the circle")
    nus = _circle_laplacian(k_max, target.radius)
    grid = [lam for lam in HOERMANDER_GRID if lambda_floor <= lam <= 0.0]
    stat, where = 0.0, None
    rows = []
    for lam in grid:
        sig = cn.eigenvalues_at(target, lam, k_max).values(k_max)
        dev = np.abs(sig - np.sqrt(-lam + np.asarray(nus)))
        k = int(np.argmax(dev))
        rows.append(ProbeRow(lam, float(dev[k]), bound, bound - float(dev[k])))
        if dev[k] > stat:
            stat, where = float(dev[k]), (float(lam), k + 1)
    return _inequality_result("hoermander", rows, message=f"sup deviation {stat:.6g} at (lambda, k) = {where}")


def hoermander_statistic(target, lambda_floor: float = -1e4, k_max: int = 20) -> float:
    result = _probe_hoermander(target, lambda_floor, k_max)
    return max(r.lhs for r in result.rows)


INEQUALITIES: dict[str, Callable] = {
    "weinstock": _probe_weinstock,
    "hersch_payne_schiffer": _probe_hps,
    "sigma1_volume": _probe_sigma1_volume,
    "sigma1_sqrt": _probe_sigma1_sqrt,
    "conj_sqroot": _probe_conj_sqroot,
    "friedlander": _probe_friedlander,
    "hoermander": _probe_hoermander,
}


def inequality_probe(name: str, target, **params) -> ProbeResult:
    if name not in INEQUALITIES:
        raise CapabilityError(f"unknown probe {name!r}; choose from {sorted(INEQUALITIES)}")
    return INEQUALITIES[name](target, **params)


# ------------------------------------------------------------------ suites


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("DTN_THREADS", "1")))
    except ValueError:
        return 1


def _run(named_jobs: list[tuple[str, Callable[[], ProbeResult]]]) -> list[ProbeResult]:
    def run_one(item):
        label, job = item
        try:
            result = job()
        except Exception as exc:  # a crashing probe is reported, not raised
            return ProbeResult(label, FAIL, message=f"{type(exc).__name__}: {exc}")
        result.name = label
        return result

    with ThreadPoolExecutor(_workers()) as pool:
        return list(pool.map(run_one, named_jobs))


def probe_suite() -> list[ProbeResult]:
    """Inequality and asymptotic probes on disk, ball, square and kite."""
    disk, ball, square = Disk(), Ball(3), Cuboid((math.pi / 2, math.pi / 2))
    kite = BoundaryCurve.kite()
    jobs = [
        ("weyl:disk:lambda=0", lambda: weyl_check(disk, 0.0, (2, 101))),
        ("weyl:disk:lambda=-10", lambda: weyl_check(disk, -10.0, (2, 101), bound=2.0)),
        ("weyl:square:lambda=0", lambda: weyl_check(square, 0.0, (2, 60))),
        ("cluster:circle", lambda: cluster_check(BoundaryCurve.circle(), 0.0, (4, 20))),
        ("cluster:kite", lambda: cluster_check(kite, 0.0, (4, 40))),
        ("cluster:ellipse", lambda: cluster_check(BoundaryCurve.ellipse(2.0, 1.0), 0.0, (4, 40))),
        ("neg_infty:disk", lambda: neg_infty_check(disk, 1, tol=1e-3)),
        ("neg_infty:ball3", lambda: neg_infty_check(ball, 1, tol=1e-3)),
        ("neg_infty:interval", lambda: neg_infty_check(Interval(1.0), 2, tol=1e-3)),
        ("neg_infty:square", lambda: neg_infty_check(square, 4, tol=5e-4)),
        ("weinstock:disk", lambda: inequality_probe("weinstock", disk)),
        ("weinstock:kite", lambda: inequality_probe("weinstock", kite)),
        ("hersch_payne_schiffer:kite", lambda: inequality_probe("hersch_payne_schiffer", kite)),
        ("hersch_payne_schiffer:square", lambda: inequality_probe("hersch_payne_schiffer", square)),
        ("sigma1_volume:disk", lambda: inequality_probe("sigma1_volume", disk)),
        ("sigma1_volume:ball3", lambda: inequality_probe("sigma1_volume", ball)),
        ("sigma1_volume:square", lambda: inequality_probe("sigma1_volume", square)),
        ("sigma1_volume:kite", lambda: inequality_probe("sigma1_volume", kite)),
        ("sigma1_sqrt:disk", lambda: inequality_probe("sigma1_sqrt", disk)),
        ("sigma1_sqrt:ball3", lambda: inequality_probe("sigma1_sqrt", ball)),
        ("sigma1_sqrt:square", lambda: inequality_probe("sigma1_sqrt", square)),
        ("sigma1_sqrt:kite", lambda: inequality_probe("sigma1_sqrt", kite, lambda_grid=[-100.0, -10.0, -1.0])),
        ("conj_sqroot:disk", lambda: inequality_probe("conj_sqroot", disk)),
        ("conj_sqroot:ball3", lambda: inequality_probe("conj_sqroot", ball)),
        ("conj_sqroot:square", lambda: inequality_probe("conj_sqroot", square)),
        ("friedlander:disk", lambda: inequality_probe("friedlander", disk)),
        ("friedlander:square", lambda: inequality_probe("friedlander", square)),
        ("friedlander:ball3", lambda: inequality_probe("friedlander", ball)),
        ("hoermander:disk", lambda: inequality_probe("hoermander", disk)),
    ]
    results = _run(jobs)
    for r in results:
        if r.name.startswith("neg_infty:square"):
            r.conjecture = True
    return results


# acceptance checks ---------------------------------------------------------


def _check(name: str, rows: list[ProbeRow], ok: bool, message: str = "") -> ProbeResult:
    return ProbeResult(name, PASS if ok else FAIL, rows, False, message)


def check_disk_closed_forms() -> ProbeResult:
    t0 = time.perf_counter()
    vals = cn.eigenvalues_at(Disk(), 0.0, 9).values(9)
    elapsed = time.perf_counter() - t0
    expected = [0, 1, 1, 2, 2, 3, 3, 4, 4]
    rows = [ProbeRow(k + 1, float(v), float(e), 1e-12 - abs(v - e)) for k, (v, e) in enumerate(zip(vals, expected))]
    rows.append(ProbeRow("seconds", elapsed, 1.0, 1.0 - elapsed))
    return _check("disk_closed_forms", rows, all(r.margin >= 0 for r in rows))


KITE_REFERENCE = {-5.0: {2: 1.743, 6: 2.740}, 5.0: {2: -3.344, 6: 0.784}}


def check_kite_bem() -> ProbeResult:
    rows, ok = [], True
    kite = BoundaryCurve.kite()
    for lam, ref in KITE_REFERENCE.items():
        t0 = time.perf_counter()
        sol = solve_dtn_spectrum(kite, lam, 8, 512)
        elapsed = time.perf_counter() - t0
        for k, value in ref.items():
            err = abs(sol.sigmas[k - 1] - value)
            rows.append(ProbeRow(f"lambda={lam:g},k={k}", float(sol.sigmas[k - 1]), value, 5e-3 - err))
        rows.append(ProbeRow(f"lambda={lam:g},seconds", elapsed, 60.0, 60.0 - elapsed))
    ok = all(r.margin >= 0 for r in rows)
    return _check("kite_bem", rows, ok)


def check_circle_bem() -> ProbeResult:
    rows = []
    circle = BoundaryCurve.circle()
    for lam in (-5.0, 0.0):
        t0 = time.perf_counter()
        sol = solve_dtn_spectrum(circle, lam, 8, 256)
        elapsed = time.perf_counter() - t0
        ref = cn.eigenvalues_at(Disk(), lam, 8).values(8)
        err = float(np.max(np.abs(sol.sigmas - ref)))
        rows.append(ProbeRow(f"lambda={lam:g}", err, 1e-8, 1e-8 - err))
        rows.append(ProbeRow(f"lambda={lam:g},seconds", elapsed, 20.0, 20.0 - elapsed))
    return _check("circle_bem", rows, all(r.margin >= 0 for r in rows))


def check_first_derivative() -> ProbeResult:
    rows = []
    for m in range(4):
        for lam0 in (-2.0, 0.0, 1.0):
            b = BranchId("disk", (), (m,))
            exact = branch_first_derivative(Disk(), b, lam0)
            fd = finite_difference_derivatives(Disk(), b, lam0, 1e-4).first
            rel = abs(exact - fd) / abs(exact)
            rows.append(ProbeRow(f"m={m},lambda0={lam0:g}", exact, fd, 1e-6 - rel))
    return _check("first_derivative", rows, all(r.margin > 0 for r in rows))


SMALL_LAMBDA_TARGETS = {"disk": (Disk(), (-0.5, -1.0 / 8.0)), "ball3": (Ball(3), (-1.0 / 3.0, -2.0 / 45.0))}


def check_small_lambda_fit() -> ProbeResult:
    rows = []
    for label, (dom, target) in SMALL_LAMBDA_TARGETS.items():
        fit = small_lambda_fit(dom)
        for name, got, want in zip(("c1", "c2"), fit, target):
            rows.append(ProbeRow(f"{label}:{name}", got, want, 1e-6 - abs(got - want)))
    return _check("small_lambda_fit", rows, all(r.margin >= 0 for r in rows))


def counting_grid(domain, count: int = 50, lo: float = -50.0, hi: float = 40.0, gap: float = 1e-6) -> list[float]:
    """``count`` values in (lo, hi) avoiding gap-neighbourhoods of Dirichlet eigenvalues."""
    poles = [v for v, _ in cn.laplace_spectrum(domain, "dirichlet", hi + 1.0)]
    grid = []
    for lam in np.linspace(lo, hi, count + 2)[1:-1]:
        lam = float(lam) + 1e-3 * math.sqrt(2.0)
        while any(abs(lam - p) <= gap for p in poles):
            lam += 10.0 * gap
        grid.append(lam)
    return grid


def check_counting_identity() -> ProbeResult:
    rows = []
    for label, dom in (("disk", Disk()), ("square", Cuboid((math.pi / 2, math.pi / 2)))):
        for lam in counting_grid(dom):
            rep = nonpositive_count_check(dom, lam)
            rhs = rep.neumann_count - rep.dirichlet_count
            rows.append(ProbeRow(f"{label}:lambda={lam:.6g}", rep.dtn_nonpositive, rhs, -abs(rep.dtn_nonpositive - rhs)))
    return _check("counting_identity", rows, all(r.margin == 0 for r in rows))


DUALITY_CASES = (
    [(Disk(), lam, k) for lam, k in ((-10.0, 1), (-1.0, 2), (3.0, 1), (10.0, 3), (20.0, 2), (30.0, 4), (45.0, 1))]
    + [(Interval(1.0), lam, k) for lam, k in ((-20.0, 1), (-1.0, 2), (5.0, 1), (15.0, 2), (50.0, 1), (100.0, 2), (200.0, 1))]
    + [(Cuboid((0.5, 0.8)), lam, k) for lam, k in ((-5.0, 1), (2.0, 2), (10.0, 3), (30.0, 3))]
    + [(Cuboid((math.pi / 2, math.pi / 2)), lam, k) for lam, k in ((-3.0, 2), (3.5, 1))]
)


def check_duality() -> ProbeResult:
    rows = []
    for dom, lam, k in DUALITY_CASES:
        _, idx, recovered = duality_roundtrip(dom, lam, k)
        err = abs(recovered - lam)
        rows.append(ProbeRow(f"{type(dom).__name__}:lambda={lam:g},k={k}", recovered, lam, 1e-8 - err))
    return _check("duality_roundtrip", rows, all(r.margin > 0 for r in rows))


def check_bessel_identity() -> ProbeResult:
    rows = []
    for k in (0, 1, 2):
        for lam in (-4.0, -1.0, 3.0):
            lhs, rhs, tail = bessel_identity_check(k, lam, 1000)
            rows.append(ProbeRow(f"k={k},lambda={lam:g}", lhs, rhs, tail - abs(lhs - rhs)))
    return _check("bessel_identity", rows, all(r.margin >= 0 for r in rows))


def check_no_crossing() -> ProbeResult:
    rows = []
    for n in range(10):
        top = bessel_j_zero(n, 1) ** 2
        grid = np.linspace(-100.0, top, 201)[:-1]
        lower = np.array([cn.disk_branch(n, lam) for lam in grid])
        for m in range(n + 1, 11):
            upper = np.array([cn.disk_branch(m, lam) for lam in grid])
            gap = float(np.min(upper - lower))
            rows.append(ProbeRow(f"n={n},m={m}", gap, 0.0, gap))
    return _check("no_crossing", rows, all(r.margin > 0 for r in rows))


CROSSING_HALF_WIDTHS = (math.pi / 2, 27 * math.pi / 16)
CROSSING_PAIR = ((("s", "a"), (1, 2)), (("a", "s"), (1, 2)))


def locate_crossing(half_widths=CROSSING_HALF_WIDTHS, pair=CROSSING_PAIR, lo=-5.0, hi=None) -> float:
    """Lambda at which two cuboid branches intersect."""
    (p1, m1), (p2, m2) = pair
    sides = tuple(2.0 * h for h in half_widths)
    top = min(cn._cuboid_dirichlet(sides, p1, m1), cn._cuboid_dirichlet(sides, p2, m2))
    hi = hi if hi is not None else top - 1e-6 * max(1.0, abs(top))

    def diff(lam):
        return cn.cuboid_branch(half_widths, p1, m1, lam) - cn.cuboid_branch(half_widths, p2, m2, lam)

    return brentq(diff, lo, hi, xtol=1e-12)


def check_rectangle_crossing() -> ProbeResult:
    lam = locate_crossing()
    return _check("rectangle_crossing", [ProbeRow("crossing", lam, -0.65, 0.05 - abs(lam + 0.65))], abs(lam + 0.65) <= 0.05)


def check_neg_infinity() -> ProbeResult:
    lam = -1e6
    disk = cn.disk_branch(0, lam) - math.sqrt(-lam)
    sq = cn.eigenvalues_at(Cuboid((math.pi / 2, math.pi / 2)), lam, 1).values(1)[0] / math.sqrt(-lam)
    rows = [
        ProbeRow("disk:sigma-sqrt(-lambda)", disk, -0.5, 1e-3 - abs(disk + 0.5)),
        ProbeRow("square:sigma1/sqrt(-lambda)", float(sq), math.sqrt(0.5), 5e-4 - abs(sq - math.sqrt(0.5))),
    ]
    return _check("negative_infinity", rows, all(r.margin >= 0 for r in rows))


def check_property_probes() -> ProbeResult:
    # the clustering probes are reported by the probe suite but are not among
    # the properties this check covers
    results = [r for r in probe_suite() if not r.name.startswith("cluster:")]
    rows = [ProbeRow(r.name, None, None, 0.0 if r.passed else -1.0) for r in results if not r.conjecture]
    ok = all(r.passed for r in results if not r.conjecture)
    return _check("property_probes", rows, ok)


ACCEPTANCE_CHECKS: tuple[Callable[[], ProbeResult], ...] = (
    check_disk_closed_forms,
    check_kite_bem,
    check_circle_bem,
    check_first_derivative,
    check_small_lambda_fit,
    check_counting_identity,
    check_duality,
    check_bessel_identity,
    check_no_crossing,
    check_rectangle_crossing,
    check_neg_infinity,
    check_property_probes,
)


def acceptance_suite() -> list[ProbeResult]:
    return _run([(f.__name__.removeprefix("check_"), f) for f in ACCEPTANCE_CHECKS])


SUITES = {"probes": probe_suite, "acceptance": acceptance_suite}


def report(suite: str, results: list[ProbeResult]) -> dict:
    blocking = [r for r in results if not r.conjecture]
    status = PASS if all(r.passed for r in blocking) else FAIL
    return {"suite": suite, "status": status, "probes": [r.to_dict() for r in results]}


__all__ = [
    "ProbeRow",
    "ProbeResult",
    "weyl_check",
    "cluster_check",
    "neg_infty_check",
    "polygon_coefficient_multiset",
    "inequality_probe",
    "hoermander_statistic",
    "probe_suite",
    "acceptance_suite",
    "locate_crossing",
    "counting_grid",
    "report",
    "SUITES",
]
