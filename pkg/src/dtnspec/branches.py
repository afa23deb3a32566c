"""Counting functions, the Neumann/Dirichlet counting identity, and Robin spectra by duality.

A Robin eigenvalue for parameter gamma (boundary condition du/dn + gamma u = 0)
is a value of Lambda at which some DtN branch equals -gamma.  Every branch
decreases from +inf to -inf across its continuity interval, so it crosses
-gamma exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from . import canonical as cn
from .canonical import Ball, Cuboid, Disk, Interval
from .errors import CapabilityError, PoleError
from .specfun import j_zeros_below

ROOT_TOL = 1e-10


@dataclass(frozen=True)
class CountingReport:
    lam: float
    dtn_nonpositive: int
    neumann_count: int
    dirichlet_count: int

    @property
    def identity_holds(self) -> bool:
        return self.dtn_nonpositive == self.neumann_count - self.dirichlet_count


def counting_function(domain, lam: float, sigma: float) -> int:
    """Number of DtN eigenvalues at lam that do not exceed sigma, with multiplicity."""
    cn.check_not_dirichlet(domain, lam)
    return len(cn.spectrum_below(domain, lam, sigma))


def nonpositive_count_check(domain, lam: float) -> CountingReport:
    """Count the three sides of N_DtN(0) = N_Neu(lam) - N_Dir(lam) independently."""
    cn.check_not_dirichlet(domain, lam)
    return CountingReport(
        lam,
        counting_function(domain, lam, 0.0),
        cn.neumann_count(domain, lam),
        cn.dirichlet_count(domain, lam),
    )


# ------------------------------------------------------------------ Robin spectra


def _separable_roots(domain, gamma: float, window: float) -> list[float]:
    sigma = -gamma
    if isinstance(domain, Interval):
        return [v for _, _, v in cn._axis_values_upto(domain.alpha, sigma, window)]
    sides = domain.sides
    return [
        cn.cuboid_g(sides, parity, modes, sigma)
        for parity, modes in cn._cuboid_combinations(sides, sigma, window)
    ]


def _branch_root(fn, target: float, lo: float, hi: float) -> float:
    """Root of fn(x) = target on (lo, hi) for fn decreasing from +inf to -inf."""

    def h(x):
        return fn(x) - target

    if math.isinf(lo):
        a = hi - 1.0
        step = 1.0
        while h(a) <= 0:
            step *= 2.0
            a = hi - step
    else:
        delta = 1e-11 * max(1.0, abs(lo))
        a = lo + delta
        while h(a) <= 0 and delta > 3e-12 * max(1.0, abs(lo)):
            delta *= 0.5
            a = lo + delta
    if math.isinf(hi):
        raise ValueError("upper end of a Robin bracket must be finite")
    b = hi
    return brentq(h, a, b, xtol=1e-13, rtol=1e-15, maxiter=500)


def _radial_roots(domain, gamma: float, window: float) -> list[tuple[float, int]]:
    dim, radius = domain.dim, domain.radius
    target = -gamma
    r2 = radius * radius
    out: list[tuple[float, int]] = []
    m = 0
    while True:
        nu = cn._order(dim, m)
        mult = cn.harmonic_multiplicity(dim, m)
        poles = [float(j * j) / r2 for j in j_zeros_below(nu, math.sqrt(max(window, 0.0) * r2))]

        def fn(x, m=m):
            return cn._radial_sigma(dim, m, x, radius)

        edges = [-math.inf, *poles]
        # every continuity interval lying wholly below the window holds one root
        for lo, hi in zip(edges[:-1], edges[1:]):
            hi_eval = hi - 1e-11 * max(1.0, abs(hi))
            out.append((_branch_root(fn, target, lo, hi_eval), mult))
        # the interval straddling the window holds one iff sigma(window) <= target
        at_window = fn(window)
        if at_window <= target:
            out.append((_branch_root(fn, target, edges[-1], window), mult))
        elif not poles:
            # beyond here every mode starts its first pole above the window and
            # the branch values increase with m
            break
        m += 1
    return out


def _robin_count_below(domain, gamma: float, window: float) -> list[tuple[float, int]]:
    if isinstance(domain, (Interval, Cuboid)):
        return [(v, 1) for v in _separable_roots(domain, gamma, window)]
    if isinstance(domain, (Disk, Ball)):
        return _radial_roots(domain, gamma, window)
    raise CapabilityError(f"no Robin solver for {type(domain).__name__}")


def robin_spectrum(domain, gamma: float, count: int) -> list[float]:
    """The first ``count`` Robin eigenvalues for parameter gamma, sorted, with multiplicity."""
    if count <= 0:
        return []
    window = 10.0
    while True:
        try:
            roots = _robin_count_below(domain, gamma, window)
        except PoleError:
            window *= 1.0 + 1e-6
            continue
        values = sorted(v for v, mult in roots for _ in range(mult))
        if len(values) >= count:
            return values[:count]
        window = 2.0 * window + 10.0


def duality_roundtrip(domain, lam: float, k: int) -> tuple[float, int, float]:
    """Take sigma_k(lam), solve Robin with gamma = -sigma, return the (k+m)-th root.

    m is the number of Dirichlet eigenvalues below lam.
    """
    if k < 1:
        raise ValueError("k must be a positive index")
    cn.check_not_dirichlet(domain, lam)
    sigma = float(cn.eigenvalues_at(domain, lam, k).values()[k - 1])
    m = cn.dirichlet_count(domain, lam)
    robin_index = k + m
    recovered = robin_spectrum(domain, -sigma, robin_index)[robin_index - 1]
    return sigma, robin_index, recovered


__all__ = [
    "CountingReport",
    "counting_function",
    "nonpositive_count_check",
    "robin_spectrum",
    "duality_roundtrip",
    "ROOT_TOL",
]
