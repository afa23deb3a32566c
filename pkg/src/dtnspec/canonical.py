"""Closed-form DtN spectra of intervals, disks, balls and cuboids.

An interval of length ``alpha`` is (-alpha/2, alpha/2).  A cuboid is
described by its half-widths, so its j-th side has length 2*half_widths[j].
Disks and balls are centred at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence, Union

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import CapabilityError, PoleError
from .specfun import dini_zeros_below, j_zeros, j_zeros_below

POLE_RTOL = 1e-12
DEGENERACY_TOL = 1e-9
SMALL_ARGUMENT = 1.0  # |R^2 Lambda| below this uses the 0F1 series form
XTOL_TINY = 1e-300  # brentq tolerances are then purely relative, so roots near 0 stay accurate


# ------------------------------------------------------------------ domains


@dataclass(frozen=True)
class Interval:
    alpha: float = 1.0

    def __post_init__(self):
        _positive(self.alpha, "alpha")

    @property
    def dim(self) -> int:
        return 1

    def volume(self) -> float:
        return self.alpha

    def boundary_measure(self) -> float:
        return 2.0


@dataclass(frozen=True)
class Disk:
    radius: float = 1.0

    def __post_init__(self):
        _positive(self.radius, "radius")

    @property
    def dim(self) -> int:
        return 2

    def volume(self) -> float:
        return math.pi * self.radius**2

    def boundary_measure(self) -> float:
        return 2.0 * math.pi * self.radius


@dataclass(frozen=True)
class Ball:
    dim: int = 3
    radius: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise ValueError("Ball needs an integer dimension >= 3 (use Disk for d = 2)")
        _positive(self.radius, "radius")

    def volume(self) -> float:
        d = self.dim
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * self.radius**d

    def boundary_measure(self) -> float:
        return self.dim * self.volume() / self.radius


@dataclass(frozen=True)
class Cuboid:
    half_widths: tuple[float, ...]

    def __post_init__(self):
        hw = tuple(float(a) for a in self.half_widths)
        if len(hw) < 2:
            raise ValueError("a cuboid needs at least two half-widths")
        for a in hw:
            _positive(a, "half-width")
        object.__setattr__(self, "half_widths", hw)

    @property
    def dim(self) -> int:
        return len(self.half_widths)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(2.0 * a for a in self.half_widths)

    def volume(self) -> float:
        return math.prod(self.sides)

    def boundary_measure(self) -> float:
        sides = self.sides
        total = 0.0
        for j in range(len(sides)):
            total += 2.0 * math.prod(s for i, s in enumerate(sides) if i != j)
        return total


def _positive(value, name):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value}")


# a parametric planar curve from the bem module is also accepted where noted
DomainSpec = Union[Interval, Disk, Ball, Cuboid, "BoundaryCurve"]  # noqa: F821


# ------------------------------------------------------------------ branches


@dataclass(frozen=True)
class BranchId:
    """One real-analytic eigenvalue branch.

    ``family`` is one of interval, disk, ball, cuboid, curve.  For intervals
    and cuboids ``parity``/``modes`` carry the parity vector and the index of
    the continuity interval on each axis; for disks and balls ``modes`` holds
    the angular index and ``sheet`` the continuity interval (1 is the one
    extending to -inf).  ``interval`` gives the continuity interval in Lambda.
    """

    family: str
    parity: tuple[str, ...] = ()
    modes: tuple[int, ...] = ()
    sheet: int = 1
    interval: tuple[float, float] = (-math.inf, math.inf)
    dim: int | None = None

    def label(self) -> str:
        if self.family in ("interval", "cuboid"):
            return "".join(self.parity) + ":" + ",".join(str(m) for m in self.modes)
        if self.family in ("disk", "ball"):
            return f"m={self.modes[0]}"
        return f"k={self.modes[0]}" if self.modes else self.family

    def contains(self, lam: float) -> bool:
        lo, hi = self.interval
        return lo < lam < hi


@dataclass(frozen=True)
class SpectrumEntry:
    sigma: float
    multiplicity: int
    branch: BranchId


@dataclass
class Spectrum:
    lam: float
    entries: list[SpectrumEntry] = field(default_factory=list)
    near_degenerate: bool = False

    def values(self, k: int | None = None) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity, optionally the first k."""
        out = [e.sigma for e in self.entries for _ in range(e.multiplicity)]
        return np.array(out[:k] if k is not None else out)

    def __len__(self) -> int:
        return sum(e.multiplicity for e in self.entries)


def _make_spectrum(lam: float, entries: list[SpectrumEntry]) -> Spectrum:
    entries = sorted(entries, key=lambda e: (e.sigma, e.branch.parity, e.branch.modes))
    near = any(
        b.sigma - a.sigma <= DEGENERACY_TOL and a.branch != b.branch
        for a, b in zip(entries, entries[1:])
    )
    return Spectrum(lam, entries, near)


def _check_pole(lam: float, pole: float):
    if abs(lam - pole) <= POLE_RTOL * max(1.0, abs(pole)):
        raise PoleError(pole)


# ------------------------------------------------------------------ interval


def _unit_dirichlet(parity: str, m: int) -> float:
    """Dirichlet thresholds of the unit interval split by parity; m = 0 gives -inf."""
    if m == 0:
        return -math.inf
    n = 2 * m - 1 if parity == "s" else 2 * m
    return (n * math.pi) ** 2


def _unit_f(parity: str, x: float) -> float:
    if x < 0:
        k = math.sqrt(-x)
        if parity == "s":
            return k * math.tanh(0.5 * k)
        return k / math.tanh(0.5 * k)
    if x == 0:
        return 0.0 if parity == "s" else 2.0
    k = math.sqrt(x)
    if parity == "s":
        return -k * math.tan(0.5 * k)
    return k / math.tan(0.5 * k)


def _unit_sheet(parity: str, x: float) -> int:
    """Index m of the continuity interval (lambda_{m-1}, lambda_m] containing x."""
    if x <= 0:
        return 1
    r = math.sqrt(x) / math.pi
    m = math.floor((r + 1) / 2) + 1 if parity == "s" else math.floor(r / 2) + 1
    while _unit_dirichlet(parity, m - 1) >= x:
        m -= 1
    while _unit_dirichlet(parity, m) < x:
        m += 1
    return m


def _check_parity(aleph: str):
    if aleph not in ("s", "a"):
        raise ValueError(f"parity must be 's' or 'a', got {aleph!r}")


def interval_branch(aleph: str, alpha: float, lam: float) -> float:
    """Eigenvalue of the symmetric (s) or antisymmetric (a) branch on an interval of length alpha."""
    _check_parity(aleph)
    _positive(alpha, "alpha")
    x = alpha * alpha * lam
    if x > 0:
        m = _unit_sheet(aleph, x)
        for mm in (m - 1, m):
            if mm >= 1:
                _check_pole(lam, _unit_dirichlet(aleph, mm) / alpha**2)
    return _unit_f(aleph, x) / alpha


def _interval_branch_id(aleph: str, alpha: float, lam: float) -> BranchId:
    m = _unit_sheet(aleph, alpha * alpha * lam)
    lo = _unit_dirichlet(aleph, m - 1) / alpha**2
    hi = _unit_dirichlet(aleph, m) / alpha**2
    return BranchId("interval", (aleph,), (m,), m, (lo, hi))


# ------------------------------------------------------------------ disk and ball


def harmonic_multiplicity(dim: int, m: int) -> int:
    """Dimension of degree-m spherical harmonics in dimension ``dim``."""
    first = math.comb(dim + m - 1, dim - 1)
    second = math.comb(dim + m - 3, dim - 1) if dim + m - 3 >= dim - 1 else 0
    return first - second


def _order(dim: int, m: int) -> float:
    return 0.5 * dim - 1.0 + m


def _radial_poles_near(nu: float, x: float) -> list[float]:
    """Squared zeros of J_nu bracketing the unit-radius parameter x > 0."""
    z = math.sqrt(x)
    zeros = j_zeros_below(nu, z + 4.0)
    return [float(j * j) for j in zeros]


def _radial_sigma(dim: int, m: int, lam: float, radius: float) -> float:
    nu = _order(dim, m)
    x = radius * radius * lam
    if x != 0 and abs(x) <= SMALL_ARGUMENT:
        # power-series form; the Bessel ratio would underflow to 0/0 here
        t = -0.25 * x
        value = m + 2.0 * t / (nu + 1.0) * special.hyp0f1(nu + 2.0, t) / special.hyp0f1(nu + 1.0, t)
    elif x < 0:
        z = math.sqrt(-x)
        # exponentially scaled ratio is safe for any z
        value = m + z * special.ive(nu + 1, z) / special.ive(nu, z)
    elif x == 0:
        value = float(m)
    else:
        for p in _radial_poles_near(nu, x):
            _check_pole(lam, p / radius**2)
        z = math.sqrt(x)
        value = m - z * special.jv(nu + 1, z) / special.jv(nu, z)
    return value / radius


def disk_branch(m: int, lam: float, radius: float = 1.0) -> float:
    """Eigenvalue of angular mode m on the disk of the given radius."""
    _check_mode(m)
    return _radial_sigma(2, m, lam, radius)


def ball_branch(dim: int, m: int, lam: float, radius: float = 1.0) -> float:
    """Eigenvalue of the degree-m harmonic branch on the ball in dimension ``dim``."""
    if int(dim) != dim or dim < 2:
        raise ValueError("dimension must be an integer >= 2")
    _check_mode(m)
    return _radial_sigma(int(dim), m, lam, radius)


def _check_mode(m):
    if int(m) != m or m < 0:
        raise ValueError(f"angular index must be a nonnegative integer, got {m}")


def _radial_branch_id(dim: int, m: int, lam: float, radius: float) -> BranchId:
    nu = _order(dim, m)
    x = radius * radius * lam
    below = j_zeros_below(nu, math.sqrt(x)) if x > 0 else np.empty(0)
    sheet = len(below) + 1
    lo = float(below[-1] ** 2) / radius**2 if len(below) else -math.inf
    hi = float(j_zeros(nu, sheet)[-1] ** 2) / radius**2
    family = "disk" if dim == 2 else "ball"
    return BranchId(family, (), (m,), sheet, (lo, hi), dim)


def _radial_spectrum_below(dim: int, radius: float, lam: float, bound) -> list[SpectrumEntry]:
    """Entries with sigma <= bound(entries) for a disk or ball.

    Modes whose first Dirichlet threshold lies below lam are all evaluated;
    beyond them the branch values increase with m, so the scan stops at the
    first mode exceeding the bound, after one extra mode as a margin.
    """
    x = radius * radius * lam
    first_ordered = 0
    if x > 0:
        while j_zeros(_order(dim, first_ordered), 1)[0] ** 2 <= x:
            first_ordered += 1
    entries: list[SpectrumEntry] = []
    m = 0
    margin_used = False
    while True:
        sigma = _radial_sigma(dim, m, lam, radius)
        entry = SpectrumEntry(sigma, harmonic_multiplicity(dim, m), _radial_branch_id(dim, m, lam, radius))
        entries.append(entry)
        if m >= first_ordered and sigma > bound(entries):
            if margin_used:
                break
            margin_used = True
        m += 1
    limit = bound(entries)
    return [e for e in entries if e.sigma <= limit]


# ------------------------------------------------------------------ cuboid


def _unit_g(parity: str, x: float, t: float) -> float:
    """Pole-free function whose zero in x solves f_parity(x) = t."""
    if x < 0:
        k = math.sqrt(-x)
        if parity == "s":
            return k * math.tanh(0.5 * k) - t
        return 1.0 - t * math.tanh(0.5 * k) / k
    if x == 0:
        return -t if parity == "s" else 1.0 - 0.5 * t
    k = math.sqrt(x)
    if parity == "s":
        return -k * math.sin(0.5 * k) - t * math.cos(0.5 * k)
    return math.cos(0.5 * k) - t * math.sin(0.5 * k) / k


def _unit_finv(parity: str, m: int, t: float) -> float:
    """The x in (lambda_{parity,m-1}, lambda_{parity,m}) with f_parity(x) = t."""
    hi = _unit_dirichlet(parity, m)
    if m == 1:
        k = max(abs(t) + 2.0, 4.0)
        lo = -k * k
    else:
        lo = _unit_dirichlet(parity, m - 1)
    return brentq(lambda x: _unit_g(parity, x, t), lo, hi, xtol=XTOL_TINY, rtol=1e-15, maxiter=4000)


def _axis_index(i: int) -> tuple[str, int]:
    # Robin eigenvalues of an interval alternate s, a, s, a, ... in size
    return ("s", (i + 1) // 2) if i % 2 == 1 else ("a", i // 2)


def _axis_value(side: float, parity: str, m: int, sigma: float) -> float:
    return _unit_finv(parity, m, side * sigma) / side**2


def _axis_values_upto(side: float, sigma: float, budget: float) -> list[tuple[str, int, float]]:
    """Per-axis Robin eigenvalues (gamma = -sigma) not exceeding budget, in increasing order."""
    out = []
    i = 1
    while True:
        parity, m = _axis_index(i)
        if _unit_dirichlet(parity, m - 1) / side**2 > budget:
            break
        v = _axis_value(side, parity, m, sigma)
        if v > budget:
            break
        out.append((parity, m, v))
        i += 1
    return out


def _cuboid_dirichlet(sides: Sequence[float], parity: Sequence[str], modes: Sequence[int]) -> float:
    return sum(_unit_dirichlet(p, m) / s**2 for s, p, m in zip(sides, parity, modes))


def _check_cuboid_pole(sides: Sequence[float], lam: float):
    """Raise when lam is (numerically) a Dirichlet eigenvalue of the cuboid."""
    if lam <= 0:
        return
    tol = POLE_RTOL * max(1.0, lam)
    ranges = [range(1, int(math.sqrt(lam + tol) * s / math.pi) + 2) for s in sides]
    for ks in product(*ranges):
        value = sum((k * math.pi / s) ** 2 for k, s in zip(ks, sides))
        _check_pole(lam, value)


def cuboid_g(sides: Sequence[float], parity: Sequence[str], modes: Sequence[int], sigma: float) -> float:
    """Sum of per-axis inverses; the branch (parity, modes) satisfies g(sigma) = lambda."""
    return sum(_axis_value(s, p, m, sigma) for s, p, m in zip(sides, parity, modes))


def _cuboid_root(sides, parity, modes, lam: float, sigma_hi: float) -> float:
    # g decreases from lambda^Dir_{parity,modes} (sigma -> -inf) to the
    # previous threshold; walk the lower end down until g >= lam
    lo = min(sigma_hi, 0.0) - 1.0
    step = 1.0
    while cuboid_g(sides, parity, modes, lo) < lam:
        step *= 2.0
        lo -= step
    hi = sigma_hi
    while cuboid_g(sides, parity, modes, hi) > lam:
        hi += max(1.0, abs(hi))
    return brentq(lambda s: cuboid_g(sides, parity, modes, s) - lam, lo, hi, xtol=XTOL_TINY, rtol=1e-15, maxiter=4000)


def _cuboid_branch_id(sides, parity, modes) -> BranchId:
    lo_modes = [m - 1 for m in modes]
    lo = -math.inf if min(lo_modes) == 0 else _cuboid_dirichlet(sides, parity, lo_modes)
    hi = _cuboid_dirichlet(sides, parity, modes)
    return BranchId("cuboid", tuple(parity), tuple(modes), 1, (lo, hi), len(sides))


def _cuboid_combinations(sides: Sequence[float], sigma: float, lam: float):
    """All (parity, modes) whose branch has its root at or below sigma."""
    firsts = [_axis_value(s, "s", 1, sigma) for s in sides]
    total_first = sum(firsts)
    if total_first > lam:
        return []
    per_axis = [
        _axis_values_upto(s, sigma, lam - (total_first - f)) for s, f in zip(sides, firsts)
    ]
    found = []

    def walk(j, parity, modes, acc):
        if j == len(sides):
            found.append((tuple(parity), tuple(modes)))
            return
        rest = sum(firsts[j + 1:])
        for p, m, v in per_axis[j]:
            if acc + v + rest > lam:
                break
            walk(j + 1, parity + [p], modes + [m], acc + v)

    walk(0, [], [], 0.0)
    return found


def cuboid_spectrum(half_widths: Sequence[float], lam: float, sigma_max: float) -> Spectrum:
    """All eigenvalues <= sigma_max of the cuboid with the given half-widths."""
    sides = Cuboid(tuple(half_widths)).sides
    _check_cuboid_pole(sides, lam)
    entries = []
    for parity, modes in _cuboid_combinations(sides, sigma_max, lam):
        if lam >= _cuboid_dirichlet(sides, parity, modes):
            continue
        sigma = _cuboid_root(sides, parity, modes, lam, sigma_max)
        entries.append(SpectrumEntry(sigma, 1, _cuboid_branch_id(sides, parity, modes)))
    return _make_spectrum(lam, entries)


def cuboid_branch(half_widths: Sequence[float], parity: Sequence[str], modes: Sequence[int], lam: float) -> float:
    """Value of one labelled cuboid branch; lam must lie in its continuity interval."""
    sides = Cuboid(tuple(half_widths)).sides
    branch = _cuboid_branch_id(sides, parity, modes)
    if not branch.contains(lam):
        raise ValueError(f"lambda={lam} is outside the continuity interval {branch.interval}")
    hi = 1.0
    while cuboid_g(sides, parity, modes, hi) > lam:
        hi = 2.0 * hi + 1.0
    return _cuboid_root(sides, parity, modes, lam, hi)


# ------------------------------------------------------------------ Laplace spectra


def _merge(values: list[tuple[float, int]]) -> list[tuple[float, int]]:
    values.sort()
    out: list[list] = []
    for v, mult in values:
        if out and abs(v - out[-1][0]) <= POLE_RTOL * max(1.0, abs(v)):
            out[-1][1] += mult
        else:
            out.append([v, mult])
    return [(float(v), int(m)) for v, m in out]


def laplace_spectrum(domain, bc: str, lambda_max: float) -> list[tuple[float, int]]:
    """Dirichlet or Neumann Laplace eigenvalues <= lambda_max with multiplicities."""
    bc = bc.lower()
    if bc not in ("dirichlet", "neumann"):
        raise ValueError("bc must be 'dirichlet' or 'neumann'")
    neumann = bc == "neumann"
    values: list[tuple[float, int]] = []
    if isinstance(domain, Interval):
        k = 0 if neumann else 1
        while (k * math.pi / domain.alpha) ** 2 <= lambda_max:
            values.append(((k * math.pi / domain.alpha) ** 2, 1))
            k += 1
    elif isinstance(domain, (Disk, Ball)):
        dim = domain.dim
        r2 = domain.radius**2
        if neumann and lambda_max >= 0:
            values.append((0.0, 1))
        if lambda_max > 0:
            x_max = math.sqrt(lambda_max * r2)
            m = 0
            while True:
                nu = _order(dim, m)
                if neumann:
                    c = 0.5 * dim - 1.0
                    zeros = j_zeros_below(nu + 1.0, x_max) if m == 0 else dini_zeros_below(nu, c, x_max)
                else:
                    zeros = j_zeros_below(nu, x_max)
                # both spectra of mode m lie above m(m + d - 2) on the unit ball
                if len(zeros) == 0 and m * (m + dim - 2) > x_max * x_max:
                    break
                mult = harmonic_multiplicity(dim, m)
                values.extend((float(z * z) / r2, mult) for z in zeros)
                m += 1
    elif isinstance(domain, Cuboid):
        if lambda_max >= 0 or not neumann:
            k0 = 0 if neumann else 1
            sides = domain.sides
            ranges = [
                range(k0, int(math.sqrt(max(lambda_max, 0.0)) * s / math.pi) + 1) for s in sides
            ]
            for ks in product(*ranges):
                v = sum((k * math.pi / s) ** 2 for k, s in zip(ks, sides))
                if v <= lambda_max:
                    values.append((v, 1))
    else:
        raise CapabilityError(f"no closed-form Laplace spectrum for {type(domain).__name__}")
    return _merge(values)


def dirichlet_count(domain, lam: float) -> int:
    return sum(m for _, m in laplace_spectrum(domain, "dirichlet", lam))


def neumann_count(domain, lam: float) -> int:
    return sum(m for _, m in laplace_spectrum(domain, "neumann", lam))


def check_not_dirichlet(domain, lam: float):
    """Raise PoleError when lam is a Dirichlet eigenvalue of a canonical domain."""
    if lam <= 0:
        return
    window = lam * (1 + 2 * POLE_RTOL) + POLE_RTOL
    for value, _ in laplace_spectrum(domain, "dirichlet", window):
        _check_pole(lam, value)


# ------------------------------------------------------------------ spectra at fixed lambda


def spectrum_below(domain, lam: float, sigma_max: float) -> Spectrum:
    """Every eigenvalue <= sigma_max at the given lambda, with branch labels."""
    if isinstance(domain, Interval):
        entries = [
            SpectrumEntry(interval_branch(p, domain.alpha, lam), 1, _interval_branch_id(p, domain.alpha, lam))
            for p in ("s", "a")
        ]
        return _make_spectrum(lam, [e for e in entries if e.sigma <= sigma_max])
    if isinstance(domain, (Disk, Ball)):
        entries = _radial_spectrum_below(domain.dim, domain.radius, lam, lambda _: sigma_max)
        return _make_spectrum(lam, entries)
    if isinstance(domain, Cuboid):
        return cuboid_spectrum(domain.half_widths, lam, sigma_max)
    raise CapabilityError(f"no closed-form spectrum for {type(domain).__name__}")


def _kth_bound(k_max: int):
    def bound(entries):
        values = sorted(v for e in entries for v in [e.sigma] * e.multiplicity)
        return values[k_max - 1] if len(values) >= k_max else math.inf

    return bound


def eigenvalues_at(domain, lam: float, k_max: int) -> Spectrum:
    """The k_max smallest eigenvalues at lam (whole multiplicity groups are kept)."""
    if k_max <= 0:
        return Spectrum(lam, [])
    if isinstance(domain, Interval):
        full = spectrum_below(domain, lam, math.inf)
        return _truncate(full, k_max)
    if isinstance(domain, (Disk, Ball)):
        entries = _radial_spectrum_below(domain.dim, domain.radius, lam, _kth_bound(k_max))
        return _make_spectrum(lam, entries)
    if isinstance(domain, Cuboid):
        _check_cuboid_pole(domain.sides, lam)
        sigma_max = math.sqrt(abs(lam)) + 1.0
        while True:
            spec = cuboid_spectrum(domain.half_widths, lam, sigma_max)
            if len(spec) >= k_max:
                return _truncate(spec, k_max)
            sigma_max = 2.0 * sigma_max + 1.0
    from .bem import BoundaryCurve, solve_dtn_spectrum

    if isinstance(domain, BoundaryCurve):
        sol = solve_dtn_spectrum(domain, lam, k_max, max(128, 8 * k_max))
        entries = [
            SpectrumEntry(float(s), 1, BranchId("curve", (), (i + 1,)))
            for i, s in enumerate(sol.sigmas)
        ]
        return _make_spectrum(lam, entries)
    raise CapabilityError(f"unsupported domain {type(domain).__name__}")


def _truncate(spec: Spectrum, k_max: int) -> Spectrum:
    values = spec.values()
    if len(values) <= k_max:
        return spec
    limit = values[k_max - 1]
    return _make_spectrum(spec.lam, [e for e in spec.entries if e.sigma <= limit])


def branch_value(domain, branch: BranchId, lam: float) -> float:
    """Evaluate a labelled branch at lam (radial modes are continued across poles)."""
    if isinstance(domain, Interval):
        return interval_branch(branch.parity[0], domain.alpha, lam)
    if isinstance(domain, Disk):
        return disk_branch(branch.modes[0], lam, domain.radius)
    if isinstance(domain, Ball):
        return ball_branch(domain.dim, branch.modes[0], lam, domain.radius)
    if isinstance(domain, Cuboid):
        return cuboid_branch(domain.half_widths, branch.parity, branch.modes, lam)
    raise CapabilityError(f"no closed-form branches for {type(domain).__name__}")
