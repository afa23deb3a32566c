"""Bessel functions of real order, their derivatives, and their zeros.

Values come from the Amos/Cephes routines wrapped by ``scipy.special``.
Derivatives use the two-term recurrences in the order, and zeros are
found by bracketing followed by a safeguarded Newton iteration.
"""

from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import BesselDomainError, BesselOverflowError


class BesselKind(str, Enum):
    J = "J"
    Y = "Y"
    I = "I"  # noqa: E741
    K = "K"


_UNSCALED = {
    BesselKind.J: special.jv,
    BesselKind.Y: special.yv,
    BesselKind.I: special.iv,
    BesselKind.K: special.kv,
}

# exp(-|z|) I_nu(z) and exp(z) K_nu(z); J and Y need no scaling on the real line
_SCALED = {
    BesselKind.J: special.jv,
    BesselKind.Y: special.yv,
    BesselKind.I: special.ive,
    BesselKind.K: special.kve,
}


def _check(kind: BesselKind, nu: float, z):
    kind = BesselKind(kind)
    if nu < 0:
        raise BesselDomainError(f"order must be nonnegative, got {nu}")
    z = np.asarray(z, dtype=float)
    if kind in (BesselKind.Y, BesselKind.K):
        if np.any(z <= 0):
            raise BesselDomainError(f"{kind.value}_nu(z) needs z > 0")
    elif np.any(z < 0):
        raise BesselDomainError(f"{kind.value}_nu(z) needs z >= 0")
    return kind, z


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def bessel(kind: BesselKind | str, nu: float, z):
    """Evaluate J, Y, I or K of order ``nu`` at ``z`` (scalar or array)."""
    kind, z = _check(kind, nu, z)
    value = _UNSCALED[kind](nu, z)
    if kind is BesselKind.I and np.any(np.isinf(value)):
        raise BesselOverflowError(
            "I_nu overflows a double here; use bessel_scaled, which returns exp(-z) I_nu(z)"
        )
    return _out(value)


def bessel_scaled(kind: BesselKind | str, nu: float, z):
    """Exponentially scaled values: exp(-z) I, exp(z) K; J and Y unchanged."""
    kind, z = _check(kind, nu, z)
    return _out(_SCALED[kind](nu, z))


def bessel_derivative(kind: BesselKind | str, nu: float, z, scaled: bool = False):
    """Derivative in z from the recurrences in the order.

    J, Y: C' = (C_{nu-1} - C_{nu+1}) / 2
    I:    I' = (I_{nu-1} + I_{nu+1}) / 2
    K:    K' = -(K_{nu-1} + K_{nu+1}) / 2

    With ``scaled`` the result carries the same exponential factor as
    ``bessel_scaled``.
    """
    kind, z = _check(kind, nu, z)
    table = _SCALED if scaled else _UNSCALED
    f = table[kind]
    with np.errstate(invalid="ignore", divide="ignore"):
        lower = f(nu - 1.0, z)
        upper = f(nu + 1.0, z)
    if kind is BesselKind.I:
        value = 0.5 * (lower + upper)
    elif kind is BesselKind.K:
        value = -0.5 * (lower + upper)
    else:
        value = 0.5 * (lower - upper)
    if kind in (BesselKind.J, BesselKind.I):
        # at z = 0 the negative-order term is singular; use the series limit
        value = np.where(z == 0, _derivative_at_zero(nu), value)
    if kind is BesselKind.I and not scaled and np.any(np.isinf(value)):
        raise BesselOverflowError("I_nu' overflows a double here; pass scaled=True")
    return _out(value)


def _derivative_at_zero(nu: float) -> float:
    if nu == 0 or nu > 1:
        return 0.0
    if nu == 1:
        return 0.5
    return math.inf


# ---------------------------------------------------------------- zeros


def _mcmahon(nu: float, k: int) -> float:
    """Large-k expansion of the k-th positive zero of J_nu."""
    beta = (k + 0.5 * nu - 0.25) * math.pi
    mu = 4.0 * nu * nu
    return (
        beta
        - (mu - 1.0) / (8.0 * beta)
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3)
    )


def _newton_in_bracket(f, df, lo: float, hi: float, x0: float, tol: float = 4e-16) -> float:
    """Newton iteration kept inside a sign-change bracket; bisects when it escapes."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    x = x0 if lo < x0 < hi else 0.5 * (lo + hi)
    for _ in range(200):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = df(x)
        step_ok = d != 0.0
        if step_ok:
            xn = x - fx / d
            step_ok = lo < xn < hi
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= tol * max(1.0, abs(xn)) or hi - lo <= tol * max(1.0, abs(hi)):
            return xn
        x = xn
    return x


def _scan_sign_changes(f, start: float, count: int, step: float = 0.5) -> list[tuple[float, float]]:
    """Brackets of the first ``count`` sign changes of f on (start, inf)."""
    brackets: list[tuple[float, float]] = []
    a = start
    while len(brackets) < count:
        grid = a + step * np.arange(0, 400)
        vals = f(grid)
        signs = np.sign(vals)
        idx = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
        for i in idx:
            brackets.append((float(grid[i]), float(grid[i + 1])))
            if len(brackets) == count:
                break
        a = float(grid[-1])
    return brackets


@lru_cache(maxsize=512)
def _j_zeros(nu: float, count: int) -> tuple[float, ...]:
    # J_nu > 0 on (0, nu] and consecutive zeros are more than 2.4 apart,
    # so a scan with step 1/2 isolates every zero
    start = max(nu, 0.25)
    brackets = _scan_sign_changes(lambda x: special.jv(nu, x), start, count)
    zeros = []
    for k, (lo, hi) in enumerate(brackets, start=1):
        guess = _mcmahon(nu, k)
        zeros.append(
            _newton_in_bracket(
                lambda x: special.jv(nu, x),
                lambda x: 0.5 * (special.jv(nu - 1, x) - special.jv(nu + 1, x)),
                lo,
                hi,
                guess,
            )
        )
    return tuple(zeros)


def j_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of J_nu (real order nu >= 0)."""
    if count <= 0:
        return np.empty(0)
    # reuse a longer cached table when one exists
    return np.array(_j_zeros(float(nu), _round_up(count))[:count])


def _round_up(count: int) -> int:
    size = 16
    while size < count:
        size *= 2
    return size


def j_zeros_below(nu: float, x_max: float) -> np.ndarray:
    """All positive zeros of J_nu that do not exceed ``x_max``."""
    if x_max <= nu:
        return np.empty(0)
    count = 16
    while True:
        z = j_zeros(nu, count)
        if z[-1] > x_max:
            return z[z <= x_max]
        count *= 2


def bessel_j_zero(m: int, k: int) -> float:
    """k-th positive zero j_{m,k} of J_m."""
    _check_index(m, k)
    return float(j_zeros(m, k)[k - 1])


def _check_index(m, k):
    if int(m) != m or m < 0:
        raise ValueError(f"order must be a nonnegative integer, got {m}")
    if int(k) != k or k < 1:
        raise ValueError(f"zero index must be a positive integer, got {k}")


@lru_cache(maxsize=512)
def _dini_zeros(nu: float, c: float, count: int) -> tuple[float, ...]:
    # zeros of x J_nu'(x) - c J_nu(x) for nu > c; one lies below j_{nu,1} and
    # one between each pair of consecutive zeros of J_nu
    jz = j_zeros(nu, count)

    def f(x):
        return x * 0.5 * (special.jv(nu - 1, x) - special.jv(nu + 1, x)) - c * special.jv(nu, x)

    def df(x):
        jp = 0.5 * (special.jv(nu - 1, x) - special.jv(nu + 1, x))
        return -(x - nu * nu / x) * special.jv(nu, x) - c * jp

    lo0 = 0.5 * math.sqrt(max(nu * nu - c * c, 0.0)) if nu > 0 else 1e-3
    lo0 = max(lo0, 1e-8)
    edges = [lo0, *jz]
    zeros = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        zeros.append(_newton_in_bracket(f, df, lo, hi, 0.5 * (lo + hi)))
    return tuple(zeros)


def dini_zeros(nu: float, c: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of x J_nu'(x) - c J_nu(x), assuming nu > c."""
    if nu <= c:
        raise ValueError("dini_zeros needs nu > c")
    if count <= 0:
        return np.empty(0)
    return np.array(_dini_zeros(float(nu), float(c), _round_up(count))[:count])


def bessel_jprime_zero(m: int, k: int) -> float:
    """k-th positive zero of J_m' (the zero at the origin is skipped for m = 0)."""
    _check_index(m, k)
    if m == 0:
        return bessel_j_zero(1, k)
    return float(dini_zeros(m, 0.0, k)[k - 1])


def dini_zeros_below(nu: float, c: float, x_max: float) -> np.ndarray:
    count = 16
    while True:
        z = dini_zeros(nu, c, count)
        if z[-1] > x_max:
            return z[z <= x_max]
        count *= 2
