"""Nyström boundary-element solver for the DtN spectrum of smooth planar domains.

The bulk solution is represented as U = S(sigma u) - D(u) with the single
and double layer potentials of a real fundamental solution of
-Delta - Lambda.  Taking boundary values gives the generalised eigenproblem

    (1/2 I + K) u = sigma V u.

Kernels with a logarithmic singularity are split as
M(t, s) = M1(t, s) log(4 sin^2((t - s)/2)) + M2(t, s) with smooth M1, M2,
and the log part is integrated with the exact weights for trigonometric
interpolants on an equispaced grid.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy import special
from scipy.spatial.distance import pdist
from shapely.geometry import LinearRing, Point, Polygon

from .errors import AccuracyError, GeometryError

EULER_GAMMA = float(np.euler_gamma)
ILL_CONDITIONED = 1e12
CHOLESKY_COND_MAX = 1e10
RESIDUAL_TOL = 1e-8
# beyond this value of sqrt(-Lambda) * diameter the I0-weighted split of the
# K0 kernel cancels too many digits
DECAY_LIMIT = 16.0

KITE_COEFFICIENTS = {
    "x": {"cos": [-0.4, 1.5, 0.7], "sin": [0.0, 0.0]},
    "y": {"cos": [0.0, -0.3], "sin": [1.5]},
}


def _padded(values, size):
    out = np.zeros(size)
    values = np.asarray(values, dtype=float)
    out[: len(values)] = values
    return out


@dataclass(frozen=True)
class BoundaryCurve:
    """Closed planar curve t -> (x(t), y(t)), t in [0, 2 pi), as a trigonometric polynomial.

    ``cos_coeffs`` and ``sin_coeffs`` have shape (2, K+1); row 0 is x, row 1 is y,
    column k multiplies cos(k t) or sin(k t).  Column 0 of ``sin_coeffs`` is zero.
    """

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    name: str = "curve"

    # ---------------------------------------------------------------- construction

    @classmethod
    def from_fourier(cls, x_cos, x_sin, y_cos, y_sin, name="curve", validate=True, orient=True):
        """Build from coefficient lists; the sin lists start at k = 1."""
        size = max(len(x_cos), len(y_cos), len(x_sin) + 1, len(y_sin) + 1)
        cos_c = np.vstack([_padded(x_cos, size), _padded(y_cos, size)])
        sin_c = np.vstack([_padded([0.0, *x_sin], size), _padded([0.0, *y_sin], size)])
        curve = cls(cos_c, sin_c, name)
        if orient and curve.signed_area() < 0:
            curve = curve.reversed()
        if validate:
            curve.validate()
        return curve

    @classmethod
    def from_samples(cls, points, name="curve", validate=True, orient=True):
        """Trigonometric interpolant of equispaced samples of a closed curve."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 8:
            raise GeometryError("samples must be an (M, 2) array with M >= 8")
        m = len(pts)
        c = np.fft.rfft(pts, axis=0) / m
        cos_c = 2.0 * c.real
        sin_c = -2.0 * c.imag
        cos_c[0] *= 0.5
        sin_c[0] = 0.0
        if m % 2 == 0:
            cos_c[-1] *= 0.5
            sin_c[-1] = 0.0
        return cls.from_fourier(
            cos_c[:, 0], sin_c[1:, 0], cos_c[:, 1], sin_c[1:, 1], name, validate, orient
        )

    @classmethod
    def circle(cls, radius=1.0, center=(0.0, 0.0)):
        return cls.from_fourier([center[0], radius], [0.0], [center[1]], [radius], name="circle")

    @classmethod
    def ellipse(cls, a=2.0, b=1.0):
        return cls.from_fourier([0.0, a], [0.0], [0.0], [b], name="ellipse")

    @classmethod
    def kite(cls):
        k = KITE_COEFFICIENTS
        return cls.from_fourier(
            k["x"]["cos"], k["x"]["sin"], k["y"]["cos"], k["y"]["sin"], name="kite"
        )

    # ---------------------------------------------------------------- evaluation

    @property
    def order(self) -> int:
        return self.cos_coeffs.shape[1] - 1

    def _series(self, t, derivative: int):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.arange(self.order + 1)
        kt = np.outer(t, k)
        c, s = np.cos(kt), np.sin(kt)
        # d^p/dt^p of (a cos kt + b sin kt) cycles through four forms
        kp = k.astype(float) ** derivative
        phase = derivative % 4
        if phase == 0:
            basis_a, basis_b = c, s
        elif phase == 1:
            basis_a, basis_b = -s, c
        elif phase == 2:
            basis_a, basis_b = -c, -s
        else:
            basis_a, basis_b = s, -c
        out = (basis_a * kp) @ self.cos_coeffs.T + (basis_b * kp) @ self.sin_coeffs.T
        return out

    def position(self, t):
        return self._series(t, 0)

    def derivative(self, t):
        return self._series(t, 1)

    def second_derivative(self, t):
        return self._series(t, 2)

    def speed(self, t):
        return np.hypot(*self.derivative(t).T)

    def samples(self, count: int) -> np.ndarray:
        t = 2.0 * np.pi * np.arange(count) / count
        return self.position(t)

    def signed_area(self) -> float:
        # for a trigonometric polynomial the shoelace integral is exact in Fourier space
        ax, ay = self.cos_coeffs
        bx, by = self.sin_coeffs
        k = np.arange(self.order + 1)
        return float(np.pi * np.sum(k * (ax * by - bx * ay)))

    def perimeter(self, n_nodes: int = 1024) -> float:
        t = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        return float(np.sum(self.speed(t)) * 2.0 * np.pi / n_nodes)

    def diameter(self, count: int = 512) -> float:
        return float(np.max(pdist(self.samples(count))))

    def polygon(self, count: int = 2048) -> Polygon:
        return Polygon(self.samples(count))

    # ---------------------------------------------------------------- transformations

    def reversed(self) -> BoundaryCurve:
        """Same curve traversed the other way (t -> -t)."""
        return BoundaryCurve(self.cos_coeffs.copy(), -self.sin_coeffs, self.name)

    def shifted(self, c: float) -> BoundaryCurve:
        """Reparametrised curve t -> position(t + c)."""
        k = np.arange(self.order + 1)
        cc, sc = np.cos(k * c), np.sin(k * c)
        a, b = self.cos_coeffs, self.sin_coeffs
        return BoundaryCurve(a * cc + b * sc, b * cc - a * sc, self.name)

    def scaled(self, factor: float) -> BoundaryCurve:
        return BoundaryCurve(self.cos_coeffs * factor, self.sin_coeffs * factor, self.name)

    # ---------------------------------------------------------------- checks

    def validate(self, resolution: int = 1024) -> None:
        t = 2.0 * np.pi * np.arange(resolution) / resolution
        speed = self.speed(t)
        if not np.all(np.isfinite(speed)) or np.min(speed) <= 1e-10 * max(np.max(speed), 1e-300):
            raise GeometryError("parametrisation is not regular: |position'(t)| vanishes")
        if not LinearRing(self.position(t)).is_simple:
            raise GeometryError("curve is not simple: boundary segments intersect")

    # ---------------------------------------------------------------- serialisation

    def to_json(self) -> dict:
        return {
            "fourier": {
                "x": {"cos": self.cos_coeffs[0].tolist(), "sin": self.sin_coeffs[0, 1:].tolist()},
                "y": {"cos": self.cos_coeffs[1].tolist(), "sin": self.sin_coeffs[1, 1:].tolist()},
            },
            "name": self.name,
        }


def curve_from_json(data: dict) -> BoundaryCurve:
    """Curve from a parsed JSON document.

    Accepted forms::

        {"builtin": "circle", "radius": 1.0, "center": [0, 0]}
        {"builtin": "ellipse", "semi_axes": [2.0, 1.0]}
        {"builtin": "kite"}
        {"fourier": {"x": {"cos": [...], "sin": [...]}, "y": {...}}}
        {"samples": [[x0, y0], [x1, y1], ...]}
    """
    if "builtin" in data:
        kind = data["builtin"]
        if kind == "circle":
            return BoundaryCurve.circle(float(data.get("radius", 1.0)), tuple(data.get("center", (0.0, 0.0))))
        if kind == "ellipse":
            a, b = data.get("semi_axes", (2.0, 1.0))
            return BoundaryCurve.ellipse(float(a), float(b))
        if kind == "kite":
            return BoundaryCurve.kite()
        raise GeometryError(f"unknown built-in curve {kind!r}")
    if "fourier" in data:
        f = data["fourier"]
        return BoundaryCurve.from_fourier(
            f["x"].get("cos", [0.0]),
            f["x"].get("sin", []),
            f["y"].get("cos", [0.0]),
            f["y"].get("sin", []),
            name=data.get("name", "curve"),
        )
    if "samples" in data:
        return BoundaryCurve.from_samples(data["samples"], name=data.get("name", "curve"))
    raise GeometryError("curve file needs one of 'builtin', 'fourier' or 'samples'")


def load_curve(path) -> BoundaryCurve:
    return curve_from_json(json.loads(Path(path).read_text()))


def save_curve(curve: BoundaryCurve, path) -> None:
    Path(path).write_text(json.dumps(curve.to_json(), indent=2))


# -------------------------------------------------------------------- discretisation


@dataclass
class BemDiscretization:
    lam: float
    n_nodes: int
    nodes: np.ndarray
    speed_weights: np.ndarray
    v_matrix: np.ndarray
    k_matrix: np.ndarray
    condition_estimate: float
    beta: float = 0.0

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_estimate > ILL_CONDITIONED

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.speed_weights))

    def symmetric_v(self) -> np.ndarray:
        """V in the speed-weighted inner product, W^(1/2) V W^(-1/2)."""
        sq = np.sqrt(self.speed_weights)
        return sq[:, None] * self.v_matrix / sq[None, :]


def _log_weights(n: int) -> np.ndarray:
    """Exact quadrature weights for the kernel log(4 sin^2((t - s)/2)), as a function of i - j."""
    nn = 2 * n
    d = np.pi * np.arange(nn) / n
    m = np.arange(1, n)
    r = -(2.0 * np.pi / n) * (np.cos(np.outer(d, m)) / m).sum(axis=1)
    return r - (np.pi / n**2) * np.cos(n * d)


def default_beta(curve: BoundaryCurve, lam: float) -> float:
    """Additive freedom in the fundamental solution used by default.

    At Lambda = 0 the logarithmic kernel is shifted by beta/(2 pi), with
    beta = log(2 diam), so that V is positive definite on any curve.
    For Lambda != 0 no shift is applied.
    """
    if lam == 0:
        return math.log(2.0 * curve.diameter())
    return 0.0


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("DTN_THREADS", "1")))
    except ValueError:
        return 1


def _assemble_rows(rows, t, pos, dpos, ddpos, speed, lam, beta, rweights, n):
    """Rows ``rows`` of the Nyström matrices for V and K."""
    nn = len(t)
    i = rows[:, None]
    j = np.arange(nn)[None, :]
    diag = i == j
    diff = pos[None, :, :] - pos[rows][:, None, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    r_safe = np.where(diag, 1.0, r)
    normal = np.stack([dpos[:, 1], -dpos[:, 0]], axis=-1)  # outward normal times speed
    dn = (diff * normal[None, :, :]).sum(axis=-1) / r_safe
    logsin = np.log(np.where(diag, 1.0, 4.0 * np.sin(0.5 * (t[rows][:, None] - t[None, :])) ** 2))
    sp = speed[None, :]
    # curvature limit of the double layer on the diagonal (Laplace part)
    kdiag = (ddpos[:, 0] * dpos[:, 1] - dpos[:, 0] * ddpos[:, 1]) / (4.0 * np.pi * speed**2)

    if lam < 0:
        kap = math.sqrt(-lam)
        z = kap * r_safe
        phi = special.k0(z) / (2.0 * np.pi)
        m1 = -special.i0(z) * sp / (4.0 * np.pi)
        m2_diag = -speed / (2.0 * np.pi) * (EULER_GAMMA + np.log(0.5 * kap * speed))
        dphi = -kap * special.k1(z) / (2.0 * np.pi)
        l1 = -kap * special.i1(z) * dn / (4.0 * np.pi)
    elif lam == 0:
        phi = (beta - np.log(r_safe)) / (2.0 * np.pi)
        m1 = -np.ones_like(r) * sp / (4.0 * np.pi)
        m2_diag = speed / (2.0 * np.pi) * (beta - np.log(speed))
        dphi = -1.0 / (2.0 * np.pi * r_safe)
        l1 = np.zeros_like(r)
    else:
        k = math.sqrt(lam)
        z = k * r_safe
        phi = -special.y0(z) / 4.0 + beta * special.j0(z) / 4.0
        m1 = -special.j0(z) * sp / (4.0 * np.pi)
        m2_diag = -speed / (2.0 * np.pi) * (EULER_GAMMA + np.log(0.5 * k * speed)) + beta * speed / 4.0
        dphi = k * special.y1(z) / 4.0 - beta * k * special.j1(z) / 4.0
        l1 = k * special.j1(z) * dn / (4.0 * np.pi)

    m2 = phi * sp - m1 * logsin
    lker = dphi * dn
    l2 = lker - l1 * logsin
    rows_diag = np.nonzero(diag)
    m2[rows_diag] = m2_diag[rows]
    l2[rows_diag] = kdiag[rows]
    l1[rows_diag] = 0.0
    m1[rows_diag] = -speed[rows] / (4.0 * np.pi)  # I0(0) = J0(0) = 1

    rw = rweights[(rows[:, None] - j) % nn]
    v = rw * m1 + (np.pi / n) * m2
    kmat = rw * l1 + (np.pi / n) * l2
    return v, kmat


def assemble(
    curve: BoundaryCurve, lam: float, n_nodes: int, beta: float | None = None, workers: int | None = None
) -> BemDiscretization:
    """Nyström matrices of the single and double layer operators at Lambda = lam.

    The fundamental solution is K0(sqrt(-lam) r)/(2 pi) for lam < 0,
    (beta - log r)/(2 pi) for lam = 0, and (beta J0 - Y0)(sqrt(lam) r)/4 for lam > 0.
    ``beta`` defaults to :func:`default_beta`.
    """
    if n_nodes < 16 or n_nodes % 2:
        raise ValueError("n_nodes must be even and at least 16")
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    if beta is None:
        beta = default_beta(curve, lam)
    elif lam < 0 and beta != 0:
        raise ValueError("beta is only used for lambda >= 0")
    n = n_nodes // 2
    t = np.pi * np.arange(n_nodes) / n
    pos = curve.position(t)
    dpos = curve.derivative(t)
    ddpos = curve.second_derivative(t)
    speed = np.hypot(dpos[:, 0], dpos[:, 1])
    if np.min(speed) <= 1e-10 * np.max(speed):
        raise GeometryError("parametrisation is not regular at the quadrature nodes")
    rweights = _log_weights(n)

    workers = workers or _worker_count()
    blocks = np.array_split(np.arange(n_nodes), max(1, workers))
    args = (t, pos, dpos, ddpos, speed, lam, beta, rweights, n)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda rows: _assemble_rows(rows, *args), blocks))
    else:
        parts = [_assemble_rows(rows, *args) for rows in blocks]
    v = np.vstack([p[0] for p in parts])
    kmat = np.vstack([p[1] for p in parts])
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(kmat))):
        raise AccuracyError("non-finite matrix entries; |lambda| is too large for this curve")

    weights = speed * (2.0 * np.pi / n_nodes)
    disc = BemDiscretization(lam, n_nodes, t, weights, v, kmat, math.inf, beta)
    cp = _projected(disc, n_nodes // 4)[0]
    disc.condition_estimate = float(np.linalg.cond(cp))
    return disc


# -------------------------------------------------------------------- eigenproblem


@dataclass
class GeneralizedEigenSolution:
    lam: float
    sigmas: np.ndarray
    densities: np.ndarray  # column k is the boundary trace of the k-th eigenfunction
    residuals: np.ndarray
    nodes: np.ndarray
    speed_weights: np.ndarray
    beta: float = 0.0
    method: str = "cholesky"
    condition_estimate: float = 1.0
    warnings: list[str] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.speed_weights))

    @property
    def flagged(self) -> bool:
        return bool(self.warnings)


def _trig_basis(n_nodes: int, degree: int) -> np.ndarray:
    """Orthonormal (in the discrete l2 sense) samples of 1, cos kt, sin kt for k <= degree."""
    t = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    k = np.arange(1, degree + 1)
    cols = [np.full((n_nodes, 1), 1.0 / math.sqrt(n_nodes))]
    cols.append(math.sqrt(2.0 / n_nodes) * np.cos(np.outer(t, k)))
    cols.append(math.sqrt(2.0 / n_nodes) * np.sin(np.outer(t, k)))
    return np.hstack(cols)


def _projected(disc: BemDiscretization, degree: int):
    """V and 1/2 I + K in the speed-weighted variables, restricted to low trigonometric degree.

    The modes near the Nyquist frequency of the grid are polluted by aliasing of
    the smooth kernel parts, so the eigenproblem is posed on densities of degree
    at most ``degree``.
    """
    speed = disc.speed_weights * disc.n_nodes / (2.0 * np.pi)
    sq = np.sqrt(speed)
    basis = _trig_basis(disc.n_nodes, degree)
    c = sq[:, None] * disc.v_matrix / sq[None, :]
    a = sq[:, None] * (0.5 * np.eye(disc.n_nodes) + disc.k_matrix) / sq[None, :]
    cp = basis.T @ c @ basis
    return 0.5 * (cp + cp.T), basis.T @ a @ basis, basis, sq


def _eig_cholesky(a, c):
    lower = sla.cholesky(c, lower=True)
    x = sla.solve_triangular(lower, a, lower=True)
    y = sla.solve_triangular(lower, x.T, lower=True).T
    w, z = sla.eig(y)
    return w, sla.solve_triangular(lower.T, z, lower=False)


def solve_dtn_spectrum(
    curve: BoundaryCurve,
    lam: float,
    k_max: int,
    n_nodes: int,
    beta: float | None = None,
    discretization: BemDiscretization | None = None,
) -> GeneralizedEigenSolution:
    """The ``k_max`` smallest real eigenvalues of (1/2 I + K) u = sigma V u.

    Densities are trigonometric polynomials of degree at most n_nodes/4 in the
    speed-weighted variable.
    """
    if k_max < 1:
        raise ValueError("k_max must be positive")
    if k_max > n_nodes // 4:
        raise ValueError(f"k_max={k_max} exceeds the resolution guard n_nodes/4 = {n_nodes // 4}")
    disc = discretization or assemble(curve, lam, n_nodes, beta)
    cp, ap, basis, sq = _projected(disc, disc.n_nodes // 4)
    warnings = []
    method = "cholesky"
    w = None
    if disc.condition_estimate < CHOLESKY_COND_MAX:
        try:
            w, y = _eig_cholesky(ap, cp)
        except np.linalg.LinAlgError:
            w = None
    if w is None:
        method = "generalized"
        w, y = sla.eig(ap, cp)
    vecs = (basis @ y) / sq[:, None]
    if disc.lam < 0 and math.sqrt(-disc.lam) * curve.diameter() > DECAY_LIMIT:
        warnings.append("sqrt(-lambda) * diameter is large; the kernel split loses accuracy")
    if disc.ill_conditioned:
        warnings.append(
            f"V is ill-conditioned (cond ~ {disc.condition_estimate:.2e}); "
            "lambda may be close to a Dirichlet eigenvalue"
        )

    keep = np.isfinite(w) & (np.abs(w.imag) <= 1e-6 * np.maximum(1.0, np.abs(w.real)))
    w, vecs = w[keep].real, vecs[:, keep].real
    order = np.argsort(w)[:k_max]
    if len(order) < k_max:
        warnings.append(f"only {len(order)} real eigenvalues found")
    sigmas = w[order]
    dens = vecs[:, order]
    norms = np.sqrt(np.sum(disc.speed_weights[:, None] * dens**2, axis=0))
    dens = dens / norms
    signs = np.sign(dens[np.argmax(np.abs(dens), axis=0), np.arange(dens.shape[1])])
    dens = dens * signs
    a = 0.5 * np.eye(disc.n_nodes) + disc.k_matrix
    res = np.linalg.norm(a @ dens - (disc.v_matrix @ dens) * sigmas, axis=0) / np.linalg.norm(dens, axis=0)
    if np.any(res > RESIDUAL_TOL * np.maximum(1.0, np.abs(sigmas))):
        warnings.append("some eigenpairs have residuals above tolerance")
    return GeneralizedEigenSolution(
        disc.lam, sigmas, dens, res, disc.nodes, disc.speed_weights, disc.beta, method,
        disc.condition_estimate, warnings,
    )


# -------------------------------------------------------------------- bulk eigenfunctions


def _fundamental(lam: float, beta: float, r):
    if lam < 0:
        kap = math.sqrt(-lam)
        return special.k0(kap * r) / (2.0 * np.pi), -kap * special.k1(kap * r) / (2.0 * np.pi)
    if lam == 0:
        return (beta - np.log(r)) / (2.0 * np.pi), -1.0 / (2.0 * np.pi * r)
    k = math.sqrt(lam)
    phi = (beta * special.j0(k * r) - special.y0(k * r)) / 4.0
    dphi = k * (special.y1(k * r) - beta * special.j1(k * r)) / 4.0
    return phi, dphi


def bulk_eigenfunction(curve: BoundaryCurve, solution: GeneralizedEigenSolution, index: int, points) -> np.ndarray:
    """Values of the bulk eigenfunction with index ``index`` (1-based) at interior points.

    Uses U(x) = int Phi(x - y) sigma u(y) ds(y) - int d_n Phi(x - y) u(y) ds(y)
    with the trapezoidal rule on the solver's nodes.
    """
    if not 1 <= index <= len(solution.sigmas):
        raise IndexError(f"index {index} outside 1..{len(solution.sigmas)}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    t = solution.nodes
    pos = curve.position(t)
    dpos = curve.derivative(t)
    speed = np.hypot(dpos[:, 0], dpos[:, 1])
    h = solution.perimeter / solution.n_nodes
    poly = curve.polygon(max(8 * solution.n_nodes, 2048))
    for p in pts:
        pt = Point(p)
        if not poly.contains(pt) or poly.exterior.distance(pt) <= 2.0 * h:
            raise AccuracyError(
                f"point {tuple(p)} is outside or within two node spacings ({2 * h:.3g}) of the boundary"
            )
    sigma = solution.sigmas[index - 1]
    u = solution.densities[:, index - 1]
    w = solution.speed_weights
    normal = np.stack([dpos[:, 1], -dpos[:, 0]], axis=-1) / speed[:, None]
    diff = pos[None, :, :] - pts[:, None, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    phi, dphi = _fundamental(solution.lam, solution.beta, r)
    dn = dphi * (diff * normal[None, :, :]).sum(axis=-1) / r
    return (phi * (sigma * u) - dn * u) @ w


__all__ = [
    "BoundaryCurve",
    "BemDiscretization",
    "GeneralizedEigenSolution",
    "KITE_COEFFICIENTS",
    "assemble",
    "solve_dtn_spectrum",
    "bulk_eigenfunction",
    "curve_from_json",
    "load_curve",
    "save_curve",
    "default_beta",
]
