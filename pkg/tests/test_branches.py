import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtnspec.branches import counting_function, duality_roundtrip, nonpositive_count_check, robin_spectrum
from dtnspec.canonical import Ball, Cuboid, Disk, Interval, disk_branch, eigenvalues_at, laplace_spectrum
from dtnspec.errors import PoleError
from dtnspec.specfun import bessel_j_zero

SQUARE = Cuboid((math.pi / 2, math.pi / 2))


def test_counting_examples():
    assert counting_function(Disk(), 0.0, 2.5) == 5
    assert counting_function(Disk(), -1.0, 0.0) == 0
    assert counting_function(Interval(1.0), 0.0, 1.0) == 1


def test_counting_pole():
    with pytest.raises(PoleError):
        counting_function(Disk(), bessel_j_zero(0, 1) ** 2, 0.0)


def test_nonpositive_count_disk_ten():
    rep = nonpositive_count_check(Disk(), 10.0)
    assert (rep.dtn_nonpositive, rep.neumann_count, rep.dirichlet_count) == (4, 5, 1)
    assert rep.identity_holds


@pytest.mark.parametrize("dom", [Disk(), Interval(1.0), Ball(3), SQUARE, Cuboid((0.5, 0.8))])
def test_nonpositive_count_negative_lambda(dom):
    rep = nonpositive_count_check(dom, -3.0)
    assert rep.dtn_nonpositive == 0 and rep.identity_holds


@pytest.mark.parametrize("lam", [-1e-200, -1e-14, 1e-14, 1e-200])
def test_counting_identity_near_zero(lam):
    for dom in (Disk(), SQUARE, Ball(3), Interval(1.0)):
        assert nonpositive_count_check(dom, lam).identity_holds


def test_nonpositive_count_square_zero():
    rep = nonpositive_count_check(SQUARE, 0.0)
    assert (rep.dtn_nonpositive, rep.neumann_count, rep.dirichlet_count) == (1, 1, 0)


def _excluded(dom, lam):
    # subnormal lambda: sigma_1 ~ -lambda |Omega|/|dOmega| rounds to 0, so "sigma <= 0" is not decidable
    if lam != 0.0 and abs(lam) < 1e-300:
        return True
    return any(abs(lam - d) < 1e-6 for d in _dirichlet_values(dom, 41.0))


def _dirichlet_values(dom, hi):
    return [v for v, _ in laplace_spectrum(dom, "dirichlet", hi)]


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(min_value=-50.0, max_value=40.0, exclude_min=True, exclude_max=True))
def test_counting_identity_disk(lam):
    if _excluded(Disk(), lam):
        return
    assert nonpositive_count_check(Disk(), lam).identity_holds


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(min_value=-50.0, max_value=40.0, exclude_min=True, exclude_max=True))
def test_counting_identity_square(lam):
    if _excluded(SQUARE, lam):
        return
    assert nonpositive_count_check(SQUARE, lam).identity_holds


@pytest.mark.parametrize("lam", [5.0, 12.0, 20.0, 33.0])
def test_counting_identity_ball_and_rectangle(lam):
    for dom in (Ball(3), Cuboid((0.5, 0.8)), Interval(2.0)):
        try:
            rep = nonpositive_count_check(dom, lam)
        except PoleError:
            continue
        assert rep.identity_holds


# ------------------------------------------------------------------ Robin


def test_robin_zero_gamma_is_neumann():
    vals = robin_spectrum(Interval(1.0), 0.0, 5)
    np.testing.assert_allclose(vals, [(k * math.pi) ** 2 for k in range(5)], atol=1e-10)
    disk = robin_spectrum(Disk(), 0.0, 6)
    neu = [v for v, m in laplace_spectrum(Disk(), "neumann", 40.0) for _ in range(m)][:6]
    np.testing.assert_allclose(disk, neu, atol=1e-9)


def test_robin_disk_duality_example():
    gamma = -disk_branch(0, -1.0)
    assert gamma == pytest.approx(-0.446389, abs=1e-6)
    assert robin_spectrum(Disk(), gamma, 1)[0] == pytest.approx(-1.0, abs=1e-10)


def test_robin_dirichlet_limit():
    dirichlet = [(k * math.pi) ** 2 for k in (1, 2, 3)]
    previous = None
    for gamma in (10.0, 100.0, 1000.0):
        vals = np.array(robin_spectrum(Interval(1.0), gamma, 3))
        assert np.all(vals < np.array(dirichlet))
        if previous is not None:
            assert np.all(vals > previous)
        previous = vals
    np.testing.assert_allclose(previous, dirichlet, rtol=5e-3)


def test_robin_roots_solve_branch_equation():
    # each root lambda has -gamma in the DtN spectrum at lambda
    gamma = 1.7
    for lam in robin_spectrum(Disk(), gamma, 8):
        vals = eigenvalues_at(Disk(), lam, 40).values()
        assert np.min(np.abs(vals + gamma)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(
    dom=st.sampled_from([Interval(1.0), Disk(), Cuboid((0.5, 0.8))]),
    g1=st.floats(min_value=-3.0, max_value=3.0),
    g2=st.floats(min_value=-3.0, max_value=3.0),
)
def test_robin_monotone_in_index_and_gamma(dom, g1, g2):
    lo, hi = sorted((g1, g2))
    a = np.array(robin_spectrum(dom, lo, 6))
    b = np.array(robin_spectrum(dom, hi, 6))
    assert np.all(np.diff(a) >= 0) and np.all(np.diff(b) >= 0)
    assert np.all(b >= a - 1e-9)


def test_robin_empty_count():
    assert robin_spectrum(Disk(), 1.0, 0) == []


# ------------------------------------------------------------------ duality


def test_duality_examples():
    sigma, idx, rec = duality_roundtrip(Disk(), -1.0, 1)
    assert sigma == pytest.approx(0.446389, abs=1e-6) and idx == 1 and rec == pytest.approx(-1.0, abs=1e-8)
    _, idx, rec = duality_roundtrip(Disk(), 10.0, 1)
    assert idx == 2 and rec == pytest.approx(10.0, abs=1e-8)
    sigma, idx, rec = duality_roundtrip(Interval(1.0), 0.0, 2)
    assert sigma == 2.0 and rec == pytest.approx(0.0, abs=1e-8)


DUALITY_GRID = (
    [(Disk(), lam, k) for lam, k in [(-20.0, 1), (-1.0, 3), (0.0, 2), (4.0, 1), (10.0, 2), (20.0, 4), (35.0, 5)]]
    + [(Interval(1.0), lam, k) for lam, k in [(-20.0, 1), (-2.0, 2), (0.0, 2), (5.0, 1), (15.0, 2), (30.0, 1), (50.0, 2)]]
    + [(Cuboid((0.5, 0.8)), lam, k) for lam, k in [(-5.0, 1), (0.0, 2), (10.0, 3), (20.0, 1)]]
    + [(SQUARE, lam, k) for lam, k in [(1.5, 2), (3.0, 4)]]
)


@pytest.mark.parametrize("dom,lam,k", DUALITY_GRID)
def test_duality_grid(dom, lam, k):
    _, _, rec = duality_roundtrip(dom, lam, k)
    assert abs(rec - lam) < 1e-8


def test_duality_pole_and_bad_index():
    with pytest.raises(PoleError):
        duality_roundtrip(Interval(1.0), math.pi**2, 1)
    with pytest.raises(ValueError):
        duality_roundtrip(Disk(), 0.0, 0)
