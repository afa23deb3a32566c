import json
import math
from importlib import resources

import jsonschema
import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dtnspec.validate as v
from dtnspec.bem import BoundaryCurve, solve_dtn_spectrum
from dtnspec.canonical import Ball, Cuboid, Disk, Interval
from dtnspec.errors import CapabilityError

SQUARE = Cuboid((math.pi / 2, math.pi / 2))


def _schema():
    text = resources.files("dtnspec").joinpath("schemas/probe_report.schema.json").read_text()
    return json.loads(text)


# ------------------------------------------------------------------ corner coefficients


def test_polygon_multiset_square():
    assert v.polygon_coefficient_multiset([math.pi / 2] * 4) == pytest.approx([math.sqrt(0.5)] * 4, abs=1e-15)


def test_polygon_multiset_obtuse_corner():
    got = v.polygon_coefficient_multiset([3 * math.pi / 4, math.pi, 1.5 * math.pi], pad_to=3)
    assert got[0] == pytest.approx(math.sin(3 * math.pi / 8), abs=1e-15)
    assert got[0] == pytest.approx(0.92388, abs=1e-5)
    assert got[1:] == [1.0, 1.0]


def test_polygon_multiset_reflex_only():
    assert v.polygon_coefficient_multiset([math.pi, 1.2 * math.pi]) == []
    assert v.polygon_coefficient_multiset([math.pi, 1.2 * math.pi], pad_to=2) == [1.0, 1.0]


def test_polygon_multiset_sharp_corner_has_several_terms():
    # alpha = pi/4: 2k - 1 < 4 allows k = 1, 2
    got = v.polygon_coefficient_multiset([math.pi / 4])
    assert got == pytest.approx(sorted([math.sin(math.pi / 8), math.sin(3 * math.pi / 8)]))


def test_polygon_multiset_rejects_bad_angle():
    with pytest.raises(ValueError):
        v.polygon_coefficient_multiset([0.0])
    with pytest.raises(ValueError):
        v.polygon_coefficient_multiset([2 * math.pi])


ANGLES = st.lists(st.floats(min_value=0.05, max_value=6.2), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(angles=ANGLES, data=st.data())
def test_polygon_multiset_permutation_invariant(angles, data):
    perm = data.draw(st.permutations(angles))
    assert v.polygon_coefficient_multiset(angles) == v.polygon_coefficient_multiset(perm)


@settings(max_examples=60, deadline=None)
@given(angles=ANGLES, extra=st.floats(min_value=math.pi, max_value=6.2), pad=st.integers(0, 12))
def test_polygon_multiset_unchanged_by_reflex_angle(angles, extra, pad):
    base = v.polygon_coefficient_multiset(angles, pad_to=pad)
    assert v.polygon_coefficient_multiset(angles + [extra], pad_to=pad) == base


# ------------------------------------------------------------------ Weyl law and clustering


def test_weyl_disk_steklov_residuals_vanish_on_even_indices():
    r = v.weyl_check(Disk(), 0.0, (2, 101))
    assert r.passed and len(r.rows) == 100
    residuals = [row.lhs - row.rhs for row in r.rows]
    assert max(abs(x) for x in residuals) <= 0.5 + 1e-12
    assert all(abs(x) < 1e-12 for row, x in zip(r.rows, residuals) if row.param % 2 == 0)


def test_weyl_disk_negative_lambda_and_square():
    assert v.weyl_check(Disk(), -10.0, (2, 101), bound=2.0).passed
    assert v.weyl_check(SQUARE, 0.0, (2, 60)).passed


def test_weyl_detects_violation():
    assert v.weyl_check(Disk(), 0.0, (2, 20), bound=0.1).status == v.FAIL


def test_weyl_rejects_ball():
    with pytest.raises(CapabilityError):
        v.weyl_check(Ball(3))


def test_cluster_circle_exact_pairing():
    r = v.cluster_check(BoundaryCurve.circle(), 0.0, (4, 20))
    assert r.passed and "exact" in r.message


def test_cluster_ellipse_gaps_decay():
    assert v.cluster_check(BoundaryCurve.ellipse(2.0, 1.0), 0.0, (4, 40)).passed


def test_cluster_kite_gaps_decay():
    r = v.cluster_check(BoundaryCurve.kite(), 0.0, (4, 40))
    summary, ok = r.rows[-1], r.passed
    assert ok, f"median last-third gap {summary.lhs:.4g} exceeds first-third median / 10 = {summary.rhs:.4g}"


def test_cluster_kite_summary_row_consistent():
    r = v.cluster_check(BoundaryCurve.kite(), 0.0, (4, 40))
    summary = r.rows[-1]
    # the gaps do decay, and the status follows the tenfold criterion
    assert 0 < summary.lhs < summary.rhs * 10.0
    assert r.status == (v.PASS if summary.margin >= 0 else v.FAIL)


# ------------------------------------------------------------------ Lambda -> -inf


def test_neg_infty_disk_and_ball():
    for dom in (Disk(), Ball(3), Disk(2.0)):
        assert v.neg_infty_check(dom, 1, tol=1e-3).passed


def test_neg_infty_interval():
    r = v.neg_infty_check(Interval(1.0), 2, tol=1e-3)
    assert r.passed and not r.conjecture


def test_neg_infty_square_is_conjecture():
    r = v.neg_infty_check(SQUARE, 4, tol=5e-4)
    assert r.passed and r.conjecture
    deepest = [row for row in r.rows if row.margin is not None]
    assert all(row.rhs == pytest.approx(math.sqrt(0.5)) for row in deepest)


def test_neg_infty_shallow_grid_inconclusive():
    assert v.neg_infty_check(Disk(), 1, lambda_grid=[-1.0, -10.0]).status == v.INCONCLUSIVE


def test_neg_infty_unsupported():
    with pytest.raises(CapabilityError):
        v.neg_infty_check(Cuboid((1.0, 1.0, 1.0)))


# ------------------------------------------------------------------ inequality probes


def test_weinstock_equality_on_circle():
    r = v.inequality_probe("weinstock", Disk())
    assert r.rows[0].lhs == pytest.approx(2 * math.pi, abs=1e-12)
    assert r.passed


def test_weinstock_strict_on_kite():
    r = v.inequality_probe("weinstock", BoundaryCurve.kite())
    assert r.passed and r.rows[0].margin > 1e-8


def test_sigma1_sqrt_strict_on_disk():
    r = v.inequality_probe("sigma1_sqrt", Disk())
    assert r.passed and all(row.margin > 1e-8 for row in r.rows)
    for row in r.rows:
        z = math.sqrt(-row.param)
        assert row.lhs == pytest.approx(float(z * mp.besseli(1, z) / mp.besseli(0, z)), rel=1e-12)


def test_sigma1_sqrt_rejects_nonnegative_lambda():
    with pytest.raises(ValueError):
        v.inequality_probe("sigma1_sqrt", Disk(), lambda_grid=[0.0])


def test_conj_sqroot_disk_value():
    r = v.inequality_probe("conj_sqroot", Disk())
    row = next(row for row in r.rows if row.param == "m=0,lambda=-4")
    oracle = float(2 * mp.besseli(1, 2) / mp.besseli(0, 2))
    assert row.lhs == pytest.approx(oracle, abs=1e-12)
    assert row.lhs == pytest.approx(1.3955, abs=1e-4)
    assert row.rhs == 2.0
    assert r.conjecture and "probe, not proof" in r.message


@pytest.mark.parametrize("target", [Disk(), Ball(3), SQUARE])
def test_sigma1_volume_bound(target):
    r = v.inequality_probe("sigma1_volume", target)
    assert r.passed
    # the Lambda = 0 row is an equality for the constant function
    zero = next(row for row in r.rows if row.param == 0.0)
    assert abs(zero.margin) < 1e-10
    assert all(row.margin > 1e-8 for row in r.rows if row.param != 0.0)


@pytest.mark.parametrize("target", [Disk(), SQUARE, Ball(3)])
def test_friedlander_strict(target):
    r = v.inequality_probe("friedlander", target)
    assert r.passed and len(r.rows) == 20 and all(row.margin > 0 for row in r.rows)


def test_hersch_payne_schiffer_square():
    r = v.inequality_probe("hersch_payne_schiffer", SQUARE)
    assert r.passed


def test_unknown_or_unsupported_probe():
    with pytest.raises(CapabilityError):
        v.inequality_probe("medvedev", Disk())
    with pytest.raises(CapabilityError):
        v.inequality_probe("hoermander", SQUARE)
    with pytest.raises(CapabilityError):
        v.inequality_probe("weinstock", Ball(3))
    with pytest.raises(CapabilityError):
        v.inequality_probe("conj_sqroot", BoundaryCurve.kite())


def test_probe_accepts_bem_solution():
    sol = solve_dtn_spectrum(BoundaryCurve.ellipse(1.5, 1.0), 0.0, 10, 256)
    assert v.inequality_probe("weinstock", sol).passed
    assert v.inequality_probe("hersch_payne_schiffer", sol).passed


# ------------------------------------------------------------------ Hoermander


def test_hoermander_bounded_on_disk():
    r = v.inequality_probe("hoermander", Disk())
    assert r.passed
    assert v.hoermander_statistic(Disk()) < 1.0


@settings(max_examples=15, deadline=None)
@given(a=st.floats(min_value=-1e4, max_value=0.0), b=st.floats(min_value=-1e4, max_value=0.0))
def test_hoermander_statistic_nonincreasing_as_floor_rises(a, b):
    low, high = sorted((a, b))
    assert v.hoermander_statistic(Disk(), high, 10) <= v.hoermander_statistic(Disk(), low, 10)


# ------------------------------------------------------------------ results and reports


def test_probe_result_serialisation():
    r = v.ProbeResult("x", v.PASS, [v.ProbeRow(1, np.float64(1.5), math.inf, np.float64(-0.5))], True, "m")
    d = json.loads(r.to_json())
    assert d == {
        "name": "x",
        "status": "pass",
        "rows": [{"param": 1, "lhs": 1.5, "rhs": None, "margin": -0.5}],
        "conjecture": True,
        "message": "m",
    }
    assert r.passed and not v.ProbeResult("y", v.FAIL).passed


def test_report_ignores_conjecture_failures():
    results = [v.ProbeResult("a", v.PASS), v.ProbeResult("b", v.FAIL, conjecture=True)]
    assert v.report("probes", results)["status"] == v.PASS
    results.append(v.ProbeResult("c", v.FAIL))
    assert v.report("probes", results)["status"] == v.FAIL


def test_probe_suite_report_matches_schema():
    results = v.probe_suite()
    rep = v.report("probes", results)
    jsonschema.validate(json.loads(json.dumps(rep)), _schema())
    names = {r.name: r for r in results}
    assert names["conj_sqroot:disk"].conjecture and names["neg_infty:square"].conjecture
    assert all(r.passed for r in results if not r.name.startswith("cluster:kite"))


def test_crashing_probe_is_reported():
    def boom():
        raise RuntimeError("bad")

    (r,) = v._run([("boom", boom)])
    assert r.status == v.FAIL and "RuntimeError" in r.message


def test_counting_grid_avoids_dirichlet_values():
    grid = v.counting_grid(Disk())
    assert len(grid) == 50 and all(-50 < x < 40 for x in grid)
    assert np.all(np.diff(grid) > 0)


def test_locate_crossing_near_reference():
    assert v.locate_crossing() == pytest.approx(-0.65, abs=0.05)
