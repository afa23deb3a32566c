import csv
import io
import json
import math
from importlib import resources

import jsonschema
import pytest

from dtnspec import cli
from dtnspec.canonical import Ball, Cuboid, Disk, Interval
from dtnspec.specfun import bessel_j_zero


def run(*argv):
    out = io.StringIO()
    code = cli.main([str(a) for a in argv], out)
    return code, out.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def schema(name):
    return json.loads(resources.files("dtnspec").joinpath(f"schemas/{name}.schema.json").read_text())


# ------------------------------------------------------------------ domains


@pytest.mark.parametrize(
    "text,expected",
    [
        ("disk", Disk(1.0)),
        ("disk:2.5", Disk(2.5)),
        ("interval:0.5", Interval(0.5)),
        ("ball3", Ball(3)),
        ("ball:4:2", Ball(4, 2.0)),
        ("square", Cuboid((math.pi / 2, math.pi / 2))),
        ("cuboid:0.5,0.8", Cuboid((0.5, 0.8))),
    ],
)
def test_parse_domain(text, expected):
    assert cli.parse_domain(text) == expected


@pytest.mark.parametrize("text", ["torus", "disk:abc", "cuboid:", "ball:x"])
def test_parse_domain_errors(text):
    with pytest.raises(ValueError):
        cli.parse_domain(text)


# ------------------------------------------------------------------ spectrum


def test_spectrum_disk_steklov():
    code, text = run("spectrum", "--domain", "disk", "--lambda", 0, "--k", 5)
    assert code == 0
    table = rows(text)
    assert table[0] == ["index", "sigma", "branch"]
    assert [(int(r[0]), float(r[1])) for r in table[1:]] == [(1, 0.0), (2, 1.0), (3, 1.0), (4, 2.0), (5, 2.0)]


def test_spectrum_ball3():
    code, text = run("spectrum", "--domain", "ball3", "--lambda", 0, "--k", 4)
    assert code == 0
    assert [float(r[1]) for r in rows(text)[1:]] == [0.0, 1.0, 1.0, 1.0]


def test_spectrum_pole_exit_code():
    code, text = run("spectrum", "--domain", "disk", "--lambda", repr(bessel_j_zero(0, 1) ** 2))
    assert code == 2 and text == ""


def test_spectrum_near_pole_is_not_a_pole():
    # 5.78319 is 4e-6 away from j01^2, well outside the pole tolerance
    code, text = run("spectrum", "--domain", "disk", "--lambda", 5.78319)
    assert code == 0 and len(rows(text)) == 6


def test_spectrum_negative_lambda_argument():
    code, text = run("spectrum", "--domain", "disk", "--lambda", "-1e6", "--k", 1)
    assert code == 0
    assert float(rows(text)[1][1]) - 1000.0 == pytest.approx(-0.5, abs=1e-3)


def test_spectrum_json_matches_schema():
    code, text = run("spectrum", "--domain", "square", "--lambda", -2, "--k", 6, "--format", "json")
    assert code == 0
    payload = json.loads(text)
    jsonschema.validate(payload, schema("spectrum"))
    assert [e["index"] for e in payload["eigenvalues"]] == list(range(1, 7))


def test_spectrum_curve_uses_bem():
    code, text = run("spectrum", "--curve", "circle", "--lambda", 0, "--k", 3, "--nodes", 128)
    assert code == 0
    assert [float(r[1]) for r in rows(text)[1:]] == pytest.approx([0.0, 1.0, 1.0], abs=1e-10)


def test_output_file(tmp_path):
    target = tmp_path / "spec.csv"
    code, text = run("spectrum", "--domain", "disk", "--lambda", 0, "--k", 2, "--output", target)
    assert code == 0 and text == ""
    assert target.read_text().splitlines()[0] == "index,sigma,branch"


def test_seventeen_digits():
    code, text = run("spectrum", "--domain", "disk", "--lambda", -1, "--k", 1)
    value = rows(text)[1][1]
    assert float(value) == pytest.approx(0.44638996589653451, rel=1e-15)
    assert len(value.replace(".", "").lstrip("0")) == 17


# ------------------------------------------------------------------ errors


def test_capability_errors_exit_three():
    assert run("robin", "--curve", "kite", "--gamma", 1)[0] == 3
    assert run("bem", "--domain", "disk", "--lambda", 0)[0] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ("spectrum", "--lambda", 0),
        ("spectrum", "--domain", "torus", "--lambda", 0),
        ("spectrum", "--domain", "disk", "--lambda", "nan"),
        ("spectrum", "--domain", "disk", "--lambda", 0, "--k", 0),
        ("sweep", "--domain", "disk", "--lambda-min", 1, "--lambda-max", 0),
        ("spectrum", "--domain", "disk", "--lambda", 0, "--output", "/nonexistent/dir/x.csv"),
        ("bem", "--curve", "no_such_curve_file.json", "--lambda", 0),
    ],
)
def test_input_errors_exit_one(argv):
    assert run(*argv)[0] == 1


def test_usage_error_exit_one():
    with pytest.raises(SystemExit) as exc:
        run("spectrum", "--domain", "disk")
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        run("frobnicate")
    assert exc.value.code == 1


# ------------------------------------------------------------------ sweep


def test_interval_sweep_breaks_at_poles():
    code, text = run("sweep", "--domain", "interval", "--lambda-min", -20, "--lambda-max", 50, "--points", 8, "--k", 2)
    assert code == 0
    table = rows(text)
    assert table[0] == ["lambda", "s", "a"]
    body = {float(r[0]): r[1:] for r in table[1:]}
    for pole in (math.pi**2, 4 * math.pi**2):
        key = min(body, key=lambda x: abs(x - pole))
        assert key == pytest.approx(pole, rel=1e-15)
        assert body[key] == ["", ""]
    assert float(body[0.0][0]) == 0.0 and float(body[0.0][1]) == 2.0


def test_disk_sweep_json_matches_schema():
    code, text = run("sweep", "--domain", "disk", "--lambda-min", -10, "--lambda-max", 20, "--points", 31,
                     "--k", 3, "--format", "json")
    assert code == 0
    payload = json.loads(text)
    jsonschema.validate(payload, schema("sweep"))
    j01 = bessel_j_zero(0, 1) ** 2
    i = min(range(len(payload["lambda"])), key=lambda n: abs(payload["lambda"][n] - j01))
    assert payload["lambda"][i] == pytest.approx(j01, rel=1e-15)
    assert all(col[i] is None for col in payload["branches"].values())


def test_rectangle_sweep_shows_crossing():
    code, text = run("sweep", "--domain", f"cuboid:{math.pi / 2},{27 * math.pi / 16}", "--lambda-min", -2,
                     "--lambda-max", 0.5, "--points", 26, "--k", 10, "--format", "json")
    payload = json.loads(text)
    a, b = payload["branches"]["sa:1,2"], payload["branches"]["as:1,2"]
    signs = [x - y > 0 for x, y in zip(a, b)]
    switch = [payload["lambda"][n] for n in range(1, len(signs)) if signs[n] != signs[n - 1]]
    assert len(switch) == 1 and switch[0] == pytest.approx(-0.65, abs=0.15)


def test_sweep_thread_count_does_not_change_output(monkeypatch):
    argv = ("sweep", "--domain", "disk", "--lambda-min", -5, "--lambda-max", 30, "--points", 40, "--k", 4)
    monkeypatch.setenv("DTN_THREADS", "1")
    serial = run(*argv)[1]
    monkeypatch.setenv("DTN_THREADS", "4")
    assert run(*argv)[1] == serial


# ------------------------------------------------------------------ robin, bem, dmatrix


def test_robin_json():
    code, text = run("robin", "--domain", "interval", "--gamma", 0, "--k", 3, "--format", "json")
    payload = json.loads(text)
    jsonschema.validate(payload, schema("robin"))
    assert payload["eigenvalues"] == pytest.approx([0.0, math.pi**2, 4 * math.pi**2], abs=1e-9)


def test_bem_kite():
    code, text = run("bem", "--curve", "kite", "--lambda", -5, "--k", 8)
    assert code == 0
    table = rows(text)
    assert table[0] == ["index", "sigma", "residual"]
    assert float(table[2][1]) == pytest.approx(1.743, abs=5e-3)
    assert "1.74" in table[2][1]


def test_bem_json_and_curve_file(tmp_path):
    from dtnspec.bem import BoundaryCurve

    path = tmp_path / "ellipse.json"
    path.write_text(json.dumps(BoundaryCurve.ellipse(1.5, 1.0).to_json()))
    code, text = run("bem", "--curve", path, "--lambda", 2, "--k", 4, "--nodes", 128, "--format", "json")
    assert code == 0
    payload = json.loads(text)
    jsonschema.validate(payload, schema("bem"))
    assert payload["n_nodes"] == 128 and len(payload["eigenvalues"]) == 4


def test_dmatrix_row():
    code, text = run("dmatrix", "--k", 0, "--lambda", -1, "--terms", 1000)
    assert code == 0
    header, row = rows(text)
    assert header == ["k", "lambda", "terms", "lhs", "rhs", "difference", "tail_bound"]
    record = dict(zip(header, map(float, row)))
    assert record["difference"] <= record["tail_bound"]
    assert record["rhs"] == pytest.approx(0.44638996589653451, rel=1e-14)


def test_dmatrix_json():
    code, text = run("dmatrix", "--k", 2, "--lambda", 3, "--terms", 200, "--format", "json")
    payload = json.loads(text)
    jsonschema.validate(payload, schema("dmatrix"))
    assert payload["k"] == 2 and payload["terms"] == 200


# ------------------------------------------------------------------ determinism and validation


@pytest.mark.parametrize(
    "argv",
    [
        ("spectrum", "--domain", "cuboid:0.5,0.8", "--lambda", 3.3, "--k", 7, "--format", "json"),
        ("bem", "--curve", "kite", "--lambda", 5, "--k", 6, "--nodes", 256),
        ("sweep", "--domain", "ball3", "--lambda-min", -3, "--lambda-max", 12, "--points", 16, "--k", 4),
    ],
)
def test_byte_identical_output(argv):
    assert run(*argv)[1] == run(*argv)[1]


def test_validate_acceptance_reports_failing_check(tmp_path):
    target = tmp_path / "report.json"
    code, text = run("validate", "--suite", "acceptance", "--output", target)
    report = json.loads(target.read_text())
    jsonschema.validate(report, schema("probe_report"))
    assert len(report["probes"]) == 12
    green = all(p["status"] == "pass" for p in report["probes"])
    assert report["status"] == ("pass" if green else "fail")
    assert code == (0 if green else 4)


def test_validate_probe_suite_json():
    code, text = run("validate", "--suite", "probes")
    report = json.loads(text)
    jsonschema.validate(report, schema("probe_report"))
    assert report["suite"] == "probes"
    conj = {p["name"] for p in report["probes"] if p["conjecture"]}
    assert {"conj_sqroot:disk", "neg_infty:square"} <= conj
    green = all(p["status"] == "pass" for p in report["probes"] if not p["conjecture"])
    assert code == (0 if green else 4)
