"""Command-line front end: spectra, branch sweeps, Robin spectra, BEM runs and validation reports.

Exit codes: 0 success, 1 usage or input error, 2 lambda on a Dirichlet
eigenvalue, 3 unsupported domain/operation, 4 failed validation checks.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import canonical as cn
from .bem import BoundaryCurve, curve_from_json, load_curve, solve_dtn_spectrum
from .branches import robin_spectrum
from .canonical import Ball, Cuboid, Disk, Interval
from .errors import CapabilityError, DtnError, GeometryError, PoleError
from .perturb import bessel_identity_check
from .validate import SUITES, report

EXIT_OK, EXIT_USAGE, EXIT_POLE, EXIT_CAPABILITY, EXIT_CHECKS = 0, 1, 2, 3, 4

SPECTRUM_HEADER = ("index", "sigma", "branch")
ROBIN_HEADER = ("index", "lambda")
BEM_HEADER = ("index", "sigma", "residual")
DMATRIX_HEADER = ("k", "lambda", "terms", "lhs", "rhs", "difference", "tail_bound")


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_number(x):
    if x is None:
        return None
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


# ------------------------------------------------------------------ configuration


def parse_domain(text: str):
    """Domain from a short description.

    disk[:R], interval[:alpha], ball3, ball:d[:R], square, cuboid:a1,a2[,a3,...]
    (cuboid numbers are half-widths; square is the square of side pi).
    """
    name, _, rest = text.strip().partition(":")
    args = [a for a in rest.split(":") if a] if rest else []
    try:
        if name == "disk":
            return Disk(float(args[0]) if args else 1.0)
        if name == "interval":
            return Interval(float(args[0]) if args else 1.0)
        if name.startswith("ball"):
            if name != "ball":
                return Ball(int(name[4:]), float(args[0]) if args else 1.0)
            if not args:
                return Ball(3)
            return Ball(int(args[0]), float(args[1]) if len(args) > 1 else 1.0)
        if name == "square":
            return Cuboid((math.pi / 2, math.pi / 2))
        if name == "cuboid":
            return Cuboid(tuple(float(a) for a in args[0].split(",")))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"cannot parse domain {text!r}: {exc}") from exc
    raise ValueError(f"unknown domain {text!r}")


@dataclass
class JobConfig:
    command: str
    domain: object | None = None
    lam: float | None = None
    lambda_grid: list[float] = field(default_factory=list)
    k_max: int = 5
    n_nodes: int = 512
    output: Path | None = None
    fmt: str = "csv"

    def check(self):
        if self.lam is not None and not math.isfinite(self.lam):
            raise ValueError("lambda must be finite")
        grid = np.asarray(self.lambda_grid, dtype=float)
        if grid.size and (not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0)):
            raise ValueError("lambda grid must be finite and strictly increasing")
        if self.k_max < 1:
            raise ValueError("k must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.output is not None:
            parent = self.output.resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ValueError(f"output path {self.output} is not writable")
        return self


def _load_curve(name: str) -> BoundaryCurve:
    # a bare name such as "kite" refers to a curve file shipped with the package
    path = Path(name)
    if not path.exists():
        shipped = resources.files("dtnspec") / "curves" / f"{path.stem}.json"
        if path.parent == Path(".") and shipped.is_file():
            return curve_from_json(json.loads(shipped.read_text()))
    return load_curve(path)


def _source(args):
    if getattr(args, "curve", None):
        return _load_curve(args.curve)
    if getattr(args, "domain", None):
        return parse_domain(args.domain)
    raise ValueError("give --domain or --curve")


def _config(args) -> JobConfig:
    cfg = JobConfig(args.command)
    if hasattr(args, "domain") or hasattr(args, "curve"):
        if getattr(args, "domain", None) or getattr(args, "curve", None):
            cfg.domain = _source(args)
    cfg.lam = getattr(args, "lam", None)
    if getattr(args, "lambda_min", None) is not None:
        cfg.lambda_grid = list(np.linspace(args.lambda_min, args.lambda_max, args.points))
    if getattr(args, "k", None) is not None:
        cfg.k_max = args.k
    cfg.n_nodes = getattr(args, "nodes", None) or cfg.n_nodes
    cfg.output = Path(args.output) if getattr(args, "output", None) else None
    cfg.fmt = getattr(args, "format", "csv")
    return cfg.check()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("DTN_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------------ output


def _emit(cfg: JobConfig, header, rows, payload: dict, out) -> None:
    if cfg.fmt == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[fmt(x) for x in row] for row in rows])
        text = buf.getvalue()
    if cfg.output is not None:
        cfg.output.write_text(text)
    else:
        out.write(text)


# ------------------------------------------------------------------ commands


def _spectrum_rows(domain, lam: float, k_max: int, n_nodes: int):
    if isinstance(domain, BoundaryCurve):
        sol = solve_dtn_spectrum(domain, lam, k_max, n_nodes)
        return [(i + 1, float(s), f"k={i + 1}") for i, s in enumerate(sol.sigmas)]
    spec = cn.eigenvalues_at(domain, lam, k_max)
    rows = []
    for e in spec.entries:
        for _ in range(e.multiplicity):
            rows.append((len(rows) + 1, e.sigma, e.branch.label()))
    return rows[:k_max]


def cmd_spectrum(cfg: JobConfig, out=sys.stdout) -> int:
    rows = _spectrum_rows(cfg.domain, cfg.lam, cfg.k_max, cfg.n_nodes)
    payload = {
        "lambda": _json_number(cfg.lam),
        "eigenvalues": [{"index": i, "sigma": _json_number(s), "branch": b} for i, s, b in rows],
    }
    _emit(cfg, SPECTRUM_HEADER, rows, payload, out)
    return EXIT_OK


def _sweep_label(branch) -> str:
    # intervals and balls are swept per parity / angular index, continued across poles
    if branch.family == "interval":
        return branch.parity[0]
    return branch.label()


def _sweep_value(domain, branch, lam):
    if isinstance(domain, Cuboid) and not branch.contains(lam):
        return None
    try:
        return cn.branch_value(domain, branch, lam)
    except (PoleError, ValueError):
        return None


def sweep_table(domain, grid, k_max: int, n_nodes: int = 256):
    """Grid (with pole markers) and one column of branch values per label."""
    grid = [float(x) for x in grid]
    if isinstance(domain, BoundaryCurve):
        with ThreadPoolExecutor(_workers()) as pool:
            sols = list(pool.map(lambda lam: solve_dtn_spectrum(domain, lam, k_max, n_nodes).sigmas, grid))
        labels = [f"k={i + 1}" for i in range(k_max)]
        table = [[float(s[i]) if i < len(s) else None for i in range(k_max)] for s in sols]
        return grid, labels, table

    poles = [p for p, _ in cn.laplace_spectrum(domain, "dirichlet", max(grid))] if max(grid) > 0 else []
    poles = [p for p in poles if min(grid) <= p <= max(grid)]
    kept = [lam for lam in grid if all(abs(lam - p) > 1e-9 * max(1.0, abs(p)) for p in poles)]
    rows = sorted(set(kept) | set(poles))
    is_pole = {p: True for p in poles}

    def entries(lam):
        return cn.eigenvalues_at(domain, lam, k_max).entries

    with ThreadPoolExecutor(_workers()) as pool:
        spectra = list(pool.map(entries, kept))
    columns: dict[str, object] = {}
    for spec in spectra:
        for e in spec:
            columns.setdefault(_sweep_label(e.branch), e.branch)
    labels = list(columns)

    def row(lam):
        if is_pole.get(lam):
            return [None] * len(labels)
        return [_sweep_value(domain, columns[label], lam) for label in labels]

    with ThreadPoolExecutor(_workers()) as pool:
        table = list(pool.map(row, rows))
    return rows, labels, table


def cmd_branch_sweep(cfg: JobConfig, out=sys.stdout) -> int:
    grid, labels, table = sweep_table(cfg.domain, cfg.lambda_grid, cfg.k_max, cfg.n_nodes)
    rows = [[lam, *vals] for lam, vals in zip(grid, table)]
    payload = {
        "lambda": [_json_number(x) for x in grid],
        "branches": {label: [_json_number(r[i]) for r in table] for i, label in enumerate(labels)},
    }
    _emit(cfg, ("lambda", *labels), rows, payload, out)
    return EXIT_OK


def cmd_robin(cfg: JobConfig, gamma: float, out=sys.stdout) -> int:
    values = robin_spectrum(cfg.domain, gamma, cfg.k_max)
    rows = [(i + 1, v) for i, v in enumerate(values)]
    payload = {"gamma": _json_number(gamma), "eigenvalues": [_json_number(v) for v in values]}
    _emit(cfg, ROBIN_HEADER, rows, payload, out)
    return EXIT_OK


def cmd_bem(cfg: JobConfig, beta: float | None = None, out=sys.stdout) -> int:
    curve = cfg.domain
    if not isinstance(curve, BoundaryCurve):
        raise CapabilityError("bem needs --curve")
    sol = solve_dtn_spectrum(curve, cfg.lam, cfg.k_max, cfg.n_nodes, beta)
    for w in sol.warnings:
        print(f"warning: {w}", file=sys.stderr)
    rows = [(i + 1, s, r) for i, (s, r) in enumerate(zip(sol.sigmas, sol.residuals))]
    payload = {
        "lambda": _json_number(cfg.lam),
        "n_nodes": cfg.n_nodes,
        "eigenvalues": [
            {"index": i, "sigma": _json_number(s), "residual": _json_number(r)} for i, s, r in rows
        ],
        "warnings": sol.warnings,
    }
    _emit(cfg, BEM_HEADER, rows, payload, out)
    return EXIT_OK


def cmd_dmatrix(cfg: JobConfig, k: int, terms: int, out=sys.stdout) -> int:
    lhs, rhs, tail = bessel_identity_check(k, cfg.lam, terms)
    row = (k, cfg.lam, terms, lhs, rhs, abs(lhs - rhs), tail)
    payload = dict(zip(DMATRIX_HEADER, (_json_number(x) for x in row)))
    _emit(cfg, DMATRIX_HEADER, [row], payload, out)
    return EXIT_OK


def cmd_validate(suite: str, output: str | None, out=sys.stdout) -> int:
    results = SUITES[suite]()
    rep = report(suite, results)
    text = json.dumps(rep, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        out.write(text)
    for r in results:
        tag = " (conjecture probe)" if r.conjecture else ""
        print(f"{r.status.upper():13s} {r.name}{tag}", file=sys.stderr)
    return EXIT_OK if rep["status"] == "pass" else EXIT_CHECKS


# ------------------------------------------------------------------ argument parsing


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which is reserved for poles here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


NUMERIC_OPTIONS = ("--lambda", "--lambda-min", "--lambda-max", "--gamma", "--beta")


def _join_negative_numbers(argv):
    """Turn ``--lambda -1e6`` into ``--lambda=-1e6`` so argparse does not take it for a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in NUMERIC_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            try:
                float(argv[i + 1])
            except ValueError:
                pass
            else:
                out.append(f"{tok}={argv[i + 1]}")
                i += 2
                continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dtnspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, domain=True, curve=True, lam=True, k=True):
        if domain:
            p.add_argument("--domain", help="disk[:R], interval[:alpha], ball3, ball:d[:R], square, cuboid:a1,a2[,...]")
        if curve:
            p.add_argument("--curve", help="curve definition file (JSON)")
        if lam:
            p.add_argument("--lambda", dest="lam", type=float, required=True)
        if k:
            p.add_argument("--k", type=int, default=5, help="number of eigenvalues")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", help="write here instead of standard output")

    p = sub.add_parser("spectrum", help="DtN eigenvalues at a fixed lambda")
    common(p)
    p.add_argument("--nodes", type=int, default=512, help="BEM nodes when --curve is given")

    p = sub.add_parser("sweep", help="branch values over a lambda grid")
    common(p, lam=False)
    p.add_argument("--lambda-min", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--nodes", type=int, default=256)

    p = sub.add_parser("robin", help="Robin eigenvalues via DtN duality")
    common(p, lam=False)
    p.add_argument("--gamma", type=float, required=True)

    p = sub.add_parser("bem", help="boundary-element DtN spectrum of a curve")
    common(p)
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--beta", type=float, default=None, help="additive freedom in the fundamental solution")

    p = sub.add_parser("dmatrix", help="truncated DtN matrix identity on the unit disk")
    common(p, domain=False, curve=False, k=False)
    p.add_argument("--k", type=int, default=0, help="angular index")
    p.add_argument("--terms", type=int, default=1000)

    p = sub.add_parser("validate", help="run a probe suite and write a JSON report")
    p.add_argument("--suite", choices=sorted(SUITES), default="acceptance")
    p.add_argument("--output")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_negative_numbers(argv))
    try:
        if args.command == "validate":
            return cmd_validate(args.suite, args.output, out)
        if args.command == "dmatrix":
            cfg = JobConfig("dmatrix", lam=args.lam, output=Path(args.output) if args.output else None,
                            fmt=args.format).check()
            return cmd_dmatrix(cfg, args.k, args.terms, out)
        cfg = _config(args)
        if cfg.domain is None:
            raise ValueError("give --domain or --curve")
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out)
        if args.command == "sweep":
            return cmd_branch_sweep(cfg, out)
        if args.command == "robin":
            return cmd_robin(cfg, args.gamma, out)
        if args.command == "bem":
            return cmd_bem(cfg, args.beta, out)
    except PoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLE
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (GeometryError, DtnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
