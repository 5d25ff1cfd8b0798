"""Command-line front end: ``qosc eval | verify | transform``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
parameter errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import __version__
from .asc import asc_recurrence, weight
from .coherent import coherent_grid_series
from .errors import QoscError
from .oscillator import GridFunction, wavefunction
from .qfourier import kernel_closed, transform
from .qseries import Branch, Lattice, LatticePoint, QParams
from .verify import SUITES, SuiteConfig, run_suite

HEADER = "# qosc v1"
COLUMNS = ("branch", "k", "x", "re", "im")
DEFAULT_SEED = 42
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad input that maps to exit code 2."""


def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` (``0+1i``, ``-0.5-2i``, ``1i``, ``i``) or a plain real."""
    s = text.strip().replace(" ", "")
    if not s.endswith(("i", "j")):
        return complex(float(s))
    body = s[:-1] + "j"
    if body in ("j", "+j", "-j") or body.endswith(("+j", "-j")):
        body = body[:-1] + "1j"
    try:
        return complex(body)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r} (use re+imi, e.g. 0+1i)") from exc


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _seed() -> int:
    raw = os.environ.get("QOSC_SEED", str(DEFAULT_SEED))
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"QOSC_SEED must be an integer, got {raw!r}") from exc


def write_table(rows: Iterable[tuple[str, int | str, float, complex]], out: TextIO, fmt: str = "csv") -> None:
    rows = list(rows)
    if fmt == "json":
        data = [
            {"branch": b, "k": k, "x": float(x), "re": float(np.real(v)), "im": float(np.imag(v))} for b, k, x, v in rows
        ]
        json.dump({"schema": "qosc v1", "columns": list(COLUMNS), "rows": data}, out, indent=2)
        out.write("\n")
        return
    out.write(HEADER + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)
    for b, k, x, v in rows:
        w.writerow([b, k, _fmt(x), _fmt(np.real(v)), _fmt(np.imag(v))])


def grid_rows(f: GridFunction) -> list[tuple[str, int, float, complex]]:
    lat = f.lattice
    return [(p.branch.value, p.k, float(x), complex(v)) for p, x, v in zip(lat.points, lat.values, f.values)]


def read_grid(src: TextIO, params: QParams, K: int | None = None) -> GridFunction:
    """Read ``branch,k[,x],re,im`` rows; every point of the lattice must appear once."""
    lines = [ln for ln in src if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise UsageError("input table is empty")
    reader = csv.DictReader(io.StringIO("".join(lines)))
    need = {"branch", "k", "re", "im"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise UsageError(f"input header must contain {sorted(need)}, got {reader.fieldnames}")
    vals: dict[LatticePoint, complex] = {}
    for i, row in enumerate(reader, start=2):
        try:
            p = LatticePoint(Branch(row["branch"].strip().lower()), int(row["k"]))
            v = complex(float(row["re"]), float(row["im"]))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"row {i}: cannot parse {dict(row)}") from exc
        if p in vals:
            raise UsageError(f"row {i}: duplicate point {p.branch.value},{p.k}")
        vals[p] = v
    K = max(p.k for p in vals) if K is None else K
    lat = Lattice(params, K)
    missing = [p for p in lat.points if p not in vals]
    extra = [p for p in vals if p.k > K]
    if missing or extra:
        raise UsageError(f"input does not match the lattice with K={K}: {len(missing)} missing, {len(extra)} extra points")
    return GridFunction(lat, np.array([vals[p] for p in lat.points]))


def _lattice_point(x: float, params: QParams, K: int) -> LatticePoint:
    for p in Lattice(params, K).points:
        if abs(p.at(params) - x) <= 1e-12 * max(1.0, abs(x)):
            return p
    raise UsageError(f"x={x} is not a lattice point q^k or -mu q^k with k <= {K}")


def cmd_eval(args: argparse.Namespace, out: TextIO) -> int:
    params = QParams(args.q, args.mu)
    lat = Lattice.auto(params, args.K)
    n = args.n
    if args.object == "coherent":
        rows = grid_rows(coherent_grid_series(args.alpha, lat))
        if args.x is not None:
            p = _lattice_point(args.x, params, lat.K)
            rows = [r for r in rows if (r[0], r[1]) == (p.branch.value, p.k)]
        write_table(rows, out, args.format)
        return EXIT_OK
    if args.object == "kernel":
        if args.x is None:
            raise UsageError("eval kernel needs --x, a lattice point; rows run over y")
        xp = _lattice_point(args.x, params, lat.K)
        rows = [(p.branch.value, p.k, p.at(params), kernel_closed(args.t, xp, p, params)) for p in lat.points]
        write_table(rows, out, args.format)
        return EXIT_OK

    if args.x is not None:
        try:
            points: list[LatticePoint | float] = [_lattice_point(args.x, params, max(lat.K, 200))]
        except UsageError:
            points = [args.x]
    else:
        points = list(lat.points)

    rows = []
    for p in points:
        branch, k = (p.branch.value, p.k) if isinstance(p, LatticePoint) else ("", "")
        x = p.at(params) if isinstance(p, LatticePoint) else float(p)
        if args.object == "poly":
            v = asc_recurrence(n, p, params)
        elif args.object == "weight":
            v = weight(p, params)
        else:
            if not isinstance(p, LatticePoint):
                raise UsageError("wavefunctions live on the lattice; --x must be a lattice point")
            deep = Lattice(params, max(lat.K, p.k))
            v = wavefunction(n, deep).values[deep.index(p)]
        rows.append((branch, k, x, complex(v)))
    write_table(rows, out, args.format)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    cfg = SuiteConfig(
        q=args.q, mu=args.mu, n_max=args.nmax, tol=args.tol, K=args.K, seed=_seed(),
        mu2=args.mu2, t1=args.t1, t2=args.t2,
    )
    QParams(cfg.q, cfg.mu)  # validate before any suite runs
    reports = run_suite(args.suite, cfg)
    if args.format == "json":
        json.dump([r.to_json() for r in reports], out, indent=2)
        out.write("\n")
    else:
        for r in reports:
            out.write(r.line() + "\n")
        n_bad = sum(not r.passed for r in reports)
        out.write(f"{len(reports) - n_bad}/{len(reports)} checks passed\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_transform(args: argparse.Namespace, out: TextIO) -> int:
    params = QParams(args.q, args.mu)
    if args.input == "-":
        f = read_grid(sys.stdin, params, args.K)
    else:
        try:
            with open(args.input, encoding="utf-8") as fh:
                f = read_grid(fh, params, args.K)
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}") from exc
    g = transform(args.t, f)
    if args.output in (None, "-"):
        write_table(grid_rows(g), out, args.format)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_table(grid_rows(g), fh, args.format)
    return EXIT_OK


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model parameters")
    g.add_argument("--q", type=float, default=0.5, help="base q in (0,1) (default 0.5)")
    g.add_argument("--mu", type=float, default=1.0, help="mu > 0 (default 1, the discrete q-Hermite case)")
    g.add_argument("--mu2", type=float, default=None, help="second mu for the rational functions (default 2 mu)")
    g.add_argument("--t1", type=parse_complex, default=None, help="t1 with t1 t2 = mu mu2")
    g.add_argument("--t2", type=parse_complex, default=None, help="t2 with t1 t2 = mu mu2")
    g.add_argument("--n", type=int, default=0, help="degree or level")
    g.add_argument("--nmax", type=int, default=10, help="largest level in checks (default 10)")
    g.add_argument("--alpha", type=parse_complex, default=0.3, help="coherent-state label, e.g. 0.3 or 0+0.1i")
    g.add_argument("--t", type=parse_complex, default=1j, help="kernel parameter as re+imi (default 0+1i)")
    g.add_argument("--tol", type=float, default=1e-8, help="cap on every check tolerance (default 1e-8)")
    g.add_argument("--K", type=int, default=None, help="lattice depth per branch (default: from tolerance)")
    g.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qosc", description="q-oscillator numerics on the two-branch lattice")
    parser.add_argument("--version", action="version", version=f"qosc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="tabulate a function on the lattice")
    ev.add_argument("object", choices=("poly", "weight", "wavefunction", "coherent", "kernel"))
    ev.add_argument("--x", type=float, default=None, help="a single point instead of the whole lattice")
    ev.set_defaults(func=cmd_eval, default_format="csv")

    ve = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ve.add_argument("suite", choices=(*SUITES, "all"))
    ve.set_defaults(func=cmd_verify, default_format="text")

    tr = sub.add_parser("transform", parents=[common], help="apply the kernel transform to a CSV grid function")
    tr.add_argument("--input", "-i", required=True, help="CSV with branch,k,re,im columns ('-' for stdin)")
    tr.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    tr.set_defaults(func=cmd_transform, default_format="csv")
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if args.format is None:
        args.format = args.default_format
    try:
        return args.func(args, out)
    except (UsageError, QoscError, ValueError, ArithmeticError) as exc:
        print(f"qosc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
