"""Command-line interface: ``oscpot <subcommand> [flags]``.

Exit status is 0 on success, 2 when flags fail validation and 1 when a
computation fails; error text goes to standard error.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dyadic, probes, regions
from .errors import DomainError, OscPotError
from .grid import GridFunction
from .operator import Part, apply_direct, apply_spectral
from .symbol import PotentialParams, symbol_closed_form, symbol_quadrature

SUBCOMMANDS = ("symbol", "region", "polygon", "apply", "decompose", "probe")
BATCH_CHUNK = 4096


class UsageError(Exception):
    """Flag validation failure (exit status 2)."""


@dataclass(frozen=True)
class CommandSpec:
    subcommand: str
    options: dict


# --------------------------------------------------------------------------
# complex formatting
# --------------------------------------------------------------------------

def format_complex(z: complex, digits: int = 10) -> str:
    """``a+bi`` with ``digits`` significant digits per part."""
    z = complex(z)
    re_, im = z.real + 0.0, z.imag + 0.0
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{re_:.{digits}g}{sign}{abs(im):.{digits}g}i"


_COMPLEX = re.compile(r"^\s*([+-]?[^+-]+(?:[eE][+-]?\d+)?)([+-][^+-]*(?:[eE][+-]?\d+)?)i\s*$")


def parse_complex(text: str) -> complex:
    """Inverse of :func:`format_complex`; plain reals are accepted too."""
    m = _COMPLEX.match(text)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    try:
        return complex(float(text))
    except ValueError as exc:
        raise ValueError(f"not a complex number: {text!r}") from exc


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="oscpot", description="Oscillatory potential toolkit.")
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("symbol", help="evaluate the Fourier multiplier")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha-re", type=float, required=True)
    s.add_argument("--alpha-im", type=float, default=0.0)
    s.add_argument("--xi", type=_float_list, required=True, help="one or more radii, comma separated")
    s.add_argument("--method", choices=("closed", "quad", "both"), default="closed")

    r = sub.add_parser("region", help="classify (1/p, 1/q) points")
    r.add_argument("--n", type=int)
    r.add_argument("--alpha")
    r.add_argument("--inv-p")
    r.add_argument("--inv-q")
    r.add_argument("--batch", help="CSV of inv_p,inv_q or n,alpha,inv_p,inv_q rows ('-' for stdin)")

    p = sub.add_parser("polygon", help="export the region polygons as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--out", help="output file (default: stdout)")

    a = sub.add_parser("apply", help="apply the operator to a serialized grid")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--alpha", type=float, required=True)
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--method", choices=("spectral", "direct"), default="spectral")
    a.add_argument("--part", choices=("full", "near", "far"), default="full")

    d = sub.add_parser("decompose", help="decay fits of the dyadic pieces")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--ell-min", type=int, default=2)
    d.add_argument("--ell-max", type=int, required=True)
    d.add_argument("--report", choices=("decay",), default="decay")
    d.add_argument("--eta", choices=("smooth", "spline"), default="smooth")
    d.add_argument("--m-test", type=int, default=4)

    c = sub.add_parser("probe", help="run a probe campaign")
    c.add_argument("--config", required=True)
    c.add_argument("--csv")
    c.add_argument("--json")
    return ap


def parse(argv) -> CommandSpec:
    ns = build_parser().parse_args(list(argv))
    opts = {k: v for k, v in vars(ns).items() if k != "subcommand"}
    spec = CommandSpec(ns.subcommand, opts)
    _validate(spec)
    return spec


def _validate(spec: CommandSpec) -> None:
    o = spec.options
    try:
        if spec.subcommand == "symbol":
            pp = PotentialParams(o["n"], complex(o["alpha_re"], o["alpha_im"]))
            pp.check_symbol()
            if not o["xi"] or any(x < 0 or not math.isfinite(x) for x in o["xi"]):
                raise UsageError("--xi values must be finite and non-negative")
        elif spec.subcommand in ("region", "polygon"):
            if o["n"] is not None or spec.subcommand == "polygon" or o["batch"] is None:
                if o["n"] is None or o["alpha"] is None:
                    raise UsageError("--n and --alpha are required")
                regions._check(o["n"], regions._num(o["alpha"]))
            if spec.subcommand == "region":
                single = o["inv_p"] is not None or o["inv_q"] is not None
                if single == (o["batch"] is not None):
                    raise UsageError("give either --inv-p and --inv-q or --batch")
                if single:
                    if o["inv_p"] is None or o["inv_q"] is None:
                        raise UsageError("--inv-p and --inv-q go together")
                    if not regions.PlanePoint(regions._num(o["inv_p"]), regions._num(o["inv_q"])).in_square():
                        raise UsageError("point must lie in the unit square")
        elif spec.subcommand == "apply":
            pp = PotentialParams(o["n"], o["alpha"])
            pp.check_operator()
            if not 1 <= o["n"] <= 3:
                raise UsageError("grids support n = 1..3")
            if o["method"] == "spectral":
                pp.check_symbol(strict=True)
                if o["part"] != "full":
                    raise UsageError("the spectral route applies the full operator only")
        elif spec.subcommand == "decompose":
            pp = PotentialParams(o["n"], o["alpha"])
            pp.check_operator()
            if not 1 <= o["ell_min"] < o["ell_max"] <= 12:
                raise UsageError("need 1 <= --ell-min < --ell-max <= 12")
            if o["m_test"] < 1:
                raise UsageError("--m-test must be >= 1")
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cmd_symbol(o, out) -> None:
    pp = PotentialParams(o["n"], complex(o["alpha_re"], o["alpha_im"]))
    for xi in o["xi"]:
        if o["method"] == "closed":
            print(format_complex(symbol_closed_form(pp, xi).value), file=out)
        elif o["method"] == "quad":
            print(format_complex(symbol_quadrature(pp, xi).value), file=out)
        else:
            c = symbol_closed_form(pp, xi).value
            q = symbol_quadrature(pp, xi).value
            rel = abs(c - q) / max(abs(c), abs(q), 1e-300)
            print(f"closed={format_complex(c)} quad={format_complex(q)} rel_diff={rel:.3e}", file=out)


def _region_rows(handle, n, alpha):
    """Yield ``(key, x, y)`` with Fraction coordinates.

    Rows are ``inv_p,inv_q`` (using the ``--n``/``--alpha`` flags) or
    ``n,alpha,inv_p,inv_q``; blank lines, ``#`` comments and a header row
    are skipped.
    """
    for lineno, row in enumerate(csv.reader(handle), 1):
        row = [c.strip() for c in row]
        if not row or not row[0] or row[0].startswith("#"):
            continue
        if len(row) == 2:
            if n is None or alpha is None:
                raise DomainError(f"line {lineno}: two-column rows need --n and --alpha")
            x, y = row
            key = (n, alpha)
        elif len(row) == 4:
            x, y = row[2], row[3]
            key = (row[0], row[1])
        else:
            raise DomainError(f"line {lineno}: expected 2 or 4 columns, got {len(row)}")
        try:
            fx, fy = Fraction(x), Fraction(y)
            key = (int(key[0]), key[1])
        except ValueError:
            if lineno == 1:
                continue  # header
            raise DomainError(f"line {lineno}: bad number in {row}") from None
        yield key, fx, fy


def _flush(key, chunk, out) -> None:
    n, alpha = key
    X = np.array([float(c[0]) for c in chunk])
    Y = np.array([float(c[1]) for c in chunk])
    st, case = regions.classify_batch(
        n, alpha, X, Y, exact=True, rationals=([c[0] for c in chunk], [c[1] for c in chunk])
    )
    out.write("".join(f"{s},{k or 'none'}\n" for s, k in zip(st, case)))


def _cmd_region(o, out) -> None:
    if o["batch"] is None:
        pt = regions.PlanePoint(regions._num(o["inv_p"]), regions._num(o["inv_q"]))
        print(str(regions.classify(o["n"], o["alpha"], pt)), file=out)
        return
    handle = sys.stdin if o["batch"] == "-" else open(o["batch"], newline="")
    try:
        key, chunk = None, []
        for k, x, y in _region_rows(handle, o["n"], o["alpha"]):
            if chunk and (k != key or len(chunk) == BATCH_CHUNK):
                _flush(key, chunk, out)
                chunk = []
            key = k
            chunk.append((x, y))
        if chunk:
            _flush(key, chunk, out)
    finally:
        if handle is not sys.stdin:
            handle.close()


def _cmd_polygon(o, out) -> None:
    text = regions.polygon_export(o["n"], o["alpha"])
    if o["out"]:
        with open(o["out"], "w") as fh:
            fh.write(text)
    else:
        out.write(text)


def _cmd_apply(o, out) -> None:
    pp = PotentialParams(o["n"], o["alpha"])
    f = GridFunction.load(o["inp"])
    if f.dim != pp.n:
        raise DomainError(f"grid dimension {f.dim} does not match --n {pp.n}")
    if o["method"] == "spectral":
        g = apply_spectral(pp, f)
    else:
        g = apply_direct(pp, f, Part.parse(o["part"]))
    g.save(o["out"])


def _cmd_decompose(o, out) -> None:
    pp = PotentialParams(o["n"], o["alpha"])
    eta = dyadic.smooth_eta() if o["eta"] == "smooth" else dyadic.spline_eta()
    ells = range(o["ell_min"], o["ell_max"] + 1)
    rep = dyadic.verify_decay(pp, eta, ells, M_test=o["m_test"])
    print(f"slope_center {rep.slope_center:.6f} predicted {pp.alpha.real - pp.critical:.6f}", file=out)
    print(f"slope_smallxi {rep.slope_smallxi:.6f} bound {-o['m_test']}", file=out)
    print(f"slope_tail {rep.slope_tail:.6f} bound {-o['m_test']}", file=out)


def _cmd_probe(o, out) -> None:
    reports = probes.run_campaign(o["config"], o["csv"], o["json"])
    for name, rep in reports.items():
        verdict = "pass" if rep.passed else ("inconclusive" if rep.inconclusive else "fail")
        print(f"{name} slope={rep.fitted_slope:.4f} bound={rep.predicted_bound:.4f} "
              f"tol={rep.tolerance:g} {verdict}", file=out)


_DISPATCH = {
    "symbol": _cmd_symbol,
    "region": _cmd_region,
    "polygon": _cmd_polygon,
    "apply": _cmd_apply,
    "decompose": _cmd_decompose,
    "probe": _cmd_probe,
}


def run(argv, out=None, err=None) -> int:
    """Parse ``argv``, dispatch, and return the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        spec = parse(argv)
    except UsageError as exc:
        print(f"oscpot: error: {exc}", file=err)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        _DISPATCH[spec.subcommand](spec.options, out)
    except (OscPotError, OSError, ValueError) as exc:
        print(f"oscpot: {type(exc).__name__}: {exc}", file=err)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
