"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run under pytest (the lines appear in the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

import region_oracle  # noqa: E402
from acceptance_log import record  # noqa: E402
from frozen_values import WAVE_REMAINDER  # noqa: E402
from oscpot import specfun  # noqa: E402
from oscpot.dyadic import make_pieces, smooth_eta, verify_decay  # noqa: E402
from oscpot.grid import GridFunction  # noqa: E402
from oscpot.operator import apply_direct, apply_spectral  # noqa: E402
from oscpot.probes import ProbeFamily, bump, probe_blowup, probe_g_lambda, probe_piece_norms, standard_families  # noqa: E402
from oscpot.regions import LABELS, PlanePoint, Status, classify, classify_batch, vertices  # noqa: E402
from oscpot.specfun import BesselExpansion  # noqa: E402
from oscpot.symbol import PotentialParams, check_dominance, fit_singularity, symbol_closed_form, symbol_quadrature  # noqa: E402

F = Fraction


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# ---------------------------------------------------------------- 1

def test_criterion_01_symbol_cross_oracle():
    xis = np.concatenate([np.linspace(0.05, 0.88, 10), np.linspace(1.12, 4.0, 10)])
    assert len(xis) == 20 and np.all(np.abs(xis - 1) > 0.1)
    worst = 0.0
    with Timer() as t:
        for case in [(2, 0.5), (2, 1.0), (3, 0.7), (3, 1.3)]:
            p = PotentialParams(*case)
            for xi in xis:
                c = symbol_closed_form(p, float(xi)).value
                q = symbol_quadrature(p, float(xi)).value
                worst = max(worst, abs(c - q) / abs(c))
    ok = worst <= 1e-5 and t.elapsed <= 120
    assert record(1, ok, f"max rel diff {worst:.2e} (<= 1e-5), {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 2

def test_criterion_02_singularity_exponents():
    parts, ok = [], True
    with Timer() as t:
        for n, a in [(2, 0.8), (3, 1.3), (3, 1.7)]:
            target = (n - 1) / 2 - a
            for side in ("below", "above"):
                fit = fit_singularity(PotentialParams(n, a), side)
                good = abs(fit.exponent_fit - target) <= 0.05
                ok &= good
                parts.append(f"({n},{a}) {side} {fit.exponent_fit:+.3f} vs {target:+.2f}{'' if good else ' X'}")
        spreads = [fit_singularity(PotentialParams(3, 1), side).ratio_spread for side in ("below", "above")]
        ok &= max(spreads) < 10
        parts.append(f"(3,1) log-ratio max/min {max(spreads):.2f} (< 10)")
    ok &= t.elapsed <= 60
    assert record(2, ok, "; ".join(parts) + f"; {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 3

def test_criterion_03_dyadic_decay():
    parts, ok = [], True
    with Timer() as t:
        for n, a in [(2, 1.0), (3, 1.0)]:
            p = PotentialParams(n, a)
            rep = verify_decay(p, smooth_eta(), range(2, 9), M_test=4)
            target = a - (n - 1) / 2
            good_c = abs(rep.slope_center - target) <= 0.1
            good_d = rep.slope_smallxi < -4 and rep.slope_tail < -4
            ok &= good_c and good_d
            parts.append(f"({n},{a}) center {rep.slope_center:+.3f} vs {target:+.1f}{'' if good_c else ' X'}, "
                         f"smallxi {rep.slope_smallxi:.1f}, tail {rep.slope_tail:.1f}{'' if good_d else ' X'}")
    ok &= t.elapsed <= 180
    assert record(3, ok, "; ".join(parts) + f"; {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 4

def test_criterion_04_telescoping():
    L = 6
    rng = np.random.default_rng(4)
    r = rng.uniform(2, 2.0 ** (L - 1), 1000)
    worst = 0.0
    for case in [(2, 0.5), (3, 1.3), (2, 0.4 + 0.6j)]:
        p = PotentialParams(*case)
        total = sum(pc.radial_profile(r) for pc in make_pieces(p, smooth_eta(), L))
        exact = np.exp(1j * r) * r ** (p.alpha - p.n)
        worst = max(worst, float(np.max(np.abs(total - exact) / np.abs(exact))))
    assert record(4, worst <= 1e-14, f"max rel deviation {worst:.1e} on 1000 radii x 3 orders (<= 1e-14)")


# ---------------------------------------------------------------- 5

REGION_CASES = [(2, "0.3"), (2, "0.5"), (2, "1"), (3, "0.5"), (3, "0.85"), (3, "1"), (3, "1.2"), (3, "1.6"), (3, "2.5")]


def test_criterion_05_region_classifier():
    mismatches = dual_breaks = vertex_errors = 0
    with Timer() as t:
        for i, (n, alpha) in enumerate(REGION_CASES):
            a = F(alpha)
            rng = np.random.default_rng(500 + i)
            X, Y = rng.random(100_000), rng.random(100_000)
            s, c = classify_batch(n, a, X, Y, exact=True)
            so, co = region_oracle.classify(n, float(a), X, Y)
            mismatches += int(np.sum((s != so) | (c != co)))
            sd, _ = classify_batch(n, a, 1 - Y, 1 - X, exact=True)
            dual_breaks += int(np.sum(s != sd))
            V, ref = vertices(n, a), region_oracle.points(n, a)
            vertex_errors += sum(V[lab] != PlanePoint(F(ref[lab][0]), F(ref[lab][1])) for lab in LABELS)
    ok = mismatches == 0 and dual_breaks == 0 and vertex_errors == 0 and t.elapsed <= 60
    assert record(5, ok, f"oracle mismatches {mismatches}, duality breaks {dual_breaks}, "
                         f"inexact vertices {vertex_errors} over 9 x 1e5 points; {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 6

def test_criterion_06_operator_consistency():
    f = GridFunction.sample(lambda x: np.exp(-np.sum(x * x, axis=-1) / 72), (64, 64), 1.0)
    errs = {}
    with Timer() as t:
        for a in (0.5, 1.0):
            p = PotentialParams(2, a)
            s, d = apply_spectral(p, f), apply_direct(p, f)
            errs[a] = float(np.linalg.norm(s.values - d.values) / np.linalg.norm(d.values))
    ok = max(errs.values()) <= 1e-3 and t.elapsed <= 120
    detail = ", ".join(f"alpha={a}: {e:.1e}" for a, e in errs.items())
    assert record(6, ok, f"relative L2 spectral vs direct {detail} (<= 1e-3); {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 7

def test_criterion_07_piece_norms():
    with Timer() as t:
        r1 = probe_piece_norms(PotentialParams(2, 0.4), 1.25, range(2, 7), bump(2, 0.25))
        r2 = probe_piece_norms(PotentialParams(3, 1.0), 2, range(1, 5), bump(3, 0.5))
    ok = all(r.passed and r.consistent() and not r.dropped for r in (r1, r2)) and t.elapsed <= 300
    assert record(7, ok, f"n=2 p=5/4 slope {r1.fitted_slope:+.3f} <= {r1.predicted_bound:+.2f}+0.15; "
                         f"n=3 p=2 slope {r2.fitted_slope:+.3f} <= {r2.predicted_bound:+.2f}+0.15; {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 8

def test_criterion_08_g_lambda():
    f = bump(2, 0.04)
    with Timer() as t:
        r1 = probe_g_lambda(2, 1.25, 1.25, [4, 8, 16, 32], f)
        r2 = probe_g_lambda(2, 2, 6, [4, 8, 16, 32], f)
    ok = r1.passed and r2.passed and r1.consistent() and r2.consistent() and t.elapsed <= 300
    assert record(8, ok, f"p=q=5/4 slope {r1.fitted_slope:+.3f} <= {r1.predicted_bound:+.2f}+0.1; "
                         f"p=2 q=6 slope {r2.fitted_slope:+.3f} <= {r2.predicted_bound:+.3f}+0.1; {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 9

def test_criterion_09_blowup_witness():
    pp = PotentialParams(2, 1.0)
    unb, bnd = PlanePoint(0.9, 0.05), PlanePoint(0.7, 0.22)
    with Timer() as t:
        assert classify(2, 1, unb).case_id == "II.2" and classify(2, 1, bnd).status is Status.Bounded
        fams = standard_families()
        at_unb = [probe_blowup(pp, unb, fam) for fam in fams]
        witnesses = [fam for fam, r in zip(fams, at_unb) if r.fitted_slope > 0.1]
        at_bnd = [probe_blowup(pp, bnd, fam) for fam in witnesses]
    ok = bool(witnesses) and all(abs(r.fitted_slope) <= 0.1 for r in at_bnd) and t.elapsed <= 300

    def name(fam: ProbeFamily) -> str:
        return f"{fam.kind.name}/{fam.direction}"

    unb_txt = ", ".join(f"{name(f)} {r.fitted_slope:+.2f}" for f, r in zip(fams, at_unb))
    bnd_txt = ", ".join(f"{name(f)} {r.fitted_slope:+.3f}" for f, r in zip(witnesses, at_bnd))
    assert record(9, ok, f"(0.9,0.05) II.2: {unb_txt}; (0.7,0.22) Bounded, witnessing families: {bnd_txt}; "
                         f"{t.elapsed:.1f} s")


# ---------------------------------------------------------------- 10

def _remainder(nu: float, M: int, z: float) -> float:
    """``|R_{M,+}(z)|`` of the module's expansion against its own optimally truncated series."""
    zz = np.asarray([complex(z)])
    full_plus, _ = specfun._hankel_optimal(nu, zz)
    part_plus, _, _ = BesselExpansion.build(nu, M).partial_sums(zz)
    return float(abs(0.5 * specfun.expi_pi(-(nu / 2 + 0.25)) * full_plus[0] - part_plus[0]))


def test_criterion_10_bessel_remainder():
    zs = [20.0, 40.0, 80.0, 160.0]
    parts, ok = [], True
    with Timer() as t:
        for nu, M in [(0.5, 0), (1.5, 3), ((3 - 2) / 2, 2), (0.0, 2), (1 / 3, 1)]:
            got = [_remainder(nu, M, z) for z in zs]
            oracle = WAVE_REMAINDER[(nu, M)]
            if all(g == 0 for g in got):
                # half-integer order: the expansion terminates and R_M vanishes identically
                good = max(oracle) < 1e-50
                parts.append(f"({nu:g},{M}) R==0 (oracle max {max(oracle):.0e})")
            else:
                slope = float(np.polyfit(np.log(zs), np.log(got), 1)[0])
                good = slope <= -(M + 1) + 0.1 and all(math.isclose(g, o, rel_tol=1e-6) for g, o in zip(got, oracle))
                parts.append(f"({nu:.3g},{M}) slope {slope:+.3f} <= {-(M + 1) + 0.1:+.1f}")
            ok &= good
    ok &= t.elapsed <= 60
    assert record(10, ok, "; ".join(parts) + f"; {t.elapsed:.1f} s")


# ---------------------------------------------------------------- 11

def _ring_grid(N: int) -> np.ndarray:
    """``N`` points clustered cubically towards the unit ring from both sides."""
    t = np.linspace(0, 1, N // 2)
    below = 1 - (2.0 ** -10 + (0.95 - 2.0 ** -10) * t ** 3)
    above = 1 + (2.0 ** -10 + (2.0 - 2.0 ** -10) * t ** 3)
    return np.sort(np.concatenate([below, above]))


def test_criterion_11_dominance():
    parts, ok = [], True
    with Timer() as t:
        for n, z in [(2, 0.2), (3, 0.15)]:
            coarse, fine = check_dominance(n, z, _ring_grid(200)), check_dominance(n, z, _ring_grid(400))
            change = abs(fine - coarse) / coarse
            ok &= bool(np.isfinite(coarse) and change <= 1e-3)
            parts.append(f"(n={n}, z={z}) sup {coarse:.4f}, 400-point change {change:.1e}")
    ok &= t.elapsed <= 120
    assert record(11, ok, "; ".join(parts) + f"; {t.elapsed:.1f} s")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
