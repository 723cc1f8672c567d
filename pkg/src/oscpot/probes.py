"""Empirical norm-growth probes.

Each probe evaluates an operator on a ladder of inputs, fits a straight
line to the logarithm of a norm (or norm ratio) against the logarithm of
the ladder parameter, and compares the slope with a predicted exponent.
Probes use inequality semantics: an upper-bound probe passes when
``fitted_slope <= predicted_bound + tolerance``.

A campaign runner reads an INI file with ``[probe:NAME]`` sections and
writes one CSV row per ladder entry plus a JSON summary.
"""

from __future__ import annotations

import configparser
import csv
import enum
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._parallel import parallel_map
from .dyadic import CutoffEta, DyadicPiece, smooth_eta, spline_eta
from .errors import DomainError, ResolutionError
from .grid import GridFunction, lp_norm
from .operator import DIRECT_CELL_CAP, apply_direct, apply_g_lambda, apply_piece
from .regions import PlanePoint, Status, classify
from .symbol import PotentialParams

#: Default cap on grid cells for a single ladder entry.
DEFAULT_MAX_CELLS = 4_000_000
#: Fit residual above which a blow-up probe is flagged inconclusive.
RESIDUAL_CAP = 0.25


class FamilyKind(enum.Enum):
    Ball = "ball"
    ModulatedBall = "modulated_ball"
    KnappBox = "knapp_box"

    @classmethod
    def parse(cls, value) -> "FamilyKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for k in cls:
            if key in (k.value, k.name.lower()):
                return k
        raise DomainError(f"unknown probe family {value!r}")


@dataclass(frozen=True)
class ProbeFamily:
    """Indicator-type test functions indexed by a ladder parameter ``t``.

    The geometric scale is ``s = t`` for ``direction = "grow"`` and
    ``s = 1/t`` for ``"shrink"``, so the ladder is always increasing and a
    positive fitted slope always means growth along the ladder.

    * ``Ball``: indicator of ``|x| <= s``.
    * ``ModulatedBall``: ``e^{i theta.x}`` times the ball indicator.
    * ``KnappBox``: ``e^{i theta.x}`` times the indicator of a slab of
      length ``s`` along ``theta`` and width ``s^(1/2)`` across it.
    """

    kind: FamilyKind
    scale_ladder: tuple
    modulation: tuple | None = None
    direction: str = "shrink"

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind.parse(self.kind))
        ladder = tuple(float(t) for t in self.scale_ladder)
        object.__setattr__(self, "scale_ladder", ladder)
        if len(ladder) < 4:
            raise DomainError("scale ladder needs at least 4 entries")
        if any(t <= 0 or not math.isfinite(t) for t in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise DomainError("scale ladder must be positive and strictly increasing")
        if self.direction not in ("shrink", "grow"):
            raise DomainError("direction must be 'shrink' or 'grow'")
        if self.modulation is not None:
            theta = tuple(float(c) for c in self.modulation)
            if abs(math.hypot(*theta) - 1) > 1e-12:
                raise DomainError("modulation must be a unit vector")
            object.__setattr__(self, "modulation", theta)
        if self.kind is not FamilyKind.Ball and self.modulation is None:
            raise DomainError(f"{self.kind.name} needs a modulation direction")

    def scale(self, t: float) -> float:
        return 1.0 / t if self.direction == "shrink" else float(t)

    def reach(self, n: int, s: float) -> float:
        """Radius of a ball containing the support."""
        if self.kind is FamilyKind.KnappBox:
            return math.sqrt(s * s / 4 + (n - 1) * s / 4)
        return s

    def _theta(self, n: int) -> np.ndarray:
        theta = np.asarray(self.modulation, dtype=float)
        if theta.shape != (n,):
            raise DomainError(f"modulation has {theta.size} components, expected {n}")
        return theta

    def evaluate(self, n: int, s: float, x: np.ndarray) -> np.ndarray:
        """Family member of scale ``s`` at points ``x`` of shape ``(..., n)``."""
        if self.kind is FamilyKind.Ball:
            return (np.linalg.norm(x, axis=-1) <= s).astype(complex)
        theta = self._theta(n)
        along = x @ theta
        phase = np.exp(1j * along)
        if self.kind is FamilyKind.ModulatedBall:
            return phase * (np.linalg.norm(x, axis=-1) <= s)
        across = np.linalg.norm(x - along[..., None] * theta, axis=-1)
        return phase * ((np.abs(along) <= s / 2) & (across <= math.sqrt(s) / 2))


@dataclass(frozen=True)
class ProbeRow:
    """One ladder entry: parameter, input norm, output norm and their ratio."""

    parameter: float
    norm_in: float
    norm_out: float
    ratio: float
    cells: int
    spacing: float


@dataclass(frozen=True)
class SlopeReport:
    """Outcome of a probe.

    ``mode`` is ``"upper"`` (pass when ``fitted_slope <= predicted_bound +
    tolerance``) or ``"blowup"`` (pass when ``fitted_slope > predicted_bound
    + tolerance``).  ``vacuous`` marks an all-zero run, which passes.
    """

    fitted_slope: float
    predicted_bound: float
    residual: float
    passed: bool
    tolerance: float
    mode: str = "upper"
    rows: tuple = field(default=(), repr=False)
    inconclusive: bool = False
    vacuous: bool = False
    dropped: tuple = ()

    def consistent(self) -> bool:
        """Whether ``passed`` agrees with the slope, bound and tolerance."""
        if self.vacuous:
            return self.passed
        if self.mode == "blowup":
            return self.passed == (self.fitted_slope > self.predicted_bound + self.tolerance)
        return self.passed == (self.fitted_slope <= self.predicted_bound + self.tolerance)

    def summary(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else None

        return {
            "fitted_slope": num(self.fitted_slope),
            "predicted_bound": self.predicted_bound,
            "tolerance": self.tolerance,
            "residual": num(self.residual),
            "passed": self.passed,
            "mode": self.mode,
            "inconclusive": self.inconclusive,
            "vacuous": self.vacuous,
            "ladder": [r.parameter for r in self.rows],
            "dropped": list(self.dropped),
        }


def _fit(x, y) -> tuple[float, float]:
    """Least-squares slope and RMS residual of ``y`` against ``x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(np.sqrt(np.mean((A @ coef - y) ** 2)))


def _report(log_x, rows, values, predicted, tol, mode="upper", dropped=()) -> SlopeReport:
    values = np.asarray(values, dtype=float)
    if np.all(values == 0):
        return SlopeReport(-math.inf, predicted, 0.0, True, tol, mode, tuple(rows), vacuous=True, dropped=tuple(dropped))
    if np.any(values <= 0):
        raise DomainError("some but not all norms vanish; the fit is undefined")
    slope, resid = _fit(log_x, np.log2(values))
    if mode == "blowup":
        passed = slope > predicted + tol
    else:
        passed = slope <= predicted + tol
    return SlopeReport(slope, predicted, resid, bool(passed), tol, mode, tuple(rows), dropped=tuple(dropped))


# --------------------------------------------------------------------------
# test functions
# --------------------------------------------------------------------------

def bump(n: int, spacing: float, radius: float = 1.0, power: int = 2) -> GridFunction:
    """``(1 - |x|^2/radius^2)_+^power`` on a centred grid just covering its support."""
    half = int(math.ceil(radius / spacing)) + 2
    shape = (2 * half + 1,) * n
    return GridFunction.sample(
        lambda x: np.clip(1 - np.sum(x * x, axis=-1) / radius ** 2, 0, None) ** power, shape, spacing
    )


def _conjugate(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1)


# --------------------------------------------------------------------------
# G_lambda
# --------------------------------------------------------------------------

def _check_g_exponents(n: int, p: float, q: float) -> None:
    if n < 2:
        raise DomainError("G_lambda probes need n >= 2")
    if math.isclose(p, q, rel_tol=1e-12):
        top = 4 / 3 if n == 2 else (2 * n + 2) / (n + 3)
        ok = 1 <= p < top if n == 2 else 1 <= p <= top
        if not ok:
            raise DomainError(f"p = {p} is outside the L_p -> L_p decay range")
        return
    pc = _conjugate(p)
    if n == 2:
        if not 1 <= p < 4 or not math.isclose(q, 3 * pc, rel_tol=1e-12):
            raise DomainError("for n = 2 the L_p -> L_q decay needs 1 <= p < 4 and q = 3p'")
    elif not 1 <= p <= 2 or not math.isclose(q, (n + 1) * pc / (n - 1), rel_tol=1e-12):
        raise DomainError("for n > 2 the L_p -> L_q decay needs 1 <= p <= 2 and q = (n+1)p'/(n-1)")


def probe_g_lambda(
    n: int,
    p: float,
    q: float,
    lambda_ladder,
    f: GridFunction,
    tolerance: float = 0.1,
    psi_profile=None,
) -> SlopeReport:
    """Fit ``log ||G_lambda f||_q`` against ``log lambda``.

    The predicted slope is ``-n/p'`` when ``q = p`` and ``-n/q`` otherwise.
    The grid is extended by the kernel support so the output is not
    clipped.  Raises :class:`ResolutionError` if the grid does not resolve
    the largest frequency.
    """
    p, q = float(p), float(q)
    _check_g_exponents(n, p, q)
    if f.dim != n:
        raise DomainError(f"grid dimension {f.dim} does not match n = {n}")
    lams = [float(v) for v in lambda_ladder]
    if len(lams) < 2 or any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] <= 0:
        raise DomainError("lambda ladder must be positive, strictly increasing, length >= 2")
    if 4 * f.spacing > 2 * math.pi / lams[-1]:
        raise ResolutionError(f"spacing {f.spacing:g} does not resolve lambda = {lams[-1]:g}")
    predicted = -n / _conjugate(p) if p == q else -n / q
    norm_in = lp_norm(f, p).value

    def one(lam):
        g = apply_g_lambda(lam, psi_profile, f, extend=True)
        out = lp_norm(g, q).value
        return ProbeRow(lam, norm_in, out, out / norm_in if norm_in else 0.0, g.values.size, g.spacing)

    rows = parallel_map(one, lams)
    return _report(np.log2(lams), rows, [r.norm_out for r in rows], predicted, tolerance)


# --------------------------------------------------------------------------
# dyadic pieces
# --------------------------------------------------------------------------

def probe_piece_norms(
    pp: PotentialParams,
    p: float,
    ell_range,
    f: GridFunction,
    tolerance: float = 0.15,
    eta: CutoffEta | None = None,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> SlopeReport:
    """Fit ``log2 ||S_l f||_p`` against ``l``.

    The predicted slope is ``alpha - n/p'`` for ``p`` in the ``L_p``
    decay range, or ``alpha - (n-1)/2`` for ``p = 2``.  Pieces whose
    zero-padded grid would exceed ``max_cells`` are dropped from the top
    of the range; fewer than two remaining pieces raise
    :class:`ResolutionError`.
    """
    p = float(p)
    n = pp.n
    pp.check_operator()
    if p == 2:
        predicted = pp.alpha.real - (n - 1) / 2
    else:
        _check_g_exponents(n, p, p)
        predicted = pp.alpha.real - n / _conjugate(p)
    if f.dim != n:
        raise DomainError(f"grid dimension {f.dim} does not match n = {n}")
    eta = eta or smooth_eta()
    ells = sorted(int(l) for l in ell_range)
    if not ells or ells[0] < 0:
        raise DomainError("ell_range must be non-negative integers")
    kept, dropped = [], []
    for l in ells:
        pad = int(math.ceil(2.0 ** (l + 1) / f.spacing))
        cells = int(np.prod([s + 2 * pad for s in f.shape]))
        (kept if cells <= max_cells and not dropped else dropped).append(l)
    if len(kept) < 2:
        raise ResolutionError(f"cell budget {max_cells} admits fewer than two pieces")
    norm_in = lp_norm(f, p).value

    def one(l):
        g = apply_piece(DyadicPiece(l, pp, eta), f, extend=True)
        out = lp_norm(g, p).value
        return ProbeRow(float(l), norm_in, out, out / norm_in if norm_in else 0.0, g.values.size, g.spacing)

    rows = parallel_map(one, kept)
    return _report(kept, rows, [r.norm_out for r in rows], predicted, tolerance, dropped=dropped)


# --------------------------------------------------------------------------
# blow-up
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GridPlan:
    """Sampling rule for family members: ``cells_per_scale`` samples across
    the scale, spacing capped at ``max_spacing``, and a window of
    ``margin`` times the support radius."""

    cells_per_scale: float = 8.0
    max_spacing: float = 1.0
    margin: float = 6.0

    def layout(self, family: ProbeFamily, n: int, s: float) -> tuple[float, int]:
        width = min(s, math.sqrt(s)) if family.kind is FamilyKind.KnappBox else s
        h = min(width / self.cells_per_scale, self.max_spacing)
        half = int(math.ceil(self.margin * family.reach(n, s) / h))
        return h, 2 * half + 1


def probe_blowup(
    pp: PotentialParams,
    pt: PlanePoint,
    family: ProbeFamily,
    tolerance: float = 0.1,
    plan: GridPlan = GridPlan(),
    amplitude: complex = 1.0,
    max_cells: int = DIRECT_CELL_CAP,
) -> SlopeReport:
    """Fit ``log r(t)`` against ``log t`` with ``r = ||K f_t||_q / ||f_t||_p``.

    At an Unbounded point the probe passes when the slope exceeds
    ``tolerance`` (the ratio grows along the ladder); otherwise the family
    is flagged inconclusive.  At a Bounded point it passes when the slope
    is at most ``tolerance`` (flat or decreasing).  A fit residual above
    :data:`RESIDUAL_CAP` also flags the report inconclusive.  Ladder
    entries whose grid exceeds ``max_cells`` are dropped from the top.
    """
    verdict = classify(pp.n, pp.alpha.real, pt)
    if verdict.status is Status.Open:
        raise DomainError(f"point {pt.as_float()} is in an open region; nothing to probe")
    if pp.alpha.imag:
        raise DomainError("blow-up probes need real alpha")
    if amplitude == 0:
        raise DomainError("amplitude must be non-zero")
    inv_p, inv_q = pt.as_float()
    if inv_p == 0:
        raise DomainError("1/p = 0 gives an unbounded test-function norm")
    p = 1 / inv_p
    q = math.inf if inv_q == 0 else 1 / inv_q
    n = pp.n
    kept, dropped = [], []
    for t in family.scale_ladder:
        h, N = plan.layout(family, n, family.scale(t))
        (kept if N ** n <= max_cells and not dropped else dropped).append(t)
    if len(kept) < 3:
        raise ResolutionError(f"cell budget {max_cells} admits fewer than three ladder entries")

    def one(t):
        s = family.scale(t)
        h, N = plan.layout(family, n, s)
        f = GridFunction.sample(lambda x: amplitude * family.evaluate(n, s, x), (N,) * n, h)
        g = apply_direct(pp, f)
        a, b = lp_norm(f, p).value, lp_norm(g, q).value
        if a == 0:
            raise ResolutionError(f"family member at scale {s:g} has no grid support")
        return ProbeRow(t, a, b, b / a, f.values.size, h)

    rows = parallel_map(one, kept)
    mode = "blowup" if verdict.status is Status.Unbounded else "upper"
    rep = _report(np.log2(kept), rows, [r.ratio for r in rows], 0.0, tolerance, mode, dropped)
    inconclusive = rep.residual > RESIDUAL_CAP or (mode == "blowup" and not rep.passed)
    return replace(rep, inconclusive=inconclusive)


def standard_families(ladder=(2, 4, 8, 16, 32), grow_ladder=(1, 2, 4, 8, 16), n: int = 2) -> list[ProbeFamily]:
    """Shrinking ball, growing ball and growing modulated ball."""
    e1 = tuple([1.0] + [0.0] * (n - 1))
    return [
        ProbeFamily(FamilyKind.Ball, ladder, direction="shrink"),
        ProbeFamily(FamilyKind.Ball, grow_ladder, direction="grow"),
        ProbeFamily(FamilyKind.ModulatedBall, grow_ladder, e1, direction="grow"),
    ]


def blowup_survey(pp: PotentialParams, pt: PlanePoint, families=None, **kw) -> tuple[bool, list[SlopeReport]]:
    """Run several families; the point is witnessed if any report passes."""
    families = families or standard_families(n=pp.n)
    reports = [probe_blowup(pp, pt, fam, **kw) for fam in families]
    return any(r.passed for r in reports), reports


# --------------------------------------------------------------------------
# campaigns
# --------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _run_section(sec: configparser.SectionProxy, max_cells: int) -> SlopeReport:
    kind = sec.get("kind", "").strip().lower()
    n = sec.getint("n")
    if n is None:
        raise DomainError("probe section needs n")
    tol = sec.getfloat("tolerance", None)
    cells = sec.getint("max_cells", max_cells)
    if kind == "g_lambda":
        f = bump(n, sec.getfloat("spacing", 0.04), power=sec.getint("bump_power", 2))
        return probe_g_lambda(n, sec.getfloat("p"), sec.getfloat("q"), _floats(sec["ladder"]), f,
                              0.1 if tol is None else tol)
    if kind == "piece_norms":
        pp = PotentialParams(n, sec.getfloat("alpha"))
        f = bump(n, sec.getfloat("spacing", 0.25), power=sec.getint("bump_power", 2))
        eta = {"smooth": smooth_eta, "spline": spline_eta}[sec.get("eta", "smooth")]()
        ells = [int(v) for v in _floats(sec["ladder"])]
        return probe_piece_norms(pp, sec.getfloat("p"), ells, f, 0.15 if tol is None else tol, eta, cells)
    if kind == "blowup":
        pp = PotentialParams(n, sec.getfloat("alpha"))
        pt = PlanePoint(sec.getfloat("inv_p"), sec.getfloat("inv_q"))
        mod = sec.get("modulation")
        fam = ProbeFamily(
            sec.get("family", "ball"), _floats(sec["ladder"]),
            tuple(_floats(mod)) if mod else None, sec.get("direction", "shrink"),
        )
        plan = GridPlan(sec.getfloat("cells_per_scale", 8.0), sec.getfloat("max_spacing", 1.0),
                        sec.getfloat("margin", 6.0))
        return probe_blowup(pp, pt, fam, 0.1 if tol is None else tol, plan, max_cells=min(cells, DIRECT_CELL_CAP))
    raise DomainError(f"unknown probe kind {kind!r}")


def run_campaign(config_path, csv_path=None, json_path=None) -> dict[str, SlopeReport]:
    """Run every ``[probe:NAME]`` section of an INI campaign file.

    Output paths come from the arguments or the ``[output]`` section
    (keys ``csv`` and ``json``, relative to the config file).  The
    ``[campaign]`` section may set ``max_cells``.
    """
    import os

    cfg = configparser.ConfigParser()
    if not cfg.read(str(config_path)):
        raise DomainError(f"cannot read campaign file {config_path}")
    base = os.path.dirname(os.path.abspath(str(config_path)))
    max_cells = cfg.getint("campaign", "max_cells", fallback=DEFAULT_MAX_CELLS)
    names = [s for s in cfg.sections() if s.startswith("probe:")]
    if not names:
        raise DomainError("campaign defines no [probe:NAME] sections")
    reports = {s.split(":", 1)[1].strip(): _run_section(cfg[s], max_cells) for s in names}
    csv_path = csv_path or (os.path.join(base, cfg["output"]["csv"]) if cfg.has_option("output", "csv") else None)
    json_path = json_path or (os.path.join(base, cfg["output"]["json"]) if cfg.has_option("output", "json") else None)
    if csv_path:
        write_csv(reports, csv_path)
    if json_path:
        with open(json_path, "w") as fh:
            json.dump({name: rep.summary() for name, rep in reports.items()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return reports


def write_csv(reports: dict[str, SlopeReport], path) -> None:
    cols = ["probe", "parameter", "norm_in", "norm_out", "ratio", "cells", "spacing"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for name, rep in reports.items():
            for row in rep.rows:
                d = asdict(row)
                w.writerow([name] + [repr(d[c]) if isinstance(d[c], float) else d[c] for c in cols[1:]])
