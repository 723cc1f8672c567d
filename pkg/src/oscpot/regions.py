"""Geometry of the boundedness region in the ``(1/p, 1/q)`` square.

Labeled points depend on ``(n, alpha)``; polygons built from them carry
the sufficient (Bounded) and necessary (Unbounded) conditions.  Points are
classified as Bounded, Unbounded or Open (neither is known).

Arithmetic is exact (:class:`fractions.Fraction`) when ``alpha`` and the
query point are rational; float inputs use a ``1e-12`` snap to boundaries.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable

import numpy as np

from .errors import DomainError

SNAP = 1e-12
LABELS = ("O", "E", "F", "L", "A", "A'", "H", "H'", "B", "B'", "C", "C'", "D", "G", "G'", "P", "P'")
DUAL_PAIRS = {
    "O": "F", "F": "O", "E": "E", "L": "L", "D": "D",
    "A": "A'", "A'": "A", "H": "H'", "H'": "H", "B": "B'", "B'": "B",
    "C": "C'", "C'": "C", "G": "G'", "G'": "G", "P": "P'", "P'": "P",
}


def _num(x):
    """Exact Fraction for ints, Fractions and decimal strings; float otherwise."""
    if isinstance(x, bool):
        raise DomainError("boolean is not a number")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise DomainError(f"not a number: {x!r}") from exc
    return float(x)


def _is_exact(*xs) -> bool:
    return all(isinstance(x, Fraction) for x in xs)


@dataclass(frozen=True)
class PlanePoint:
    """A point ``(1/p, 1/q)``; coordinates may be Fractions or floats."""

    inv_p: object
    inv_q: object

    def in_square(self) -> bool:
        return 0 <= self.inv_p <= 1 and 0 <= self.inv_q <= 1

    def dual(self) -> "PlanePoint":
        return PlanePoint(1 - self.inv_q, 1 - self.inv_p)

    def as_float(self) -> tuple[float, float]:
        return float(self.inv_p), float(self.inv_q)


class Status(enum.Enum):
    Bounded = "Bounded"
    Unbounded = "Unbounded"
    Open = "Open"


@dataclass(frozen=True)
class RegionVerdict:
    status: Status
    case_id: str | None

    def __str__(self) -> str:
        return f"{self.status.value} {self.case_id or 'none'}"


# --------------------------------------------------------------------------
# vertices
# --------------------------------------------------------------------------

def _check(n, alpha):
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n}")
    if not 0 < alpha < n:
        raise DomainError(f"need 0 < alpha < n, got alpha={alpha}")


def vertices(n: int, alpha) -> dict[str, PlanePoint]:
    """All seventeen labeled points for dimension ``n`` and order ``alpha``.

    Coordinates are exact Fractions when ``alpha`` is rational.  Some points
    leave the unit square for orders at which they are not used.
    """
    a = _num(alpha)
    _check(n, a)
    n = int(n)
    one = Fraction(1) if isinstance(a, Fraction) else 1.0
    N = n * one
    half = one / 2
    t = a / N
    c = 3 * half - 2 * a / (N - 1)
    bq = (N - 1) * (N - a) / (N * (N + 1))
    pts = {
        "O": (0 * one, 0 * one),
        "E": (one, 0 * one),
        "F": (one, one),
        "L": (half, half),
        "A": (one, one - t),
        "A'": (t, 0 * one),
        "H": (one - t, one - t),
        "H'": (t, t),
        "C": (c, c),
        "C'": (1 - c, 1 - c),
        "D": ((a + 1) / (N + 1), (N - a) / (N + 1)),
        "B": (one - bq, one - t),
        "B'": (t, bq),
        "G": ((N + 3) / (2 * N + 2), one - t),
        "G'": (t, (N - 1) / (2 * N + 2)),
        "P": ((4 * a - N + 3) / (2 * N + 2), half),
        "P'": (half, (3 * N - 4 * a - 1) / (2 * N + 2)),
    }
    return {k: PlanePoint(*v) for k, v in pts.items()}


# --------------------------------------------------------------------------
# predicates
# --------------------------------------------------------------------------

class _Signs:
    """Orientation and projection signs, exact for object arrays, snapped for floats."""

    def __init__(self, tol: float):
        self.tol = tol
        self.ambiguous = None

    def _sign(self, v):
        if self.tol == 0:
            pos = np.asarray(v > 0, dtype=bool)
            neg = np.asarray(v < 0, dtype=bool)
        else:
            v = np.asarray(v, dtype=float)
            pos, neg = v > self.tol, v < -self.tol
            amb = ~pos & ~neg
            self.ambiguous = amb if self.ambiguous is None else (self.ambiguous | amb)
        return pos.astype(np.int8) - neg.astype(np.int8)

    def orient(self, a, b, X, Y):
        return self._sign((b[0] - a[0]) * (Y - a[1]) - (b[1] - a[1]) * (X - a[0]))

    def ahead(self, a, b, X, Y):
        """Sign of ``(X - a) . (b - a)``."""
        return self._sign((X - a[0]) * (b[0] - a[0]) + (Y - a[1]) * (b[1] - a[1]))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: list[tuple]) -> list[tuple]:
    """Counter-clockwise hull (monotone chain), collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower, upper = chain(pts), chain(reversed(pts))
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class Shape:
    """Polygon or segment spanned by labeled vertices."""

    kind: str  # "polygon" | "segment"
    labels: tuple
    points: tuple
    closed: bool

    def hull(self, tol: float):
        hull = convex_hull(list(self.points))
        if len(hull) >= 3:
            area = sum(_cross(hull[0], hull[i], hull[i + 1]) for i in range(1, len(hull) - 1))
            if abs(area) <= tol:
                hull = [min(self.points), max(self.points)]
        return hull

    def contains(self, signs: _Signs, X, Y):
        """Boolean membership mask for points ``(X, Y)``."""
        if self.kind == "segment":
            a, b = self.points
            return _on_segment(signs, a, b, X, Y, closed=self.closed)
        hull = self.hull(signs.tol)
        if len(hull) <= 2:
            # degenerate polygon: empty interior, closure is a segment or point
            if not self.closed:
                return np.zeros(np.shape(X), dtype=bool)
            return _on_segment(signs, hull[0], hull[-1], X, Y, closed=True)
        inside = np.ones(np.shape(X), dtype=bool)
        outside = np.zeros(np.shape(X), dtype=bool)
        k = len(hull)
        for i in range(k):
            s = signs.orient(hull[i], hull[(i + 1) % k], X, Y)
            inside &= s > 0
            outside |= s < 0
        return ~outside if self.closed else inside


def _on_segment(signs: _Signs, a, b, X, Y, closed: bool):
    if a == b:
        return _at_point(signs, a, X, Y) if closed else np.zeros(np.shape(X), dtype=bool)
    line = signs.orient(a, b, X, Y) == 0
    fa = signs.ahead(a, b, X, Y)
    fb = signs.ahead(b, a, X, Y)
    if closed:
        return line & (fa >= 0) & (fb >= 0)
    return line & (fa > 0) & (fb > 0)


def _at_point(signs: _Signs, p, X, Y):
    sx = signs._sign(X - p[0])
    sy = signs._sign(Y - p[1])
    return (sx == 0) & (sy == 0)


# --------------------------------------------------------------------------
# clauses
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Clause:
    case_id: str
    status: Status
    include: tuple  # shapes whose union is the set
    exclude: tuple = ()  # shapes removed from the union

    def contains(self, signs: _Signs, X, Y):
        mask = np.zeros(np.shape(X), dtype=bool)
        for s in self.include:
            mask |= s.contains(signs, X, Y)
        for s in self.exclude:
            mask &= ~s.contains(signs, X, Y)
        return mask


def _poly(V, labels: str | Iterable[str], closed: bool) -> Shape:
    labels = tuple(labels)
    return Shape("polygon", labels, tuple((V[l].inv_p, V[l].inv_q) for l in labels), closed)


def _seg(V, a: str, b: str, closed: bool = False) -> Shape:
    return Shape("segment", (a, b), ((V[a].inv_p, V[a].inv_q), (V[b].inv_p, V[b].inv_q)), closed)


def _near(x, y, exact: bool) -> bool:
    return x == y if exact else abs(x - y) <= SNAP


def bounded_case(n: int, alpha) -> str | None:
    """Which sufficient condition applies to ``(n, alpha)``, if any."""
    a = _num(alpha)
    _check(n, a)
    exact = isinstance(a, Fraction)
    one = Fraction(1) if exact else 1.0
    N = n * one
    low = N * (N - 1) / (2 * (N + 1))
    crit = (N - 1) / 2
    if n == 2:
        if _near(a, one / 2, exact):
            return "I.5"
        if a < one / 2:
            return "I.1"
        if a < 2:
            return "I.3"
        return None
    if _near(a, crit, exact):
        return "I.6"
    if a < low and not _near(a, low, exact):
        return "I.1"
    if a < crit:
        return "I.2"
    if a < N / 2 and not _near(a, N / 2, exact):
        return "I.4"
    if a < N:
        return "I.3"
    return None


_BOUNDED_SHAPES = {
    "I.1": (("A'", "H'", "H", "A"), (("A'", "A"), ("H'", "H"))),
    "I.2": (("A'", "G'", "C'", "C", "G", "A"), (("A'", "A"), ("C'", "C"))),
    "I.3": (("A'", "B'", "B", "A"), (("A'", "A"), ("B", "B'"))),
    "I.4": (("A'", "G'", "P'", "P", "G", "A"), (("A'", "A"), ("P'", "P"))),
    "I.5": (("A'", "B'", "B", "A"), (("A'", "A"),)),
    "I.6": (("A'", "G'", "L", "G", "A"), (("A'", "A"),)),
}


def clauses(n: int, alpha) -> list[Clause]:
    """Unbounded clauses in evaluation order, followed by the applicable Bounded clause."""
    a = _num(alpha)
    V = vertices(n, a)
    exact = isinstance(a, Fraction)
    out = [
        Clause("II.1", Status.Unbounded, (_poly(V, ("H", "A", "F"), True), _poly(V, ("H'", "A'", "O"), True))),
        Clause("II.2", Status.Unbounded, (_poly(V, ("A'", "A", "E"), True),), (_seg(V, "A", "A'"),)),
    ]
    crit = Fraction(n - 1, 2) if exact else (n - 1) / 2
    if crit < a < n and not _near(a, crit, exact):
        out.append(Clause("II.3", Status.Unbounded, (_poly(V, ("B", "B'", "H", "H'"), False),)))
    case = bounded_case(n, a)
    if case is not None:
        poly, segs = _BOUNDED_SHAPES[case]
        shapes = (_poly(V, poly, False),) + tuple(_seg(V, s, t) for s, t in segs)
        out.append(Clause(case, Status.Bounded, shapes))
    return out


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def _evaluate(cl: list[Clause], X, Y, signs: _Signs):
    status = np.full(np.shape(X), Status.Open.value, dtype=object)
    case = np.full(np.shape(X), None, dtype=object)
    free = np.ones(np.shape(X), dtype=bool)
    for c in cl:
        hit = c.contains(signs, X, Y) & free
        status[hit] = c.status.value
        case[hit] = c.case_id
        free &= ~hit
    return status, case


def classify(n: int, alpha, pt: PlanePoint) -> RegionVerdict:
    """Bounded / Unbounded / Open verdict for one point, with the clause that fired."""
    a = _num(alpha)
    x, y = _num(pt.inv_p), _num(pt.inv_q)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DomainError("point outside the unit square")
    exact = _is_exact(a, x, y)
    if not exact:
        a, x, y = float(a), float(x), float(y)
    cl = clauses(n, a)
    if exact:
        X, Y, signs = np.array([x], dtype=object), np.array([y], dtype=object), _Signs(0)
    else:
        X, Y, signs = np.array([x]), np.array([y]), _Signs(SNAP)
    status, case = _evaluate(cl, X, Y, signs)
    return RegionVerdict(Status(status[0]), case[0])


def classify_batch(n: int, alpha, X, Y, exact: bool = False, rationals=None):
    """Vectorized classification of many points for one ``(n, alpha)``.

    Returns ``(status, case_id)`` object arrays.  With ``exact`` a fast
    float pass flags points within ``1e-9`` of any boundary line and those
    are re-decided with Fractions: the coordinates in ``rationals`` (a pair
    of sequences, e.g. parsed decimal strings) if given, otherwise the
    binary rationals the floats represent.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if np.any((X < 0) | (X > 1) | (Y < 0) | (Y > 1)):
        raise DomainError("points outside the unit square")
    a = _num(alpha)
    if not exact:
        return _evaluate(clauses(n, float(a)), X, Y, _Signs(SNAP))
    signs = _Signs(1e-9)
    status, case = _evaluate(clauses(n, float(a)), X, Y, signs)
    amb = signs.ambiguous if signs.ambiguous is not None else np.zeros(X.shape, bool)
    if np.any(amb):
        ea = a if isinstance(a, Fraction) else Fraction(a)
        idx = np.flatnonzero(amb.ravel())
        if rationals is None:
            src_x, src_y = X.ravel(), Y.ravel()
        else:
            src_x, src_y = rationals
        Xe = np.array([Fraction(src_x[i]) for i in idx], dtype=object).reshape(-1)
        Ye = np.array([Fraction(src_y[i]) for i in idx], dtype=object).reshape(-1)
        s2, c2 = _evaluate(clauses(n, ea), Xe, Ye, _Signs(0))
        status[amb] = s2.reshape(status[amb].shape)
        case[amb] = c2.reshape(case[amb].shape)
    return status, case


# --------------------------------------------------------------------------
# boundedness intervals of the oscillatory tail
# --------------------------------------------------------------------------

def s_alpha_lp_interval(n: int, alpha):
    """Open ``p`` interval on which the oscillatory tail is bounded on ``L_p``.

    Returns ``(p_low, p_high, sharp)``; ``sharp`` marks the two ranges where
    the interval is also necessary.
    """
    a = _num(alpha)
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    if not a > 0:
        raise DomainError("alpha must be positive")
    one = Fraction(1) if isinstance(a, Fraction) else 1.0
    N = n * one
    if n == 2:
        if a < one / 2:
            return 2 / (2 - a), 2 / a, True
        raise DomainError("no boundedness interval for n = 2, alpha >= 1/2")
    low = N * (N - 1) / (2 * (N + 1))
    if a < low:
        return N / (N - a), N / a, True
    if a < (N - 1) / 2:
        return 2 * (N - 1) / (3 * (N - 1) - 4 * a), 2 * (N - 1) / (4 * a - N + 1), False
    raise DomainError("no boundedness interval for alpha >= (n-1)/2")


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------

def _ordered_labels(shape: Shape) -> list[str]:
    """Labels in counter-clockwise order around the centroid (duplicates kept once)."""
    seen: dict[tuple, str] = {}
    for lab, p in zip(shape.labels, shape.points):
        seen.setdefault((float(p[0]), float(p[1])), lab)
    cx = sum(p[0] for p in seen) / len(seen)
    cy = sum(p[1] for p in seen) / len(seen)
    order = sorted(seen, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    return [seen[p] for p in order]


def _shape_doc(shape: Shape, V) -> dict:
    labels = list(shape.labels) if shape.kind == "segment" else _ordered_labels(shape)
    return {
        "kind": shape.kind,
        "labels": labels,
        "vertices": [[float(V[l].inv_p), float(V[l].inv_q)] for l in labels],
        "open": not shape.closed,
    }


def polygon_document(n: int, alpha) -> dict:
    """Active sets of ``(n, alpha)`` as a JSON-ready dictionary."""
    a = _num(alpha)
    V = vertices(n, a)
    doc = {
        "n": int(n),
        "alpha": float(a),
        "alpha_exact": str(a) if isinstance(a, Fraction) else None,
        "bounded": [],
        "unbounded": [],
        "points": {k: [float(v.inv_p), float(v.inv_q)] for k, v in V.items()},
    }
    for c in clauses(n, a):
        entry = {
            "case": c.case_id,
            "include": [_shape_doc(s, V) for s in c.include],
            "exclude": [_shape_doc(s, V) for s in c.exclude],
        }
        doc["bounded" if c.status is Status.Bounded else "unbounded"].append(entry)
    return doc


def dumps_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def polygon_export(n: int, alpha) -> str:
    """JSON text of :func:`polygon_document`; parsing and re-dumping is byte-identical."""
    return dumps_document(polygon_document(n, alpha))
