"""Dyadic decomposition of the oscillatory tail into annular pieces.

Piece ``l`` has radial kernel ``2^{(alpha-n) l} e^{ir} psi(r / 2^l) [r >= 1]``
with ``psi(y) = y^(alpha-n) (eta(y) - eta(2y))`` supported in ``1/2 < y < 2``.
Summing pieces ``0..L`` telescopes to ``r^(alpha-n) e^{ir} eta(r / 2^L)``
on ``r >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from . import specfun
from ._parallel import parallel_map
from .errors import DomainError, FitError
from .symbol import PotentialParams

_EPS = np.finfo(float).eps


# --------------------------------------------------------------------------
# cutoffs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffEta:
    """Radial cutoff equal to 1 on ``[0, 1]`` and 0 on ``[2, inf)``."""

    name: str
    transition: Callable[[np.ndarray], np.ndarray]  # values on the open interval (1, 2)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= 1, 1.0, 0.0)
        mid = (r > 1) & (r < 2)
        if np.any(mid):
            out = out.astype(float)
            out[mid] = self.transition(r[mid])
        return out


def _glue(t):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def smooth_eta() -> CutoffEta:
    """``C^infinity`` cutoff glued from ``exp(-1/t)``."""

    def transition(r):
        u, v = _glue(2 - r), _glue(r - 1)
        return u / (u + v)

    return CutoffEta("smooth", transition)


def spline_eta() -> CutoffEta:
    """``C^3`` polynomial cutoff ``1 - t^4 (35 - 84t + 70t^2 - 20t^3)``, ``t = r - 1``."""

    def transition(r):
        t = r - 1
        return 1 - t ** 4 * (35 - 84 * t + 70 * t ** 2 - 20 * t ** 3)

    return CutoffEta("spline", transition)


def psi(p: PotentialParams, eta: CutoffEta, y) -> np.ndarray:
    """Annular profile ``y^(alpha-n) (eta(y) - eta(2y))``, zero outside ``(1/2, 2)``."""
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape, dtype=complex)
    m = (y > 0.5) & (y < 2)
    if np.any(m):
        ym = y[m]
        out[m] = ym ** (p.alpha - p.n) * (eta(ym) - eta(2 * ym))
    return out


# --------------------------------------------------------------------------
# pieces
# --------------------------------------------------------------------------

@dataclass
class DyadicPiece:
    """Kernel of one annular piece of the oscillatory tail."""

    ell: int
    params: PotentialParams
    eta: CutoffEta
    fourier_samples: dict = field(default_factory=dict)

    @property
    def support(self) -> tuple[float, float]:
        """Closed radial interval containing the support."""
        return max(1.0, 2.0 ** (self.ell - 1)), 2.0 ** (self.ell + 1)

    @property
    def breakpoints(self) -> list[float]:
        lo, hi = self.support
        pts = {lo, hi, min(max(2.0 ** self.ell, lo), hi)}
        return sorted(pts)

    def radial_profile(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        scale = 2.0 ** self.ell
        vals = 2.0 ** ((self.params.alpha - self.params.n) * self.ell) * np.exp(1j * r) * psi(
            self.params, self.eta, r / scale
        )
        return np.where(r >= 1, vals, 0)

    def kernel(self, y) -> np.ndarray:
        """Kernel at points ``y`` of shape ``(..., n)``."""
        return self.radial_profile(np.linalg.norm(np.asarray(y, dtype=float), axis=-1))


def make_pieces(p: PotentialParams, eta: CutoffEta, L: int) -> list[DyadicPiece]:
    """Pieces ``0..L`` of the dyadic decomposition."""
    if L < 1:
        raise DomainError("L must be at least 1")
    return [DyadicPiece(ell, p, eta) for ell in range(L + 1)]


def telescoped_kernel(p: PotentialParams, eta: CutoffEta, L: int, r) -> np.ndarray:
    """Closed form of the summed profiles: ``r^(alpha-n) e^{ir} eta(r/2^L) [r >= 1]``."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = r ** (p.alpha - p.n) * np.exp(1j * r) * eta(r / 2.0 ** L)
    return np.where(r >= 1, vals, 0)


# --------------------------------------------------------------------------
# radial Fourier transform
# --------------------------------------------------------------------------

def _scaled_bessel(nu: float, rho: np.ndarray, xi: float) -> np.ndarray:
    """``xi^(-nu) J_nu(rho xi)``, finite as ``xi -> 0``."""
    x = rho * xi
    out = np.empty(rho.shape, dtype=complex)
    small = x <= specfun.default_switch(nu)
    if np.any(small):
        out[small] = (rho[small] / 2) ** nu * specfun.bessel_entire(nu, x[small])
    if np.any(~small):
        out[~small] = xi ** (-nu) * np.asarray(specfun.bessel_j(nu, x[~small]))
    return out


def _panels(edges, width: float, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, math.ceil((b - a) / width))
        cuts = np.linspace(a, b, k + 1)
        half = np.diff(cuts) / 2
        mid = cuts[:-1] + half
        nodes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * w[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def radial_fourier(profile, n: int, xi: float, edges, order: int = 20, return_mass: bool = False):
    """Fourier transform of a radial function supported inside ``[edges[0], edges[-1]]``.

    ``(2pi)^{n/2} xi^{-(n-2)/2} int profile(rho) rho^{n/2} J_{(n-2)/2}(rho xi) drho``,
    which at ``xi = 0`` reduces to ``|S^{n-1}| int profile(rho) rho^{n-1} drho``.
    Composite Gauss-Legendre with panels no wider than a fifth of the
    shortest oscillation period.  With ``return_mass`` the integral of the
    absolute integrand is also returned, a scale for rounding noise.
    """
    if xi < 0:
        raise DomainError("xi must be non-negative")
    nu = (n - 2) / 2
    width = min(1.0, 2 * math.pi / (5 * (1 + xi)))
    rho, w = _panels(np.asarray(edges, dtype=float), width, order)
    integrand = np.asarray(profile(rho)) * rho ** (n / 2) * _scaled_bessel(nu, rho, xi)
    value = (2 * math.pi) ** (n / 2) * np.sum(w * integrand)
    if return_mass:
        return complex(value), float((2 * math.pi) ** (n / 2) * np.sum(w * np.abs(integrand)))
    return complex(value)


def piece_fourier(piece: DyadicPiece, xi: float, return_mass: bool = False):
    """Radial Fourier transform of the piece kernel at ``|xi| = xi``."""
    out = radial_fourier(piece.radial_profile, piece.params.n, float(xi), piece.breakpoints, return_mass=return_mass)
    piece.fourier_samples[float(xi)] = out[0] if return_mass else out
    return out


def kernel_l2_norm(piece: DyadicPiece, order: int = 40) -> float:
    """``L_2`` norm of the piece kernel over ``R^n``."""
    n = piece.params.n
    rho, w = _panels(np.asarray(piece.breakpoints), 0.25 * 2.0 ** piece.ell, order)
    sphere = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    return float(math.sqrt(sphere * np.sum(w * np.abs(piece.radial_profile(rho)) ** 2 * rho ** (n - 1))))


# --------------------------------------------------------------------------
# decay fits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    slope: float
    residual: float
    ells: tuple
    values: tuple


def fit_log2(ells, values, floors=None, residual_cap: float | None = None, trailing: int | None = None) -> DecayFit:
    """Least-squares slope of ``log2 |value|`` against ``ell``.

    Samples below their noise floor are discarded; ``trailing`` keeps only
    the last usable samples.  With fewer than two usable samples the decay
    outran double precision and the slope is reported as ``-inf``.
    """
    ells = np.asarray(ells, dtype=float)
    vals = np.abs(np.asarray(values, dtype=complex))
    keep = vals > 0
    if floors is not None:
        keep &= vals > np.asarray(floors)
    if trailing is not None:
        idx = np.flatnonzero(keep)[-trailing:]
        keep = np.zeros_like(keep)
        keep[idx] = True
    if keep.sum() < 2:
        return DecayFit(-math.inf, 0.0, tuple(ells), tuple(vals))
    x, y = ells[keep], np.log2(vals[keep])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    if residual_cap is not None and resid > residual_cap:
        raise FitError(f"log-linear fit residual {resid:.3g} exceeds {residual_cap}")
    return DecayFit(float(coef[0]), resid, tuple(ells), tuple(vals))


def annulus_sup(piece: DyadicPiece, lo: float = 0.5, hi: float = 2.0) -> float:
    """``sup |K_hat|`` over ``lo < xi < hi``.

    The transform peaks in a window of width ``~2^-l`` around ``xi = 1``;
    a coarse scan plus a window scan locates the peak, which is then
    polished with a bounded scalar search.
    """
    scale = 2.0 ** -piece.ell
    grid = np.concatenate([np.linspace(lo, hi, 61)[1:-1], 1 + scale * np.linspace(-12, 12, 97)])
    grid = np.unique(grid[(grid > lo) & (grid < hi)])
    vals = np.array([abs(piece_fourier(piece, x)) for x in grid])
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    best = vals[i]
    if b > a:
        res = optimize.minimize_scalar(
            lambda x: -abs(piece_fourier(piece, x)), bounds=(a, b), method="bounded",
            options={"xatol": 1e-4 * scale},
        )
        best = max(best, -res.fun)
    return float(best)


def _noise_floor(piece: DyadicPiece, xi: float) -> tuple[complex, float]:
    value, mass = piece_fourier(piece, xi, return_mass=True)
    return value, 1e3 * _EPS * mass


@dataclass(frozen=True)
class DecayReport:
    slope_center: float
    slope_tail: float
    slope_smallxi: float
    center: DecayFit
    tail: DecayFit
    smallxi: DecayFit


def verify_decay(
    p: PotentialParams,
    eta: CutoffEta,
    ell_range,
    M_test: int = 4,
    small_xi: float = 0.25,
    tail_xi: float = 4.0,
    trailing: int | None = 3,
) -> DecayReport:
    """Per-piece decay of the Fourier transform as a function of ``l``.

    ``slope_center`` fits ``log2 sup_{1/2<xi<2} |K_hat_l|`` (growth rate
    ``alpha - (n-1)/2``); ``slope_smallxi`` and ``slope_tail`` fit
    ``log2 |K_hat_l|`` at ``xi = 1/4`` and ``xi = 4``, which decay faster
    than any power.  Because that decay is faster than any power, a single
    straight line over all ``l`` mixes pre-asymptotic pieces with the
    asymptotic regime; those two fits use the last ``trailing`` usable
    pieces (``None`` fits every usable piece).  ``M_test`` is carried for
    the caller's comparison.
    """
    ells = sorted(int(l) for l in ell_range)
    if not ells or ells[0] < 1 or ells[-1] > 12:
        raise DomainError("ell_range must lie in 1..12")
    if M_test < 1:
        raise DomainError("M_test must be >= 1")
    pieces = [DyadicPiece(l, p, eta) for l in ells]
    center = parallel_map(annulus_sup, pieces)
    small = parallel_map(lambda pc: _noise_floor(pc, small_xi), pieces)
    tail = parallel_map(lambda pc: _noise_floor(pc, tail_xi), pieces)
    c_fit = fit_log2(ells, center)
    s_fit = fit_log2(ells, [v for v, _ in small], [f for _, f in small], trailing=trailing)
    t_fit = fit_log2(ells, [v for v, _ in tail], [f for _, f in tail], trailing=trailing)
    return DecayReport(c_fit.slope, t_fit.slope, s_fit.slope, c_fit, t_fit, s_fit)


def xi_decay_slope(p: PotentialParams, eta: CutoffEta, ell: int, xis) -> float:
    """Log-log slope of ``|K_hat_l(xi)|`` over the given frequencies."""
    piece = DyadicPiece(ell, p, eta)
    xis = np.asarray(xis, dtype=float)
    data = [_noise_floor(piece, x) for x in xis]
    vals = np.array([abs(v) for v, _ in data])
    keep = vals > np.array([f for _, f in data])
    if keep.sum() < 2:
        return -math.inf
    coef = np.polyfit(np.log(xis[keep]), np.log(vals[keep]), 1)
    return float(coef[0])


def verify_l2_bound(p: PotentialParams, ell_range, test_fn, eta: CutoffEta | None = None) -> DecayFit:
    """Fit ``log2 ||S_l f||_2`` against ``l`` with the grid operator.

    The grid is zero-padded by each piece's outer radius so that no part
    of ``S_l f`` is clipped.
    """
    from .operator import apply_piece, lp_norm

    eta = eta or smooth_eta()
    ells = sorted(int(l) for l in ell_range)
    norms = [lp_norm(apply_piece(DyadicPiece(l, p, eta), test_fn, extend=True), 2).value for l in ells]
    if all(v == 0 for v in norms):
        return DecayFit(-math.inf, 0.0, tuple(ells), tuple(norms))
    return fit_log2(ells, norms)
