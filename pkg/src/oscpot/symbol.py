"""Fourier multiplier of the oscillatory potential ``e^{i|y|}|y|^(alpha-n)``.

Two independent evaluators are provided.  :func:`symbol_closed_form` uses
the hypergeometric representation (one 2F1 inside the unit ball, two
outside), :func:`symbol_quadrature` integrates the Abel-damped Hankel
integral and extrapolates the damping to zero.

The Fourier transform convention is ``(Ff)(xi) = int f(x) e^{i x.xi} dx``
with no ``2 pi`` factors, so the inverse carries ``(2 pi)^(-n)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import specfun
from .errors import (
    ConvergenceError,
    DomainError,
    ExtrapolationError,
    FitError,
    NearZeroDivisionError,
    SingularRingError,
)

#: Half-width of the excluded band around the unit sphere.
RING_BAND = 2.0 ** -10
DEFAULT_EPS_LADDER = (1e-2, 5e-3, 2.5e-3, 1.25e-3)


@dataclass(frozen=True)
class PotentialParams:
    """Dimension ``n`` and complex order ``alpha`` of the potential."""

    n: int
    alpha: complex

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def critical(self) -> float:
        """``(n-1)/2``, the order at which the unit sphere becomes singular."""
        return (self.n - 1) / 2

    def check_operator(self) -> None:
        if not 0 < self.alpha.real < self.n:
            raise DomainError(f"operator needs 0 < Re alpha < n, got {self.alpha}")

    def check_symbol(self, strict: bool = False) -> None:
        """Pointwise evaluation off the ring allows ``Re alpha = (n+1)/2``;
        ``strict`` demands the open range where the symbol is locally integrable."""
        if self.n < 2:
            raise DomainError("symbol evaluation needs n >= 2")
        top = (self.n + 1) / 2
        if not 0 < self.alpha.real <= top or (strict and self.alpha.real == top):
            raise DomainError(f"symbol needs 0 < Re alpha < (n+1)/2, got {self.alpha}")

    @property
    def singular(self) -> bool:
        """True when the symbol blows up on the unit sphere."""
        return self.alpha.real >= self.critical


class Method(enum.Enum):
    ClosedForm = "closed"
    AbelQuadrature = "quad"


@dataclass(frozen=True)
class SymbolValue:
    xi: float
    value: complex
    method: Method


@dataclass(frozen=True)
class SingularityFit:
    """Least-squares fit of ``log|m|`` against ``log|1 - xi|`` on one side of the ring."""

    exponent_fit: float
    exponent_predicted: float
    log_flag: bool
    residual: float
    side: str = "below"
    ratio_spread: float = float("nan")
    samples: tuple = field(default=(), repr=False)


# --------------------------------------------------------------------------
# closed form
# --------------------------------------------------------------------------

def _check_xi(p: PotentialParams, xi: np.ndarray) -> None:
    if np.any(xi < 0) or not np.all(np.isfinite(xi)):
        raise DomainError("xi must be finite and non-negative")
    if np.any(xi == 1):
        raise SingularRingError("xi = 1 lies on the singular ring")
    if p.singular and np.any(np.abs(xi - 1) < RING_BAND):
        raise SingularRingError(f"xi within {RING_BAND:g} of the singular ring")


def _inner_prefactor(p: PotentialParams) -> complex:
    a, n = p.alpha, p.n
    return 2 * math.pi ** (n / 2) * complex(specfun.gamma(a)) * specfun.expi_pi(a / 2) / math.gamma(n / 2)


def symbol_values(p: PotentialParams, xi) -> np.ndarray:
    """Vectorized closed-form ``m_alpha(|xi|)`` for an array of radii."""
    p.check_symbol()
    xi = np.asarray(xi, dtype=float)
    _check_xi(p, xi)
    a, n = p.alpha, p.n
    out = np.empty(xi.shape, dtype=complex)
    inner = xi < 1
    if inner.any():
        out[inner] = _inner_prefactor(p) * np.asarray(
            specfun.hyp2f1(a / 2, (a + 1) / 2, n / 2, xi[inner] ** 2)
        )
    outer = ~inner
    if outer.any():
        x = xi[outer]
        w = 1.0 / x ** 2
        pi_n = math.pi ** (n / 2)
        c1 = 2 ** a * pi_n * complex(specfun.gamma(a / 2)) * complex(specfun.rgamma((n - a) / 2))
        c2 = 2 ** (a + 1) * pi_n * complex(specfun.gamma((a + 1) / 2)) * complex(specfun.rgamma((n - a - 1) / 2))
        t1 = c1 * x ** (-a) * np.asarray(specfun.hyp2f1(a / 2, (a - n + 2) / 2, 0.5, w)) if c1 else 0
        t2 = c2 * x ** (-a - 1) * np.asarray(specfun.hyp2f1((a + 1) / 2, (a - n + 3) / 2, 1.5, w)) if c2 else 0
        out[outer] = t1 + 1j * t2
    return out


def symbol_closed_form(p: PotentialParams, xi: float) -> SymbolValue:
    """``m_alpha(xi)`` from the hypergeometric representation.

    Inside the unit ball the symbol is a single 2F1 in ``xi^2``; outside it
    is a combination of two 2F1 in ``1/xi^2`` with a real and an imaginary
    part.  Raises :class:`SingularRingError` at ``xi = 1`` and, for
    ``Re alpha >= (n-1)/2``, inside the band ``|xi - 1| < 2^-10``.
    """
    value = symbol_values(p, np.asarray([float(xi)]))[0]
    return SymbolValue(float(xi), complex(value), Method.ClosedForm)


# --------------------------------------------------------------------------
# Abel-regularized quadrature
# --------------------------------------------------------------------------

def _head_integral(p: PotentialParams, xi: float, eps: np.ndarray, nodes: int = 48) -> np.ndarray:
    """``int_0^1`` of the damped integrand, one value per damping parameter.

    With ``nu = (n-2)/2`` the integrand is ``rho^(alpha-1) (xi/2)^nu E(rho xi)``
    where ``E = J_nu(x)/(x/2)^nu`` is entire, so the algebraic endpoint
    factor goes into a Gauss-Jacobi weight.
    """
    a = p.alpha
    nu = (p.n - 2) / 2
    beta = a.real - 1

    def smooth(rho):
        rho = np.asarray(rho, dtype=float)
        return rho ** (1j * a.imag) * 2.0 ** (-nu) * specfun.bessel_entire(nu, rho * xi) * np.exp(1j * rho)

    if a.imag == 0:
        x, w = special.roots_jacobi(nodes, 0.0, beta)
        rho = (1 + x) / 2
        w = w * 0.5 ** (beta + 1)
        base = w * smooth(rho)
        return base @ np.exp(-np.outer(rho, eps))
    return _head_series(a, nu, xi, eps)


def _head_series(a: complex, nu: float, xi: float, eps: np.ndarray, terms: int = 90) -> np.ndarray:
    """Head integral for complex ``alpha`` by termwise integration.

    ``E(rho xi) e^{(i - eps) rho}`` is entire, so its Taylor series in ``rho``
    is integrated against ``rho^(alpha-1)`` exactly: ``int_0^1 rho^(alpha-1+k) = 1/(alpha+k)``.
    """
    k = np.arange(terms)
    even = np.zeros(terms, dtype=complex)
    j = np.arange((terms + 1) // 2)
    log_fact = special.gammaln(j + 1)
    even[0::2] = (
        (-(xi * xi) / 4.0) ** j * np.exp(-log_fact) * np.asarray(specfun.rgamma(nu + j + 1))
    )[: len(even[0::2])]
    inv = 1.0 / (a + k)
    out = []
    for e in eps:
        g = (1j - e) ** k * np.exp(-special.gammaln(k + 1))
        c = np.convolve(even, g)[:terms]
        out.append(2.0 ** (-nu) * np.sum(c * inv))
    return np.asarray(out)


def _tail_integral(p: PotentialParams, xi: float, eps: np.ndarray, decay: float = 40.0) -> np.ndarray:
    """``int_1^R`` with composite Gauss-Legendre panels of width ``pi``.

    ``R`` is chosen so that the smallest damping has decayed by ``e^-decay``.
    The undamped integrand is computed once and every damping parameter is
    applied by a single matrix product.
    """
    a = p.alpha
    nu = (p.n - 2) / 2
    R = decay / float(np.min(eps))
    order = 16 + 4 * math.ceil(xi)
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.concatenate([[1.0], np.arange(1, math.ceil(R / math.pi) + 1) * math.pi + math.pi / 2])
    edges = edges[edges > 1.0 - 1e-15]
    edges = np.unique(np.concatenate([[1.0], edges]))
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2
    rho = (lo[:, None] + half[:, None] * (x[None, :] + 1)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    J = np.asarray(specfun.bessel_j(nu, rho * xi))
    base = weights * rho ** (a - p.n / 2) * J * xi ** (-nu) * np.exp(1j * rho)
    if not np.all(np.isfinite(base)):
        raise ConvergenceError("non-finite integrand in the oscillatory tail")
    return base @ np.exp(-np.outer(rho, eps))


def damped_symbol(p: PotentialParams, xi: float, eps) -> np.ndarray:
    """``m_{alpha, eps}(xi)`` for each damping parameter in ``eps``."""
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if np.any(eps <= 0):
        raise DomainError("damping parameters must be positive")
    total = _head_integral(p, xi, eps) + _tail_integral(p, xi, eps)
    return (2 * math.pi) ** (p.n / 2) * total


def neville_zero(h, values) -> np.ndarray:
    """Successive polynomial extrapolants to ``h = 0`` (Neville's scheme).

    Entry ``k`` of the result uses the first ``k + 1`` samples.
    """
    h = np.asarray(h, dtype=float)
    T = [complex(v) for v in values]
    diagonal = [T[0]]
    table = list(T)
    for k in range(1, len(h)):
        for i in range(len(h) - 1, k - 1, -1):
            table[i] = (h[i - k] * table[i] - h[i] * table[i - 1]) / (h[i - k] - h[i])
        diagonal.append(table[k])
    return np.asarray(diagonal)


def symbol_quadrature(p: PotentialParams, xi: float, eps_ladder=DEFAULT_EPS_LADDER) -> SymbolValue:
    """``m_alpha(xi)`` as the Abel limit of the damped Hankel integral.

    Each ``eps`` of the ladder gives ``m_{alpha,eps}(xi)``; the values are
    extrapolated to ``eps = 0`` with Neville's polynomial scheme.  Raises
    :class:`ExtrapolationError` if the last correction is larger than the
    one before it (the extrapolants are not settling).
    """
    p.check_symbol()
    xi = float(xi)
    if xi <= 0:
        raise DomainError("quadrature evaluator needs xi > 0")
    if xi == 1:
        raise SingularRingError("xi = 1 lies on the singular ring")
    eps = np.asarray(eps_ladder, dtype=float)
    if eps.size < 3 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise DomainError("eps ladder must be positive, strictly decreasing, length >= 3")
    vals = damped_symbol(p, xi, eps)
    ext = neville_zero(eps, vals)
    corr = np.abs(np.diff(ext))
    scale = max(abs(ext[-1]), 1e-300)
    if corr[-1] > corr[-2] and corr[-1] > 1e-8 * scale:
        raise ExtrapolationError(
            f"Abel extrapolation unstable at xi={xi}: corrections {corr[-2]:.3g} -> {corr[-1]:.3g}"
        )
    return SymbolValue(xi, complex(ext[-1]), Method.AbelQuadrature)


# --------------------------------------------------------------------------
# singularity fits
# --------------------------------------------------------------------------

def _side(side) -> str:
    s = str(getattr(side, "value", side)).lower()
    if s not in ("below", "above"):
        raise DomainError(f"side must be 'below' or 'above', got {side!r}")
    return s


def fit_singularity(
    p: PotentialParams,
    side="below",
    ks=range(3, 11),
    residual_cap: float = 0.25,
) -> SingularityFit:
    """Fit the blow-up of ``|m_alpha|`` at the unit sphere.

    Samples ``xi = 1 -+ 2^-k`` and fits ``log|m|`` against ``log|1 - xi|``.
    At ``alpha = (n-1)/2`` the singularity is logarithmic; ``log_flag`` is
    set and ``ratio_spread`` holds max/min of ``|m| / (1 + |ln|1 - xi||)``.
    Below ``(n-1)/2`` the symbol stays bounded and the predicted exponent
    is 0.
    """
    p.check_symbol()
    if not p.alpha.real < (p.n + 1) / 2:
        raise DomainError("singularity fit needs Re alpha < (n+1)/2")
    s = _side(side)
    x = 2.0 ** -np.asarray(list(ks), dtype=float)
    xi = 1 - x if s == "below" else 1 + x
    m = np.abs(symbol_values(p, xi))
    lx, lm = np.log(x), np.log(m)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, lm, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - lm) ** 2)))
    log_flag = p.alpha == p.critical
    spread = float("nan")
    if log_flag:
        ratio = m / (1 + np.abs(np.log(x)))
        spread = float(ratio.max() / ratio.min())
    if resid > residual_cap:
        raise FitError(f"singularity fit residual {resid:.3g} exceeds {residual_cap}")
    return SingularityFit(
        exponent_fit=float(coef[0]),
        exponent_predicted=min(0.0, p.critical - p.alpha.real),
        log_flag=bool(log_flag),
        residual=resid,
        side=s,
        ratio_spread=spread,
        samples=tuple(zip(xi.tolist(), m.tolist())),
    )


# --------------------------------------------------------------------------
# pointwise dominance
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DominanceProfile:
    """Pointwise ``|mu_z|^2 / |mu_{2 Re z}|`` with sign flags."""

    xi: np.ndarray
    ratio: np.ndarray
    nonpositive_real: np.ndarray

    @property
    def sup_ratio(self) -> float:
        return float(np.max(self.ratio))


def normalized_symbol(n: int, z: complex, xi) -> np.ndarray:
    """``mu_z(xi) = m_{z(n+1)/2 + (n-1)/2}(xi) / Gamma(z(n+1)/2)``."""
    z = complex(z)
    order = z * (n + 1) / 2 + (n - 1) / 2
    return symbol_values(PotentialParams(n, order), xi) * complex(specfun.rgamma(z * (n + 1) / 2))


def dominance_profile(n: int, z: complex, xi_grid) -> DominanceProfile:
    z = complex(z)
    if not 0 < z.real < 1 / (n + 1):
        raise DomainError("dominance check needs 0 < Re z < 1/(n+1)")
    xi = np.asarray(xi_grid, dtype=float)
    if np.any(xi == 1):
        raise SingularRingError("grid contains xi = 1")
    mu = normalized_symbol(n, z, xi)
    mu2 = normalized_symbol(n, 2 * z.real, xi)
    if np.any(np.abs(mu2) < 1e-14):
        raise NearZeroDivisionError("|mu_{2 Re z}| < 1e-14 on the grid")
    return DominanceProfile(xi, np.abs(mu) ** 2 / np.abs(mu2), mu2.real <= 0)


def check_dominance(n: int, z: complex, xi_grid) -> float:
    """Sup over the grid of ``|mu_z|^2 / |mu_{2 Re z}|``.

    A finite value certifies the pointwise dominance numerically on the
    grid; see :func:`dominance_profile` for the per-point data.
    """
    return dominance_profile(n, z, xi_grid).sup_ratio
