"""Complex-parameter special functions: Gamma, Gauss 2F1 and Bessel J.

Everything here is a pure function of its arguments.  Array arguments are
accepted for the variable (``z``) and evaluated elementwise; the parameters
are scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError, PoleError

_EPS = np.finfo(float).eps

#: Sector used by :func:`bessel_asymptotic`: ``|z| > ETA`` and ``|arg z| < THETA``.
ETA = 8.0
THETA = math.pi / 4


def _is_nonpositive_int(x) -> bool:
    x = complex(x)
    return x.imag == 0 and x.real <= 0 and x.real == round(x.real)


def _scalar_or_array(out):
    return out.item() if out.ndim == 0 else out


def _cospi(x: float) -> float:
    r = math.fmod(abs(x), 2.0)
    if (2 * r).is_integer():
        return (1.0, 0.0, -1.0, 0.0)[int(2 * r)]
    return math.cos(math.pi * r)


def _sinpi(x: float) -> float:
    r = math.fmod(abs(x), 2.0)
    sign = -1.0 if x < 0 else 1.0
    if (2 * r).is_integer():
        return sign * (0.0, 1.0, 0.0, -1.0)[int(2 * r)]
    return sign * math.sin(math.pi * r)


def expi_pi(t) -> complex:
    """``exp(i*pi*t)``, exact at real half-integers (so ``i**1`` has zero real part)."""
    t = complex(t)
    scale = math.exp(-math.pi * t.imag)
    return complex(scale * _cospi(t.real), scale * _sinpi(t.real))


# --------------------------------------------------------------------------
# Gamma
# --------------------------------------------------------------------------

def gamma(z):
    """Gamma function for complex arguments.

    Raises :class:`PoleError` at the non-positive integers.
    """
    z = np.asarray(z, dtype=complex)
    poles = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(poles):
        raise PoleError(f"Gamma has a pole at {z[poles].ravel()[0].real:g}")
    out = special.gamma(z)
    real = z.imag == 0
    if np.any(real):
        # the real-argument routine is accurate to a few ulp
        out = np.where(real, special.gamma(z.real) + 0j, out)
    return _scalar_or_array(out)


def rgamma(z):
    """Reciprocal Gamma ``1/Gamma(z)``; entire, zero at the poles of Gamma."""
    z = np.asarray(z, dtype=complex)
    return _scalar_or_array(np.where(z.imag == 0, special.rgamma(z.real) + 0j, special.rgamma(z)))


# --------------------------------------------------------------------------
# Gauss hypergeometric function
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperParams:
    """Arguments ``(a, b, c, z)`` of 2F1 with the evaluator preconditions."""

    a: complex
    b: complex
    c: complex
    z: complex

    def terminating_degree(self):
        """Degree of the polynomial if the series terminates, else ``None``."""
        degrees = [int(-complex(p).real) for p in (self.a, self.b) if _is_nonpositive_int(p)]
        return min(degrees) if degrees else None

    def validate(self) -> None:
        m = self.terminating_degree()
        if _is_nonpositive_int(self.c) and (m is None or m >= -complex(self.c).real + 1):
            raise PoleError(f"c = {self.c} is a non-positive integer")
        if abs(self.z) > 1 + 1e-14:
            raise DomainError(f"|z| = {abs(self.z):g} > 1")
        if m is None and abs(self.z) >= 1 - 1e-15 and complex(self.c - self.a - self.b).real <= 0:
            raise ConvergenceError("series diverges on |z| = 1 when Re(c-a-b) <= 0")


def _terminating(a, b, c, m, z):
    total = np.ones_like(z)
    coef = 1.0 + 0j
    zk = np.ones_like(z)
    for k in range(m):
        coef *= (a + k) * (b + k) / ((c + k) * (k + 1))
        zk = zk * z
        total = total + coef * zk
    return total


def _series(a, b, c, z, tol=2 * _EPS, max_terms=100_000):
    """Direct Gauss series with a geometric tail bound as stopping rule."""
    z = np.asarray(z, dtype=complex)
    term = np.ones_like(z)
    total = np.ones_like(z)
    absz = np.abs(z)
    hump = abs(a) + abs(b) + abs(c) + 1
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
        total = total + term
        if k < hump:
            continue
        j = k + 1
        growth = (abs(a) + j) * (abs(b) + j) / ((j + 1) * (j + complex(c).real))
        rho = absz * max(growth, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = np.where(rho < 1, np.abs(term) * rho / (1 - rho), np.inf)
        if np.all(bound <= tol * np.abs(total)):
            return total
    raise ConvergenceError(f"2F1 series did not converge in {max_terms} terms")


def _log_case(a, b, m, w, tol=2 * _EPS, max_terms=10_000):
    """F(a, b; a+b+m; 1-w) for integer m >= 0 (logarithmic connection formula)."""
    c = a + b + m
    gc = complex(gamma(c))
    w = np.asarray(w, dtype=complex)
    first = np.zeros_like(w)
    if m > 0:
        coef = 1.0 + 0j
        wk = np.ones_like(w)
        acc = np.zeros_like(w)
        for k in range(m):
            acc = acc + coef * wk
            if k + 1 < m:
                coef *= (a + k) * (b + k) / ((k + 1) * (1 - m + k))
                wk = wk * w
        first = math.factorial(m - 1) * gc * rgamma(a + m) * rgamma(b + m) * acc
    logw = np.log(w)
    term = 1.0 / math.factorial(m)
    psi1 = special.digamma(1.0)
    psi2 = special.digamma(m + 1.0)
    psia = special.digamma(complex(a + m))
    psib = special.digamma(complex(b + m))
    total = term * (logw - psi1 - psi2 + psia + psib)
    absw = np.abs(w)
    hump = abs(a) + abs(b) + m + 1
    for k in range(max_terms):
        term = term * ((a + m + k) * (b + m + k) / ((k + 1) * (k + m + 1))) * w
        psi1 += 1.0 / (k + 1)
        psi2 += 1.0 / (k + m + 1)
        psia += 1.0 / (a + m + k)
        psib += 1.0 / (b + m + k)
        contrib = term * (logw - psi1 - psi2 + psia + psib)
        total = total + contrib
        if k < hump:
            continue
        rho = absw * max((abs(a) + m + k + 2) * (abs(b) + m + k + 2) / ((k + 2) * (k + m + 2)), 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = np.where(rho < 1, 2 * np.abs(contrib) * rho / (1 - rho), np.inf)
        if np.all(bound <= tol * np.abs(total)):
            second = gc * rgamma(a) * rgamma(b) * (-w) ** m * total
            return first - second
    raise ConvergenceError("logarithmic 2F1 expansion did not converge")


def _one_minus_z(a, b, c, z):
    d = c - a - b
    m = round(d.real)
    w = 1 - np.asarray(z, dtype=complex)
    if d.imag == 0 and abs(d.real - m) <= 1e-13 * max(1.0, abs(m)):
        if m >= 0:
            return _log_case(a, b, m, w)
        # Euler transformation swaps the sign of c-a-b
        return w ** d * _log_case(c - a, c - b, -m, w)
    gc = complex(gamma(c))
    t1 = gc * special.gamma(d) * rgamma(c - a) * rgamma(c - b) * _series(a, b, 1 - d, w)
    t2 = gc * special.gamma(-d) * rgamma(a) * rgamma(b) * w ** d * _series(c - a, c - b, 1 + d, w)
    return t1 + t2


def _near_degenerate(a, b, c):
    d = complex(c - a - b)
    gap = abs(d - round(d.real))
    return 1e-13 * max(1.0, abs(round(d.real))) < gap < 1e-6


def _euler_ok(a, b, c):
    if complex(a).imag or complex(b).imag or complex(c).imag:
        return False
    return 0 < complex(b).real < complex(c).real or 0 < complex(a).real < complex(c).real


def _euler_swapped(a, b, c, z):
    if not 0 < complex(b).real < complex(c).real:
        a, b = b, a
    return hyp2f1_euler(a, b, c, z)


def hyp2f1(a, b=None, c=None, z=None):
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for ``|z| <= 1``.

    Accepts either ``hyp2f1(HyperParams(...))`` or ``hyp2f1(a, b, c, z)``;
    ``z`` may be an array.  ``|z| <= 1/2`` uses the direct series.  Farther
    out the argument is moved with ``z -> z/(z-1)`` or ``z -> 1-z``
    (logarithmic connection formula when ``c-a-b`` is an integer); points
    where no map lands inside ``|w| <= 0.9`` fall back to the Euler integral.
    """
    if isinstance(a, HyperParams):
        a, b, c, z = a.a, a.b, a.c, a.z
    a, b, c = complex(a), complex(b), complex(c)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    for zz in (flat[np.argmax(np.abs(flat))],) if flat.size else ():
        HyperParams(a, b, c, complex(zz)).validate()
    m = HyperParams(a, b, c, 0).terminating_degree()
    if m is not None:
        return _scalar_or_array(_terminating(a, b, c, m, z))
    if np.any(np.abs(flat) >= 1 - 1e-15) and (c - a - b).real <= 0:
        raise ConvergenceError("series diverges on |z| = 1 when Re(c-a-b) <= 0")

    out = np.empty_like(flat)
    with np.errstate(divide="ignore", invalid="ignore"):
        pf = np.abs(flat / (flat - 1))
    one = np.abs(1 - flat)
    direct = np.abs(flat)
    at_one = flat == 1
    best = np.minimum(np.minimum(direct, pf), one)

    use_direct = (direct <= 0.5) | ((direct == best) & (best <= 0.9))
    use_pfaff = ~use_direct & ((pf <= 0.5) | ((pf == best) & (best <= 0.9)))
    use_one = ~use_direct & ~use_pfaff & ~at_one & (best <= 0.9)
    rest = ~(use_direct | use_pfaff | use_one | at_one)

    if np.any(use_direct):
        out[use_direct] = _series(a, b, c, flat[use_direct])
    if np.any(use_pfaff):
        zz = flat[use_pfaff]
        out[use_pfaff] = (1 - zz) ** (-a) * _series(a, c - b, c, zz / (zz - 1))
    if np.any(use_one):
        zz = flat[use_one]
        if _near_degenerate(a, b, c) and _euler_ok(a, b, c):
            out[use_one] = [_euler_swapped(a, b, c, complex(v)) for v in zz]
        else:
            out[use_one] = _one_minus_z(a, b, c, zz)
    if np.any(at_one):
        out[at_one] = complex(gamma(c)) * special.gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
    if np.any(rest):
        zz = flat[rest]
        if _euler_ok(a, b, c) and np.max(np.abs(zz)) > 0.999:
            out[rest] = [_euler_swapped(a, b, c, complex(v)) for v in zz]
        else:
            out[rest] = _series(a, b, c, zz)
    return _scalar_or_array(out.reshape(z.shape))


def hyp2f1_euler(a, b, c=None, z=None, rtol=1e-12):
    """2F1 from the Euler integral, by adaptive quadrature.

    ``Gamma(c)/(Gamma(b)Gamma(c-b)) * int_0^1 t^(b-1) (1-t)^(c-b-1) (1-tz)^(-a) dt``
    requires ``0 < Re b < Re c`` and ``|z| < 1`` (or real ``z < 1``).  The
    algebraic endpoint factors are handled by QUADPACK's QAWS weight so the
    remaining integrand is smooth.
    """
    if isinstance(a, HyperParams):
        a, b, c, z = a.a, a.b, a.c, a.z
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if not 0 < b.real < c.real:
        raise DomainError("Euler integral needs 0 < Re b < Re c")
    if not (abs(z) < 1 or (z.imag == 0 and z.real < 1)):
        raise DomainError("Euler integral needs |z| < 1 or real z < 1")
    if z == 0:
        return 1.0 + 0j
    cb = c - b

    def smooth(t):
        t = min(max(t, 1e-300), 1 - 1e-16)
        return t ** (1j * b.imag) * (1 - t) ** (1j * cb.imag) * (1 - t * z) ** (-a)

    wvar = (b.real - 1, cb.real - 1)
    opts = dict(weight="alg", wvar=wvar, epsabs=0.0, epsrel=rtol, limit=500)
    re, _ = integrate.quad(lambda t: smooth(t).real, 0, 1, **opts)
    im, _ = integrate.quad(lambda t: smooth(t).imag, 0, 1, **opts)
    norm = complex(gamma(c)) * complex(rgamma(b)) * complex(rgamma(cb))
    return norm * complex(re, im)


# --------------------------------------------------------------------------
# Bessel J
# --------------------------------------------------------------------------

def default_switch(nu) -> float:
    """Series/asymptotic switch point ``min(16, max(12, 2|nu|^2))``.

    The power series loses digits to cancellation beyond ``|x| ~ 16`` while the
    optimally truncated Hankel expansion is accurate to ~1e-10 there for
    ``|nu| <= 10``, so the switch is capped at 16.
    """
    return min(16.0, max(12.0, 2.0 * abs(complex(nu)) ** 2))


def bessel_entire(nu, x, max_terms=400):
    """``J_nu(x) / (x/2)^nu``, the entire part of the power series."""
    nu = complex(nu)
    x = np.asarray(x, dtype=complex)
    q = -(x * x) / 4
    term = np.full_like(x, complex(rgamma(nu + 1)))
    total = term.copy()
    for k in range(max_terms):
        term = term * q / ((k + 1) * (k + 1 + nu))
        total = total + term
        if k > np.max(np.abs(x), initial=0) / 2 and np.all(np.abs(term) <= _EPS * np.abs(total)):
            return total
    raise ConvergenceError("Bessel power series did not converge")


def _bessel_series(nu, z):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (z / 2) ** nu * bessel_entire(nu, z)


def hankel_coefficients(nu, M):
    """Two-wave coefficients ``C_{m,+}, C_{m,-}`` for ``m = 0..M``.

    ``J_nu(z) = (pi z/2)^(-1/2) [e^{-iz} sum C_{m,-} z^-m + e^{iz} sum C_{m,+} z^-m]``
    with ``C_{m,+-} = 1/2 exp(-+ i(nu pi/2 + pi/4)) (+-i)^m a_m(nu)`` and the
    usual ``a_m(nu) = prod_{k=1..m} (4nu^2 - (2k-1)^2) / (m! 8^m)``.
    """
    nu = complex(nu)
    phase = expi_pi(-(nu / 2 + 0.25))
    plus, minus = [], []
    a = 1.0 + 0j
    for m in range(M + 1):
        if m:
            a *= (4 * nu * nu - (2 * m - 1) ** 2) / (8 * m)
        plus.append(0.5 * phase * (1j) ** m * a)
        minus.append(0.5 / phase * (-1j) ** m * a)
    return plus, minus


def _hankel_optimal(nu, z, m_max=80):
    """Both wave sums, each optimally truncated (stop when terms start growing)."""
    nu = complex(nu)
    zinv = 1.0 / z
    s_plus = np.ones_like(z)
    s_minus = np.ones_like(z)
    prev = np.ones(z.shape)
    active = np.ones(z.shape, dtype=bool)
    a = 1.0 + 0j
    zpow = np.ones_like(z)
    for m in range(1, m_max):
        a *= (4 * nu * nu - (2 * m - 1) ** 2) / (8 * m)
        zpow = zpow * zinv
        t = a * zpow
        mag = np.abs(t)
        # terms may grow while (2m-1)^2 < 4|nu|^2; truncate once they grow after that
        active &= (mag <= prev) | (2 * m - 1 < 2 * abs(nu))
        s_plus = s_plus + np.where(active, (1j) ** m * t, 0)
        s_minus = s_minus + np.where(active, (-1j) ** m * t, 0)
        active &= mag > _EPS * np.minimum(np.abs(s_plus), np.abs(s_minus)) / 4
        prev = mag
        if not active.any():
            break
    return s_plus, s_minus


def _bessel_hankel(nu, z):
    nu = complex(nu)
    s_plus, s_minus = _hankel_optimal(nu, z)
    phase = expi_pi(-(nu / 2 + 0.25))
    waves = 0.5 * phase * np.exp(1j * z) * s_plus + 0.5 / phase * np.exp(-1j * z) * s_minus
    return (np.pi * z / 2) ** -0.5 * waves


def bessel_j(nu, z, method: str = "auto", z_switch: float | None = None):
    """Bessel function of the first kind ``J_nu(z)``.

    ``method="auto"`` uses the power series for ``|z| <= z_switch`` and the
    optimally truncated Hankel expansion beyond; ``"series"`` and
    ``"asymptotic"`` force one branch.
    """
    nu = complex(nu)
    z = np.asarray(z, dtype=complex)
    if _is_nonpositive_int(nu) and nu != 0:
        k = int(-nu.real)
        return _scalar_or_array((-1) ** k * np.asarray(bessel_j(-nu, z, method, z_switch)))
    if nu.real < 0 and np.any(z == 0):
        raise DomainError("J_nu(0) is infinite for Re nu < 0")
    switch = default_switch(nu) if z_switch is None else z_switch
    flat = z.ravel()
    out = np.empty_like(flat)
    if method == "series":
        small = np.ones(flat.shape, dtype=bool)
    elif method == "asymptotic":
        small = np.zeros(flat.shape, dtype=bool)
    elif method == "auto":
        small = np.abs(flat) <= switch
    else:
        raise ValueError(f"unknown method {method!r}")
    if small.any():
        out[small] = _bessel_series(nu, flat[small])
    big = ~small
    if big.any():
        zz = flat[big]
        left = zz.real < 0
        # J_nu(z e^{+-i pi}) = e^{+-i pi nu} J_nu(z)
        sign = np.where(zz.imag >= 0, 1.0, -1.0)
        mirrored = np.where(left, -zz, zz)
        vals = _bessel_hankel(nu, mirrored)
        factor = np.where(left, np.exp(1j * np.pi * nu * sign), 1.0)
        out[big] = vals * factor
    return _scalar_or_array(out.reshape(z.shape))


@dataclass(frozen=True)
class BesselExpansion:
    """Truncated two-wave expansion of ``J_nu`` with ``M + 1`` terms per wave."""

    nu: complex
    M: int
    coeffs_plus: tuple
    coeffs_minus: tuple

    @classmethod
    def build(cls, nu, M: int) -> "BesselExpansion":
        if M < 0:
            raise DomainError("truncation order M must be non-negative")
        plus, minus = hankel_coefficients(nu, M)
        return cls(complex(nu), int(M), tuple(plus), tuple(minus))

    @property
    def remainder_constant(self) -> float:
        """Calibrated ``C_M`` in ``|R_{M,+-}(z)| <= C_M |z|^(-M-1)`` on the sector."""
        return _calibrate_remainder(self.nu, self.M)

    def partial_sums(self, z):
        z = np.asarray(z, dtype=complex)
        zinv = 1.0 / z
        s_plus = np.zeros_like(z)
        s_minus = np.zeros_like(z)
        scale = np.zeros(z.shape)
        zpow = np.ones_like(z)
        for cp, cm in zip(self.coeffs_plus, self.coeffs_minus):
            s_plus = s_plus + cp * zpow
            s_minus = s_minus + cm * zpow
            scale = scale + (abs(cp) + abs(cm)) * np.abs(zpow)
            zpow = zpow * zinv
        return s_plus, s_minus, scale


@lru_cache(maxsize=256)
def _calibrate_remainder(nu: complex, M: int) -> float:
    # Twice the largest observed tail |R| |z|^(M+1); the tail is the
    # optimally truncated remainder of the same expansion.
    radii = np.geomspace(ETA * 1.0001, 1e4, 60)
    angles = np.array([0.0, 0.9 * THETA, -0.9 * THETA])
    z = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    exp = BesselExpansion.build(nu, M)
    full_plus, full_minus = _hankel_optimal(nu, z)
    phase = expi_pi(-(complex(nu) / 2 + 0.25))
    full_plus = 0.5 * phase * full_plus
    full_minus = 0.5 / phase * full_minus
    part_plus, part_minus, _ = exp.partial_sums(z)
    tail = np.maximum(np.abs(full_plus - part_plus), np.abs(full_minus - part_minus))
    return float(2.0 * np.max(tail * np.abs(z) ** (M + 1)))


def bessel_asymptotic(exp: BesselExpansion, z):
    """Truncated two-wave sum and a bound on the neglected remainder.

    Returns ``(value, remainder_bound)`` where ``remainder_bound =
    C_M |z|^(-M-1)`` (plus a rounding allowance) bounds each wave remainder
    ``R_{M,+-}``.  For real ``z`` beyond the sector radius it also bounds
    ``|value - J_nu(z)|``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) <= ETA) or np.any(np.abs(np.angle(z)) >= THETA):
        raise DomainError(f"z outside the sector |z| > {ETA}, |arg z| < pi/4")
    s_plus, s_minus, scale = exp.partial_sums(z)
    value = (np.pi * z / 2) ** -0.5 * (np.exp(-1j * z) * s_minus + np.exp(1j * z) * s_plus)
    bound = exp.remainder_constant * np.abs(z) ** (-exp.M - 1) + 16 * _EPS * scale
    return _scalar_or_array(value), _scalar_or_array(bound)
