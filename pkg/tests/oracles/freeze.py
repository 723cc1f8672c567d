"""Regenerate ``tests/frozen_values.py`` from arbitrary-precision mpmath oracles.

Run from the repository root::

    python tests/oracles/freeze.py > tests/frozen_values.py

None of these oracles call into ``oscpot``.  The multiplier oracle
integrates the undamped Hankel integral with the oscillatory tail split
into two Hankel waves, each rotated onto a ray in the complex plane where
it decays exponentially.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 30


def hankel1(v, z):
    # via K_nu, which mpmath evaluates stably where H1 decays
    return 2 / (mp.pi * 1j) * mp.expjpi(-v / 2) * mp.besselk(v, -1j * z)


def hankel2(v, z):
    return 2j / mp.pi * mp.expjpi(v / 2) * mp.besselk(v, 1j * z)


def multiplier(n, alpha, xi):
    """``int e^{i|y|}|y|^(alpha-n) e^{i y.xi} dy`` as an Abel limit, by contour rotation."""
    n = mp.mpf(n)
    a = mp.mpmathify(alpha)
    xi = mp.mpf(xi)
    nu = (n - 2) / 2
    if xi == 0:
        return 2 * mp.pi ** (n / 2) / mp.gamma(n / 2) * mp.gamma(a) * mp.expjpi(a / 2)
    k = min(1 + xi, abs(1 - xi))
    cuts = [0, 0.5, 2, 8, 30, 90 / k]

    def wave(r, H):
        return r ** (a - n / 2) * mp.exp(1j * r) * H(nu, r * xi) / 2

    head = mp.quad(lambda r: r ** (a - n / 2) * mp.exp(1j * r) * mp.besselj(nu, r * xi), [0, 1])
    up = 1j * mp.quad(lambda t: wave(1 + 1j * t, hankel1), cuts)
    d = 1 if xi < 1 else -1
    down = d * 1j * mp.quad(lambda t: wave(1 + d * 1j * t, hankel2), cuts)
    return (2 * mp.pi) ** (n / 2) * xi ** (-nu) * (head + up + down)


def wave_remainder(nu, M, z):
    """``|R_{M,+}(z)|``: exact '+' wave of the Hankel expansion minus its first ``M + 1`` terms."""
    with mp.workdps(60):
        nu, z = mp.mpmathify(nu), mp.mpmathify(z)
        exact = 0.5 * mp.sqrt(mp.pi * z / 2) * hankel1(nu, z) * mp.exp(-1j * z)
        a = mp.mpf(1)
        part = 0
        for m in range(M + 1):
            if m:
                a *= (4 * nu * nu - (2 * m - 1) ** 2) / (8 * m)
            part += 0.5 * mp.expjpi(-(nu / 2 + mp.mpf(1) / 4)) * (1j) ** m * a * z ** (-m)
        return abs(exact - part)


def c(x):
    x = mp.mpc(x)
    return complex(float(x.real), float(x.imag))


SYMBOL_CASES = [
    (2, 0.5, [0.05, 0.3, 0.6, 0.85, 1.2, 2.0, 3.5]),
    (2, 1.0, [0.1, 0.5, 0.8, 1.15, 2.0, 4.0]),
    (2, 0.3, [0.2, 0.7, 1.5]),
    (3, 0.7, [0.05, 0.3, 0.6, 1.3, 2.5, 4.0]),
    (3, 1.3, [0.1, 0.5, 0.85, 1.2, 1.7, 3.0]),
    (3, 1.2, [0.5]),
    (3, 2.0, [0.4, 1.5, 2.5]),
    (2, complex(0.5, 0.7), [0.4, 3.0]),
    (3, complex(1.0, -0.5), [0.6, 1.8]),
]

GAMMA_POINTS = [0.5, 1, 2.5 + 1j, -3.5 + 0.25j, 7.3 - 20j, 0.1 + 45j, -19.5 + 2j, 15 + 1e-3j]

HYP_CASES = [
    (1, 1, 2, 0.5),
    (0.5, 0.75, 1.5, -0.3),
    (0.25 + 0.5j, 0.75, 1.5, 0.7),
    (0.5, 1.0, 1.0, 0.81),
    (0.6 + 0.35j, 1.1 + 0.35j, 1.5, 0.95),
    (0.5, 0.5, 1.0, 0.999),
    (0.3, -0.2 + 0.4j, 1.7, -0.9),
    (0.4, 0.45, 1.5, 1.0),
    (1.3, 0.8, 2.1, 0.6 + 0.6j),
    (0.5, 0.25, 0.5, 0.5j),
    (0.65, 1.15, 1.5, 0.99),
    (1.2, 0.6, 1.0, -0.99),
]

BESSEL_CASES = [(0, 50), (0.5, mp.pi / 2), (1, 3.7), (0.5, 13), (2.5, 30.0), (1 / 3, 9.5),
                (0.5 + 0.5j, 4.0), (0, 12.5 + 3j), (1, 200.0)]

REMAINDER_CASES = [(0.5, 0), (1.5, 3), (0.5, 2), (0, 2), (1 / 3, 1), (0, 0)]
REMAINDER_Z = [20, 40, 80, 160]


def main() -> None:
    print('"""Frozen arbitrary-precision reference values.  Regenerate with tests/oracles/freeze.py."""')
    print()
    print("SYMBOL = {")
    for n, a, xis in SYMBOL_CASES:
        for xi in xis:
            print(f"    ({n}, {a!r}, {xi!r}): {c(multiplier(n, a, xi))!r},")
    print("}")
    print()
    print("GAMMA = {")
    for z in GAMMA_POINTS:
        print(f"    {complex(z)!r}: {c(mp.gamma(z))!r},")
    print("}")
    print()
    print("HYP2F1 = {")
    for a, b, cc, z in HYP_CASES:
        key = tuple(complex(v) for v in (a, b, cc, z))
        print(f"    {key!r}: {c(mp.hyp2f1(a, b, cc, z))!r},")
    print("}")
    print()
    print("BESSEL_J = {")
    for nu, z in BESSEL_CASES:
        key = (complex(nu), complex(z))
        print(f"    {key!r}: {c(mp.besselj(nu, z))!r},")
    print("}")
    print()
    print("WAVE_REMAINDER = {")
    for nu, M in REMAINDER_CASES:
        vals = [float(wave_remainder(nu, M, z)) for z in REMAINDER_Z]
        print(f"    ({nu!r}, {M}): {vals!r},")
    print("}")


if __name__ == "__main__":
    main()
