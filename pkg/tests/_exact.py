"""Independent exact oracles used by several test modules.

Everything here is deliberately written *without* the package's
piecewise-polynomial machinery: B-spline values come from the Cox-de Boor
recursion over exact rationals, integrals from midpoint-free closed forms.
Agreement between these and the library is what the tests assert.
"""

from fractions import Fraction


def bspline_value(n: int, x: Fraction) -> Fraction:
    """Cardinal B-spline B_n(x) by the two-term recursion, exact rationals."""
    x = Fraction(x)
    if x < 0 or x >= n + 1:
        return Fraction(0)
    if n == 0:
        return Fraction(1)  # indicator of [0, 1); range was checked above
    return (x * bspline_value(n - 1, x)
            + (Fraction(n + 1) - x) * bspline_value(n - 1, x - 1)) / n


def bspline_integer_samples(n: int) -> list:
    """[B_n(0), B_n(1), ..., B_n(n+1)] as exact rationals."""
    return [bspline_value(n, Fraction(k)) for k in range(n + 2)]


def gauss_legendre_fraction_free(f, a: float, b: float, nodes=24) -> float:
    """Plain Gauss-Legendre on [a, b]; used when an integrand is smooth there."""
    import numpy as np

    x, w = np.polynomial.legendre.leggauss(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.sum(w * [f(mid + half * t) for t in x]))
