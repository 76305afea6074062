"""Autocorrelation symbols and their spectral factorization.

The symbol of order n is the 2*pi-periodization of |B_hat_n|^2,

    P_n(omega) = sum_{|j| <= n} B_{2n+1}(n+1+j) e^{i j omega},

a strictly positive cosine polynomial with rational coefficients (integer
samples of the B-spline of order 2n+1).  Clearing denominators turns it into a
palindromic polynomial Q(z) = sum_j B_{2n+1}(j+1) z^j whose 2n roots are real,
negative and come in reciprocal pairs.  The substitution u = z + 1/z halves
the degree while preserving the pairing structurally; the quantities derived
from the n roots inside the unit disk drive everything downstream:

    rho_j = r_j + 1/r_j,   alpha_j = (rho_j + 2)/4,   beta_n = prod(1 + r_j),

plus the cosine coefficients lambda_j of the factor prod(rho_j - 2 cos t).

``alpha_j`` here inverts r_j = (2a - 1) - 2 sqrt(a(a-1)), which is how the
per-root quadratic 1 + r^2 + 2 r cos(w) is usually parametrized; beta_n then
equals both prod(1+r_j) and 2**n sqrt(prod alpha_j r_j), and the tests hold
the two forms against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm, sqrt

import numpy as np

from .bsplines import bspline_sample
from .errors import InvalidParams, OrderTooLarge, RootFindingFailed

__all__ = [
    "TrigPolynomial",
    "SplineOrderTables",
    "symbol",
    "order_tables",
    "modulus_sq_script_A",
    "scaling_mask",
    "wavelet_mask",
    "geom_factor",
    "bspline_fourier",
]

MAX_ORDER = 12


class TrigPolynomial:
    """A real cosine polynomial c0 + sum_{j>=1} c_j cos(j w)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = tuple(coeffs)
        if not self.coeffs:
            raise InvalidParams("need at least the constant coefficient")

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        out = np.full_like(w, float(self.coeffs[0]))
        for j, c in enumerate(self.coeffs[1:], start=1):
            out = out + float(c) * np.cos(j * w)
        return float(out) if out.ndim == 0 else out

    def min_on_grid(self, points: int = 4096) -> float:
        grid = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
        return float(np.min(self(grid)))

    def __repr__(self):
        return f"TrigPolynomial({list(self.coeffs)!r})"


@dataclass(frozen=True)
class SplineOrderTables:
    """Per-order constants of the spectral factorization.

    roots are sorted descending, all in (0, 1); rho_j = r_j + 1/r_j > 2;
    alpha_j = (rho_j + 2)/4 > 1; beta = prod(1 + r_j); lambdas are the n+1
    cosine coefficients with lambda[n] = 2.
    """

    order: int
    roots: tuple
    rho: tuple
    alpha: tuple
    beta: float
    lambdas: tuple

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "roots": list(self.roots),
            "rho": list(self.rho),
            "alpha": list(self.alpha),
            "beta": self.beta,
            "lambda": list(self.lambdas),
        }


def symbol(n: int) -> TrigPolynomial:
    """The autocorrelation symbol P_n, exact rational cosine coefficients."""
    if n < 0:
        raise InvalidParams("order must be >= 0")
    c0 = bspline_sample(2 * n + 1, n + 1)
    rest = [2 * bspline_sample(2 * n + 1, n + 1 + j) for j in range(1, n + 1)]
    return TrigPolynomial([c0, *rest])


def _symbol_poly_coefficients(n: int) -> list:
    """Integer coefficients of Q(z) = sum_{j=0..2n} B_{2n+1}(j+1) z^j."""
    fracs = [bspline_sample(2 * n + 1, j + 1) for j in range(2 * n + 1)]
    den = lcm(*(f.denominator for f in fracs))
    return [int(f * den) for f in fracs]


def _halved_polynomial(q: list, n: int) -> list:
    """Coefficients (ascending, exact ints/Fractions) of P(u) with u = z + 1/z."""
    # z^-n Q(z) = q[n] + sum_k q[n+k] (z^k + z^-k); z^k + z^-k = S_k(u)
    out = [Fraction(0)] * (n + 1)
    out[0] = Fraction(q[n])
    s_prev = [Fraction(2)]          # S_0
    s_cur = [Fraction(0), Fraction(1)]  # S_1 = u
    for k in range(1, n + 1):
        for i, c in enumerate(s_cur):
            out[i] += q[n + k] * c
        if k < n:
            nxt = [Fraction(0)] * (len(s_cur) + 1)
            for i, c in enumerate(s_cur):  # u * S_k
                nxt[i + 1] += c
            for i, c in enumerate(s_prev):  # - S_{k-1}
                nxt[i] -= c
            s_prev, s_cur = s_cur, nxt
    return out


def order_tables(n: int) -> SplineOrderTables:
    """Roots and constants for order n (1 <= n <= 12)."""
    if n < 1:
        raise InvalidParams("order_tables requires n >= 1")
    if n > MAX_ORDER:
        raise OrderTooLarge(
            f"order {n} exceeds the supported maximum {MAX_ORDER}: "
            "double-precision root separation degrades beyond it")
    q = _symbol_poly_coefficients(n)
    pu = _halved_polynomial(q, n)
    scale = max(abs(c) for c in pu)
    pf = [float(c / scale) for c in pu]
    raw = np.polynomial.polynomial.polyroots(pf)

    # Newton polish against the exact coefficients (evaluated in float)
    pexact = [float(c) for c in pu]
    dexact = [j * pexact[j] for j in range(1, len(pexact))]

    def horner(cs, x):
        v = 0.0
        for c in reversed(cs):
            v = v * x + c
        return v

    us = []
    for u in raw:
        if abs(np.imag(u)) > 1e-9:
            raise RootFindingFailed(f"complex symbol root {u!r} at order {n}")
        x = float(np.real(u))
        for _ in range(4):
            d = horner(dexact, x)
            if d == 0.0:
                break
            x -= horner(pexact, x) / d
        us.append(x)
    rho = sorted((-u for u in us), reverse=False)
    if any(p <= 2.0 for p in rho):
        raise RootFindingFailed(
            f"symbol root with rho <= 2 at order {n}: {rho!r}")
    roots = [(p - sqrt(p * p - 4.0)) / 2.0 for p in rho]  # descending in r
    if any(not (0.0 < r < 1.0) for r in roots):
        raise RootFindingFailed(f"root outside (0,1) at order {n}: {roots!r}")
    rho_sorted = tuple(rho)
    alpha = tuple((p + 2.0) / 4.0 for p in rho_sorted)
    beta = 1.0
    for r in roots:
        beta *= 1.0 + r

    lambdas = _cosine_product(rho_sorted)
    return SplineOrderTables(order=n, roots=tuple(roots), rho=rho_sorted,
                             alpha=alpha, beta=beta, lambdas=lambdas)


def _cosine_product(rho) -> tuple:
    """lambda_j with prod_j (rho_j - 2 cos t) = sum_j (-1)^j lambda_j cos(j t)."""
    a = [1.0]
    for p in rho:
        b = [0.0] * (len(a) + 1)
        for k, c in enumerate(a):
            b[k] += p * c
            # -2 cos(kt) cos t = -(cos((k+1)t) + cos(|k-1|t))
            b[k + 1] -= c
            b[abs(k - 1)] -= c
        a = b
    return tuple((-1.0) ** j * c for j, c in enumerate(a))


def bspline_fourier(n: int, omega):
    """B_hat_n(omega) = (e^{-i w/2} sin(w/2)/(w/2))**(n+1), normalized to 1 at 0."""
    w = np.asarray(omega, dtype=float)
    val = (np.exp(-0.5j * w) * np.sinc(w / (2.0 * np.pi))) ** (n + 1)
    return complex(val) if val.ndim == 0 else val


def geom_factor(tables: SplineOrderTables, omega, conjugate: bool = False):
    """A_n(omega) = prod_j (1 + r_j e^{i omega}) (or its conjugate)."""
    w = np.asarray(omega, dtype=float)
    z = np.exp(-1j * w) if conjugate else np.exp(1j * w)
    out = np.ones_like(w, dtype=complex)
    for r in tables.roots:
        out = out * (1.0 + r * z)
    return complex(out) if out.ndim == 0 else out


def modulus_sq_script_A(tables: SplineOrderTables) -> TrigPolynomial:
    """|A-script_n(+-t)|^2 as a cosine polynomial in t.

    Equals [prod r_j] * sum_j (-1)^j lambda_j cos(j t); the lambda_j live on
    ``tables.lambdas``.
    """
    prod_r = float(np.prod(tables.roots))
    return TrigPolynomial([prod_r * ((-1.0) ** j) * lam
                           for j, lam in enumerate(tables.lambdas)])


def scaling_mask(tables: SplineOrderTables, k: int, omega):
    """m_{n,k}(w) = e^{-i(n+1)w/2} cos^{n+1}(w/2) A_n(w)/A_n(2w) e^{-iwk}."""
    n = tables.order
    w = np.asarray(omega, dtype=float)
    val = (np.exp(-0.5j * (n + 1) * w) * np.cos(0.5 * w) ** (n + 1)
           * geom_factor(tables, w) / geom_factor(tables, 2.0 * w)
           * np.exp(-1j * w * k))
    return complex(val) if val.ndim == 0 else val


def wavelet_mask(tables: SplineOrderTables, k: int, s: int, omega):
    """M_{n,k,s}(w) = e^{-iw} conj(m_{n,k}(w + pi)) e^{-2iws}."""
    w = np.asarray(omega, dtype=float)
    val = (np.exp(-1j * w) * np.conj(scaling_mask(tables, k, w + np.pi))
           * np.exp(-2j * w * s))
    return complex(val) if val.ndim == 0 else val
