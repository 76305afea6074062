"""Piecewise-polynomial kernel: B-splines, their calculus, and exact pairings.

Conventions.  A :class:`PiecewisePolynomial` lives on a contiguous chain of
half-open intervals ``[b_i, b_{i+1})`` between strictly increasing breakpoints.
On each interval the function is a polynomial written in the *local* monomial
basis centered at the left knot, ``p_i(x) = sum_j c[i][j] * (x - b_i)**j``.
Evaluation outside ``[b_0, b_last]`` is exactly zero.

Coefficients may be exact (``int``/``fractions.Fraction``) or floats; the
arithmetic here is generic, so objects built from exact inputs (the cardinal
B-splines in particular) stay exact through derivatives, products, affine
argument changes and integrals.  All knots produced by this library are dyadic
rationals, which binary floats represent exactly -- supports therefore compare
exactly, with no tolerance.

Fourier-side helpers drop the (2*pi)**-0.5 prefactor throughout, so the
B-spline transform is normalized to ``B_hat_n(0) = 1``.  Every identity the
package computes is a ratio or a relative normalization, so the constant never
matters; keeping it out makes the periodization of ``|B_hat_n|**2`` sum to 1
at omega = 0.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import InvalidParams

__all__ = [
    "PiecewisePolynomial",
    "bspline",
    "bspline_sample",
    "evaluate",
    "derivative",
    "affine_arg",
    "multiply",
    "integrate",
    "inner_product",
    "fourier_magnitude",
]


def _taylor_shift(coeffs: list, delta):
    """Coefficients of p(t + delta) given those of p(t), by Horner/Ruffini.

    Exact for exact inputs; numerically this is the standard stable way to
    re-center a polynomial.
    """
    out = list(coeffs)
    n = len(out)
    if delta == 0:
        return out
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + delta * out[j + 1]
    return out


def _poly_mul(a: Sequence, b: Sequence) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj == 0:
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


def _trim_zeros(coeffs: Sequence) -> tuple:
    """Drop trailing (high-order) coefficients that are exactly zero."""
    k = len(coeffs)
    while k > 0 and coeffs[k - 1] == 0:
        k -= 1
    return tuple(coeffs[:k])


class PiecewisePolynomial:
    """A compactly supported piecewise polynomial on half-open knot cells."""

    __slots__ = ("breakpoints", "pieces", "_fp")

    def __init__(self, breakpoints, pieces):
        bp = tuple(float(b) for b in breakpoints)
        if len(bp) < 2:
            raise InvalidParams("need at least two breakpoints")
        if any(bp[i] >= bp[i + 1] for i in range(len(bp) - 1)):
            raise InvalidParams("breakpoints must be strictly increasing")
        if len(pieces) != len(bp) - 1:
            raise InvalidParams("pieces count must be breakpoints count - 1")
        self.breakpoints = bp
        self.pieces = tuple(_trim_zeros(p) for p in pieces)
        self._fp = None  # lazy float view for vectorized evaluation

    # ------------------------------------------------------------------ basic

    @property
    def degree(self) -> int:
        return max((len(p) - 1 for p in self.pieces if p), default=0)

    @property
    def support(self) -> tuple:
        return (self.breakpoints[0], self.breakpoints[-1])

    def is_zero(self) -> bool:
        return all(not p for p in self.pieces)

    def _float_view(self):
        if self._fp is None:
            deg = self.degree
            mat = np.zeros((len(self.pieces), deg + 1))
            for i, p in enumerate(self.pieces):
                for j, c in enumerate(p):
                    mat[i, j] = float(c)
            self._fp = (np.asarray(self.breakpoints), mat)
        return self._fp

    def __call__(self, x):
        bp, mat = self._float_view()
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        idx = np.searchsorted(bp, arr, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.pieces)) & (arr >= bp[0]) & (arr < bp[-1])
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        t = arr - bp[idx]
        out = np.zeros_like(arr)
        for j in range(mat.shape[1] - 1, -1, -1):
            out = out * t + mat[idx, j]
        out = np.where(inside, out, 0.0)
        return float(out[0]) if scalar else out

    # -------------------------------------------------------------- calculus

    def derivative(self, k: int = 1) -> "PiecewisePolynomial":
        if k < 0:
            raise InvalidParams("derivative order must be >= 0")
        pieces = [list(p) for p in self.pieces]
        for _ in range(k):
            nxt = []
            for p in pieces:
                nxt.append([j * p[j] for j in range(1, len(p))])
            pieces = nxt
        return PiecewisePolynomial(self.breakpoints, [tuple(p) for p in pieces])

    def antiderivative(self) -> "PiecewisePolynomial":
        """Continuous antiderivative vanishing at the left end of the support."""
        pieces = []
        acc = 0
        for i, p in enumerate(self.pieces):
            coeffs = [acc] + [c / (j + 1) if isinstance(c, float) else Fraction(c, j + 1)
                              for j, c in enumerate(p)]
            # evaluate at the right end of the cell to carry the constant
            h = self._exact_knot(i + 1) - self._exact_knot(i)
            val = 0
            for c in reversed(coeffs):
                val = val * h + c
            acc = val
            pieces.append(tuple(coeffs))
        return PiecewisePolynomial(self.breakpoints, pieces)

    def _exact_knot(self, i: int):
        # floats -> exact rationals (float conversion is exact)
        return Fraction(self.breakpoints[i])

    def _is_exact(self) -> bool:
        return all(not isinstance(c, float) for p in self.pieces for c in p)

    def _knot_delta(self, i: int, j: int):
        """b_i - b_j, exact when the object carries exact coefficients."""
        if self._is_exact():
            return self._exact_knot(i) - self._exact_knot(j)
        return self.breakpoints[i] - self.breakpoints[j]

    def integrate(self, a=None, b=None):
        """Integral of self over [a, b] (default: the whole support)."""
        lo, hi = self.support
        a = lo if a is None else max(float(a), lo)
        b = hi if b is None else min(float(b), hi)
        if b <= a:
            return 0
        exact = self._is_exact()
        total = 0
        for i, p in enumerate(self.pieces):
            if not p:
                continue
            cl, cr = self.breakpoints[i], self.breakpoints[i + 1]
            s, e = max(a, cl), min(b, cr)
            if e <= s:
                continue
            if exact:
                t0, t1 = Fraction(s) - self._exact_knot(i), Fraction(e) - self._exact_knot(i)
                anti = [Fraction(c, j + 1) if not isinstance(c, Fraction) else c / (j + 1)
                        for j, c in enumerate(p)]
            else:
                t0, t1 = s - cl, e - cl
                anti = [c / (j + 1) for j, c in enumerate(p)]
            v1 = v0 = 0
            for c in reversed(anti):
                v1 = v1 * t1 + c
                v0 = v0 * t0 + c
            total = total + (v1 * t1 - v0 * t0)
        return total

    def moment(self, k: int):
        """Exact k-th moment  integral of x**k * f(x) dx."""
        if k < 0:
            raise InvalidParams("moment order must be >= 0")
        exact = self._is_exact()
        total = 0
        for i, p in enumerate(self.pieces):
            if not p:
                continue
            b = self._exact_knot(i) if exact else self.breakpoints[i]
            h = self._knot_delta(i + 1, i)
            # integral over the cell of (t + b)**k * p(t) dt, t in [0, h]
            for j, c in enumerate(p):
                if c == 0:
                    continue
                for m in range(k + 1):
                    term = c * comb(k, m) * b ** (k - m)
                    total = total + term * h ** (j + m + 1) / (j + m + 1)
        return total

    # ------------------------------------------------------------- algebra

    def __neg__(self):
        return PiecewisePolynomial(self.breakpoints,
                                   [tuple(-c for c in p) for p in self.pieces])

    def scale(self, c) -> "PiecewisePolynomial":
        """Pointwise scalar multiple c * f."""
        return PiecewisePolynomial(self.breakpoints,
                                   [tuple(c * x for x in p) for p in self.pieces])

    __rmul__ = scale

    def __mul__(self, other):
        if isinstance(other, PiecewisePolynomial):
            return self.multiply(other)
        return self.scale(other)

    def _piece_on(self, left_knot: float, left_exact):
        """Local coefficients on the cell starting at ``left_knot``.

        Returns the polynomial re-centered at ``left_knot``, or None when the
        point is outside the support.
        """
        if left_knot < self.breakpoints[0] or left_knot >= self.breakpoints[-1]:
            return None
        i = bisect_right(self.breakpoints, left_knot) - 1
        p = self.pieces[i]
        if not p:
            return ()
        if self._is_exact():
            delta = left_exact - self._exact_knot(i)
        else:
            delta = left_knot - self.breakpoints[i]
        return _taylor_shift(list(p), delta)

    @staticmethod
    def _merged_grid(f: "PiecewisePolynomial", g: "PiecewisePolynomial",
                     intersect: bool) -> list:
        if intersect:
            lo = max(f.breakpoints[0], g.breakpoints[0])
            hi = min(f.breakpoints[-1], g.breakpoints[-1])
            if hi <= lo:
                return []
            pts = {lo, hi}
            pts.update(b for b in f.breakpoints if lo < b < hi)
            pts.update(b for b in g.breakpoints if lo < b < hi)
        else:
            pts = set(f.breakpoints) | set(g.breakpoints)
        return sorted(pts)

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        grid = self._merged_grid(self, other, intersect=False)
        pieces = []
        for i in range(len(grid) - 1):
            left = grid[i]
            left_exact = Fraction(left)
            pa = self._piece_on(left, left_exact)
            pb = other._piece_on(left, left_exact)
            if pa is None and pb is None:
                pieces.append(())
            elif pa is None:
                pieces.append(tuple(pb))
            elif pb is None:
                pieces.append(tuple(pa))
            else:
                n = max(len(pa), len(pb))
                pieces.append(tuple((pa[j] if j < len(pa) else 0)
                                    + (pb[j] if j < len(pb) else 0) for j in range(n)))
        return PiecewisePolynomial(grid, pieces)

    def __sub__(self, other):
        return self + (-other)

    def multiply(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        """Pointwise product, on the merged knot refinement of the overlap."""
        grid = self._merged_grid(self, other, intersect=True)
        if not grid:
            # disjoint supports: a zero stub on a degenerate-free interval
            lo = min(self.breakpoints[0], other.breakpoints[0])
            return PiecewisePolynomial((lo, lo + 1.0), ((),))
        pieces = []
        for i in range(len(grid) - 1):
            left = grid[i]
            left_exact = Fraction(left)
            pa = self._piece_on(left, left_exact)
            pb = other._piece_on(left, left_exact)
            if not pa or not pb:
                pieces.append(())
            else:
                pieces.append(tuple(_poly_mul(pa, pb)))
        return PiecewisePolynomial(grid, pieces)

    def inner_product(self, other: "PiecewisePolynomial"):
        return self.multiply(other).integrate()

    def affine_arg(self, scale, shift) -> "PiecewisePolynomial":
        """g(x) = f(scale * x - shift); knots map to (b + shift)/scale."""
        if scale == 0:
            raise InvalidParams("scale must be nonzero")
        exact = self._is_exact()
        s = Fraction(float(scale)) if exact else float(scale)
        sh = Fraction(float(shift)) if exact else float(shift)
        new_bp = [(Fraction(b) + sh) / s if exact else (b + sh) / scale
                  for b in self.breakpoints]
        if scale > 0:
            pieces = []
            for p in self.pieces:
                pieces.append(tuple(c * s ** j for j, c in enumerate(p)))
            return PiecewisePolynomial([float(b) for b in new_bp], pieces)
        # negative scale: reverse the cells and re-center at what becomes the left
        new_bp = new_bp[::-1]
        pieces = []
        for i in range(len(new_bp) - 1):
            src = len(self.pieces) - 1 - i
            p = self.pieces[src]
            # on the reversed cell, x - new_left relates to the original local
            # coordinate by t_orig = scale*(x - new_left) + (b_{src+1} - b_src)
            h = self._knot_delta(src + 1, src)
            shifted = _taylor_shift(list(p), h)
            pieces.append(tuple(c * s ** j for j, c in enumerate(shifted)))
        return PiecewisePolynomial([float(b) for b in new_bp], pieces)

    def translate(self, a) -> "PiecewisePolynomial":
        """f(x - a)."""
        return self.affine_arg(1, a)

    # ---------------------------------------------------------- diagnostics

    def sup_norm(self) -> float:
        """Exact-ish sup of |f|: per-piece critical points via derivative roots."""
        best = 0.0
        bp, mat = self._float_view()
        for i, p in enumerate(self.pieces):
            if not p:
                continue
            c = [float(x) for x in p]
            h = bp[i + 1] - bp[i]
            cand = [0.0, h]
            if len(c) > 1:
                dcoef = [j * c[j] for j in range(1, len(c))]
                roots = np.roots(dcoef[::-1]) if len(dcoef) > 1 else \
                    ([-dcoef[0] / dcoef[1]] if len(dcoef) == 2 else [])
                if len(dcoef) == 1:
                    roots = []
                for r in np.atleast_1d(roots):
                    if abs(np.imag(r)) < 1e-12 and -1e-12 < np.real(r) < h + 1e-12:
                        cand.append(float(np.real(r)))
            for t in cand:
                v = 0.0
                for cj in reversed(c):
                    v = v * t + cj
                best = max(best, abs(v))
        return best

    def continuity_defect(self, k: int) -> float:
        """Max absolute jump of the k-th derivative across interior knots."""
        d = self.derivative(k)
        worst = 0.0
        for i in range(1, len(d.breakpoints) - 1):
            right = float(d.pieces[i][0]) if d.pieces[i] else 0.0
            # left limit: evaluate piece i-1 at its cell width
            p = d.pieces[i - 1]
            h = d.breakpoints[i] - d.breakpoints[i - 1]
            v = 0.0
            for c in reversed(p):
                v = v * h + float(c)
            worst = max(worst, abs(right - v))
        return worst

    def to_json_dict(self) -> dict:
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "pieces": [[float(c) for c in p] for p in self.pieces],
            "degree": self.degree,
        }

    def __repr__(self):
        a, b = self.support
        return (f"PiecewisePolynomial(degree={self.degree}, "
                f"support=[{a:g}, {b:g}], cells={len(self.pieces)})")


# ---------------------------------------------------------------- B-splines


@lru_cache(maxsize=64)
def bspline(n: int) -> PiecewisePolynomial:
    """Cardinal B-spline B_n on integer knots, support [0, n+1], built exactly.

    B_0 is the indicator of [0, 1); each further order is the moving-unit
    average of the previous one, evaluated in closed form through the exact
    antiderivative.  Coefficients are Fractions.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise InvalidParams("B-spline order must be a nonnegative integer")
    f = PiecewisePolynomial((0.0, 1.0), ((Fraction(1),),))
    for _ in range(int(n)):
        f = _convolve_unit(f)
    return f


def _convolve_unit(f: PiecewisePolynomial) -> PiecewisePolynomial:
    """(f * B_0)(x) = F(x) - F(x - 1) with F the antiderivative of f."""
    F = f.antiderivative()
    total = F.pieces[-1]
    # F extended: 0 left of support, constant `mass` right of it
    mass = f.integrate()
    grid = sorted({*f.breakpoints, *(b + 1.0 for b in f.breakpoints)})
    pieces = []
    for i in range(len(grid) - 1):
        left = grid[i]
        le = Fraction(left)
        hi = F._piece_on(left, le)
        if hi is None:
            hi = [mass] if left >= f.breakpoints[-1] else []
        lo = F._piece_on(left - 1.0, le - 1)
        if lo is None:
            lo = [mass] if left - 1.0 >= f.breakpoints[-1] else []
        m = max(len(hi), len(lo))
        pieces.append(tuple((hi[j] if j < len(hi) else 0)
                            - (lo[j] if j < len(lo) else 0) for j in range(m)))
    del total
    return PiecewisePolynomial(grid, pieces)


@lru_cache(maxsize=256)
def bspline_sample(n: int, x_num: int, x_den: int = 1) -> Fraction:
    """Exact rational value B_n(x) at the rational point x = x_num/x_den."""
    f = bspline(n)
    x = Fraction(x_num, x_den)
    if x < 0 or x >= n + 1:
        return Fraction(0)
    i = min(int(x), n)  # cell index on integer knots
    if x < i:  # guard for negative rounding; x >= 0 here
        i -= 1
    t = x - i
    val = Fraction(0)
    for c in reversed(f.pieces[i]):
        val = val * t + c
    return val


# ------------------------------------------------------------- op wrappers


def evaluate(f: PiecewisePolynomial, x):
    """Value of f at x (scalar or array); exactly zero outside the support."""
    return f(x)


def derivative(f: PiecewisePolynomial, k: int = 1) -> PiecewisePolynomial:
    return f.derivative(k)


def affine_arg(f: PiecewisePolynomial, scale, shift) -> PiecewisePolynomial:
    return f.affine_arg(scale, shift)


def multiply(f: PiecewisePolynomial, g: PiecewisePolynomial) -> PiecewisePolynomial:
    return f.multiply(g)


def integrate(f: PiecewisePolynomial, a=None, b=None):
    return f.integrate(a, b)


def inner_product(f: PiecewisePolynomial, g: PiecewisePolynomial):
    return f.inner_product(g)


def fourier_magnitude(n: int, omega) -> float:
    """|B_hat_n(omega)| = |sin(w/2) / (w/2)|**(n+1), with B_hat_n(0) = 1."""
    if n < 0:
        raise InvalidParams("order must be >= 0")
    w = np.asarray(omega, dtype=float)
    out = np.abs(np.sinc(w / (2.0 * np.pi))) ** (n + 1)
    return float(out) if out.ndim == 0 else out
