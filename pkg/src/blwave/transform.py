"""Analysis and synthesis against a wavelet system, with cross-checks.

Four instruments live here, all sharing the exact piecewise-polynomial
calculus from :mod:`blwave.bsplines`:

* :func:`analyze` / :func:`synthesize` -- coefficient trees from exact
  pairings against system members, and the literal or Gram-corrected
  reconstruction.
* :func:`convolution_norm` -- the mollifier-based quasi-norm built from
  blocks ``||phi_d * f||_{L_p(w)}``, as an independent check on the
  sequence-space norms.  Convolutions are computed exactly (piece-pair
  germs), only the final weighted integrals use panel quadrature.
* :func:`certify_atom` / :func:`certify_kernel` -- per-instance
  verification of the atom and kernel inequalities, reporting the minimal
  constant multiple.
* :func:`equivalence_experiment` -- ratio tables comparing the sequence
  norm of analyzed coefficients against the convolution norm over a family
  of test functions.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .bsplines import PiecewisePolynomial, _taylor_shift, bspline
from .errors import (
    GramSingular,
    InvalidParams,
    MomentDeficit,
    NonIntegrable,
    OrderTooSmall,
    QuadratureBudgetExceeded,
)
from .localized import DyadicIndex, SeparableTerm, WaveletSystem, member
from .seqspace import CoefficientTree, norm_b, norm_f
from .weights import SpaceParams, WeightModel

__all__ = [
    "MollifierSpec",
    "default_mollifier",
    "GridSample",
    "SeparableSum",
    "AtomSpec",
    "KernelSpec",
    "CertificationReport",
    "ConvolutionNorm",
    "EquivalenceRow",
    "EquivalenceResult",
    "convolve",
    "analyze",
    "synthesize",
    "round_trip_report",
    "l2_distance",
    "l2_norm",
    "convolution_norm",
    "certify_atom",
    "certify_kernel",
    "equivalence_experiment",
    "orthonormal_system",
    "dilate_family",
    "translate_family",
    "scalar_family",
]

_DEFAULT_DEPTH = 8
_PAIRING_BUDGET = 2_000_000


# ---------------------------------------------------------------------------
# exact convolution of piecewise polynomials


@lru_cache(maxsize=512)
def _beta_factor(i: int, j: int) -> float:
    # integral_0^1 u^i (1-u)^j du = i! j! / (i+j+1)!
    return factorial(i) * factorial(j) / factorial(i + j + 1)


def _germ(p, q):
    """Power-basis coefficients of y -> integral_0^y p(u) q(y-u) du."""
    out = [0.0] * (len(p) + len(q))
    for i, pi in enumerate(p):
        fi = float(pi)
        if fi == 0.0:
            continue
        for j, qj in enumerate(q):
            fj = float(qj)
            if fj == 0.0:
                continue
            out[i + j + 1] += fi * fj * _beta_factor(i, j)
    return out


@lru_cache(maxsize=64)
def _binom_matrix(size: int) -> np.ndarray:
    m = np.zeros((size, size))
    for j in range(size):
        for i in range(j + 1):
            m[i, j] = comb(j, i)
    return m


def _shift_rows(g, deltas: np.ndarray) -> np.ndarray:
    """Taylor-shift the polynomial ``g`` by each delta; one row per delta."""
    length = len(g)
    powers = deltas[:, None] ** np.arange(length)[None, :]
    gv = np.asarray(g, dtype=float)
    cmat = _binom_matrix(length)
    out = np.empty((len(deltas), length))
    for m in range(length):
        v = cmat[m, m:length] * gv[m:length]
        out[:, m] = powers[:, : length - m] @ v
    return out


def _merge_knots(points) -> list:
    pts = sorted(set(float(p) for p in points))
    merged = [pts[0]]
    for p in pts[1:]:
        if p - merged[-1] > 1e-12 * max(1.0, abs(p)):
            merged.append(p)
    return merged


def _reversed_piece(coeffs, width: float) -> list:
    """Coefficients of u -> p(width - u) from those of p."""
    out = _taylor_shift([float(c) for c in coeffs], width)
    return [c if k % 2 == 0 else -c for k, c in enumerate(out)]


def _plateau_poly(p, q, alpha: float) -> list:
    """integral_0^alpha p(u) q(y - u) du as a polynomial in y.

    Valid while the whole narrow cell [0, alpha] sits inside q's window;
    built from the moments of p, so its coefficients stay of the order of
    p's mass no matter how steep p's own coefficients are.
    """
    mu = []
    for k in range(len(q)):
        mu.append(sum(float(pi) * alpha ** (i + k + 1) / (i + k + 1)
                      for i, pi in enumerate(p)))
    out = [0.0] * len(q)
    for j, qj in enumerate(q):
        fj = float(qj)
        if fj == 0.0:
            continue
        for m in range(j + 1):
            out[m] += fj * comb(j, m) * (-1.0) ** (j - m) * mu[j - m]
    return out


def convolve(f: PiecewisePolynomial, g: PiecewisePolynomial
             ) -> PiecewisePolynomial:
    """Exact convolution (f * g)(x) = integral f(t) g(x - t) dt.

    Each pair of cells is handled in three regimes -- ramp-in (the narrow
    cell slides into the wide one), plateau (fully inside), ramp-out -- so
    every polynomial is only ever evaluated within the narrow cell's width.
    That keeps the computation stable at any knot-scale ratio, where the
    classical truncated-power accumulation loses all precision.
    """
    if f.is_zero() or g.is_zero():
        return PiecewisePolynomial((0.0, 1.0), ((),))
    grid = _merge_knots(a + b for a in f.breakpoints for b in g.breakpoints)
    if len(grid) < 2:
        return PiecewisePolynomial((0.0, 1.0), ((),))
    width = max(len(p) for p in f.pieces if p) + max(
        len(p) for p in g.pieces if p)
    acc = np.zeros((len(grid) - 1, width))
    garr = np.asarray(grid)

    def add(poly, lo: float, hi: float, anchor: float, backward: bool):
        # accumulate poly(x - anchor) (or poly(anchor - x)) over [lo, hi)
        k0 = bisect_left(grid, lo - 1e-9)
        k1 = bisect_left(grid, hi - 1e-9)
        if k1 <= k0:
            return
        deltas = (anchor - garr[k0:k1]) if backward else (garr[k0:k1] - anchor)
        rows = _shift_rows(poly, deltas)
        if backward:
            rows[:, 1::2] *= -1.0
        acc[k0:k1, : rows.shape[1]] += rows

    for ia, p_raw in enumerate(f.pieces):
        if not p_raw:
            continue
        fa0, fa1 = f.breakpoints[ia], f.breakpoints[ia + 1]
        for jb, q_raw in enumerate(g.pieces):
            if not q_raw:
                continue
            gb0, gb1 = g.breakpoints[jb], g.breakpoints[jb + 1]
            # orient so that p lives on the narrower cell
            if fa1 - fa0 <= gb1 - gb0:
                p, q = p_raw, q_raw
                alpha, beta = fa1 - fa0, gb1 - gb0
            else:
                p, q = q_raw, p_raw
                alpha, beta = gb1 - gb0, fa1 - fa0
            start = fa0 + gb0
            end = fa1 + gb1
            add(_germ(p, q), start, start + alpha, start, backward=False)
            if beta > alpha:
                add(_plateau_poly(p, q, alpha),
                    start + alpha, start + beta, start, backward=False)
            add(_germ(_reversed_piece(p, alpha), _reversed_piece(q, beta)),
                start + beta, end, end, backward=True)
    pieces = [tuple(row) for row in acc]
    return PiecewisePolynomial(grid, pieces)


# ---------------------------------------------------------------------------
# mollifier family


def _exact_moments(pp: PiecewisePolynomial, upto: int) -> list:
    return [pp.moment(k) for k in range(upto + 1)]


@dataclass(frozen=True)
class MollifierSpec:
    """A dilation-difference mollifier family built from one 1-D generator.

    ``generator`` is the per-axis factor of phi_0 (the level-0 mollifier is
    its tensor power); the level-d family is

        phi_d = 2^{(d-1)N} [phi_0(2^{d-1} x) - 2^{-N} phi_0(2^{d-2} x)].

    ``gamma`` certifies that phi = phi_0 - 2^{-N} phi_0(./2) has vanishing
    moments through total order gamma, which holds exactly when the 1-D
    generator kills moments 1..gamma (the order-0 moment cancels by
    construction).  gamma = -1 means no moment claim at all.
    """

    generator: PiecewisePolynomial
    gamma: int

    def __post_init__(self):
        if self.gamma < -1:
            raise InvalidParams("moment order must be >= -1")
        mom = _exact_moments(self.generator, max(self.gamma, 0))
        if mom[0] == 0:
            raise InvalidParams("generator must have nonzero integral")
        scale = abs(float(mom[0]))
        for k in range(1, self.gamma + 1):
            if abs(float(mom[k])) > 1e-11 * scale:
                raise InvalidParams(
                    f"generator moment {k} is {float(mom[k]):.3e}, "
                    f"too large for the claimed order {self.gamma}")

    def level_terms(self, d: int, dimension: int):
        """((weight, axis profile), ...) for the level-d mollifier."""
        if d < 0:
            raise InvalidParams("mollifier level must be >= 0")
        if d == 0:
            return ((1.0, self.generator),)
        n = dimension
        fine = self.generator.affine_arg(2.0 ** (d - 1), 0.0)
        coarse = self.generator.affine_arg(2.0 ** (d - 2), 0.0)
        return ((2.0 ** ((d - 1) * n), fine), (-(2.0 ** ((d - 2) * n)), coarse))

    def level_profile_1d(self, d: int) -> PiecewisePolynomial:
        """The level-d mollifier collapsed to a single 1-D polynomial."""
        terms = self.level_terms(d, 1)
        out = terms[0][1].scale(terms[0][0])
        for w, prof in terms[1:]:
            out = out + prof.scale(w)
        return out

    def moment_defect(self, dimension: int = 1) -> float:
        """max |integral x^gamma phi| over 1 <= |gamma| <= Gamma (should be ~0)."""
        if self.gamma < 1:
            return 0.0
        worst = 0.0
        mom = _exact_moments(self.generator, self.gamma)
        for total in range(1, self.gamma + 1):
            for combo in itertools.product(range(total + 1),
                                           repeat=dimension):
                if sum(combo) != total:
                    continue
                prod = 1.0
                for c in combo:
                    prod *= float(mom[c])
                worst = max(worst, abs((1.0 - 2.0 ** total) * prod))
        return worst


def _solve_exact(rows, rhs):
    """Gaussian elimination over Fractions for the tiny moment systems."""
    n = len(rhs)
    a = [[Fraction(x) for x in row] + [Fraction(r)]
         for row, r in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                fac = a[r][col]
                a[r] = [x - fac * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def default_mollifier(gamma: int = 5, degree: int = 9) -> MollifierSpec:
    """Centered degree-``degree`` B-spline with a symmetric moment-killing comb.

    The comb weights solve a small exact linear system so that the 1-D
    generator has unit integral and vanishing moments 1..gamma; odd moments
    vanish by symmetry, even ones by construction.  Everything stays in
    rational arithmetic, so the MollifierSpec validation sees exact zeros.
    """
    if gamma < 0:
        raise InvalidParams("moment order must be >= 0")
    if degree < 1 or degree % 2 == 0:
        raise InvalidParams("generator degree must be odd and >= 1")
    half = Fraction(degree + 1, 2)
    base = bspline(degree).affine_arg(1, -half)   # centered, even
    n_even = gamma // 2                           # moments 2, 4, ... to kill
    shifts = list(range(n_even + 1))
    base_mom = _exact_moments(base, 2 * n_even)

    def shifted_moment(order: int, j: int) -> Fraction:
        # integral x^order base(x - j) dx, expanded binomially
        total = Fraction(0)
        for i in range(order + 1):
            total += comb(order, i) * Fraction(j) ** (order - i) * base_mom[i]
        return total

    rows, rhs = [], []
    for r in range(n_even + 1):
        order = 2 * r
        row = []
        for j in shifts:
            m = shifted_moment(order, j) + (shifted_moment(order, -j)
                                            if j else Fraction(0))
            row.append(m)
        rows.append(row)
        rhs.append(Fraction(1) if r == 0 else Fraction(0))
    coeffs = _solve_exact(rows, rhs)

    gen = base.scale(coeffs[0])
    for j, c in zip(shifts[1:], coeffs[1:]):
        gen = gen + base.translate(j).scale(c) + base.translate(-j).scale(c)
    return MollifierSpec(generator=gen, gamma=gamma)


# ---------------------------------------------------------------------------
# inputs: separable sums and grid samples


@dataclass(frozen=True)
class SeparableSum:
    """A finite sum of separable terms; the N-dim analogue of one polynomial."""

    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise InvalidParams("separable sum needs at least one term")
        dims = {t.dimension for t in self.terms}
        if len(dims) != 1:
            raise InvalidParams("mixed dimensions in separable sum")

    @property
    def dimension(self) -> int:
        return self.terms[0].dimension

    def __call__(self, *coords):
        out = self.terms[0](*coords)
        for t in self.terms[1:]:
            out = out + t(*coords)
        return out


@dataclass(frozen=True)
class GridSample:
    """Samples of a function on a 1-D grid, integrated as a linear interpolant.

    The interpolant is a genuine piecewise polynomial, so all downstream
    pairings are exact for *it*; `interpolation_bound` estimates how far it
    can sit from the sampled function (h^2 max|f''|/8, read off second
    differences).
    """

    xs: tuple
    ys: tuple
    max_points: int = 100_000

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        ys = tuple(float(y) for y in self.ys)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise InvalidParams("need matching xs/ys with at least 2 points")
        if any(not math.isfinite(v) for v in xs + ys):
            raise InvalidParams("grid samples must be finite")
        gaps = [b - a for a, b in zip(xs, xs[1:])]
        if min(gaps) <= 0.0:
            raise InvalidParams("grid points must be strictly increasing")
        if len(xs) > self.max_points:
            raise QuadratureBudgetExceeded(
                f"{len(xs)} grid points exceed the budget of {self.max_points}")
        if max(gaps) / min(gaps) > 1e8:
            raise QuadratureBudgetExceeded(
                "grid spacing varies by more than 1e8; refusing to integrate")

    def as_piecewise(self) -> PiecewisePolynomial:
        pieces = []
        for i in range(len(self.xs) - 1):
            h = self.xs[i + 1] - self.xs[i]
            pieces.append((self.ys[i], (self.ys[i + 1] - self.ys[i]) / h))
        return PiecewisePolynomial(self.xs, pieces)

    def interpolation_bound(self) -> float:
        if len(self.xs) < 3:
            return 0.0
        worst = 0.0
        for i in range(1, len(self.xs) - 1):
            h1 = self.xs[i] - self.xs[i - 1]
            h2 = self.xs[i + 1] - self.xs[i]
            dd = abs((self.ys[i + 1] - self.ys[i]) / h2
                     - (self.ys[i] - self.ys[i - 1]) / h1)
            worst = max(worst, dd * max(h1, h2) / 8.0 * 2.0)
        return worst


def _terms_vanish(terms) -> bool:
    return all(t.weight == 0.0 or any(fac.is_zero() for fac in t.factors)
               for t in terms)


def _as_terms(f, dimension: int) -> tuple:
    """Coerce any supported input into a tuple of SeparableTerm."""
    if isinstance(f, GridSample):
        f = f.as_piecewise()
    if isinstance(f, PiecewisePolynomial):
        if dimension != 1:
            raise InvalidParams(
                "bare piecewise polynomials are 1-D; pass separable terms "
                f"for dimension {dimension}")
        return (SeparableTerm((f,)),)
    if isinstance(f, SeparableTerm):
        terms = (f,)
    elif isinstance(f, SeparableSum):
        terms = f.terms
    else:
        try:
            terms = tuple(f)
        except TypeError:
            raise InvalidParams(f"unsupported input type {type(f).__name__}")
        if not all(isinstance(t, SeparableTerm) for t in terms):
            raise InvalidParams("expected a collection of separable terms")
    for t in terms:
        if t.dimension != dimension:
            raise InvalidParams(
                f"term dimension {t.dimension} != system dimension {dimension}")
    return terms


# ---------------------------------------------------------------------------
# analysis


def _axis_generator(system: WaveletSystem, i: int, axis: int):
    return system.psi[axis] if (i >> axis) & 1 else system.phi[axis]


def _tau_range(g_support, f_support, scale: float):
    """Integer shifts tau with supp g(scale . - tau) overlapping f's support."""
    glo, ghi = g_support
    flo, fhi = f_support
    lo = scale * flo - ghi
    hi = scale * fhi - glo
    first = math.floor(lo) + 1
    last = math.ceil(hi) - 1
    return range(first, last + 1)


def _support_box(terms) -> list:
    dims = terms[0].dimension
    return [(min(t.support[axis][0] for t in terms),
             max(t.support[axis][1] for t in terms))
            for axis in range(dims)]


def _pair(terms, mem: SeparableTerm) -> float:
    return sum(t.inner_product(mem) for t in terms)


def analyze(f, system: WaveletSystem, depth: int,
            budget: int = _PAIRING_BUDGET) -> CoefficientTree:
    """Coefficient tree of exact pairings of ``f`` against the system.

    The root layer stores <f, Phi_tau>; the wavelet entry at (i, d, tau)
    stores 2^{dN/2} <f, member(i, d-1, tau)>, i.e. the member one level
    coarser than the tree key, following the expansion the tree feeds into.
    Only translations whose supports meet f's are visited.
    """
    if depth < 0:
        raise InvalidParams("analysis depth must be >= 0")
    n = system.dimension
    terms = _as_terms(f, n)
    if _terms_vanish(terms):
        return CoefficientTree(n, depth)
    box = _support_box(terms)
    entries = {}
    visited = 0
    for tau in itertools.product(*(_tau_range(system.phi[ax].support,
                                              box[ax], 1.0)
                                   for ax in range(n))):
        visited += 1
        if visited > budget:
            raise QuadratureBudgetExceeded(
                f"more than {budget} pairings requested")
        entries[(0, 0, tau)] = _pair(terms, member(system,
                                                   DyadicIndex(0, 0, tau)))
    for d in range(1, depth + 1):
        scale = 2.0 ** (d - 1)
        boost = 2.0 ** (d * n / 2.0)
        for i in range(1, 2 ** n):
            ranges = [_tau_range(_axis_generator(system, i, ax).support,
                                 box[ax], scale) for ax in range(n)]
            for tau in itertools.product(*ranges):
                visited += 1
                if visited > budget:
                    raise QuadratureBudgetExceeded(
                        f"more than {budget} pairings requested")
                mem = member(system, DyadicIndex(i, d - 1, tau))
                entries[(i, d, tau)] = boost * _pair(terms, mem)
    return CoefficientTree(n, depth, entries)


# ---------------------------------------------------------------------------
# synthesis


def _axis_gram(g: PiecewisePolynomial):
    """Memoized h -> <g, g(. - h)>; zero once the supports separate."""
    lo, hi = g.support
    width = hi - lo
    memo: dict = {}

    def gram(h: int) -> float:
        if abs(h) >= width:
            return 0.0
        if h not in memo:
            memo[h] = g.inner_product(g.translate(float(h)))
        return memo[h]

    return gram


def synthesize(tree: CoefficientTree, system: WaveletSystem,
               mode: str = "dual"):
    """Rebuild a function from a coefficient tree.

    ``paper`` mode is the literal expansion
    f = sum lambda_00tau Phi_tau + sum lambda_idtau 2^{-dN/2} member(i,d-1,tau);
    ``dual`` mode first applies the inverse of the per-layer Gram operator,
    so that synthesize(analyze(f)) reproduces f exactly on span elements
    (distinct layers are mutually orthogonal, so layers decouple).

    Returns a plain piecewise polynomial in one dimension, a
    :class:`SeparableSum` otherwise.
    """
    if mode not in ("paper", "dual"):
        raise InvalidParams(f"unknown synthesis mode {mode!r}")
    n = system.dimension
    if tree.dimension != n:
        raise InvalidParams("tree dimension does not match the system")
    layers: dict = {}
    for idx, val in tree.items():
        layers.setdefault((idx.i, idx.d), []).append((idx.tau, val))
    pieces = []
    for (i, d), batch in sorted(layers.items()):
        scale_back = 1.0 if d == 0 else 2.0 ** (-d * n / 2.0)
        taus = [t for t, _ in batch]
        vals = np.array([v * scale_back for _, v in batch])
        if mode == "dual":
            grams = [_axis_gram(_axis_generator(system, i, ax))
                     for ax in range(n)]
            size = len(taus)
            g = np.empty((size, size))
            for a in range(size):
                for b in range(size):
                    prod = 1.0
                    for ax in range(n):
                        prod *= grams[ax](taus[a][ax] - taus[b][ax])
                        if prod == 0.0:
                            break
                    g[a, b] = prod
            try:
                coeffs = np.linalg.solve(g, vals)
            except np.linalg.LinAlgError as exc:
                raise GramSingular(
                    f"layer (i={i}, d={d}) Gram solve failed: {exc}")
            residual = np.abs(g @ coeffs - vals).max()
            if residual > 1e-6 * (1.0 + np.abs(vals).max()):
                raise GramSingular(
                    f"layer (i={i}, d={d}) Gram solve lost accuracy "
                    f"(residual {residual:.2e})")
        else:
            coeffs = vals
        level = max(d - 1, 0)
        for tau, c in zip(taus, coeffs):
            if c != 0.0:
                pieces.append(member(system,
                                     DyadicIndex(i, level, tau)).scale(c))
    if not pieces:
        zero = PiecewisePolynomial((0.0, 1.0), ((),))
        return zero if n == 1 else SeparableSum(
            (SeparableTerm((zero,) * n),))
    if n == 1:
        out = pieces[0].factors[0].scale(pieces[0].weight)
        for t in pieces[1:]:
            out = out + t.factors[0].scale(t.weight)
        return out
    return SeparableSum(tuple(pieces))


def _sum_1d(terms) -> PiecewisePolynomial:
    out = terms[0].factors[0].scale(terms[0].weight)
    for t in terms[1:]:
        out = out + t.factors[0].scale(t.weight)
    return out


def _square_integral_nd(terms) -> float:
    """integral (sum of terms)^2 on a tensor Gauss mesh over the union knots.

    The sum is evaluated pointwise before squaring, so near-cancelling term
    collections (round-trip residuals) lose nothing to summation noise.
    Exact for per-axis degrees <= 7 (Gauss-8 per cell).
    """
    live = [t for t in terms if t.weight != 0.0
            and not any(fac.is_zero() for fac in t.factors)]
    if not live:
        return 0.0
    n = live[0].dimension
    nodes, wts = np.polynomial.legendre.leggauss(8)
    coords, weights = [], []
    for ax in range(n):
        lo = min(t.support[ax][0] for t in live)
        hi = max(t.support[ax][1] for t in live)
        pts = {lo, hi}
        for t in live:
            pts.update(b for b in t.factors[ax].breakpoints if lo < b < hi)
        cells = sorted(pts)
        cs, ws = [], []
        for a, b in zip(cells, cells[1:]):
            mid, rad = 0.5 * (a + b), 0.5 * (b - a)
            cs.append(mid + rad * nodes)
            ws.append(rad * wts)
        coords.append(np.concatenate(cs))
        weights.append(np.concatenate(ws))
    mesh = np.meshgrid(*coords, indexing="ij")
    val = np.zeros(mesh[0].shape)
    for t in live:
        val += t(*mesh)
    integrand = val * val
    for ax_w in reversed(weights):
        integrand = integrand @ ax_w
    return float(integrand)


def l2_norm(f, dimension: int = None) -> float:
    """L2 norm; exact in one dimension, tensor-Gauss mesh otherwise."""
    if dimension is None:
        dimension = getattr(f, "dimension", 1)
    terms = _as_terms(f, dimension)
    if _terms_vanish(terms):
        return 0.0
    if dimension == 1:
        u = _sum_1d(terms)
        return math.sqrt(max(u.inner_product(u), 0.0))
    return math.sqrt(max(_square_integral_nd(terms), 0.0))


def l2_distance(f, g, dimension: int = None) -> float:
    """||f - g||_2; the difference is formed before anything is squared."""
    if dimension is None:
        dimension = getattr(f, "dimension", None) or getattr(
            g, "dimension", 1)
    fa = _as_terms(f, dimension)
    ga = tuple(t.scale(-1.0) for t in _as_terms(g, dimension))
    return l2_norm(fa + ga, dimension)


def round_trip_report(f, system: WaveletSystem, depth: int,
                      mode: str = "dual") -> dict:
    """Analyze, resynthesize, and report the relative L2 residual.

    Paper-mode residuals are measured and reported, never asserted: the
    literal expansion is exact only for orthonormal generators.
    """
    tree = analyze(f, system, depth)
    rebuilt = synthesize(tree, system, mode)
    base = l2_norm(f, system.dimension)
    res = l2_distance(f, rebuilt, system.dimension)
    return {
        "mode": mode,
        "coefficients": len(tree),
        "l2_norm": base,
        "residual": res,
        "relative_residual": res / base if base > 0 else 0.0,
    }


# ---------------------------------------------------------------------------
# weighted block quadrature


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _weight_kinks_1d(w: WeightModel):
    if w.kind == "power":
        return (0.0,)
    if w.kind == "power_exp_hybrid":
        return (-1.0, 0.0, 1.0)
    if w.kind == "tabulated":
        return w.breaks
    return ()


def _panel(fn, a: float, b: float) -> float:
    mid, rad = 0.5 * (a + b), 0.5 * (b - a)
    return rad * float(_GL_WEIGHTS @ fn(mid + rad * _GL_NODES))


def _integrate_weighted_1d(fn, knots, singular: float = None) -> float:
    """Integral of ``fn`` over the knot cells, refining toward a singularity.

    ``fn`` may blow up at ``singular`` (an endpoint of some cell); those
    cells are peeled into geometric rings until the ring contribution is
    negligible.
    """
    total = 0.0
    for a, b in zip(knots, knots[1:]):
        if singular is not None and (a == singular or b == singular):
            flip = b == singular
            lo, hi = (a, b)
            width = hi - lo
            part = 0.0
            for k in range(360):
                w0, w1 = width * 2.0 ** -(k + 1), width * 2.0 ** -k
                if flip:
                    ring = _panel(fn, hi - w1, hi - w0)
                else:
                    ring = _panel(fn, lo + w0, lo + w1)
                part += ring
                if abs(ring) <= 1e-15 * (abs(part) + 1e-300):
                    break
            total += part
        else:
            total += _panel(fn, a, b)
    return total


def _piece_roots(pp: PiecewisePolynomial):
    """Real zero crossings inside the cells (the kinks of |f|^p, odd p)."""
    out = []
    for i, piece in enumerate(pp.pieces):
        c = [float(x) for x in piece]
        if len(c) < 2:
            continue
        h = pp.breakpoints[i + 1] - pp.breakpoints[i]
        for r in np.atleast_1d(np.roots(c[::-1])):
            if abs(np.imag(r)) < 1e-10 and 1e-12 < np.real(r) < h - 1e-12:
                out.append(pp.breakpoints[i] + float(np.real(r)))
    return out


def _block_cells_1d(profiles, w: WeightModel):
    lo = min(p.support[0] for p in profiles)
    hi = max(p.support[1] for p in profiles)
    pts = {lo, hi}
    for p in profiles:
        pts.update(b for b in p.breakpoints if lo < b < hi)
        pts.update(r for r in _piece_roots(p) if lo < r < hi)
    pts.update(k for k in _weight_kinks_1d(w) if lo < k < hi)
    return sorted(pts)


def _weighted_lp_1d(aggregate, profiles, w: WeightModel, p: float) -> float:
    cells = _block_cells_1d(profiles, w)
    singular = None
    if (w.kind in ("power", "power_exp_hybrid")
            and (w.alpha < 0.0 or w.alpha != int(w.alpha))
            and cells[0] <= 0.0 <= cells[-1]):
        singular = 0.0

    def fn(x):
        return aggregate(x) ** p * w(x)

    return _integrate_weighted_1d(fn, cells, singular) ** (1.0 / p)


def _conv_terms(moll: MollifierSpec, f_terms, d: int, n: int):
    """phi_d * f as a list of separable terms with per-axis exact convs."""
    out = []
    for w_m, profile in moll.level_terms(d, n):
        for t in f_terms:
            factors = tuple(convolve(profile, fac) for fac in t.factors)
            out.append(SeparableTerm(factors, w_m * t.weight))
    return out


def _nd_block_norm(terms, w: WeightModel, p: float) -> float:
    n = terms[0].dimension
    axes = []
    for ax in range(n):
        lo = min(t.support[ax][0] for t in terms)
        hi = max(t.support[ax][1] for t in terms)
        pts = {lo, hi}
        for t in terms:
            pts.update(b for b in t.factors[ax].breakpoints if lo < b < hi)
        if lo < 0.0 < hi:
            pts.add(0.0)
        axes.append(sorted(pts))
    nodes, wts = np.polynomial.legendre.leggauss(8)
    coords, weights = [], []
    for cells in axes:
        cs, ws = [], []
        for a, b in zip(cells, cells[1:]):
            mid, rad = 0.5 * (a + b), 0.5 * (b - a)
            cs.append(mid + rad * nodes)
            ws.append(rad * wts)
        coords.append(np.concatenate(cs))
        weights.append(np.concatenate(ws))
    mesh = np.meshgrid(*coords, indexing="ij")
    val = np.zeros(mesh[0].shape)
    for t in terms:
        val += t(*mesh)
    wv = w(np.stack(mesh, axis=-1))
    integrand = np.abs(val) ** p * wv
    for ax_w in reversed(weights):
        integrand = integrand @ ax_w
    return float(integrand) ** (1.0 / p)


@dataclass(frozen=True)
class ConvolutionNorm:
    """Truncated mollifier quasi-norm with its per-level blocks."""

    value: float
    blocks: tuple
    tail_ratio: float
    depth: int
    space: str

    def __float__(self):
        return self.value

    def as_dict(self) -> dict:
        return {"value": self.value, "blocks": list(self.blocks),
                "tail_ratio": self.tail_ratio, "depth": self.depth,
                "space": self.space}


def convolution_norm(f, params: SpaceParams, moll: MollifierSpec = None,
                     depth: int = _DEFAULT_DEPTH) -> ConvolutionNorm:
    """The mollifier-block quasi-norm, truncated at level ``depth``.

    Blocks are ||phi_d * f||_{L_p(w)} for the B-form; the F-form aggregates
    pointwise before the weighted integral.  Convolutions are exact; the
    weighted integrals use Gauss panels with geometric refinement at the
    weight's singularity.  The tail is reported via the ratio of the last
    two scaled blocks, never silently dropped.
    """
    if moll is None:
        moll = default_mollifier()
    s, p, q = params.s, params.p, params.q
    if not 0.0 < p < math.inf:
        raise InvalidParams("p must be finite and positive")
    if q <= 0.0:
        raise InvalidParams("q must be positive")
    if depth < 1:
        raise InvalidParams("depth must be >= 1")
    if moll.gamma < math.floor(s):
        raise MomentDeficit(
            f"mollifier moment order {moll.gamma} < [s] = {math.floor(s)}")
    w = params.weight
    n = w.dimension
    if not w.is_locally_integrable:
        raise NonIntegrable("convolution norms need locally integrable weights")
    if n > 1 and w.kind in ("power", "power_exp_hybrid") and w.alpha < 0.0:
        raise InvalidParams(
            "singular radial weights are supported in dimension 1 only")
    if params.space.upper() == "F" and n != 1:
        raise InvalidParams(
            "the pointwise-aggregated form is implemented in dimension 1")
    terms = _as_terms(f, n)
    if _terms_vanish(terms):
        zeros = (0.0,) * (depth + 1)
        return ConvolutionNorm(0.0, zeros, 0.0, depth, params.space)

    blocks = []
    conv_1d = []
    for d in range(depth + 1):
        conv = _conv_terms(moll, terms, d, n)
        if n == 1:
            u = conv[0].factors[0].scale(conv[0].weight)
            for t in conv[1:]:
                u = u + t.factors[0].scale(t.weight)
            conv_1d.append(u)
            blocks.append(_weighted_lp_1d(lambda x, uu=u: np.abs(uu(x)),
                                          [u], w, p))
        else:
            blocks.append(_nd_block_norm(conv, w, p))

    scaled = [2.0 ** (d * s) * b for d, b in enumerate(blocks)]
    space = params.space.upper()
    if space == "B":
        if q == math.inf:
            value = max(scaled)
        else:
            value = sum(b ** q for b in scaled) ** (1.0 / q)
    elif space == "F":
        def aggregate(x):
            stack = [2.0 ** (d * s) * np.abs(u(x))
                     for d, u in enumerate(conv_1d)]
            if q == math.inf:
                return np.maximum.reduce(stack)
            return sum(a ** q for a in stack) ** (1.0 / q)

        value = _weighted_lp_1d(aggregate, conv_1d, w, p)
    else:
        raise InvalidParams(f"unknown space tag {params.space!r}")
    if len(scaled) >= 2 and scaled[-2] > 0.0:
        tail = scaled[-1] / scaled[-2]
    else:
        tail = 0.0
    return ConvolutionNorm(value, tuple(blocks), tail, depth, space)


# ---------------------------------------------------------------------------
# atom / kernel certification


@dataclass(frozen=True)
class AtomSpec:
    """Parameters of the (s,p)-atom inequalities (d = 0 means 1_K-atoms)."""

    K: int
    L: int
    d_factor: float = 1.0
    s: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.K < 0 or self.L < -1:
            raise InvalidParams("K must be >= 0 and L >= -1")
        if self.d_factor < 1.0:
            raise InvalidParams("support dilation factor must be >= 1")
        if not 0.0 < self.p < math.inf:
            raise InvalidParams("p must be finite and positive")


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of the local-means kernel inequalities."""

    A: int
    B: int
    C: float = 1.0

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise InvalidParams("A and B must be nonnegative integers")
        if self.C <= 0.0:
            raise InvalidParams("support constant must be positive")


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of checking one function against atom or kernel inequalities.

    ``constant`` is the minimal multiple c such that g / c satisfies every
    derivative bound; ``passed`` requires the support and moment conditions
    plus continuity up to one order below each requested derivative, but
    tolerates constant > 1 (the inequalities are scale classes).
    ``bound_satisfied`` is the strict reading at multiple 1.
    """

    kind: str
    support_ok: bool
    min_support_factor: float
    derivative_bounds: dict
    moments: dict
    moments_ok: bool
    constant: float
    passed: bool

    @property
    def bound_satisfied(self) -> bool:
        return self.constant <= 1.0 and self.passed

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "support_ok": bool(self.support_ok),
            "min_support_factor": float(self.min_support_factor),
            "derivative_bounds": {
                "|".join(map(str, k)): {
                    "sup": float(v["sup"]), "bound": float(v["bound"]),
                    "ratio": float(v["ratio"]), "ok": bool(v["ok"])}
                for k, v in sorted(self.derivative_bounds.items())},
            "moments": {"|".join(map(str, k)): float(v)
                        for k, v in sorted(self.moments.items())},
            "moments_ok": bool(self.moments_ok),
            "constant": float(self.constant),
            "passed": bool(self.passed),
            "bound_satisfied": bool(self.bound_satisfied),
        }


def _multi_indices(n: int, max_total: int):
    for combo in itertools.product(range(max_total + 1), repeat=n):
        if sum(combo) <= max_total:
            yield combo


def _edge_magnitudes(pp: PiecewisePolynomial) -> float:
    """Largest one-sided limit |pp| at the ends of its support."""
    filled = [(i, p) for i, p in enumerate(pp.pieces) if p]
    if not filled:
        return 0.0
    first_i, first = filled[0]
    last_i, last = filled[-1]
    left = abs(float(first[0]))
    h = pp.breakpoints[last_i + 1] - pp.breakpoints[last_i]
    v = 0.0
    for c in reversed(last):
        v = v * h + float(c)
    return max(left, abs(v))


def _certify(g, kind: str, d: int, tau, deriv_order: int, deriv_bound,
             moment_order: int, support_factor: float,
             moment_tol: float) -> CertificationReport:
    if isinstance(g, PiecewisePolynomial):
        g = SeparableTerm((g,))
    n = g.dimension
    if d < 0:
        raise InvalidParams("level must be nonnegative")
    if isinstance(tau, (int, np.integer)):
        tau = (int(tau),)
    tau = tuple(int(t) for t in tau)
    if len(tau) != n:
        raise InvalidParams("translation length must match dimension")

    side = 2.0 ** (-d)
    factor_needed = 0.0
    support_ok = True
    for ax in range(n):
        center = tau[ax] * side
        lo, hi = g.support[ax]
        reach = max(abs(lo - center), abs(hi - center))
        factor_needed = max(factor_needed, 2.0 * reach / side)
        if 2.0 * reach > support_factor * side * (1.0 + 1e-12):
            support_ok = False

    bounds = {}
    constant = 0.0
    smooth = True
    for alpha in _multi_indices(n, deriv_order):
        sup = abs(g.weight)
        defect = 0.0
        for ax, order in enumerate(alpha):
            fac = g.factors[ax]
            sup *= fac.derivative(order).sup_norm()
            # The top-order derivative only has to be bounded; continuity
            # is demanded one order below (the Lipschitz reading, which is
            # what a spline of degree ``order`` can actually deliver).  On
            # the whole line that also means the lower derivative vanishes
            # at the edge of the support.
            if order >= 1:
                defect = max(defect, fac.continuity_defect(order - 1),
                             _edge_magnitudes(fac.derivative(order - 1)))
        bound = deriv_bound(sum(alpha))
        ratio = sup / bound
        ok = ratio <= 1.0 + 1e-12 and defect <= 1e-9 * (1.0 + sup)
        if defect > 1e-9 * (1.0 + sup):
            smooth = False
        bounds[alpha] = {"sup": sup, "bound": bound, "ratio": ratio,
                         "ok": ok}
        constant = max(constant, ratio)

    moments = {}
    moments_ok = True
    if d >= 1 and moment_order > 0:
        for beta in _multi_indices(n, moment_order - 1):
            val = g.weight
            for ax, order in enumerate(beta):
                val *= float(g.factors[ax].moment(order))
            moments[beta] = val
            if abs(val) > moment_tol:
                moments_ok = False

    passed = (support_ok and moments_ok and smooth
              and math.isfinite(constant))
    return CertificationReport(
        kind=kind, support_ok=support_ok,
        min_support_factor=factor_needed, derivative_bounds=bounds,
        moments=moments, moments_ok=moments_ok, constant=constant,
        passed=passed)


def certify_atom(g, spec: AtomSpec, d: int, tau,
                 moment_tol: float = 1e-10) -> CertificationReport:
    """Check the atom inequalities for ``g`` at the cube (d, tau).

    At d = 0 the derivative bound degenerates to 1 and no moments are
    required (the 1_K-atom case); for d >= 1 the full (s,p)-atom conditions
    apply with |alpha| <= K, moments of order < L.
    """
    if isinstance(g, PiecewisePolynomial):
        g = SeparableTerm((g,))
    n = g.dimension

    def bound(total_order: int) -> float:
        return 2.0 ** (-d * (spec.s - n / spec.p) + d * total_order)

    return _certify(g, "atom", d, tau, spec.K, bound, max(spec.L, 0),
                    spec.d_factor, moment_tol)


def certify_kernel(g, spec: KernelSpec, d: int, tau,
                   moment_tol: float = 1e-10) -> CertificationReport:
    """Check the local-means kernel inequalities for ``g`` at (d, tau).

    Derivative bound 2^{dN + d|alpha|} for |alpha| <= A; moments of order
    < B vanish (only demanded for d >= 1); support within C times the cube.
    """
    if isinstance(g, PiecewisePolynomial):
        g = SeparableTerm((g,))
    n = g.dimension

    def bound(total_order: int) -> float:
        return 2.0 ** (d * n + d * total_order)

    return _certify(g, "kernel", d, tau, spec.A, bound, spec.B,
                    spec.C, moment_tol)


# ---------------------------------------------------------------------------
# norm-equivalence experiment


def dilate_family(f: PiecewisePolynomial, levels) -> list:
    return [(f"dilate_2^{j}", f.affine_arg(2.0 ** j, 0.0)) for j in levels]


def translate_family(f: PiecewisePolynomial, shifts) -> list:
    return [(f"translate_{a}", f.translate(float(a))) for a in shifts]


def scalar_family(f: PiecewisePolynomial, coefficients) -> list:
    return [(f"scale_{c}", f.scale(float(c))) for c in coefficients]


@dataclass(frozen=True)
class EquivalenceRow:
    label: str
    seq_norm: float
    conv_norm: float

    @property
    def ratio(self) -> float:
        if self.conv_norm == 0.0:
            return math.inf if self.seq_norm > 0.0 else 1.0
        return self.seq_norm / self.conv_norm

    def as_dict(self) -> dict:
        return {"id": self.label, "seq_norm": self.seq_norm,
                "conv_norm": self.conv_norm, "ratio": self.ratio}


@dataclass(frozen=True)
class EquivalenceResult:
    rows: tuple
    min_order: int

    @property
    def max_ratio(self) -> float:
        return max(r.ratio for r in self.rows)

    @property
    def min_ratio(self) -> float:
        return min(r.ratio for r in self.rows)

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio

    def as_dict(self) -> dict:
        return {"rows": [r.as_dict() for r in self.rows],
                "min_order": self.min_order,
                "max_ratio": self.max_ratio,
                "min_ratio": self.min_ratio,
                "spread": self.spread}


def equivalence_experiment(test_family, params: SpaceParams,
                           system: WaveletSystem,
                           moll: MollifierSpec = None,
                           depth: int = _DEFAULT_DEPTH) -> EquivalenceResult:
    """Sequence norm of analyzed coefficients vs convolution norm, per probe.

    Refuses to run (OrderTooSmall) when the system's minimal spline order
    violates the order rule for the requested space: below that order the
    two sides are not expected to be comparable at all.
    """
    needed = params.min_order
    if system.n0 < needed:
        raise OrderTooSmall(
            f"system order {system.n0} < required order {needed} for "
            f"s={params.s}, p={params.p}, q={params.q}, r0={params.r0}")
    if moll is None:
        moll = default_mollifier(max(5, math.floor(params.s) + 1))
    if isinstance(test_family, dict):
        family = list(test_family.items())
    else:
        family = list(test_family)
    if not family:
        raise InvalidParams("empty test family")
    seq_norm = norm_b if params.space.upper() == "B" else norm_f
    rows = []
    for label, func in family:
        tree = analyze(func, system, depth)
        sn = seq_norm(tree, params)
        cn = convolution_norm(func, params, moll, depth).value
        rows.append(EquivalenceRow(str(label), sn, cn))
    return EquivalenceResult(tuple(rows), needed)


# ---------------------------------------------------------------------------
# orthonormal surrogate system


def orthonormal_system(n: int, tol: float = 1e-8) -> WaveletSystem:
    """A 1-D system whose generators are the truncated orthonormal pair.

    Substituting these for the localized generators makes analyze/synthesize
    an (approximate) orthonormal transform: round trips and Parseval sums
    then hold within a small multiple of the truncation tolerance.
    """
    from .localized import AxisSpec, localization_coefficients
    from .orthonormal import scaling_phi, wavelet_psi
    from .symbol import order_tables

    tables = order_tables(n)
    phi = scaling_phi(tables, 0, tol)
    psi = wavelet_psi(tables, 0, 0, tol)
    co = localization_coefficients(tables, order_tables(1), 0)
    return WaveletSystem(dimension=1, axes=(AxisSpec(n=n),),
                         phi=(phi.base,), psi=(psi.base,),
                         coefficients=(co,))
