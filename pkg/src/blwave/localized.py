"""Compactly supported generators, localization coefficients, and tensor systems.

Multiplying the orthonormal generators' Fourier transforms by the finite
products prod(1 + r_j e^{-iw}) * prod(1 - r_j^2 e^{iw}) clears every
geometric denominator, leaving splines with exact knot supports:

    Phi_{n,k}   = beta_n B_n(. - k),                    supp [k, k+n+1]
    Psi_{n,m(kk);k,s}                                   supp [s - n/2 - m*kk,
                                                              s + 3n/2 + m*kk + 1]

Two lattice placements of Psi are in play.  The exposed
:func:`localized_psi` carries the support above ("vazhno" placement).  The
system members used for analysis/synthesis sit n/2 further right ("aligned"
placement, an integer shift only when n is even) because that placement --
and only that one -- keeps W_0 orthogonal to V_0 for odd n, which the
per-level Gram machinery relies on.  The two differ by translation, so
localization coefficients, Gram sums, norms, and Riesz bounds agree between
them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bsplines import PiecewisePolynomial, bspline
from .errors import DegenerateFrame, InvalidParams
from .orthonormal import (
    comb_convolve,
    gamma_constant,
    lambda_binomial_comb,
    spline_comb,
)
from .symbol import SplineOrderTables, order_tables

__all__ = [
    "LocalizationCoefficients",
    "AxisSpec",
    "WaveletSystem",
    "DyadicIndex",
    "SeparableTerm",
    "localized_phi",
    "localized_psi",
    "localization_coefficients",
    "riesz_bounds",
    "tensor_system",
    "member",
    "gram_sum",
]

RIESZ_GRID = 4096
DEGENERACY_FLOOR = 1e-12


# --------------------------------------------------------------------------
# localization coefficients


@dataclass(frozen=True)
class LocalizationCoefficients:
    """Finite shift-combination coefficients clearing the geometric factors.

    alpha_prime[kappa] multiplies phi(. + kappa) to rebuild Phi;
    alpha_dblprime[kappa] multiplies psi(. - kappa) to rebuild the aligned
    Psi.  The sums reproduce the normalizers Lambda' and Lambda''.
    """

    alpha_prime: tuple
    alpha_dblprime: dict
    Lambda_prime: float
    Lambda_dblprime: float

    def as_dict(self) -> dict:
        return {
            "alpha_prime": list(self.alpha_prime),
            "alpha_dblprime": {str(k): v
                               for k, v in sorted(self.alpha_dblprime.items())},
            "Lambda_prime": self.Lambda_prime,
            "Lambda_dblprime": self.Lambda_dblprime,
        }


def _require_m_tables(tables_m, kk: int):
    if kk not in (0, 1):
        raise InvalidParams(f"the localization exponent must be 0 or 1, got {kk}")
    if kk == 1 and tables_m is None:
        raise InvalidParams("kk=1 requires the order-m root tables")


def _script_A_sq_comb(tables_m: SplineOrderTables, step: int) -> dict:
    """|script-A_m|^2 as a coefficient comb with the given offset stride.

    Expands prod_t (1 - r_t^2 e^{iw})(1 - r_t^2 e^{-iw}); ``step`` is the
    offset unit of e^{-iw} (+1 for shift-indexed combs, -2 for the w-lattice
    of B_n(2(x-s)+w)).
    """
    comb = {0: 1.0}
    for r in tables_m.roots:
        rho = r * r
        comb = comb_convolve(comb, {0: 1.0, -step: -rho})
        comb = comb_convolve(comb, {0: 1.0, step: -rho})
    return comb


def localization_coefficients(tables_n: SplineOrderTables,
                              tables_m: Optional[SplineOrderTables] = None,
                              kk: int = 0) -> LocalizationCoefficients:
    """Expand the finite Fourier products into shift coefficients."""
    _require_m_tables(tables_m, kk)
    roots = tables_n.roots
    # alpha'_kappa = e_kappa(r), from prod(1 + r_j z)
    elem = [1.0]
    for r in roots:
        elem = [e + r * (elem[i - 1] if i else 0.0)
                for i, e in enumerate(elem + [0.0])]
    lam_p = float(np.prod([1.0 + r for r in roots]))

    # alpha''_kappa: coefficient of e^{-i w kappa} in
    # prod(1 + r e^{-iw}) prod(1 - r^2 e^{iw}) [ |script-A_m|^2 ]^kk
    dbl = {0: 1.0}
    for r in roots:
        dbl = comb_convolve(dbl, {0: 1.0, 1: r})
        dbl = comb_convolve(dbl, {0: 1.0, -1: -r * r})
    lam_pp = float(np.prod([(1.0 + r) * (1.0 - r * r) for r in roots]))
    if kk == 1:
        dbl = comb_convolve(dbl, _script_A_sq_comb(tables_m, 1))
        lam_pp *= float(np.prod([1.0 - r * r for r in tables_m.roots])) ** 2
    return LocalizationCoefficients(
        alpha_prime=tuple(elem),
        alpha_dblprime=dict(sorted(dbl.items())),
        Lambda_prime=lam_p,
        Lambda_dblprime=lam_pp,
    )


# --------------------------------------------------------------------------
# generators


def localized_phi(tables: SplineOrderTables, k: int) -> PiecewisePolynomial:
    """Phi_{n,k} = beta_n B_n(. - k): support exactly [k, k+n+1]."""
    return spline_comb(tables.order, 1, float(k), {0: tables.beta})


def _psi_comb(tables_n: SplineOrderTables,
              tables_m: Optional[SplineOrderTables],
              kk: int, k: int, aligned: bool) -> dict:
    head = lambda_binomial_comb(tables_n, aligned=aligned)
    if kk == 1:
        head = comb_convolve(head, _script_A_sq_comb(tables_m, -2))
    gam = gamma_constant(tables_n, k)
    return {w: gam * c for w, c in head.items()}


def localized_psi(tables_n: SplineOrderTables,
                  tables_m: Optional[SplineOrderTables],
                  kk: int, k: int, s: int) -> PiecewisePolynomial:
    """The compactly supported wavelet Psi_{n,m(kk);k,s} on half-integer knots."""
    _require_m_tables(tables_m, kk)
    terms = _psi_comb(tables_n, tables_m, kk, k, aligned=False)
    return spline_comb(tables_n.order, 2, float(s), terms)


def _aligned_psi(tables_n: SplineOrderTables,
                 tables_m: Optional[SplineOrderTables],
                 kk: int, k: int, s: int) -> PiecewisePolynomial:
    terms = _psi_comb(tables_n, tables_m, kk, k, aligned=True)
    return spline_comb(tables_n.order, 2, float(s), terms)


def riesz_bounds(generator: PiecewisePolynomial,
                 grid: int = RIESZ_GRID) -> tuple:
    """Frame bounds of the integer translates of a compact generator.

    Evaluates G(w) = sum_tau <g, g(. - tau)> e^{i tau w} (a finite cosine
    polynomial since the supports are compact) on a uniform grid and returns
    (min, max).
    """
    lo, hi = generator.support
    radius = int(math.ceil(hi - lo)) - 1
    pair = [generator.inner_product(generator.translate(float(t)))
            for t in range(radius + 1)]
    omega = np.arange(grid) * (2.0 * math.pi / grid)
    vals = np.full(grid, pair[0])
    for t in range(1, radius + 1):
        vals += 2.0 * pair[t] * np.cos(t * omega)
    lower = float(np.min(vals))
    upper = float(np.max(vals))
    if lower <= DEGENERACY_FLOOR:
        raise DegenerateFrame(
            f"translate frame is numerically degenerate: lower bound {lower:.3e}")
    return lower, upper


# --------------------------------------------------------------------------
# tensor systems


@dataclass(frozen=True)
class AxisSpec:
    """One axis of a tensor system."""

    n: int
    m: int = 1
    kk: int = 0
    k: int = 0
    s: int = 0
    half_shift: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParams("axis spline order must be >= 1")
        if self.m < 1:
            raise InvalidParams("axis auxiliary order must be >= 1")
        if self.kk not in (0, 1):
            raise InvalidParams("axis localization exponent must be 0 or 1")


@dataclass(frozen=True)
class DyadicIndex:
    """(type, level, translation) index of one system member."""

    i: int
    d: int
    tau: tuple

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(int(t) for t in self.tau))
        if self.d < 0:
            raise InvalidParams("level must be nonnegative")
        if self.i == 0 and self.d != 0:
            raise InvalidParams("type 0 (scaling layer) exists only at level 0")


@dataclass(frozen=True)
class SeparableTerm:
    """weight * prod_l factors[l](x_l): a separable N-dim piecewise polynomial."""

    factors: tuple
    weight: float = 1.0

    @property
    def dimension(self) -> int:
        return len(self.factors)

    @property
    def support(self) -> tuple:
        return tuple(f.support for f in self.factors)

    def __call__(self, *coords):
        if len(coords) != len(self.factors):
            raise InvalidParams(
                f"expected {len(self.factors)} coordinate arrays, got {len(coords)}")
        out = self.weight
        for f, c in zip(self.factors, coords):
            out = out * np.asarray(f(c))
        return out

    def inner_product(self, other: "SeparableTerm") -> float:
        if self.dimension != other.dimension:
            raise InvalidParams("dimension mismatch in separable pairing")
        val = self.weight * other.weight
        for f, g in zip(self.factors, other.factors):
            val *= f.inner_product(g)
            if val == 0.0:
                return 0.0
        return val

    def integrate(self) -> float:
        val = self.weight
        for f in self.factors:
            val *= f.integrate(*f.support)
        return val

    def scale(self, c: float) -> "SeparableTerm":
        return SeparableTerm(self.factors, self.weight * float(c))

    def translate(self, shifts: Sequence[float]) -> "SeparableTerm":
        return SeparableTerm(tuple(f.translate(float(a))
                                   for f, a in zip(self.factors, shifts)),
                             self.weight)


@dataclass(frozen=True)
class WaveletSystem:
    """Per-axis normalized generators and the 2^N - 1 tensor wavelet patterns."""

    dimension: int
    axes: tuple                 # AxisSpec per axis
    phi: tuple                  # normalized scaling generator per axis
    psi: tuple                  # normalized (aligned) wavelet per axis
    coefficients: tuple         # LocalizationCoefficients per axis
    n0: int = field(init=False)
    patterns: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n0", min(a.n for a in self.axes))
        pats = tuple(tuple((i >> l) & 1 for l in range(self.dimension))
                     for i in range(1, 2 ** self.dimension))
        object.__setattr__(self, "patterns", pats)

    @property
    def n_types(self) -> int:
        return 2 ** self.dimension - 1


def tensor_system(axis_specs: Sequence[AxisSpec]) -> WaveletSystem:
    """Build the N-dimensional system (1 <= N <= 3) from per-axis specs."""
    specs = tuple(axis_specs)
    if not 1 <= len(specs) <= 3:
        raise InvalidParams(
            f"tensor systems support 1..3 axes, got {len(specs)}")
    phis, psis, coefs = [], [], []
    for a in specs:
        tn = order_tables(a.n)
        tm = order_tables(a.m)
        co = localization_coefficients(tn, tm, a.kk)
        phi_t = localized_phi(tn, a.k).scale(1.0 / co.Lambda_prime)
        psi_t = _aligned_psi(tn, tm, a.kk, a.k, a.s).scale(
            1.0 / co.Lambda_dblprime)
        if a.half_shift:
            phi_t = phi_t.translate(-0.5)
            psi_t = psi_t.translate(-0.5)
        phis.append(phi_t)
        psis.append(psi_t)
        coefs.append(co)
    return WaveletSystem(dimension=len(specs), axes=specs,
                         phi=tuple(phis), psi=tuple(psis),
                         coefficients=tuple(coefs))


def member(system: WaveletSystem, index: DyadicIndex) -> SeparableTerm:
    """The system member 2^{dN/2} Psi_i(2^d x - tau) as a separable term."""
    N = system.dimension
    if not 0 <= index.i < 2 ** N:
        raise InvalidParams(f"type index {index.i} out of range for N={N}")
    if len(index.tau) != N:
        raise InvalidParams("translation vector length must match dimension")
    dil = 2.0 ** index.d
    factors = []
    for l in range(N):
        g = system.psi[l] if (index.i >> l) & 1 else system.phi[l]
        factors.append(g.affine_arg(dil, float(index.tau[l])))
    weight = 2.0 ** (index.d * N / 2.0)
    return SeparableTerm(tuple(factors), weight)


def gram_sum(system: WaveletSystem, i: int) -> float:
    """sum_h <Psi_i(. - h), Psi_i> over the finite overlap box; expected 1."""
    N = system.dimension
    if not 0 <= i < 2 ** N:
        raise InvalidParams(f"type index {i} out of range for N={N}")
    per_axis = []
    for l in range(N):
        g = system.psi[l] if (i >> l) & 1 else system.phi[l]
        lo, hi = g.support
        radius = int(round(hi - lo)) - 1
        row = {}
        for h in range(-radius, radius + 1):
            row[h] = g.inner_product(g.translate(float(h)))
        per_axis.append(row)
    total = 0.0
    for combo in itertools.product(*(sorted(r) for r in per_axis)):
        prod = 1.0
        for l, h in enumerate(combo):
            prod *= per_axis[l][h]
        total += prod
    return total
