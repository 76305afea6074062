"""Weight models and the admissibility bookkeeping built on top of them.

A weight here is one of four closed-form families on R^N (N <= 3):

* ``constant`` -- a positive constant;
* ``power`` -- ``amplitude * |x|^alpha`` with the Euclidean norm;
* ``power_exp_hybrid`` -- ``|x|^alpha`` inside the unit ball glued
  continuously to ``exp(rate * (|x| - 1))`` outside it;
* ``tabulated`` -- a positive step function over a break grid, extended by
  its boundary values and used as a separable product in higher dimension.

The family is deliberately closed under the pointwise powers ``w -> w^t``
that the Muckenhoupt-type quotients and dual weights require, so every
derived weight stays expressible in the same vocabulary.

Cube masses are exact (piecewise antiderivatives) in one dimension and for
all separable kinds; radial kinds in N >= 2 go through adaptive
Gauss-Legendre quadrature with a geometric-ring treatment of the origin
singularity.  Quotient sweeps over dyadic cube families report a cumulative
maximum trace, which is the object the divergence/stability classifiers and
the integrability-exponent estimate are built from.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import InvalidParams, NonIntegrable

__all__ = [
    "Box",
    "WeightModel",
    "CubeFamily",
    "ApEstimate",
    "Sigmas",
    "SpaceParams",
    "cube_mass",
    "essential_infimum",
    "ap_quotient",
    "ap_local_constant",
    "ap_global_constant",
    "r0_estimate",
    "sigmas",
    "min_order",
    "dual_weight",
]

Box = tuple[tuple[float, float], ...]

_KINDS = ("constant", "power", "power_exp_hybrid", "tabulated")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)

#: Relative tolerance targeted by the adaptive radial quadrature (N >= 2).
QUADRATURE_REL_TOL = 1e-9


def _as_box(cube: object, dimension: int) -> Box:
    """Normalize ``cube`` to a tuple of per-axis ``(lo, hi)`` pairs."""

    try:
        first = cube[0]  # type: ignore[index]
    except (TypeError, IndexError):
        raise InvalidParams(f"cube {cube!r} is not an interval product")
    if np.isscalar(first):
        if dimension != 1:
            raise InvalidParams(
                f"scalar interval given for a {dimension}-dimensional weight"
            )
        axes: tuple = (tuple(cube),)  # type: ignore[arg-type]
    else:
        axes = tuple(tuple(ax) for ax in cube)  # type: ignore[union-attr]
    if len(axes) != dimension:
        raise InvalidParams(
            f"cube has {len(axes)} axes, weight lives on R^{dimension}"
        )
    out = []
    for ax in axes:
        if len(ax) != 2:
            raise InvalidParams(f"interval {ax!r} must be a (lo, hi) pair")
        lo = float(ax[0])
        hi = float(ax[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise InvalidParams(f"degenerate interval ({lo}, {hi})")
        out.append((lo, hi))
    return tuple(out)


def _volume(box: Box) -> float:
    v = 1.0
    for lo, hi in box:
        v *= hi - lo
    return v


def _rho_range(box: Box) -> tuple[float, float]:
    """Range of the Euclidean norm over an axis-aligned box."""

    near = 0.0
    far = 0.0
    for lo, hi in box:
        d = lo if lo > 0 else (-hi if hi < 0 else 0.0)
        near += d * d
        far += max(abs(lo), abs(hi)) ** 2
    return math.sqrt(near), math.sqrt(far)


@dataclass(frozen=True)
class WeightModel:
    """One weight from the closed vocabulary described in the module docs.

    Instances are immutable; ``pow`` and ``scaled`` return new models.  The
    ``amplitude`` is a global positive factor kept separate so that constant
    rescaling stays exact for every kind.
    """

    kind: str
    dimension: int = 1
    amplitude: float = 1.0
    alpha: float = 0.0
    rate: float = 1.0
    breaks: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise InvalidParams(f"unknown weight kind {self.kind!r}")
        if self.dimension not in (1, 2, 3):
            raise InvalidParams("weights are supported on R^1..R^3")
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise InvalidParams("weight amplitude must be positive and finite")
        if not math.isfinite(self.alpha):
            raise InvalidParams("power exponent must be finite")
        if not math.isfinite(self.rate):
            raise InvalidParams("hybrid rate must be finite")
        if self.kind == "tabulated":
            br = self.breaks
            if len(br) < 2 or len(self.values) != len(br) - 1:
                raise InvalidParams("tabulated weight needs M+1 breaks, M values")
            if any(b >= c for b, c in zip(br, br[1:])):
                raise InvalidParams("tabulated breaks must increase strictly")
            if any(not (math.isfinite(v) and v > 0) for v in self.values):
                raise InvalidParams("tabulated values must be positive")

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float = 1.0, dimension: int = 1) -> "WeightModel":
        return cls(kind="constant", dimension=dimension, amplitude=float(value))

    @classmethod
    def power(cls, alpha: float, dimension: int = 1,
              amplitude: float = 1.0) -> "WeightModel":
        return cls(kind="power", dimension=dimension,
                   amplitude=float(amplitude), alpha=float(alpha))

    @classmethod
    def hybrid(cls, alpha: float, dimension: int = 1, rate: float = 1.0,
               amplitude: float = 1.0) -> "WeightModel":
        return cls(kind="power_exp_hybrid", dimension=dimension,
                   amplitude=float(amplitude), alpha=float(alpha),
                   rate=float(rate))

    @classmethod
    def tabulated(cls, breaks: Sequence[float], values: Sequence[float],
                  dimension: int = 1, amplitude: float = 1.0) -> "WeightModel":
        return cls(kind="tabulated", dimension=dimension,
                   amplitude=float(amplitude),
                   breaks=tuple(float(b) for b in breaks),
                   values=tuple(float(v) for v in values))

    # -- pointwise structure ----------------------------------------------

    def _radial(self, rho: np.ndarray) -> np.ndarray:
        """Radial profile (without amplitude) for the radial kinds."""

        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.kind == "power":
                return rho ** self.alpha
            if self.kind == "power_exp_hybrid":
                inside = rho ** self.alpha
                outside = np.exp(self.rate * (rho - 1.0))
                return np.where(rho <= 1.0, inside, outside)
        raise InvalidParams(f"{self.kind} weight has no radial profile")

    def _table_eval(self, x: np.ndarray) -> np.ndarray:
        br = np.asarray(self.breaks)
        vals = np.asarray(self.values)
        idx = np.clip(np.searchsorted(br, x, side="right") - 1, 0, len(vals) - 1)
        return vals[idx]

    def __call__(self, x: object) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if self.kind == "constant":
            if self.dimension > 1 and arr.shape and arr.shape[-1] == self.dimension:
                return np.full(arr.shape[:-1], self.amplitude)
            return np.full(arr.shape, self.amplitude)
        if self.kind == "tabulated":
            if self.dimension == 1:
                return self.amplitude * self._table_eval(arr)
            if not arr.shape or arr.shape[-1] != self.dimension:
                raise InvalidParams(
                    f"expected points with trailing axis {self.dimension}"
                )
            out = np.ones(arr.shape[:-1])
            for axis in range(self.dimension):
                out = out * self._table_eval(arr[..., axis])
            return self.amplitude * out
        if self.dimension == 1:
            rho = np.abs(arr)
        else:
            if not arr.shape or arr.shape[-1] != self.dimension:
                raise InvalidParams(
                    f"expected points with trailing axis {self.dimension}"
                )
            rho = np.sqrt(np.sum(arr * arr, axis=-1))
        return self.amplitude * self._radial(rho)

    def pow(self, t: float) -> "WeightModel":
        """Pointwise power ``w^t`` as another model of the same kind."""

        if not math.isfinite(t):
            raise InvalidParams("exponent must be finite")
        amp = self.amplitude ** t
        if self.kind == "constant":
            return replace(self, amplitude=amp)
        if self.kind == "power":
            return replace(self, amplitude=amp, alpha=self.alpha * t)
        if self.kind == "power_exp_hybrid":
            return replace(self, amplitude=amp, alpha=self.alpha * t,
                           rate=self.rate * t)
        return replace(self, amplitude=amp,
                       values=tuple(v ** t for v in self.values))

    def scaled(self, factor: float) -> "WeightModel":
        """The weight ``factor * w``."""

        if not (math.isfinite(factor) and factor > 0):
            raise InvalidParams("scaling factor must be positive")
        return replace(self, amplitude=self.amplitude * factor)

    @property
    def is_locally_integrable(self) -> bool:
        """Whether every bounded cube has finite mass."""

        if self.kind in ("constant", "tabulated"):
            return True
        return self.alpha > -self.dimension

    def as_dict(self) -> dict:
        out: dict = {"kind": self.kind, "dimension": self.dimension,
                     "amplitude": self.amplitude}
        if self.kind == "power":
            out["alpha"] = self.alpha
        elif self.kind == "power_exp_hybrid":
            out["alpha"] = self.alpha
            out["rate"] = self.rate
        elif self.kind == "tabulated":
            out["breaks"] = list(self.breaks)
            out["values"] = list(self.values)
        return out


# ---------------------------------------------------------------------------
# one-dimensional masses (exact antiderivatives, vectorized)


def _mass_power_1d(alpha: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if alpha == -1.0:
            f_hi = np.sign(hi) * np.log(np.abs(hi))
            f_lo = np.sign(lo) * np.log(np.abs(lo))
        else:
            e = alpha + 1.0
            f_hi = np.sign(hi) * np.abs(hi) ** e / e
            f_lo = np.sign(lo) * np.abs(lo) ** e / e
        raw = f_hi - f_lo
    bad = (alpha <= -1.0) & (lo <= 0.0) & (hi >= 0.0)
    return np.where(bad, np.inf, raw)


def _mass_hybrid_1d(alpha: float, rate: float,
                    lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    def primitive(r: np.ndarray) -> np.ndarray:
        # \int_0^r of the radial profile, continuous across r = 1.
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if alpha == -1.0:
                inner = np.log(r)
                at_one = 0.0
            else:
                e = alpha + 1.0
                inner = r ** e / e
                at_one = 1.0 / e
            if rate == 0.0:
                tail = r - 1.0
            else:
                tail = (np.exp(rate * (r - 1.0)) - 1.0) / rate
            return np.where(r <= 1.0, inner, at_one + tail)

    with np.errstate(invalid="ignore"):
        raw = (np.sign(hi) * primitive(np.abs(hi))
               - np.sign(lo) * primitive(np.abs(lo)))
    bad = (alpha <= -1.0) & (lo <= 0.0) & (hi >= 0.0)
    return np.where(bad, np.inf, raw)


def _table_primitive(w: WeightModel, x: np.ndarray) -> np.ndarray:
    br = np.asarray(w.breaks)
    vals = np.asarray(w.values)
    cum = np.concatenate([[0.0], np.cumsum(np.diff(br) * vals)])
    below = vals[0] * (x - br[0])
    above = cum[-1] + vals[-1] * (x - br[-1])
    idx = np.clip(np.searchsorted(br, x, side="right") - 1, 0, len(vals) - 1)
    inside = cum[idx] + vals[idx] * (x - br[idx])
    return np.where(x < br[0], below, np.where(x >= br[-1], above, inside))


def _mass_1d(w: WeightModel, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized exact masses of 1-D intervals; infinite entries allowed."""

    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if w.kind == "constant":
        raw = hi - lo
    elif w.kind == "power":
        raw = _mass_power_1d(w.alpha, lo, hi)
    elif w.kind == "power_exp_hybrid":
        raw = _mass_hybrid_1d(w.alpha, w.rate, lo, hi)
    else:
        raw = _table_primitive(w, hi) - _table_primitive(w, lo)
    return w.amplitude * raw


def _essinf_1d(w: WeightModel, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if w.kind == "constant":
        return np.full(lo.shape, w.amplitude)
    if w.kind == "tabulated":
        br = list(w.breaks)
        vals = list(w.values)
        out = np.empty(lo.shape)
        flat_lo = lo.ravel()
        flat_hi = hi.ravel()
        flat = out.ravel()
        for i in range(flat.size):
            a, b = flat_lo[i], flat_hi[i]
            i0 = max(0, min(len(vals) - 1,
                            int(np.searchsorted(br, a, side="right")) - 1))
            i1 = max(0, min(len(vals) - 1,
                            int(np.searchsorted(br, b, side="left")) - 1))
            flat[i] = min(vals[i0:i1 + 1])
        return w.amplitude * out
    near = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    far = np.maximum(np.abs(lo), np.abs(hi))
    with np.errstate(divide="ignore", invalid="ignore"):
        cands = [w._radial(near), w._radial(far)]
        if w.kind == "power_exp_hybrid":
            # the profile is monotone on each side of rho = 1 only
            cands.append(np.where((near <= 1.0) & (far >= 1.0), 1.0, np.inf))
    out = cands[0]
    for c in cands[1:]:
        out = np.minimum(out, c)
    return w.amplitude * np.where(np.isnan(out), np.inf, out)


# ---------------------------------------------------------------------------
# radial quadrature for N >= 2


def _gl_cell(f: Callable[[np.ndarray], np.ndarray], box: Box) -> float:
    axes_pts = []
    weight = 1.0
    for lo, hi in box:
        half = 0.5 * (hi - lo)
        axes_pts.append(lo + half * (_GL_NODES + 1.0))
        weight *= half
    mesh = np.meshgrid(*axes_pts, indexing="ij")
    rho = np.sqrt(sum(m * m for m in mesh))
    vals = f(rho)
    wgt = _GL_WEIGHTS
    for _ in range(len(box) - 1):
        wgt = np.multiply.outer(wgt, _GL_WEIGHTS)
    return float(np.sum(vals * wgt) * weight)


def _adaptive_mass(f: Callable[[np.ndarray], np.ndarray], box: Box,
                   scale: float, depth: int = 0) -> float:
    coarse = _gl_cell(f, box)
    mids = [0.5 * (lo + hi) for lo, hi in box]
    children = []
    for bits in itertools.product((0, 1), repeat=len(box)):
        child = tuple(
            (lo, m) if b == 0 else (m, hi)
            for (lo, hi), m, b in zip(box, mids, bits)
        )
        children.append(child)
    fine = sum(_gl_cell(f, c) for c in children)
    err = abs(coarse - fine)
    if err <= max(QUADRATURE_REL_TOL * abs(fine), 1e-12 * scale) or depth >= 14:
        return fine
    return sum(_adaptive_mass(f, c, scale, depth + 1) for c in children)


def _corner_rings(f: Callable[[np.ndarray], np.ndarray],
                  sizes: Sequence[float]) -> float:
    """Integrate a radial profile over ``prod [0, b_l]`` with the origin
    handled by geometric rings plus a ratio-extrapolated tail."""

    n = len(sizes)
    hi = np.asarray(sizes, dtype=float)
    total = 0.0
    prev_ring = None
    prev_ratio = None
    for _ in range(200):
        lo = hi / 2.0
        ring = 0.0
        for subset in itertools.product((0, 1), repeat=n):
            if not any(subset):
                continue
            rect = tuple(
                (lo[l], hi[l]) if subset[l] else (0.0, lo[l])
                for l in range(n)
            )
            ring += _adaptive_mass(f, rect, scale=abs(ring) + 1.0)
        total += ring
        if ring == 0.0 or (total > 0 and ring < 1e-16 * total):
            return total
        if prev_ring is not None and prev_ring > 0:
            ratio = ring / prev_ring
            if (prev_ratio is not None and ratio < 0.999
                    and abs(ratio - prev_ratio) <= 1e-3 * ratio):
                return total + ring * ratio / (1.0 - ratio)
            prev_ratio = ratio
        prev_ring = ring
        hi = lo
    if prev_ratio is not None and prev_ratio < 1.0:
        total += prev_ring * prev_ratio / (1.0 - prev_ratio)
    return total


def _radial_box_mass(w: WeightModel, box: Box) -> float:
    f = w._radial
    total = 0.0
    axis_segments = []
    for lo, hi in box:
        if lo < 0 < hi:
            axis_segments.append([(lo, 0.0), (0.0, hi)])
        else:
            axis_segments.append([(lo, hi)])
    for segs in itertools.product(*axis_segments):
        refl = tuple(sorted((abs(a), abs(b))) for a, b in segs)
        if any(a == b for a, b in refl):
            continue
        if all(a == 0.0 for a, _ in refl):
            total += _corner_rings(f, [b for _, b in refl])
        else:
            total += _adaptive_mass(f, tuple(refl), scale=1.0)
    return w.amplitude * total


# ---------------------------------------------------------------------------
# public mass / infimum / quotient operations


def cube_mass(w: WeightModel, cube: object) -> float:
    """Exact (or quadrature, for radial N >= 2) mass ``\\int_Q w``.

    Raises ``NonIntegrable`` when the requested cube genuinely has infinite
    mass, i.e. the singular exponent is at or below ``-N`` and the closed
    cube meets the origin.
    """

    box = _as_box(cube, w.dimension)
    if w.kind == "constant":
        return w.amplitude * _volume(box)
    if w.kind == "tabulated":
        out = w.amplitude
        for lo, hi in box:
            out *= float(_table_primitive(w, np.asarray(hi))
                         - _table_primitive(w, np.asarray(lo)))
        return out
    if w.dimension == 1:
        (lo, hi), = box
        val = float(_mass_1d(w, np.asarray(lo), np.asarray(hi)))
        if not math.isfinite(val):
            raise NonIntegrable(
                f"|x|^{w.alpha} is not integrable on [{lo}, {hi}]"
            )
        return val
    near, _ = _rho_range(box)
    if w.alpha <= -w.dimension and near == 0.0:
        raise NonIntegrable(
            f"radial exponent {w.alpha} <= -{w.dimension} on a cube at the origin"
        )
    return _radial_box_mass(w, box)


def essential_infimum(w: WeightModel, cube: object) -> float:
    """Exact essential infimum of ``w`` over a cube (no quadrature needed)."""

    box = _as_box(cube, w.dimension)
    if w.kind == "constant":
        return w.amplitude
    if w.kind == "tabulated":
        out = w.amplitude
        for lo, hi in box:
            axis = WeightModel.tabulated(w.breaks, w.values)
            out *= float(_essinf_1d(axis, np.asarray(lo), np.asarray(hi)))
        return out
    near, far = _rho_range(box)
    with np.errstate(divide="ignore", invalid="ignore"):
        cands = [float(w._radial(np.asarray(near))),
                 float(w._radial(np.asarray(far)))]
        if w.kind == "power_exp_hybrid" and near <= 1.0 <= far:
            cands.append(1.0)
    cands = [math.inf if math.isnan(c) else c for c in cands]
    return w.amplitude * min(cands)


def ap_quotient(w: WeightModel, p: float, cube: object) -> float:
    """The Muckenhoupt-type quotient of a single cube.

    ``(w(Q)/|Q|) * ((1/|Q|) \\int_Q w^{1-p'})^{p-1}`` for ``p > 1``; for
    ``p = 1`` the dual factor becomes the essential supremum of ``1/w``.
    Infinite values are returned (not raised) so that sweep traces can
    record divergence.
    """

    if not (math.isfinite(p) and p >= 1):
        raise InvalidParams("quotients require finite p >= 1")
    box = _as_box(cube, w.dimension)
    vol = _volume(box)
    try:
        m1 = cube_mass(w, box)
    except NonIntegrable:
        return math.inf
    if p == 1.0:
        e = essential_infimum(w, box)
        if not (e > 0 and math.isfinite(e)):
            return math.inf
        return (m1 / vol) / e
    try:
        m2 = cube_mass(w.pow(-1.0 / (p - 1.0)), box)
    except NonIntegrable:
        return math.inf
    return (m1 / vol) * (m2 / vol) ** (p - 1.0)


def _quotients_1d(w: WeightModel, p: float,
                  lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    vol = hi - lo
    q1 = _mass_1d(w, lo, hi) / vol
    if p == 1.0:
        e = _essinf_1d(w, lo, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(e > 0, q1 / e, np.inf)
    else:
        m2 = _mass_1d(w.pow(-1.0 / (p - 1.0)), lo, hi)
        with np.errstate(invalid="ignore", over="ignore"):
            q = q1 * (m2 / vol) ** (p - 1.0)
    return np.where(np.isnan(q), np.inf, q)


# ---------------------------------------------------------------------------
# cube families and sweeps


@dataclass(frozen=True)
class CubeFamily:
    """A finite sweep family of axis-aligned cubes.

    Each entry of ``levels`` is a side exponent ``j`` (side ``2^-j``); the
    listed order is the refinement/enlargement order used for the trace.
    Centers run over the lattice of spacing ``max(2^-granularity, side/2)``
    inside ``[-box, box]^N``.
    """

    levels: tuple[int, ...]
    box: float = 8.0
    granularity: int = 12

    def __post_init__(self) -> None:
        if not self.levels:
            raise InvalidParams("a cube family needs at least one level")
        if not all(isinstance(j, int) for j in self.levels):
            raise InvalidParams("levels must be integer side exponents")
        if not (0 < self.box < math.inf):
            raise InvalidParams("search box must be positive")
        if not (0 <= self.granularity <= 24):
            raise InvalidParams("granularity out of range")

    def side(self, j: int) -> float:
        return 2.0 ** (-j)

    def centers(self, j: int) -> np.ndarray:
        spacing = max(2.0 ** (-self.granularity), self.side(j) / 2.0)
        count = int(round(2.0 * self.box / spacing))
        return -self.box + spacing * np.arange(count + 1)

    @classmethod
    def local_default(cls, dimension: int) -> "CubeFamily":
        if dimension == 1:
            return cls(levels=tuple(range(0, 13)), box=8.0, granularity=12)
        if dimension == 2:
            return cls(levels=tuple(range(0, 4)), box=1.0, granularity=3)
        return cls(levels=tuple(range(0, 3)), box=1.0, granularity=2)

    @classmethod
    def global_default(cls, dimension: int) -> "CubeFamily":
        if dimension == 1:
            return cls(levels=tuple(range(12, -6, -1)), box=8.0, granularity=12)
        if dimension == 2:
            return cls(levels=tuple(range(2, -3, -1)), box=2.0, granularity=3)
        return cls(levels=tuple(range(1, -2, -1)), box=1.0, granularity=1)


@dataclass(frozen=True)
class ApEstimate:
    """Result of a quotient sweep: a lower-bound estimate with its trace."""

    constant: float
    argmax_cube: Optional[Box]
    trace: tuple[float, ...]
    p: float
    scope: str

    def __float__(self) -> float:
        return self.constant

    def stabilized(self, rel: float = 0.02) -> bool:
        """Whether the cumulative trace settled (last step change <= rel)."""

        if len(self.trace) < 2 or not all(map(math.isfinite, self.trace)):
            return False
        last, prev = self.trace[-1], self.trace[-2]
        return last - prev <= rel * last

    def divergent(self, factor: float = 10.0) -> bool:
        """Whether the sweep shows blow-up: an infinite quotient anywhere,
        or at least ``factor`` growth on the final step."""

        if any(not math.isfinite(t) for t in self.trace):
            return True
        if len(self.trace) < 2:
            return False
        return self.trace[-2] > 0 and self.trace[-1] >= factor * self.trace[-2]

    def bounded(self) -> bool:
        return all(map(math.isfinite, self.trace)) and self.stabilized()

    def as_dict(self) -> dict:
        return {
            "constant": self.constant,
            "argmax_cube": (None if self.argmax_cube is None
                            else [list(ax) for ax in self.argmax_cube]),
            "trace": list(self.trace),
            "p": self.p,
            "scope": self.scope,
        }


def _sweep(w: WeightModel, p: float, family: CubeFamily, scope: str) -> ApEstimate:
    if not (math.isfinite(p) and p >= 1):
        raise InvalidParams("quotient sweeps require finite p >= 1")
    best = -math.inf
    arg: Optional[Box] = None
    trace: list[float] = []
    for j in family.levels:
        side = family.side(j)
        centers = family.centers(j)
        if w.dimension == 1:
            lo = centers - side / 2.0
            hi = centers + side / 2.0
            q = _quotients_1d(w, p, lo, hi)
            k = int(np.argmax(q))
            level_best = float(q[k])
            level_arg: Box = ((float(lo[k]), float(hi[k])),)
        else:
            level_best = -math.inf
            level_arg = None  # type: ignore[assignment]
            for center in itertools.product(centers.tolist(),
                                            repeat=w.dimension):
                box = tuple((c - side / 2.0, c + side / 2.0) for c in center)
                val = ap_quotient(w, p, box)
                if val > level_best:
                    level_best = val
                    level_arg = box
        if arg is None or level_best > best:
            best = level_best
            arg = level_arg
        trace.append(best)
    return ApEstimate(constant=best, argmax_cube=arg, trace=tuple(trace),
                      p=p, scope=scope)


def ap_local_constant(w: WeightModel, p: float,
                      family: Optional[CubeFamily] = None) -> ApEstimate:
    """Lower-bound estimate of the local quotient constant (cubes of side
    at most one), with the monotone refinement trace."""

    fam = family if family is not None else CubeFamily.local_default(w.dimension)
    if any(j < 0 for j in fam.levels):
        raise InvalidParams("local sweeps use cubes of side <= 1")
    return _sweep(w, p, fam, "local")


def ap_global_constant(w: WeightModel, p: float,
                       family: Optional[CubeFamily] = None) -> ApEstimate:
    """Same sweep over cubes of all sizes (enlargement-ordered trace)."""

    fam = family if family is not None else CubeFamily.global_default(w.dimension)
    return _sweep(w, p, fam, "global")


# ---------------------------------------------------------------------------
# integrability exponent, shift exponents, order bookkeeping


def _classification_family(dimension: int) -> CubeFamily:
    if dimension == 1:
        return CubeFamily(levels=tuple(range(0, 11)), box=8.0, granularity=10)
    return CubeFamily.local_default(dimension)


_DEFAULT_R_GRID = tuple(round(1.0 + 0.1 * k, 10) for k in range(31))


def r0_estimate(w: WeightModel, p_grid: Optional[Sequence[float]] = None,
                family: Optional[CubeFamily] = None) -> float:
    """Estimate the infimal exponent with a bounded local sweep.

    Classifies grid exponents as bounded (finite, stabilized trace) or
    divergent and bisects for the boundary; returns the midpoint of the
    bracketing pair, the smallest grid point when everything is bounded,
    and ``inf`` when nothing is.
    """

    raw_grid = _DEFAULT_R_GRID if p_grid is None else p_grid
    grid = sorted(set(float(r) for r in raw_grid))
    if not grid or grid[0] < 1 or not all(map(math.isfinite, grid)):
        raise InvalidParams("exponent grid must be finite values >= 1")
    fam = family if family is not None else _classification_family(w.dimension)

    cache: dict[int, bool] = {}

    def bounded(idx: int) -> bool:
        if idx not in cache:
            cache[idx] = _sweep(w, grid[idx], fam, "local").bounded()
        return cache[idx]

    if bounded(0):
        return grid[0]
    if not bounded(len(grid) - 1):
        return math.inf
    lo, hi = 0, len(grid) - 1  # grid[lo] divergent, grid[hi] bounded
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bounded(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (grid[lo] + grid[hi])


@dataclass(frozen=True)
class Sigmas:
    """The three shift exponents attached to a space parameter pack."""

    sigma_p: float
    sigma_q: float
    sigma_pq: float

    def as_dict(self) -> dict:
        return {"sigma_p": self.sigma_p, "sigma_q": self.sigma_q,
                "sigma_pq": self.sigma_pq}


def sigmas(r0: float, p: float, q: float, dimension: int) -> Sigmas:
    if not (math.isfinite(r0) and r0 >= 1):
        raise InvalidParams("r0 must be finite and >= 1")
    if not (p > 0 and q > 0):
        raise InvalidParams("integrability parameters must be positive")
    if dimension < 1:
        raise InvalidParams("dimension must be >= 1")
    sp = dimension * (r0 / min(p, r0) - 1.0) + dimension * (r0 - 1.0)
    sq = dimension / min(1.0, q) - dimension
    return Sigmas(sigma_p=sp, sigma_q=sq, sigma_pq=max(sp, sq))


def min_order(s: float, p: float, q: float, dimension: int, r0: float,
              space: str = "B") -> int:
    """Smallest admissible generator order for the given parameter pack."""

    if space not in ("B", "F"):
        raise InvalidParams("space must be 'B' or 'F'")
    sg = sigmas(r0, p, q, dimension)
    sigma = sg.sigma_p if space == "B" else sg.sigma_pq
    candidates = (
        0,
        math.floor(s) + 1,
        math.floor(dimension * (r0 - 1.0) / p - s) + 1,
        math.floor(sigma - s),
    )
    return int(max(candidates)) + 1


def dual_weight(w: WeightModel, p: float) -> WeightModel:
    """The conjugate-exponent weight ``w^{-p'/p}``; needs ``1 < p < inf``."""

    if not (math.isfinite(p) and p > 1):
        raise InvalidParams("dual weights require 1 < p < inf")
    return w.pow(-1.0 / (p - 1.0))


@dataclass(frozen=True)
class SpaceParams:
    """Parameter pack (smoothness, integrability, weight) for one space."""

    s: float
    p: float
    q: float
    weight: WeightModel
    r0: float = 1.0
    space: str = "B"

    def __post_init__(self) -> None:
        if self.space not in ("B", "F"):
            raise InvalidParams("space must be 'B' or 'F'")
        if not (self.p > 0 and self.q > 0):
            raise InvalidParams("integrability parameters must be positive")
        if not (math.isfinite(self.r0) and self.r0 >= 1):
            raise InvalidParams("r0 must be finite and >= 1")
        if not math.isfinite(self.s):
            raise InvalidParams("smoothness must be finite")

    @property
    def dimension(self) -> int:
        return self.weight.dimension

    def sigma(self) -> Sigmas:
        return sigmas(self.r0, self.p, self.q, self.dimension)

    @property
    def min_order(self) -> int:
        return min_order(self.s, self.p, self.q, self.dimension, self.r0,
                         self.space)

    def as_dict(self) -> dict:
        return {
            "s": self.s, "p": self.p, "q": self.q, "space": self.space,
            "r0": self.r0, "weight": self.weight.as_dict(),
            **self.sigma().as_dict(), "min_order": self.min_order,
        }
