"""Sparse dyadic coefficient trees and their weighted sequence quasi-norms.

A :class:`CoefficientTree` stores finitely many coefficients indexed by
``(i, d, tau)``: a root layer ``i = 0, d = 0`` and, for each type
``i in 1..2^N-1`` and level ``d in 1..D``, a finite layer of translations.
Absent entries are zero.  The cube attached to ``(d, tau)`` is the centered
dyadic cube ``prod_l [(tau_l - 1/2)/2^d, (tau_l + 1/2)/2^d]``.

Two graded quasi-norms are evaluated on trees: the level-aggregated ``b``
form (an ell_q over levels of per-level weighted L_p integrals) and the
pointwise ``f`` form (a pointwise ell_q across levels, then a weighted L_p).
Because the level-d indicators tile space up to null boundaries, the b-form
reduces to closed sums of cube masses, and the f-form is evaluated exactly
on the finite rectangle arrangement generated by all participating cube
boundaries.  The bold (unscaled) variants are the ``s = N/p``
specializations, and ``rescale`` is the coefficient bijection between the
scaled and unscaled families.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import replace as _dc_replace
from typing import Iterable, Iterator, Mapping, Optional, Tuple, Union

from .errors import InvalidParams
from .localized import DyadicIndex
from .weights import SpaceParams, cube_mass

__all__ = ["DyadicCube", "CoefficientTree", "norm_b", "norm_f",
           "norm_bold_b", "norm_bold_f", "rescale"]

EntryKey = Union[DyadicIndex, Tuple[int, int, Tuple[int, ...]]]


class DyadicCube:
    """The centered dyadic cube ``Q_{d,tau}`` of side ``2^-d``."""

    __slots__ = ("level", "tau")

    def __init__(self, level: int, tau: Iterable[int]):
        if level < 0:
            raise InvalidParams("cube level must be nonnegative")
        self.level = int(level)
        self.tau = tuple(int(t) for t in tau)
        if not self.tau:
            raise InvalidParams("cube needs at least one axis")

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(t * self.side for t in self.tau)

    @property
    def box(self) -> tuple[tuple[float, float], ...]:
        h = self.side
        return tuple(((t - 0.5) * h, (t + 0.5) * h) for t in self.tau)

    def __repr__(self) -> str:
        return f"DyadicCube(level={self.level}, tau={self.tau})"

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, DyadicCube)
                and (self.level, self.tau) == (other.level, other.tau))

    def __hash__(self) -> int:
        return hash((self.level, self.tau))


def _coerce_key(key: EntryKey, dimension: int, depth: int) -> DyadicIndex:
    if isinstance(key, DyadicIndex):
        i, d, tau = key.i, key.d, key.tau
    else:
        i, d, tau = key  # type: ignore[misc]
        tau = tuple(int(t) for t in (tau if isinstance(tau, tuple) else tuple(tau)))
    if len(tau) != dimension:
        raise InvalidParams(
            f"translation {tau} has {len(tau)} axes, tree is {dimension}-dimensional"
        )
    if d == 0:
        if i != 0:
            raise InvalidParams("level zero admits only the root type i = 0")
    else:
        if not 1 <= d <= depth:
            raise InvalidParams(f"level {d} outside 1..{depth}")
        if not 1 <= i <= 2 ** dimension - 1:
            raise InvalidParams(
                f"type {i} outside 1..{2 ** dimension - 1} at level {d}"
            )
    return DyadicIndex(i=i, d=d, tau=tau)


class CoefficientTree:
    """Finitely supported coefficient pyramid.  Treat instances as immutable."""

    __slots__ = ("dimension", "depth", "_data")

    def __init__(self, dimension: int, depth: int,
                 entries: Union[Mapping, Iterable, None] = None):
        if dimension not in (1, 2, 3):
            raise InvalidParams("trees are supported in dimension 1..3")
        if depth < 0:
            raise InvalidParams("depth must be nonnegative")
        self.dimension = int(dimension)
        self.depth = int(depth)
        data: dict[DyadicIndex, float] = {}
        if entries is not None:
            pairs = entries.items() if hasattr(entries, "items") else entries
            for key, value in pairs:
                idx = _coerce_key(key, self.dimension, self.depth)
                value = float(value)
                if not math.isfinite(value):
                    raise InvalidParams(f"entry {idx} has non-finite value")
                if value != 0.0:
                    data[idx] = value
        self._data = data

    # -- access --------------------------------------------------------

    def value(self, i: int, d: int, tau: Iterable[int]) -> float:
        idx = DyadicIndex(i=i, d=d, tau=tuple(int(t) for t in tau))
        return self._data.get(idx, 0.0)

    def items(self) -> Iterator[tuple[DyadicIndex, float]]:
        """Entries in the canonical (d, i, tau) order."""
        for idx in sorted(self._data, key=lambda k: (k.d, k.i, k.tau)):
            yield idx, self._data[idx]

    def __len__(self) -> int:
        return len(self._data)

    def __bool__(self) -> bool:
        return bool(self._data)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, CoefficientTree)
                and self.dimension == other.dimension
                and self.depth == other.depth
                and self._data == other._data)

    def __repr__(self) -> str:
        return (f"CoefficientTree(dimension={self.dimension}, "
                f"depth={self.depth}, entries={len(self._data)})")

    # -- derived trees ---------------------------------------------------

    def with_entry(self, i: int, d: int, tau: Iterable[int],
                   value: float) -> "CoefficientTree":
        items = dict(self._data)
        idx = _coerce_key((i, d, tuple(tau)), self.dimension, self.depth)
        if value == 0.0:
            items.pop(idx, None)
        else:
            items[idx] = float(value)
        return CoefficientTree(self.dimension, self.depth, items)

    def scaled(self, c: float) -> "CoefficientTree":
        return CoefficientTree(
            self.dimension, self.depth,
            {k: c * v for k, v in self._data.items()},
        )

    # -- serialization ---------------------------------------------------

    def to_json_lines(self) -> str:
        lines = [
            json.dumps({"d": idx.d, "i": idx.i, "tau": list(idx.tau),
                        "value": val}, sort_keys=True)
            for idx, val in self.items()
        ]
        return "\n".join(lines)

    @classmethod
    def from_json_lines(cls, text: str, depth: Optional[int] = None
                        ) -> "CoefficientTree":
        entries = []
        dimension = None
        max_level = 0
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            tau = tuple(int(t) for t in obj["tau"])
            if dimension is None:
                dimension = len(tau)
            entries.append(((int(obj["i"]), int(obj["d"]), tau),
                            float(obj["value"])))
            max_level = max(max_level, int(obj["d"]))
        if dimension is None:
            raise InvalidParams("no entries found in serialized tree")
        return cls(dimension, depth if depth is not None else max_level,
                   entries)


# ---------------------------------------------------------------------------
# quasi-norms


def _check(tree: CoefficientTree, params: SpaceParams) -> tuple[float, float]:
    p, q = params.p, params.q
    if not (0 < p < math.inf):
        raise InvalidParams("sequence norms need 0 < p < inf")
    if not q > 0:
        raise InvalidParams("sequence norms need q > 0")
    if params.weight.dimension != tree.dimension:
        raise InvalidParams(
            f"weight lives on R^{params.weight.dimension}, "
            f"tree on R^{tree.dimension}"
        )
    return p, q


def _level_sums(tree: CoefficientTree, params: SpaceParams) -> dict[int, float]:
    """Per-level sums ``sum |lambda|^p * 2^{dN} * w(Q_{d,tau})`` (level 0
    without the ``2^{dN}`` factor, whose cubes have unit side)."""

    p = params.p
    w = params.weight
    n = tree.dimension
    sums: dict[int, float] = {}
    for idx, val in tree.items():
        mass = cube_mass(w, DyadicCube(idx.d, idx.tau).box)
        term = abs(val) ** p * 2.0 ** (idx.d * n) * mass
        sums[idx.d] = sums.get(idx.d, 0.0) + term
    return sums


def norm_b(tree: CoefficientTree, params: SpaceParams) -> float:
    """Level-aggregated quasi-norm: per-level weighted L_p integrals of the
    indicator expansions, combined by ell_q with 2^{d(s - N/p)} scalings."""

    p, q = _check(tree, params)
    n = tree.dimension
    blocks = []
    for d, total in sorted(_level_sums(tree, params).items()):
        blocks.append(2.0 ** (d * (params.s - n / p)) * total ** (1.0 / p))
    if not blocks:
        return 0.0
    if q == math.inf:
        return max(blocks)
    return sum(b ** q for b in blocks) ** (1.0 / q)


def norm_f(tree: CoefficientTree, params: SpaceParams) -> float:
    """Pointwise-aggregated quasi-norm, evaluated exactly on the rectangle
    arrangement generated by all participating cube boundaries."""

    p, q = _check(tree, params)
    if not tree:
        return 0.0
    n = tree.dimension
    items = [(idx, abs(val), DyadicCube(idx.d, idx.tau).box)
             for idx, val in tree.items()]
    cuts: list[set] = [set() for _ in range(n)]
    for _, _, box in items:
        for axis, (lo, hi) in enumerate(box):
            cuts[axis].add(lo)
            cuts[axis].add(hi)
    axes = [sorted(c) for c in cuts]
    total = 0.0
    for cell in itertools.product(
            *(zip(ax, ax[1:]) for ax in axes)):
        mid = tuple(0.5 * (lo + hi) for lo, hi in cell)
        terms = [
            2.0 ** (idx.d * params.s) * mag
            for idx, mag, box in items
            if all(lo < x < hi for x, (lo, hi) in zip(mid, box))
        ]
        if not terms:
            continue
        if q == math.inf:
            height = max(terms)
        else:
            height = sum(t ** q for t in terms) ** (1.0 / q)
        total += height ** p * cube_mass(params.weight, cell)
    return total ** (1.0 / p)


def norm_bold_b(tree: CoefficientTree, params: SpaceParams) -> float:
    """Unscaled variant: the ``s = N/p`` specialization of :func:`norm_b`."""

    p, _ = _check(tree, params)
    return norm_b(tree, _dc_replace(params, s=tree.dimension / p))


def norm_bold_f(tree: CoefficientTree, params: SpaceParams) -> float:
    """Unscaled variant: the ``s = N/p`` specialization of :func:`norm_f`."""

    p, _ = _check(tree, params)
    return norm_f(tree, _dc_replace(params, s=tree.dimension / p))


def rescale(tree: CoefficientTree, params: SpaceParams,
            direction: str) -> CoefficientTree:
    """Coefficient bijection between the scaled and unscaled families.

    Multiplies level-d entries by ``2^{d*sigma}`` (``to_bold``) or divides
    them back (``from_bold``), with ``sigma = s - N/p`` in b-mode and
    ``sigma = s`` in f-mode.  Level zero carries the factor ``2^0`` and is
    therefore untouched.
    """

    if direction not in ("to_bold", "from_bold"):
        raise InvalidParams("direction must be 'to_bold' or 'from_bold'")
    p, _ = _check(tree, params)
    sigma = (params.s - tree.dimension / p) if params.space == "B" else params.s
    out = {}
    for idx, val in tree.items():
        factor = 2.0 ** (idx.d * sigma)
        out[idx] = val * factor if direction == "to_bold" else val / factor
    return CoefficientTree(tree.dimension, tree.depth, out)
