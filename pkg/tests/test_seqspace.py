"""Coefficient trees, dyadic cubes, and the weighted sequence quasi-norms."""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blwave.errors import InvalidParams
from blwave.seqspace import (
    CoefficientTree,
    DyadicCube,
    norm_b,
    norm_bold_b,
    norm_bold_f,
    norm_f,
    rescale,
)
from blwave.weights import SpaceParams, WeightModel, cube_mass


def params(s=0.0, p=2.0, q=2.0, w=None, space="B", dim=1):
    return SpaceParams(s=s, p=p, q=q,
                       weight=w or WeightModel.constant(dimension=dim),
                       space=space)


def single_entry_value(i, d, tau, c, pr):
    """The closed one-term reduction of the level-aggregated norm."""
    n = len(tau)
    mass = cube_mass(pr.weight, DyadicCube(d, tau).box)
    return (2.0 ** (d * (pr.s - n / pr.p)) * abs(c)
            * (2.0 ** (d * n) * mass) ** (1.0 / pr.p))


def brute_force_f(tree, pr, grid_level):
    """Finest-grid quadrature of the pointwise-aggregated integral."""
    n = tree.dimension
    items = [(idx, abs(v), DyadicCube(idx.d, idx.tau).box)
             for idx, v in tree.items()]
    lo = [min(b[ax][0] for _, _, b in items) for ax in range(n)]
    hi = [max(b[ax][1] for _, _, b in items) for ax in range(n)]
    h = 2.0 ** (-grid_level)
    axes = [np.arange(round(l / h), round(u / h)) for l, u in zip(lo, hi)]
    total = 0.0
    for cell_idx in itertools.product(*axes):
        cell = tuple((k * h, (k + 1) * h) for k in cell_idx)
        mid = tuple(0.5 * (a + b) for a, b in cell)
        terms = [2.0 ** (idx.d * pr.s) * mag for idx, mag, box in items
                 if all(a < x < b for x, (a, b) in zip(mid, box))]
        if not terms:
            continue
        if pr.q == math.inf:
            height = max(terms)
        else:
            height = sum(t ** pr.q for t in terms) ** (1.0 / pr.q)
        total += height ** pr.p * cube_mass(pr.weight, cell)
    return total ** (1.0 / pr.p)


def brute_force_b(tree, pr, grid_level):
    """Same quadrature applied level by level, then the ell_q combination."""
    n = tree.dimension
    by_level: dict[int, list] = {}
    for idx, v in tree.items():
        by_level.setdefault(idx.d, []).append((idx, abs(v)))
    blocks = []
    for d in sorted(by_level):
        sub = CoefficientTree(n, tree.depth,
                              {idx: v for idx, v in by_level[d]})
        level_pr = replace(pr, s=n / pr.p, q=pr.p)
        integral = brute_force_f(sub, level_pr, grid_level)
        blocks.append(2.0 ** (d * (pr.s - n / pr.p)) * integral)
    if not blocks:
        return 0.0
    if pr.q == math.inf:
        return max(blocks)
    return sum(b ** pr.q for b in blocks) ** (1.0 / pr.q)


def random_tree(seed, dim=1, depth=3, count=8):
    rng = np.random.default_rng(seed)
    entries = {}
    for _ in range(count):
        d = int(rng.integers(0, depth + 1))
        i = 0 if d == 0 else int(rng.integers(1, 2 ** dim))
        tau = tuple(int(t) for t in rng.integers(-3, 4, size=dim))
        entries[(i, d, tau)] = float(rng.normal())
    return CoefficientTree(dim, depth, entries)


class TestDyadicCube:
    def test_geometry(self):
        q = DyadicCube(2, (3,))
        assert q.box == ((0.625, 0.875),)
        assert q.side == 0.25
        assert q.center == (0.75,)

    def test_two_dim(self):
        q = DyadicCube(1, (0, -2))
        assert q.box == ((-0.25, 0.25), (-1.25, -0.75))

    def test_validation(self):
        with pytest.raises(InvalidParams):
            DyadicCube(-1, (0,))
        with pytest.raises(InvalidParams):
            DyadicCube(0, ())


class TestCoefficientTree:
    def test_construction_and_lookup(self):
        t = CoefficientTree(1, 3, {(0, 0, (2,)): 1.5, (1, 2, (-1,)): -0.5})
        assert len(t) == 2
        assert t.value(0, 0, (2,)) == 1.5
        assert t.value(1, 2, (-1,)) == -0.5
        assert t.value(1, 1, (0,)) == 0.0

    def test_zero_entries_dropped(self):
        t = CoefficientTree(1, 2, {(1, 1, (0,)): 0.0})
        assert len(t) == 0 and not t

    def test_key_validation(self):
        with pytest.raises(InvalidParams):
            CoefficientTree(1, 2, {(1, 0, (0,)): 1.0})  # root must be i=0
        with pytest.raises(InvalidParams):
            CoefficientTree(1, 2, {(0, 1, (0,)): 1.0})  # i=0 only at d=0
        with pytest.raises(InvalidParams):
            CoefficientTree(1, 2, {(2, 1, (0,)): 1.0})  # i > 2^N - 1
        with pytest.raises(InvalidParams):
            CoefficientTree(1, 2, {(1, 3, (0,)): 1.0})  # beyond depth
        with pytest.raises(InvalidParams):
            CoefficientTree(2, 2, {(1, 1, (0,)): 1.0})  # tau arity
        with pytest.raises(InvalidParams):
            CoefficientTree(1, 2, {(1, 1, (0,)): math.nan})

    def test_types_cover_full_range_in_2d(self):
        entries = {(i, 1, (0, 0)): 1.0 for i in (1, 2, 3)}
        t = CoefficientTree(2, 1, entries)
        assert len(t) == 3

    def test_with_entry_and_scaled(self):
        t = CoefficientTree(1, 2).with_entry(1, 1, (0,), 2.0)
        assert t.value(1, 1, (0,)) == 2.0
        t2 = t.scaled(-0.5)
        assert t2.value(1, 1, (0,)) == -1.0
        t3 = t.with_entry(1, 1, (0,), 0.0)
        assert len(t3) == 0

    def test_items_sorted(self):
        t = CoefficientTree(1, 2, {(1, 2, (5,)): 1.0, (1, 1, (7,)): 2.0,
                                   (0, 0, (-1,)): 3.0, (1, 1, (2,)): 4.0})
        keys = [(idx.d, idx.i, idx.tau) for idx, _ in t.items()]
        assert keys == sorted(keys)

    def test_json_round_trip(self):
        t = random_tree(7, dim=2, depth=3, count=6)
        text = t.to_json_lines()
        back = CoefficientTree.from_json_lines(text, depth=t.depth)
        assert back == t
        # serialization is deterministic and key-sorted
        assert text == t.to_json_lines()
        line = text.splitlines()[0]
        assert line.index('"d"') < line.index('"i"') < line.index('"tau"')

    def test_from_json_lines_tolerates_blanks(self):
        text = '\n{"d": 0, "i": 0, "tau": [1], "value": 2.0}\n\n'
        t = CoefficientTree.from_json_lines(text)
        assert t.value(0, 0, (1,)) == 2.0
        with pytest.raises(InvalidParams):
            CoefficientTree.from_json_lines("   \n ")


class TestNormB:
    def test_unit_root_entry(self):
        t = CoefficientTree(1, 0, {(0, 0, (0,)): 1.0})
        assert norm_b(t, params()) == 1.0

    def test_single_entry_formula(self):
        pr = params(s=0.7, p=2.0, q=3.0, w=WeightModel.power(0.5))
        t = CoefficientTree(1, 2, {(1, 2, (3,)): -2.0})
        expected = single_entry_value(1, 2, (3,), -2.0, pr)
        assert norm_b(t, pr) == pytest.approx(expected, rel=1e-12)

    def test_single_entry_formula_2d(self):
        pr = params(s=1.3, p=1.5, q=2.0, dim=2)
        t = CoefficientTree(2, 3, {(2, 3, (1, -2)): 0.7})
        expected = single_entry_value(2, 3, (1, -2), 0.7, pr)
        assert norm_b(t, pr) == pytest.approx(expected, rel=1e-12)

    def test_lp_collapse(self):
        # w = 1, s = N/p, p = q: the norm is the plain ell_p of all entries
        pr = params(s=0.5, p=2.0, q=2.0)
        t = CoefficientTree(1, 3, {(0, 0, (0,)): 3.0, (1, 1, (2,)): -4.0,
                                   (1, 3, (-5,)): 12.0})
        assert norm_b(t, pr) == pytest.approx(13.0, rel=1e-14)

    def test_q_infinity_takes_level_sup(self):
        pr = params(s=0.5, p=2.0, q=math.inf)
        t = CoefficientTree(1, 2, {(0, 0, (0,)): 3.0, (1, 2, (0,)): 5.0})
        assert norm_b(t, pr) == pytest.approx(5.0, rel=1e-14)

    def test_empty_tree(self):
        t = CoefficientTree(1, 2)
        pr = params()
        assert norm_b(t, pr) == 0.0
        assert norm_f(t, pr) == 0.0
        assert norm_bold_b(t, pr) == 0.0
        assert norm_bold_f(t, pr) == 0.0

    def test_invalid_params(self):
        t = CoefficientTree(1, 1, {(1, 1, (0,)): 1.0})
        with pytest.raises(InvalidParams):
            norm_b(t, params(p=-1.0))
        with pytest.raises(InvalidParams):
            norm_b(t, params(p=math.inf))
        with pytest.raises(InvalidParams):
            norm_b(t, params(q=0.0))
        with pytest.raises(InvalidParams):
            norm_b(t, params(dim=2))  # weight dimension mismatch

    @given(c=st.floats(min_value=-100, max_value=100).filter(
        lambda x: abs(x) > 1e-8))
    @settings(max_examples=30, deadline=None)
    def test_homogeneity(self, c):
        t = random_tree(11, count=6)
        pr = params(s=0.4, p=1.5, q=2.5, w=WeightModel.power(0.5))
        assert norm_b(t.scaled(c), pr) == pytest.approx(
            abs(c) * norm_b(t, pr), rel=1e-12)
        assert norm_f(t.scaled(c), pr) == pytest.approx(
            abs(c) * norm_f(t, pr), rel=1e-12)

    def test_monotone_in_entries(self):
        pr = params(s=0.3, p=1.2, q=0.8)
        t = random_tree(3, count=5)
        bigger = t.with_entry(1, 2, (9,), 0.7)
        assert norm_b(bigger, pr) >= norm_b(t, pr)
        assert norm_f(bigger, pr) >= norm_f(t, pr)


class TestNormF:
    def test_single_entry_matches_b(self):
        cases = [
            (params(s=0.7, p=2.0, q=3.0, w=WeightModel.power(0.5)),
             (1, 2, (3,)), -2.0),
            (params(s=-0.4, p=1.3, q=0.7), (1, 1, (0,)), 5.0),
            (params(s=1.0, p=3.0, q=math.inf), (0, 0, (2,)), 1.1),
        ]
        for pr, (i, d, tau), c in cases:
            t = CoefficientTree(1, max(d, 1), {(i, d, tau): c})
            assert norm_f(t, pr) == pytest.approx(norm_b(t, pr), rel=1e-12)

    def test_disjoint_entries_euclidean(self):
        # two far-apart level-1 entries, p = q = 2, w = 1, s = 0
        pr = params()
        t = CoefficientTree(1, 1, {(1, 1, (0,)): 3.0, (1, 1, (8,)): 4.0})
        # each single-entry value is |c| * 2^{-1/2} * (2 * 1/2)^{1/2} = |c|/sqrt(2)
        assert norm_f(t, pr) == pytest.approx(5.0 / math.sqrt(2.0), rel=1e-12)

    def test_nested_cubes_hand_value(self):
        # Q_{1,0} contains Q_{2,0}; s = 0, p = q = 2, w = 1
        pr = params()
        a, b = 2.0, 3.0
        t = CoefficientTree(1, 2, {(1, 1, (0,)): a, (1, 2, (0,)): b})
        expected = math.sqrt(a * a / 2.0 + b * b / 4.0)
        assert norm_f(t, pr) == pytest.approx(expected, rel=1e-12)
        assert norm_b(t, pr) == pytest.approx(expected, rel=1e-12)

    def test_pointwise_sup_at_q_infinity(self):
        pr = params(s=0.0, p=1.0, q=math.inf)
        t = CoefficientTree(1, 2, {(1, 1, (0,)): 2.0, (1, 2, (0,)): 3.0})
        # sup(2, 3) = 3 on the inner quarter-cube, 2 on the remaining ring
        assert norm_f(t, pr) == pytest.approx(3.0 * 0.25 + 2.0 * 0.25,
                                              rel=1e-12)

    def test_agreement_with_b_at_p_equals_q(self):
        weights = [WeightModel.constant(), WeightModel.power(0.5)]
        for seed, w in enumerate(weights):
            for dim in (1, 2):
                t = random_tree(20 + seed, dim=dim, depth=4, count=10)
                wd = replace(w, dimension=dim) if w.dimension != dim else w
                pr = params(s=0.6, p=1.7, q=1.7, w=wd, dim=dim)
                nb, nf = norm_b(t, pr), norm_f(t, pr)
                assert abs(nb - nf) <= 1e-10 * max(nb, 1e-30)

    def test_brute_force_oracle_1d(self):
        # cube edges sit at odd multiples of 2^{-(d+1)}, so the quadrature
        # grid must be one level finer than the deepest entry
        t = random_tree(42, dim=1, depth=4, count=12)
        for pr in (params(s=0.8, p=2.0, q=1.5, w=WeightModel.power(0.5)),
                   params(s=-0.3, p=1.1, q=3.0),
                   params(s=0.5, p=2.0, q=math.inf)):
            assert norm_f(t, pr) == pytest.approx(
                brute_force_f(t, pr, grid_level=5), rel=1e-8)
            assert norm_b(t, pr) == pytest.approx(
                brute_force_b(t, pr, grid_level=5), rel=1e-8)

    def test_brute_force_oracle_2d(self):
        t = random_tree(5, dim=2, depth=3, count=9)
        pr = params(s=0.4, p=2.0, q=1.0, dim=2,
                    w=WeightModel.power(1.0, dimension=2))
        assert norm_f(t, pr) == pytest.approx(
            brute_force_f(t, pr, grid_level=4), rel=1e-8)
        assert norm_b(t, pr) == pytest.approx(
            brute_force_b(t, pr, grid_level=4), rel=1e-8)


class TestBoldVariants:
    def test_bold_is_critical_smoothness(self):
        t = random_tree(9, count=7)
        pr = params(s=1.9, p=1.4, q=2.2, w=WeightModel.power(0.5))
        assert norm_bold_b(t, pr) == norm_b(t, replace(pr, s=1.0 / 1.4))
        assert norm_bold_f(t, pr) == norm_f(t, replace(pr, s=1.0 / 1.4))

    def test_bold_single_entry(self):
        pr = params(s=5.0, p=2.0, q=2.0, w=WeightModel.power(0.5))
        c, d, tau = 1.7, 2, (3,)
        t = CoefficientTree(1, 2, {(1, d, tau): c})
        mass = cube_mass(pr.weight, DyadicCube(d, tau).box)
        expected = c * (2.0 ** d * mass) ** 0.5
        assert norm_bold_b(t, pr) == pytest.approx(expected, rel=1e-12)
        assert norm_bold_f(t, pr) == pytest.approx(expected, rel=1e-12)


class TestRescale:
    def test_root_layer_untouched(self):
        t = CoefficientTree(1, 2, {(0, 0, (4,)): 2.5, (1, 2, (0,)): 1.0})
        out = rescale(t, params(s=1.7, p=1.3), "to_bold")
        assert out.value(0, 0, (4,)) == 2.5
        assert out.value(1, 2, (0,)) == pytest.approx(2.0 ** (2 * (1.7 - 1 / 1.3)))

    def test_identity_at_critical_smoothness(self):
        t = random_tree(13, count=6)
        pr = params(s=0.5, p=2.0)  # s = N/p
        assert rescale(t, pr, "to_bold") == t

    def test_f_mode_uses_plain_smoothness(self):
        t = CoefficientTree(1, 1, {(1, 1, (0,)): 1.0})
        out = rescale(t, params(s=2.0, p=2.0, space="F"), "to_bold")
        assert out.value(1, 1, (0,)) == pytest.approx(4.0)

    def test_round_trip(self):
        t = random_tree(31, dim=2, depth=4, count=10)
        pr = params(s=0.77, p=1.9, q=1.1, dim=2)
        back = rescale(rescale(t, pr, "to_bold"), pr, "from_bold")
        for idx, val in t.items():
            assert back.value(idx.i, idx.d, idx.tau) == pytest.approx(
                val, rel=1e-15)

    def test_norm_bookkeeping(self):
        for w in (WeightModel.constant(), WeightModel.power(0.5)):
            t = random_tree(17, count=8)
            pr = params(s=1.2, p=1.6, q=2.4, w=w)
            bold = rescale(t, pr, "to_bold")
            assert norm_bold_b(bold, pr) == pytest.approx(
                norm_b(t, pr), rel=1e-12)

    def test_direction_validation(self):
        with pytest.raises(InvalidParams):
            rescale(CoefficientTree(1, 1), params(), "sideways")
