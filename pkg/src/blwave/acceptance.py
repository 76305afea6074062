"""Release checklist: end-to-end checks of the package's core guarantees.

Every check recomputes its target through an independent route (closed
forms, brute-force loops, or a second construction) and compares against
the library under a pinned tolerance.  The same battery backs
``blwave selftest`` and ``tests/test_acceptance.py``; each check returns a
:class:`CheckResult` carrying the measured numbers so failures are
diagnosable from the report alone.
"""

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .bsplines import bspline
from .errors import InvalidParams
from .localized import (
    AxisSpec,
    DyadicIndex,
    gram_sum,
    localized_phi,
    localized_psi,
    member,
    tensor_system,
)
from .orthonormal import psi_explicit_check, scaling_phi, wavelet_psi
from .seqspace import CoefficientTree, DyadicCube, norm_b, norm_f
from .symbol import order_tables, scaling_mask, symbol
from .transform import (
    AtomSpec,
    KernelSpec,
    certify_atom,
    certify_kernel,
    dilate_family,
    equivalence_experiment,
    round_trip_report,
)
from .weights import (
    SpaceParams,
    WeightModel,
    ap_local_constant,
    ap_global_constant,
    min_order,
    r0_estimate,
)

__all__ = ["CheckResult", "CHECK_NAMES", "run_check", "run_all"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: dict

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "details": self.details}


# ---------------------------------------------------------------------------
# spectral layer


def _check_symbol_factorization():
    """P_n against beta^-2 prod (1 + r^2 + 2 r cos w), plus the n=1 root."""
    start = time.perf_counter()
    grid = np.linspace(0.0, 2.0 * math.pi, 1024, endpoint=False)
    worst = 0.0
    for n in range(1, 6):
        t = order_tables(n)
        model = np.full_like(grid, t.beta ** -2.0)
        for r in t.roots:
            model = model * (1.0 + r * r + 2.0 * r * np.cos(grid))
        worst = max(worst, float(np.max(np.abs(symbol(n)(grid) - model))))
    root_dev = abs(order_tables(1).roots[0] - (2.0 - math.sqrt(3.0)))
    seconds = time.perf_counter() - start
    ok = worst <= 1e-10 and root_dev <= 1e-12 and seconds < 1.0
    return ok, {"max_grid_residual": worst, "r1_deviation": root_dev,
                "seconds": seconds}


def _check_beta_consistency():
    """prod(1 + r_j) versus 2^n sqrt(prod alpha_j r_j) for n <= 5."""
    worst = 0.0
    for n in range(1, 6):
        t = order_tables(n)
        lhs = 1.0
        for r in t.roots:
            lhs *= 1.0 + r
        inner = 1.0
        for a, r in zip(t.alpha, t.roots):
            inner *= a * r
        rhs = 2.0 ** n * math.sqrt(inner)
        worst = max(worst, abs(lhs - rhs), abs(t.beta - lhs))
    return worst <= 1e-10, {"max_deviation": worst}


def _check_orthonormality():
    """Gram deviations of the truncated pair, |tau| <= 5, n <= 4."""
    start = time.perf_counter()
    tol = 1e-10
    worst = 0.0
    for n in range(1, 5):
        t = order_tables(n)
        phi = scaling_phi(t, 0, tol).base
        psi = wavelet_psi(t, 0, 0, tol).base
        for tau in range(-5, 6):
            target = 1.0 if tau == 0 else 0.0
            worst = max(
                worst,
                abs(phi.inner_product(phi.translate(float(tau))) - target),
                abs(psi.inner_product(psi.translate(float(tau))) - target),
                abs(psi.inner_product(phi.translate(float(tau)))))
    seconds = time.perf_counter() - start
    return worst <= 1e-7 and seconds < 30.0, {
        "max_gram_deviation": worst, "seconds": seconds}


def _check_qmf():
    """|m(w)|^2 + |m(w + pi)|^2 = 1 on a 1024-point grid, n <= 5."""
    grid = np.linspace(0.0, 2.0 * math.pi, 1024, endpoint=False)
    worst = 0.0
    for n in range(1, 6):
        t = order_tables(n)
        m0 = scaling_mask(t, 0, grid)
        m1 = scaling_mask(t, 0, grid + math.pi)
        worst = max(worst, float(np.max(np.abs(
            np.abs(m0) ** 2 + np.abs(m1) ** 2 - 1.0))))
    return worst <= 1e-10, {"max_qmf_defect": worst}


# ---------------------------------------------------------------------------
# localized generators


def _check_supports():
    """Knot-exact supports of the localized pair, all small parameter combos."""
    failures = []
    for n in range(1, 5):
        tn = order_tables(n)
        for k in (-1, 0, 2):
            got = localized_phi(tn, k).support
            want = (float(k), float(k + n + 1))
            if got != want:
                failures.append(("phi", n, k, got, want))
        for m in range(1, 4):
            tm = order_tables(m)
            for kk in (0, 1):
                for s in (0, 1):
                    psi = localized_psi(tn, tm if kk else None, kk, 0, s)
                    want = (s - n / 2.0 - m * kk,
                            s + 1.5 * n + m * kk + 1.0)
                    if psi.support != want:
                        failures.append(("psi", n, m, kk, s,
                                         psi.support, want))
    return not failures, {"mismatches": failures[:5],
                          "combinations": 4 * 3 + 4 * 3 * 2 * 2}


def _check_moments():
    """Exactly integrated wavelet moments through order n."""
    worst = 0.0
    for n in range(1, 5):
        tn = order_tables(n)
        for kk, m in ((0, 1), (1, 2)):
            psi = localized_psi(tn, order_tables(m) if kk else None, kk, 0, 0)
            for order in range(n + 1):
                worst = max(worst, abs(float(psi.moment(order))))
    return worst <= 1e-12, {"max_moment": worst}


def _check_gram_sum():
    """Localization coefficients resum to one for every wavelet type."""
    worst = 0.0
    combos_1d = [AxisSpec(n=n, m=m, kk=kk)
                 for n in (1, 2, 3) for kk in (0, 1) for m in ((2,) if kk else (1,))]
    systems = [tensor_system([ax]) for ax in combos_1d]
    systems.append(tensor_system([AxisSpec(n=2), AxisSpec(n=3, m=2, kk=1)]))
    systems.append(tensor_system([AxisSpec(n=1, m=2, kk=1), AxisSpec(n=3)]))
    for system in systems:
        for i in range(1, 2 ** system.dimension):
            worst = max(worst, abs(gram_sum(system, i) - 1.0))
    return worst <= 1e-8, {"max_deviation": worst,
                           "systems": len(systems)}


def _check_explicit_psi():
    """The derivative-form displays for n = 1, 2 against wavelet_psi."""
    reports = [psi_explicit_check(n, 0, 0) for n in (1, 2)]
    ok = all(r["passed"] for r in reports)
    return ok, {"max_deviations": [r["max_deviation"] for r in reports],
                "tolerances": [2.0 * r["tolerance"] for r in reports]}


# ---------------------------------------------------------------------------
# weights and sequence spaces


def _check_weight_classifier():
    half = ap_local_constant(WeightModel.power(0.5), 2.0)
    bad = ap_local_constant(WeightModel.power(-2.0), 2.0)
    hybrid = WeightModel.hybrid(0.5)
    hyb_local = ap_local_constant(hybrid, 2.0)
    hyb_global = ap_global_constant(hybrid, 2.0)
    r0 = r0_estimate(WeightModel.power(0.5))
    ok = (half.stabilized(0.02) and math.isfinite(half.constant)
          and bad.divergent(10.0)
          and hyb_local.bounded() and hyb_global.divergent(10.0)
          and abs(r0 - 1.5) <= 0.1)
    return ok, {
        "half_trace_tail": list(half.trace[-3:]),
        "half_stabilized": half.stabilized(0.02),
        "inverse_square_divergent": bad.divergent(10.0),
        "hybrid_local_bounded": hyb_local.bounded(),
        "hybrid_global_divergent": hyb_global.divergent(10.0),
        "r0": r0,
    }


def _check_min_order():
    w = WeightModel.constant(1.0)
    got = (min_order(0.0, 2.0, 2.0, 1, 1.0, "B"),
           min_order(2.5, 2.0, 2.0, 1, 1.0, "B"))
    return got == (2, 4), {"computed": got, "expected": (2, 4)}


def _power_mass_1d(alpha, lo, hi):
    def anti(x):
        return math.copysign(abs(x) ** (alpha + 1.0), x) / (alpha + 1.0)
    return anti(hi) - anti(lo)


def _naive_mass(w: WeightModel, box) -> float:
    if w.kind == "constant":
        out = w.amplitude
        for lo, hi in box:
            out *= hi - lo
        return out
    if w.kind == "power" and len(box) == 1:
        return w.amplitude * _power_mass_1d(w.alpha, *box[0])
    raise InvalidParams("oracle supports constant and 1-D power weights")


def _naive_norm_b(tree, params):
    p, q, n = params.p, params.q, tree.dimension
    levels = {}
    for idx, val in tree.items():
        box = DyadicCube(idx.d, idx.tau).box
        term = abs(val) ** p * 2.0 ** (idx.d * n) * _naive_mass(
            params.weight, box)
        levels[idx.d] = levels.get(idx.d, 0.0) + term
    blocks = [2.0 ** (d * (params.s - n / p)) * tot ** (1.0 / p)
              for d, tot in sorted(levels.items())]
    if not blocks:
        return 0.0
    if q == math.inf:
        return max(blocks)
    return sum(b ** q for b in blocks) ** (1.0 / q)


def _naive_norm_f(tree, params):
    p, q, n = params.p, params.q, tree.dimension
    items = [(idx, abs(v), DyadicCube(idx.d, idx.tau).box)
             for idx, v in tree.items()]
    if not items:
        return 0.0
    axes = []
    for ax in range(n):
        pts = set()
        for _, _, box in items:
            pts.update(box[ax])
        axes.append(sorted(pts))
    total = 0.0
    for cell in itertools.product(*(zip(ax, ax[1:]) for ax in axes)):
        mid = [0.5 * (lo + hi) for lo, hi in cell]
        stack = [2.0 ** (idx.d * params.s) * mag
                 for idx, mag, box in items
                 if all(lo < x < hi for x, (lo, hi) in zip(mid, box))]
        if not stack:
            continue
        if q == math.inf:
            height = max(stack)
        else:
            height = sum(t ** q for t in stack) ** (1.0 / q)
        total += height ** p * _naive_mass(params.weight, cell)
    return total ** (1.0 / p)


def _random_tree(rng, dimension, depth, entries):
    tree = CoefficientTree(dimension, depth)
    for _ in range(entries):
        d = int(rng.integers(0, depth + 1))
        i = 0 if d == 0 else int(rng.integers(1, 2 ** dimension))
        span = 2 ** d * 3
        tau = tuple(int(rng.integers(-span, span + 1))
                    for _ in range(dimension))
        tree = tree.with_entry(i, d, tau, float(rng.normal()))
    return tree


def _check_seqnorm_oracle():
    rng = np.random.default_rng(20240817)
    worst = 0.0
    worst_bf = 0.0
    cases = 0
    for dimension in (1, 2):
        weights = [WeightModel.constant(1.0, dimension=dimension)]
        if dimension == 1:
            weights.append(WeightModel.power(0.5))
        for w in weights:
            for (s, p, q) in ((0.5, 2.0, 2.0), (1.0, 2.0, 1.5),
                              (0.0, 1.5, math.inf)):
                params = SpaceParams(s=s, p=p, q=q, weight=w, space="B")
                tree = _random_tree(rng, dimension, 3,
                                    int(rng.integers(5, 21)))
                nb, nf = norm_b(tree, params), norm_f(tree, params)
                worst = max(worst,
                            abs(nb - _naive_norm_b(tree, params)),
                            abs(nf - _naive_norm_f(tree, params)))
                if p == q:
                    worst_bf = max(worst_bf, abs(nb - nf) / max(nb, 1e-300))
                cases += 1
    return worst <= 1e-8 and worst_bf <= 1e-10, {
        "max_oracle_deviation": worst, "max_b_vs_f": worst_bf,
        "cases": cases}


# ---------------------------------------------------------------------------
# the transform end of the contract


def _check_dual_reproduction():
    start = time.perf_counter()
    sys1 = tensor_system([AxisSpec(n=2)])
    combo = [
        (DyadicIndex(0, 0, (0,)), 1.0),
        (DyadicIndex(0, 0, (2,)), -0.5),
        (DyadicIndex(1, 0, (-1,)), 2.0),
        (DyadicIndex(1, 1, (1,)), 0.75),
        (DyadicIndex(1, 2, (3,)), -1.25),
    ]
    f = None
    for idx, c in combo:
        term = member(sys1, idx)
        pp = term.factors[0].scale(c * term.weight)
        f = pp if f is None else f + pp
    rep1 = round_trip_report(f, sys1, 3, "dual")

    sys2 = tensor_system([AxisSpec(n=2), AxisSpec(n=1)])
    g = (member(sys2, DyadicIndex(0, 0, (0, 0))),
         member(sys2, DyadicIndex(1, 0, (1, 0))).scale(-2.0),
         member(sys2, DyadicIndex(3, 1, (0, 1))).scale(0.5))
    rep2 = round_trip_report(g, sys2, 2, "dual")
    seconds = time.perf_counter() - start
    span_sizes = (len(combo), len(g))
    ok = (rep1["relative_residual"] <= 1e-8
          and rep2["relative_residual"] <= 1e-8
          and all(size <= 50 for size in span_sizes)
          and seconds < 60.0)
    return ok, {"residual_1d": rep1["relative_residual"],
                "residual_2d": rep2["relative_residual"],
                "span_sizes": span_sizes,
                "coefficients": (rep1["coefficients"],
                                 rep2["coefficients"]),
                "seconds": seconds}


def _check_equivalence_band():
    start = time.perf_counter()
    params = SpaceParams(s=1.0, p=2.0, q=2.0,
                         weight=WeightModel.power(0.5), r0=1.5, space="B")
    system = tensor_system([AxisSpec(n=3)])
    family = dilate_family(bspline(2), range(0, 5))
    res = equivalence_experiment(family, params, system, depth=8)
    seconds = time.perf_counter() - start
    ok = (system.n0 >= params.min_order
          and all(math.isfinite(r.ratio) and r.ratio > 0.0
                  for r in res.rows)
          and res.spread <= 10.0)
    return ok, {"spread": res.spread,
                "ratios": [r.ratio for r in res.rows],
                "min_order": params.min_order, "seconds": seconds}


def _check_certification():
    system = tensor_system([AxisSpec(n=3)])
    kk = system.n0 - 1
    s, p = 1.0, 2.0
    results = {}
    ok = True

    phi = system.phi[0]
    spec0 = AtomSpec(K=kk, L=kk, d_factor=8.0, s=s, p=p)
    first = certify_atom(phi, spec0, 0, (0,))
    strict = certify_atom(phi.scale(1.0 / (first.constant * (1.0 + 1e-9))),
                          spec0, 0, (0,))
    results["phi_atom_constant"] = first.constant
    ok &= first.passed and math.isfinite(first.constant)
    ok &= strict.bound_satisfied

    for d in (1, 3):
        mem = member(system, DyadicIndex(1, d - 1, (0,)))
        atom = mem.scale(2.0 ** (-d * (s + 0.5 - 1.0 / p)))
        spec = AtomSpec(K=kk, L=kk, d_factor=64.0, s=s, p=p)
        rep = certify_atom(atom, spec, d, (0,))
        norm = certify_atom(atom.scale(1.0 / (rep.constant * (1.0 + 1e-9))),
                            spec, d, (0,))
        results[f"psi_atom_constant_d{d}"] = rep.constant
        results[f"psi_atom_max_moment_d{d}"] = max(
            (abs(v) for v in rep.moments.values()), default=0.0)
        ok &= rep.passed and norm.bound_satisfied and rep.moments_ok

    kspec = KernelSpec(A=kk, B=kk, C=64.0)
    for d in (0, 2):
        g = (system.phi[0] if d == 0
             else member(system, DyadicIndex(1, d - 1, (0,)))
             .scale(2.0 ** (d / 2.0)))
        rep = certify_kernel(g, kspec, d, (0,))
        norm = certify_kernel(g.scale(1.0 / (rep.constant * (1.0 + 1e-9))),
                              kspec, d, (0,))
        results[f"kernel_constant_d{d}"] = rep.constant
        ok &= rep.passed and norm.bound_satisfied
    return bool(ok), results


_CHECKS = (
    ("symbol-factorization", _check_symbol_factorization),
    ("beta-consistency", _check_beta_consistency),
    ("orthonormality", _check_orthonormality),
    ("qmf", _check_qmf),
    ("supports", _check_supports),
    ("moments", _check_moments),
    ("gram-sum", _check_gram_sum),
    ("explicit-psi", _check_explicit_psi),
    ("weight-classifier", _check_weight_classifier),
    ("min-order", _check_min_order),
    ("seqnorm-oracle", _check_seqnorm_oracle),
    ("dual-reproduction", _check_dual_reproduction),
    ("equivalence-band", _check_equivalence_band),
    ("certification", _check_certification),
)

CHECK_NAMES = tuple(name for name, _ in _CHECKS)
_BY_NAME = dict(_CHECKS)


def run_check(name: str) -> CheckResult:
    if name not in _BY_NAME:
        raise InvalidParams(
            f"unknown check {name!r}; choose from {', '.join(CHECK_NAMES)}")
    passed, details = _BY_NAME[name]()
    return CheckResult(name=name, passed=bool(passed), details=details)


def run_all(names=None) -> list:
    """Run the battery (or a subset) in declaration order."""
    selected = CHECK_NAMES if names is None else tuple(names)
    return [run_check(name) for name in selected]
