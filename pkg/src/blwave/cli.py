"""Command-line front end.

Design rules, enforced throughout:

* machine-readable artifact (JSON, or JSON-lines for coefficient trees) on
  stdout or ``--out``; a short human summary on stderr;
* deterministic bytes: keys sorted, no timestamps, same config + seed =>
  identical output;
* exit 0 on success, 1 when a computation raises one of the library's
  typed errors, 2 when the request itself is invalid;
* sampled curves go to CSV (columns ``x[, y], value``), never inline JSON.

Heavy modules are imported inside the handlers so that ``--help`` stays
instant and thread limits from ``BLWAVE_THREADS`` are applied before
numerics load.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, fields

from .errors import BlwaveError, InvalidParams

__all__ = ["RunConfig", "main", "parse_weight_spec", "parse_function_spec"]

_COMMANDS = ("roots", "gen", "localize", "gram", "weights", "norm",
             "analyze", "synthesize", "certify", "equiv", "selftest")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, validated before any math runs.

    The axis lists describe one tensor factor each; a single entry is
    broadcast to ``dim`` axes.  Serializes to a flat JSON object and back
    without loss (`round-trips by construction`).
    """

    command: str
    orders: tuple = (2,)
    aux_orders: tuple = (1,)
    kks: tuple = (0,)
    anchors: tuple = (0,)
    shifts: tuple = (0,)
    dim: int = 0                     # 0 = len(orders)
    kind: str = ""
    mode: str = "dual"
    space: str = "b"
    s: float = 0.0
    p: float = 2.0
    q: float = 2.0
    r0: float = 1.0
    weight: str = "constant:c=1"
    tol: float = 1e-8
    moment_tol: float = 1e-10
    depth: int = 8
    level: int = 0
    tau: tuple = (0,)
    type_index: int = 1
    deriv_order: int = -1
    moment_order: int = -1
    support_factor: float = 64.0
    scale: float = 1.0
    normalized: bool = False
    family: str = "dilate"
    values: tuple = ()
    count: int = 3
    seed: int = 0
    samples: int = 512
    function: str = ""
    data: str = ""
    tree: str = ""
    out: str = ""
    csv_path: str = ""
    only: tuple = ()
    scope: str = "local"
    threads: int = 0

    def __post_init__(self):
        coerced = {
            "orders": tuple(int(v) for v in self.orders),
            "aux_orders": tuple(int(v) for v in self.aux_orders),
            "kks": tuple(int(v) for v in self.kks),
            "anchors": tuple(int(v) for v in self.anchors),
            "shifts": tuple(int(v) for v in self.shifts),
            "tau": tuple(int(v) for v in self.tau),
            "values": tuple(float(v) for v in self.values),
            "only": tuple(str(v) for v in self.only),
        }
        for name, val in coerced.items():
            object.__setattr__(self, name, val)
        if self.command not in _COMMANDS:
            raise InvalidParams(f"unknown command {self.command!r}")
        if any(n < 1 for n in self.orders) or not self.orders:
            raise InvalidParams("spline orders must be >= 1")
        if any(m < 1 for m in self.aux_orders):
            raise InvalidParams("auxiliary orders must be >= 1")
        if any(k not in (0, 1) for k in self.kks):
            raise InvalidParams("kk takes values 0 or 1")
        if self.dim < 0 or self.dim > 3:
            raise InvalidParams("dimension must be 0 (inferred) or 1..3")
        if self.space not in ("b", "f"):
            raise InvalidParams("space must be 'b' or 'f'")
        if not (self.p > 0.0 and self.q > 0.0):
            raise InvalidParams("p and q must be positive")
        if not math.isfinite(self.s):
            raise InvalidParams("smoothness must be finite")
        if not (math.isfinite(self.r0) and self.r0 >= 1.0):
            raise InvalidParams("r0 must be finite and >= 1")
        if self.tol <= 0.0 or self.moment_tol <= 0.0:
            raise InvalidParams("tolerances must be positive")
        if self.depth < 1:
            raise InvalidParams("depth must be >= 1")
        if self.level < 0:
            raise InvalidParams("level must be >= 0")
        if self.samples < 2:
            raise InvalidParams("need at least two samples")
        if self.count < 1:
            raise InvalidParams("family size must be >= 1")
        if self.threads < 0:
            raise InvalidParams("thread count must be positive")
        if self.scope not in ("local", "global"):
            raise InvalidParams("scope must be 'local' or 'global'")
        if self.mode not in ("dual", "paper"):
            raise InvalidParams("mode must be 'dual' or 'paper'")

    def to_dict(self) -> dict:
        out = {}
        for f_ in fields(self):
            val = getattr(self, f_.name)
            out[f_.name] = list(val) if isinstance(val, tuple) else val
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        known = {f_.name for f_ in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise InvalidParams(
                f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**payload)

    def axes(self):
        """Broadcast the per-axis lists to the requested dimension."""
        n_axes = self.dim if self.dim else len(self.orders)

        def broadcast(name, vals):
            if len(vals) == 1:
                return vals * n_axes
            if len(vals) != n_axes:
                raise InvalidParams(
                    f"{name} has {len(vals)} entries for {n_axes} axes")
            return vals

        return tuple(zip(broadcast("order", self.orders),
                         broadcast("m", self.aux_orders),
                         broadcast("kk", self.kks),
                         broadcast("k", self.anchors),
                         broadcast("s", self.shifts)))


# ---------------------------------------------------------------------------
# small spec grammars


def _parse_kv(body: str, caster, what: str) -> dict:
    out = {}
    if not body:
        return out
    for part in body.split(","):
        if "=" not in part:
            raise InvalidParams(f"{what}: expected key=value, got {part!r}")
        key, _, raw = part.partition("=")
        try:
            out[key.strip()] = caster(key.strip(), raw.strip())
        except (TypeError, ValueError) as exc:
            raise InvalidParams(f"{what}: bad value for {key!r}: {exc}")
    return out


def parse_weight_spec(spec: str):
    """``constant:c=1 | power:alpha=0.5 | hybrid:alpha=0.5 | table:file=...``

    Every kind accepts ``dim=N``; hybrid also ``rate=R``; each a key=value
    list after the colon.
    """
    from .weights import WeightModel

    head, _, body = spec.partition(":")
    kind = head.strip()
    if kind == "table":
        params = _parse_kv(body, lambda k, v: v, "weight spec")
        path = params.pop("file", None)
        dim = int(params.pop("dim", 1))
        if params or not path:
            raise InvalidParams("table weight takes file=... [,dim=N]")
        try:
            with open(path, encoding="utf-8") as fh:
                table = json.load(fh)
            return WeightModel.tabulated(table["breaks"], table["values"],
                                         dimension=dim)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InvalidParams(f"cannot load weight table {path!r}: {exc}")
    params = _parse_kv(body, lambda k, v: float(v), "weight spec")
    dim = int(params.pop("dim", 1))
    if kind == "constant":
        return WeightModel.constant(params.pop("c", 1.0), dimension=dim)
    if kind == "power":
        if "alpha" not in params:
            raise InvalidParams("power weight needs alpha=...")
        return WeightModel.power(params.pop("alpha"), dimension=dim)
    if kind == "hybrid":
        if "alpha" not in params:
            raise InvalidParams("hybrid weight needs alpha=...")
        alpha = params.pop("alpha")
        rate = params.pop("rate", 1.0)
        if params:
            raise InvalidParams(
                f"unknown weight parameters: {', '.join(sorted(params))}")
        return WeightModel.hybrid(alpha, dimension=dim, rate=rate)
    raise InvalidParams(
        f"unknown weight kind {kind!r}; use constant/power/hybrid/table")


def parse_function_spec(spec: str):
    """``bspline:order=n[,dilate=a][,shift=b][,scale=c]`` -> c*B_n(a(x-b))."""
    from .bsplines import bspline

    head, _, body = spec.partition(":")
    if head.strip() != "bspline":
        raise InvalidParams(
            f"unknown function kind {head.strip()!r}; only 'bspline' is known")
    params = _parse_kv(body, lambda k, v: float(v), "function spec")
    order = int(params.pop("order", -1))
    if order < 0:
        raise InvalidParams("function spec needs order=...")
    dilate = params.pop("dilate", 1.0)
    shift = params.pop("shift", 0.0)
    amp = params.pop("scale", 1.0)
    if params:
        raise InvalidParams(
            f"unknown function parameters: {', '.join(sorted(params))}")
    if dilate <= 0.0:
        raise InvalidParams("dilate must be positive")
    out = bspline(order)
    if dilate != 1.0:
        out = out.affine_arg(dilate, 0.0)
    if shift:
        out = out.translate(shift)
    if amp != 1.0:
        out = out.scale(amp)
    return out


def _load_grid_csv(path: str):
    from .transform import GridSample

    xs, ys = [], []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    x, y = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if not xs:      # tolerate one header line
                        continue
                    raise InvalidParams(
                        f"{path}: malformed sample row {row!r}")
                xs.append(x)
                ys.append(y)
    except OSError as exc:
        raise InvalidParams(f"cannot read samples from {path!r}: {exc}")
    return GridSample(tuple(xs), tuple(ys))


def _input_function(cfg: RunConfig):
    given = [bool(cfg.function), bool(cfg.data)]
    if sum(given) != 1:
        raise InvalidParams("provide exactly one of --function or --data")
    if cfg.function:
        return parse_function_spec(cfg.function)
    return _load_grid_csv(cfg.data)


# ---------------------------------------------------------------------------
# emission


def _json_default(obj):
    item = getattr(obj, "item", None)     # numpy scalars
    if callable(item):
        out = item()
        if isinstance(out, (bool, int, float)):
            return out
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _emit_json(payload, out_path: str):
    text = json.dumps(payload, sort_keys=True, indent=2,
                      default=_json_default) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out_path: str):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _write_curve_csv(path: str, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _sample_rows_1d(pp, n: int):
    import numpy as np

    lo, hi = pp.support
    xs = np.linspace(lo, hi, n)
    vals = pp(xs)
    return [(repr(float(x)), repr(float(v))) for x, v in zip(xs, vals)]


# ---------------------------------------------------------------------------
# handlers


def _system_from(cfg: RunConfig):
    from .localized import AxisSpec, tensor_system

    specs = [AxisSpec(n=n, m=m, kk=kk, k=k, s=s)
             for n, m, kk, k, s in cfg.axes()]
    return tensor_system(specs)


def _space_params(cfg: RunConfig, dimension=None):
    from .weights import SpaceParams

    w = parse_weight_spec(cfg.weight)
    if dimension is not None and w.dimension != dimension:
        raise InvalidParams(
            f"weight lives on R^{w.dimension}, problem is {dimension}-D")
    return SpaceParams(s=cfg.s, p=cfg.p, q=cfg.q, weight=w, r0=cfg.r0,
                       space=cfg.space.upper())


def _cmd_roots(cfg: RunConfig) -> int:
    from .symbol import order_tables

    tables = order_tables(cfg.orders[0])
    _emit_json(tables.as_dict(), cfg.out)
    _note(f"roots: order {tables.order}, {len(tables.roots)} roots, "
          f"beta={tables.beta:.6g}")
    return 0


def _cmd_gen(cfg: RunConfig) -> int:
    from .orthonormal import scaling_phi, wavelet_psi
    from .symbol import order_tables

    kind = cfg.kind or "phi"
    if kind not in ("phi", "psi"):
        raise InvalidParams("gen --kind takes 'phi' or 'psi'")
    tables = order_tables(cfg.orders[0])
    k, s = cfg.anchors[0], cfg.shifts[0]
    gen = (scaling_phi(tables, k, cfg.tol) if kind == "phi"
           else wavelet_psi(tables, k, s, cfg.tol))
    csv_path = cfg.csv_path or (cfg.out if cfg.out.endswith(".csv") else "")
    if csv_path:
        _write_curve_csv(csv_path, ("x", "value"),
                         _sample_rows_1d(gen.base, cfg.samples))
    sidecar = {
        "kind": kind, "order": tables.order, "k": k, "s": s,
        "tol": cfg.tol, "tail_bound": gen.tail_bound,
        "support": list(gen.support),
        "samples": cfg.samples if csv_path else 0,
        "csv": csv_path,
    }
    _emit_json(sidecar, "" if cfg.out.endswith(".csv") else cfg.out)
    _note(f"gen: {kind}_{tables.order} on [{gen.support[0]:.4g}, "
          f"{gen.support[1]:.4g}], tail bound {gen.tail_bound:.3g}")
    return 0


def _cmd_localize(cfg: RunConfig) -> int:
    from .localized import (localization_coefficients, localized_phi,
                            localized_psi)
    from .symbol import order_tables

    kind = cfg.kind or "psi"
    if kind not in ("phi", "psi"):
        raise InvalidParams("localize --kind takes 'phi' or 'psi'")
    n, m, kk, k, s = cfg.axes()[0]
    tables_n = order_tables(n)
    tables_m = order_tables(m) if kk else None
    if kind == "phi":
        pp = localized_phi(tables_n, k)
    else:
        pp = localized_psi(tables_n, tables_m, kk, k, s)
    coeffs = localization_coefficients(tables_n, tables_m, kk)
    if cfg.csv_path:
        _write_curve_csv(cfg.csv_path, ("x", "value"),
                         _sample_rows_1d(pp, cfg.samples))
    _emit_json({
        "kind": kind, "order": n, "m": m, "kk": kk, "k": k, "s": s,
        "support": list(pp.support),
        "coefficients": coeffs.as_dict(),
        "piecewise": pp.to_json_dict(),
    }, cfg.out)
    _note(f"localize: {kind} support [{pp.support[0]:.4g}, "
          f"{pp.support[1]:.4g}] with {len(pp.pieces)} cells")
    return 0


def _cmd_gram(cfg: RunConfig) -> int:
    from .localized import gram_sum, localization_coefficients
    from .symbol import order_tables

    system = _system_from(cfg)
    axes_payload = []
    for n, m, kk, k, s in cfg.axes():
        coeffs = localization_coefficients(
            order_tables(n), order_tables(m) if kk else None, kk)
        axes_payload.append({"order": n, "m": m, "kk": kk, "k": k, "s": s,
                             "table": coeffs.as_dict()})
    sums = {str(i): gram_sum(system, i)
            for i in range(1, 2 ** system.dimension)}
    _emit_json({"dimension": system.dimension, "axes": axes_payload,
                "gram_sums": sums}, cfg.out)
    worst = max(abs(v - 1.0) for v in sums.values())
    _note(f"gram: {len(sums)} wavelet types, max |sum - 1| = {worst:.3e}")
    return 0


def _cmd_weights(cfg: RunConfig) -> int:
    from .weights import ap_global_constant, ap_local_constant

    w = parse_weight_spec(cfg.weight)
    sweep = ap_local_constant if cfg.scope == "local" else ap_global_constant
    est = sweep(w, cfg.p)
    payload = {
        "spec": cfg.weight,
        "p": cfg.p,
        "scope": est.scope,
        "constant": est.constant,
        "argmax_cube": (None if est.argmax_cube is None
                        else [list(ax) for ax in est.argmax_cube]),
        "refinement_trace": list(est.trace),
        "stabilized": est.stabilized(),
        "divergent": est.divergent(),
        "locally_integrable": w.is_locally_integrable,
        "dimension": w.dimension,
    }
    _emit_json(payload, cfg.out)
    _note(f"weights: {cfg.scope} constant estimate {est.constant:.6g} "
          f"({'stabilized' if est.stabilized() else 'not stabilized'})")
    return 0


def _cmd_norm(cfg: RunConfig) -> int:
    given = [bool(cfg.tree), bool(cfg.function), bool(cfg.data)]
    if sum(given) != 1:
        raise InvalidParams(
            "norm needs exactly one input: --tree, --function, or --data")
    if cfg.tree:
        from .seqspace import CoefficientTree, norm_b, norm_f

        try:
            with open(cfg.tree, encoding="utf-8") as fh:
                tree = CoefficientTree.from_json_lines(fh.read())
        except OSError as exc:
            raise InvalidParams(f"cannot read tree {cfg.tree!r}: {exc}")
        params = _space_params(cfg, tree.dimension)
        value = (norm_b if cfg.space == "b" else norm_f)(tree, params)
        _emit_json({"kind": "sequence", "space": cfg.space, "value": value,
                    "entries": len(tree), "params": params.as_dict()},
                   cfg.out)
        _note(f"norm: sequence {cfg.space}-norm {value:.9g} "
              f"over {len(tree)} coefficients")
        return 0

    from .transform import convolution_norm

    f = _input_function(cfg)
    params = _space_params(cfg, 1)
    result = convolution_norm(f, params, depth=cfg.depth)
    payload = result.as_dict()
    payload.update({"kind": "convolution", "params": params.as_dict()})
    _emit_json(payload, cfg.out)
    _note(f"norm: convolution {cfg.space.upper()}-norm {result.value:.9g}, "
          f"tail ratio {result.tail_ratio:.3g}")
    return 0


def _cmd_analyze(cfg: RunConfig) -> int:
    from .transform import analyze

    f = _input_function(cfg)
    system = _system_from(cfg)
    tree = analyze(f, system, cfg.depth)
    _emit_text(tree.to_json_lines() + "\n", cfg.out)
    _note(f"analyze: {len(tree)} coefficients to depth {cfg.depth} "
          f"({system.dimension}-D system)")
    return 0


def _cmd_synthesize(cfg: RunConfig) -> int:
    from .seqspace import CoefficientTree
    from .transform import l2_norm, synthesize

    if not cfg.tree:
        raise InvalidParams("synthesize needs --tree FILE (JSON lines)")
    try:
        with open(cfg.tree, encoding="utf-8") as fh:
            tree = CoefficientTree.from_json_lines(fh.read())
    except OSError as exc:
        raise InvalidParams(f"cannot read tree {cfg.tree!r}: {exc}")
    system = _system_from(cfg)
    out = synthesize(tree, system, cfg.mode)
    if cfg.csv_path:
        if system.dimension != 1:
            raise InvalidParams("CSV curves are emitted for 1-D syntheses")
        _write_curve_csv(cfg.csv_path, ("x", "value"),
                         _sample_rows_1d(out, cfg.samples))
    if system.dimension == 1:
        support = list(out.support)
    else:
        boxes = [t.support for t in out.terms]
        support = [[min(b[ax][0] for b in boxes),
                    max(b[ax][1] for b in boxes)]
                   for ax in range(system.dimension)]
    _emit_json({"mode": cfg.mode, "coefficients": len(tree),
                "dimension": system.dimension,
                "l2_norm": l2_norm(out, system.dimension),
                "support": support, "csv": cfg.csv_path}, cfg.out)
    _note(f"synthesize: rebuilt from {len(tree)} coefficients "
          f"({cfg.mode} mode)")
    return 0


def _cmd_certify(cfg: RunConfig) -> int:
    from .localized import DyadicIndex, member
    from .transform import AtomSpec, KernelSpec, certify_atom, certify_kernel

    kind = cfg.kind or "atom"
    if kind not in ("atom", "kernel"):
        raise InvalidParams("certify --kind takes 'atom' or 'kernel'")
    system = _system_from(cfg)
    order = cfg.deriv_order if cfg.deriv_order >= 0 else system.n0 - 1
    momord = cfg.moment_order if cfg.moment_order >= 0 else system.n0 - 1
    tau = cfg.tau if len(cfg.tau) == system.dimension \
        else (cfg.tau[0],) * system.dimension
    d = cfg.level
    if cfg.type_index == 0:
        target = member(system, DyadicIndex(0, 0, tau))
    elif d >= 1:
        target = member(system, DyadicIndex(cfg.type_index, d - 1, tau))
    else:
        raise InvalidParams(
            "wavelet members live at level >= 1; use --type 0 at level 0")
    target = target.scale(cfg.scale)

    def check(g):
        if kind == "atom":
            spec = AtomSpec(K=order, L=momord, d_factor=cfg.support_factor,
                            s=cfg.s, p=cfg.p)
            return certify_atom(g, spec, d, tau, cfg.moment_tol)
        spec = KernelSpec(A=order, B=momord, C=cfg.support_factor)
        return certify_kernel(g, spec, d, tau, cfg.moment_tol)

    report = check(target)
    payload = report.as_dict()
    if cfg.normalized and math.isfinite(report.constant) \
            and report.constant > 0.0:
        strict = check(target.scale(1.0 / (report.constant * (1.0 + 1e-9))))
        payload["normalized"] = strict.as_dict()
    payload.update({"i": cfg.type_index, "d": d, "tau": list(tau),
                    "scale": cfg.scale, "deriv_order": order,
                    "moment_order": momord})
    _emit_json(payload, cfg.out)
    _note(f"certify: {kind} at level {d} "
          f"{'passed' if report.passed else 'FAILED'} "
          f"(constant {report.constant:.6g})")
    return 0


def _build_family(cfg: RunConfig, base):
    from .transform import dilate_family, scalar_family, translate_family

    if cfg.family == "dilate":
        levels = [int(v) for v in cfg.values] or list(range(cfg.count))
        return dilate_family(base, levels)
    if cfg.family == "translate":
        shifts = [int(v) for v in cfg.values] or list(range(cfg.count))
        return translate_family(base, shifts)
    if cfg.family == "scalar":
        vals = list(cfg.values) or [2.0 ** j for j in range(cfg.count)]
        return scalar_family(base, vals)
    if cfg.family == "random":
        import numpy as np

        rng = np.random.default_rng(cfg.seed)
        fam = []
        for idx in range(cfg.count):
            j = int(rng.integers(0, 4))
            a = int(rng.integers(-4, 5))
            c = float(2.0 ** rng.uniform(-2.0, 2.0))
            fam.append((f"random_{idx}_d{j}_t{a}",
                        base.affine_arg(2.0 ** j, 0.0)
                        .translate(float(a)).scale(c)))
        return fam
    raise InvalidParams(
        "family must be one of dilate, translate, scalar, random")


def _cmd_equiv(cfg: RunConfig) -> int:
    from .transform import equivalence_experiment

    base = (parse_function_spec(cfg.function) if cfg.function
            else parse_function_spec("bspline:order=2"))
    family = _build_family(cfg, base)
    system = _system_from(cfg)
    params = _space_params(cfg, system.dimension)
    result = equivalence_experiment(family, params, system, depth=cfg.depth)
    payload = result.as_dict()
    payload.update({"family": cfg.family, "seed": cfg.seed,
                    "depth": cfg.depth, "weight": cfg.weight})
    _emit_json(payload, cfg.out)
    _note(f"equiv: spread {result.spread:.4g} across {len(result.rows)} "
          f"family members (min_order {result.min_order})")
    return 0


def _cmd_selftest(cfg: RunConfig) -> int:
    from . import acceptance

    names = cfg.only or acceptance.CHECK_NAMES
    results = []
    failed = 0
    for name in names:
        res = acceptance.run_check(name)
        results.append(res.as_dict())
        failed += 0 if res.passed else 1
        _note(f"{'ok  ' if res.passed else 'FAIL'} {name}")
    _emit_json({"results": results, "failed": failed,
                "total": len(results)}, cfg.out)
    _note(f"selftest: {len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


_HANDLERS = {
    "roots": _cmd_roots,
    "gen": _cmd_gen,
    "localize": _cmd_localize,
    "gram": _cmd_gram,
    "weights": _cmd_weights,
    "norm": _cmd_norm,
    "analyze": _cmd_analyze,
    "synthesize": _cmd_synthesize,
    "certify": _cmd_certify,
    "equiv": _cmd_equiv,
    "selftest": _cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument plumbing


def _add_axis_flags(sub):
    sub.add_argument("--order", dest="orders", type=int, action="append",
                     metavar="N", help="spline order (repeat per axis)")
    sub.add_argument("--m", dest="aux_orders", type=int, action="append",
                     metavar="M", help="auxiliary order (with --kk 1)")
    sub.add_argument("--kk", dest="kks", type=int, action="append",
                     choices=(0, 1), help="localization exponent")
    sub.add_argument("--k", dest="anchors", type=int, action="append",
                     metavar="K", help="integer anchor shift")
    sub.add_argument("--s-shift", dest="shifts", type=int, action="append",
                     metavar="S", help="wavelet translation")
    sub.add_argument("--dim", type=int, help="broadcast axes to N dimensions")


def _add_space_flags(sub):
    sub.add_argument("--s", dest="s", type=float, help="smoothness")
    sub.add_argument("--p", type=float, help="integral exponent")
    sub.add_argument("--q", type=float, help="summation exponent")
    sub.add_argument("--space", choices=("b", "f"), help="scale of spaces")
    sub.add_argument("--weight", help="weight spec, e.g. power:alpha=0.5")
    sub.add_argument("--r0", type=float, help="weight growth exponent bound")
    sub.add_argument("--depth", type=int, help="finest dyadic level")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blwave",
        description="Spline wavelet systems, weighted norms, and their "
                    "cross-checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--out", help="write the JSON artifact here")
    common.add_argument("--csv", dest="csv_path",
                        help="write sampled curve CSV here")
    common.add_argument("--threads", type=int,
                        help="cap numeric threads (also: BLWAVE_THREADS)")
    common.add_argument("--tol", type=float, help="series truncation"
                        " tolerance")
    common.add_argument("--samples", type=int, help="CSV sample count")

    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("roots", parents=[common],
                         help="per-order symbol roots and constants")
    sp.add_argument("--order", dest="orders", type=int, action="append",
                    required=True)

    sp = subs.add_parser("gen", parents=[common],
                         help="sample the orthonormal scaling/wavelet pair")
    _add_axis_flags(sp)
    sp.add_argument("--kind", choices=("phi", "psi"))
    sp.add_argument("--s", dest="shifts", type=int, action="append",
                    help="alias of --s-shift")

    sp = subs.add_parser("localize", parents=[common],
                         help="compactly supported combinations")
    _add_axis_flags(sp)
    sp.add_argument("--kind", choices=("phi", "psi"))
    sp.add_argument("--s", dest="shifts", type=int, action="append",
                    help="alias of --s-shift")

    sp = subs.add_parser("gram", parents=[common],
                         help="localization tables and their unit sums")
    _add_axis_flags(sp)

    sp = subs.add_parser("weights", parents=[common],
                         help="cube-quotient sweep of a weight")
    sp.add_argument("--spec", dest="weight", help="weight spec string")
    sp.add_argument("--p", type=float)
    scope = sp.add_mutually_exclusive_group()
    scope.add_argument("--local", dest="scope", action="store_const",
                       const="local")
    scope.add_argument("--global", dest="scope", action="store_const",
                       const="global")

    sp = subs.add_parser("norm", parents=[common],
                         help="sequence norm of a tree or convolution norm "
                              "of a function")
    _add_space_flags(sp)
    sp.add_argument("--tree", help="coefficient tree (JSON lines)")
    sp.add_argument("--function", help="e.g. bspline:order=2,dilate=2")
    sp.add_argument("--data", help="CSV of x,value samples")

    sp = subs.add_parser("analyze", parents=[common],
                         help="coefficient tree of a function")
    _add_axis_flags(sp)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--function")
    sp.add_argument("--data")

    sp = subs.add_parser("synthesize", parents=[common],
                         help="rebuild a function from a tree")
    _add_axis_flags(sp)
    sp.add_argument("--tree", required=True)
    sp.add_argument("--mode", choices=("dual", "paper"))

    sp = subs.add_parser("certify", parents=[common],
                         help="atom/kernel inequality report for a member")
    _add_axis_flags(sp)
    _add_space_flags(sp)
    sp.add_argument("--kind", choices=("atom", "kernel"))
    sp.add_argument("--level", type=int, help="dyadic level d")
    sp.add_argument("--tau", type=lambda v: tuple(
        int(t) for t in v.split(",")), help="translation, comma-separated")
    sp.add_argument("--type", dest="type_index", type=int,
                    help="wavelet type index i")
    sp.add_argument("--deriv-order", type=int)
    sp.add_argument("--moment-order", type=int)
    sp.add_argument("--support-factor", type=float)
    sp.add_argument("--scale", type=float)
    sp.add_argument("--normalized", action="store_const", const=True,
                    help="also report after dividing by the constant")
    sp.add_argument("--moment-tol", type=float)

    sp = subs.add_parser("equiv", parents=[common],
                         help="sequence-vs-convolution norm band")
    _add_axis_flags(sp)
    _add_space_flags(sp)
    sp.add_argument("--function", help="base function spec")
    sp.add_argument("--family",
                    choices=("dilate", "translate", "scalar", "random"))
    sp.add_argument("--values", type=lambda v: tuple(
        float(t) for t in v.split(",")), help="explicit family parameters")
    sp.add_argument("--count", type=int, help="family size")
    sp.add_argument("--seed", type=int, help="rng seed for --family random")

    sp = subs.add_parser("selftest", parents=[common],
                         help="run the release checklist")
    sp.add_argument("--only", action="append",
                    help="run a single named check (repeatable)")

    return parser


def _apply_threads(threads: int):
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


def _prepare(argv) -> RunConfig:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    cli_values = {k: v for k, v in vars(ns).items()
                  if v is not None and k != "config"}
    merged = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                merged.update(json.load(fh))
        except (OSError, ValueError) as exc:
            raise InvalidParams(f"cannot load config {ns.config!r}: {exc}")
        merged.pop("command", None)
    merged.update(cli_values)

    env_threads = os.environ.get("BLWAVE_THREADS")
    if "threads" not in merged and env_threads is not None:
        try:
            merged["threads"] = int(env_threads)
        except ValueError:
            raise InvalidParams(
                f"BLWAVE_THREADS must be an integer, got {env_threads!r}")
    return RunConfig.from_dict(merged)


def main(argv=None) -> int:
    try:
        cfg = _prepare(sys.argv[1:] if argv is None else list(argv))
    except InvalidParams as exc:
        print(f"blwave: invalid request: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:        # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    _apply_threads(cfg.threads)
    try:
        return _HANDLERS[cfg.command](cfg)
    except InvalidParams as exc:
        print(f"blwave: invalid request: {exc}", file=sys.stderr)
        return 2
    except BlwaveError as exc:
        print(f"blwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
