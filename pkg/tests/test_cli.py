"""End-to-end tests of the ``blwave`` command line."""

import json
import math
import subprocess
import sys

import pytest

from blwave.cli import (RunConfig, main, parse_function_spec,
                        parse_weight_spec)
from blwave.errors import InvalidParams

ROOT_1 = 2.0 - math.sqrt(3.0)


def run_cli(capsys, *argv):
    """Invoke main() in-process, returning (exit_code, stdout, stderr)."""
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestRunConfig:
    def test_round_trips_through_dict(self):
        cfg = RunConfig(command="equiv", orders=(3, 2), kks=(1, 0),
                        aux_orders=(2, 1), s=0.75, weight="power:alpha=0.5",
                        values=(1.0, 4.0), seed=11, out="x.json")
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_round_trip_survives_json(self):
        cfg = RunConfig(command="norm", tau=(1, -2), q=math.inf)
        again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(InvalidParams, match="unknown config key"):
            RunConfig.from_dict({"command": "roots", "ordre": [2]})

    def test_unknown_command_rejected(self):
        with pytest.raises(InvalidParams):
            RunConfig(command="frobnicate")

    @pytest.mark.parametrize("bad", [
        {"orders": (0,)}, {"kks": (2,)}, {"p": 0.0}, {"depth": 0},
        {"r0": 0.5}, {"scope": "both"}, {"mode": "verbatim"},
        {"samples": 1},
    ])
    def test_field_validation(self, bad):
        with pytest.raises(InvalidParams):
            RunConfig(command="norm", **bad)

    def test_axes_broadcast_single_spec(self):
        cfg = RunConfig(command="gram", orders=(2,), kks=(1,), dim=3)
        axes = cfg.axes()
        assert len(axes) == 3 and all(ax == (2, 1, 1, 0, 0) for ax in axes)

    def test_axes_length_mismatch(self):
        cfg = RunConfig(command="gram", orders=(2, 3), kks=(1, 0, 1))
        with pytest.raises(InvalidParams, match="entries for 2 axes"):
            cfg.axes()


class TestWeightGrammar:
    def test_constant_default(self):
        w = parse_weight_spec("constant:c=1")
        assert w.kind == "constant" and w.amplitude == 1.0

    def test_power(self):
        w = parse_weight_spec("power:alpha=0.5,dim=2")
        assert (w.kind, w.alpha, w.dimension) == ("power", 0.5, 2)

    def test_hybrid_with_rate(self):
        w = parse_weight_spec("hybrid:alpha=-0.25,rate=2")
        assert (w.alpha, w.rate) == (-0.25, 2.0)

    def test_table_from_file(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(json.dumps({"breaks": [-1, 0, 1],
                                    "values": [2.0, 3.0]}))
        w = parse_weight_spec(f"table:file={path}")
        assert w.kind == "tabulated"
        assert w.breaks == (-1.0, 0.0, 1.0) and w.values == (2.0, 3.0)

    @pytest.mark.parametrize("spec", [
        "gauss:sigma=1", "power", "power:alpha=oops",
        "hybrid:alpha=1,color=red", "table:file=/nonexistent.json",
        "power:alpha",
    ])
    def test_rejects(self, spec):
        with pytest.raises(InvalidParams):
            parse_weight_spec(spec)


class TestFunctionGrammar:
    def test_plain_bspline(self):
        f = parse_function_spec("bspline:order=2")
        assert f.support == (0.0, 3.0)

    def test_composition_order(self):
        # scale * B(dilate * (x - shift))
        f = parse_function_spec("bspline:order=1,dilate=2,shift=0.5,scale=3")
        g = parse_function_spec("bspline:order=1")
        for x in (0.6, 1.0, 1.4):
            assert f(x) == pytest.approx(3.0 * g(2.0 * (x - 0.5)))

    def test_rejects_unknown_kind(self):
        with pytest.raises(InvalidParams):
            parse_function_spec("sinc:order=2")

    def test_rejects_missing_order(self):
        with pytest.raises(InvalidParams):
            parse_function_spec("bspline:dilate=2")

    def test_rejects_negative_dilate(self):
        with pytest.raises(InvalidParams):
            parse_function_spec("bspline:order=2,dilate=-1")


class TestRoots:
    def test_order_one_root_value(self, capsys):
        payload = run_json(capsys, "roots", "--order", "1")
        assert payload["roots"] == [pytest.approx(ROOT_1, abs=1e-12)]
        assert set(payload) == {"order", "roots", "rho", "alpha", "beta",
                                "lambda"}

    def test_bytes_are_reproducible(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["roots", "--order", "4", "--out", str(a)]) == 0
        assert main(["roots", "--order", "4", "--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_order_beyond_tables_is_a_compute_error(self, capsys):
        code, _, err = run_cli(capsys, "roots", "--order", "99")
        assert code == 1 and "OrderTooLarge" in err


class TestLocalize:
    def test_documented_example_support(self, capsys):
        payload = run_json(capsys, "localize", "--order", "1", "--kk", "0",
                           "--s", "0")
        assert payload["support"] == [-0.5, 2.5]

    def test_piecewise_payload_round_trips(self, capsys):
        from blwave.bsplines import PiecewisePolynomial

        payload = run_json(capsys, "localize", "--order", "2", "--kk", "1",
                           "--m", "2")
        pp = payload["piecewise"]
        rebuilt = PiecewisePolynomial(tuple(pp["breakpoints"]),
                                      tuple(tuple(c) for c in pp["pieces"]))
        assert list(rebuilt.support) == payload["support"]

    def test_csv_curve(self, capsys, tmp_path):
        curve = tmp_path / "curve.csv"
        run_json(capsys, "localize", "--order", "1", "--samples", "16",
                 "--csv", str(curve))
        lines = curve.read_text().splitlines()
        assert lines[0] == "x,value" and len(lines) == 17


class TestGen:
    def test_csv_and_sidecar(self, capsys, tmp_path):
        out = tmp_path / "psi.csv"
        _, stdout, _ = run_cli(capsys, "gen", "--kind", "psi", "--order",
                               "2", "--k", "0", "--s", "0", "--tol", "1e-6",
                               "--samples", "64", "--out", str(out))
        sidecar = json.loads(stdout)
        assert sidecar["tail_bound"] < 1e-6
        assert len(sidecar["support"]) == 2
        rows = out.read_text().splitlines()
        assert rows[0] == "x,value" and len(rows) == 65

    def test_rejects_other_kinds(self, capsys):
        code, _, _ = run_cli(capsys, "gen", "--kind", "phi3", "--order", "2")
        assert code == 2


class TestGramCommand:
    def test_sums_near_one(self, capsys):
        payload = run_json(capsys, "gram", "--order", "2", "--order", "1",
                           "--kk", "1", "--kk", "0")
        assert payload["dimension"] == 2
        assert set(payload["gram_sums"]) == {"1", "2", "3"}
        for v in payload["gram_sums"].values():
            assert v == pytest.approx(1.0, abs=1e-8)


class TestWeightsCommand:
    def test_local_sweep_of_half_power(self, capsys):
        payload = run_json(capsys, "weights", "--spec", "power:alpha=0.5",
                           "--p", "2", "--local")
        assert payload["scope"] == "local"
        assert payload["stabilized"] is True
        assert payload["constant"] == pytest.approx(4.0 / 3.0, rel=1e-3)
        assert payload["locally_integrable"] is True

    def test_global_scope_flag(self, capsys):
        payload = run_json(capsys, "weights", "--spec", "constant:c=2",
                           "--p", "2", "--global")
        assert payload["scope"] == "global"
        assert payload["constant"] == pytest.approx(1.0)


class TestNormCommand:
    def test_tree_norm_matches_library(self, capsys, tmp_path):
        from blwave.seqspace import CoefficientTree, norm_b
        from blwave.weights import SpaceParams, WeightModel

        tree = (CoefficientTree(dimension=1, depth=2)
                .with_entry(0, 0, (0,), 1.0)
                .with_entry(1, 1, (2,), -0.5)
                .with_entry(1, 2, (-1,), 0.25))
        path = tmp_path / "tree.jsonl"
        path.write_text(tree.to_json_lines() + "\n")
        payload = run_json(capsys, "norm", "--tree", str(path), "--space",
                           "b", "--s", "0.5", "--p", "2", "--q", "1.5")
        params = SpaceParams(s=0.5, p=2, q=1.5,
                             weight=WeightModel.constant(1.0))
        assert payload["value"] == pytest.approx(norm_b(tree, params),
                                                 rel=1e-12)
        assert payload["entries"] == 3

    def test_function_norm_matches_library(self, capsys):
        from blwave.bsplines import bspline
        from blwave.transform import convolution_norm
        from blwave.weights import SpaceParams, WeightModel

        payload = run_json(capsys, "norm", "--function", "bspline:order=2",
                           "--s", "1", "--p", "2", "--q", "2", "--depth",
                           "5")
        params = SpaceParams(s=1, p=2, q=2, weight=WeightModel.constant(1.0))
        expected = convolution_norm(bspline(2), params, depth=5)
        assert payload["value"] == pytest.approx(expected.value, rel=1e-12)
        assert payload["kind"] == "convolution"

    def test_data_input(self, capsys, tmp_path):
        path = tmp_path / "hat.csv"
        path.write_text("x,value\n-1,0\n0,1\n1,0\n")
        payload = run_json(capsys, "norm", "--data", str(path), "--s", "0",
                           "--p", "2", "--q", "2", "--depth", "4")
        assert payload["value"] > 0.0

    def test_requires_exactly_one_input(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "norm", "--s", "1")
        assert code == 2 and "exactly one input" in err
        tree = tmp_path / "t.jsonl"
        tree.write_text('{"d": 0, "i": 0, "tau": [0], "value": 1.0}\n')
        code, _, _ = run_cli(capsys, "norm", "--tree", str(tree),
                             "--function", "bspline:order=2")
        assert code == 2

    def test_nonintegrable_weight_is_a_compute_error(self, capsys):
        code, _, err = run_cli(capsys, "norm", "--function",
                               "bspline:order=2", "--weight",
                               "power:alpha=-1")
        assert code == 1 and "NonIntegrable" in err


class TestAnalyzeSynthesize:
    def test_round_trip_preserves_l2_mass(self, capsys, tmp_path):
        tree_path = tmp_path / "tree.jsonl"
        code, _, err = run_cli(capsys, "analyze", "--order", "2", "--depth",
                               "3", "--function", "bspline:order=2,shift=1",
                               "--out", str(tree_path))
        assert code == 0, err
        curve = tmp_path / "curve.csv"
        payload = run_json(capsys, "synthesize", "--order", "2", "--tree",
                           str(tree_path), "--mode", "dual", "--csv",
                           str(curve), "--samples", "32")
        # the input lies in the system's span, so the dual synthesis
        # reproduces it exactly; sqrt(11/20) is the L2 norm of that spline
        assert payload["l2_norm"] == pytest.approx(math.sqrt(0.55),
                                                   abs=1e-9)
        assert curve.read_text().splitlines()[0] == "x,value"

    def test_analyze_stdout_is_json_lines(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--order", "1", "--depth",
                               "1", "--function", "bspline:order=1")
        assert code == 0
        rows = [json.loads(line) for line in out.strip().splitlines()]
        assert rows and all(set(r) == {"d", "i", "tau", "value"}
                            for r in rows)

    def test_paper_mode_runs(self, capsys, tmp_path):
        tree = tmp_path / "t.jsonl"
        tree.write_text('{"d": 0, "i": 0, "tau": [0], "value": 2.0}\n')
        payload = run_json(capsys, "synthesize", "--order", "2", "--tree",
                           str(tree), "--mode", "paper")
        assert payload["mode"] == "paper" and payload["coefficients"] == 1


class TestCertifyCommand:
    def test_atom_report(self, capsys):
        payload = run_json(capsys, "certify", "--order", "3", "--kind",
                           "atom", "--level", "2", "--type", "1", "--tau",
                           "0", "--s", "1", "--p", "2", "--scale", "0.05",
                           "--support-factor", "64", "--normalized")
        assert payload["passed"] is True
        assert payload["normalized"]["bound_satisfied"] is True
        assert payload["deriv_order"] == 2    # n0 - 1 by default

    def test_kernel_min_factor(self, capsys):
        from blwave.localized import AxisSpec, DyadicIndex, member
        from blwave.localized import tensor_system

        payload = run_json(capsys, "certify", "--order", "2", "--kind",
                           "kernel", "--level", "1", "--type", "1",
                           "--support-factor", "64")
        mem = member(tensor_system([AxisSpec(n=2)]), DyadicIndex(1, 0, (0,)))
        lo, hi = mem.factors[0].support
        expected = 2.0 * max(abs(lo), abs(hi)) / 2.0 ** -1
        assert payload["min_support_factor"] == pytest.approx(expected)
        assert payload["passed"] is True

    def test_wavelet_at_root_level_rejected(self, capsys):
        code, _, err = run_cli(capsys, "certify", "--order", "2", "--type",
                               "1", "--level", "0")
        assert code == 2 and "level" in err


class TestEquivCommand:
    def test_dilate_band(self, capsys):
        payload = run_json(capsys, "equiv", "--order", "3", "--family",
                           "dilate", "--count", "3", "--s", "1", "--p", "2",
                           "--q", "2", "--depth", "4")
        assert len(payload["rows"]) == 3
        assert payload["spread"] <= 10.0
        assert payload["min_order"] == 3

    def test_random_family_is_seeded(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["equiv", "--order", "3", "--family", "random", "--count",
                "2", "--seed", "7", "--depth", "3"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
        rows = json.loads(a.read_text())["rows"]
        assert all(r["id"].startswith("random_") for r in rows)

    def test_order_too_small_maps_to_exit_one(self, capsys):
        code, _, err = run_cli(capsys, "equiv", "--order", "1", "--family",
                               "dilate", "--count", "2", "--s", "2.5",
                               "--p", "2", "--q", "2", "--depth", "3")
        assert code == 1 and "OrderTooSmall" in err


class TestSelftest:
    def test_subset_passes(self, capsys):
        _, out, err = run_cli(capsys, "selftest", "--only", "min-order",
                              "--only", "qmf")
        payload = json.loads(out)
        assert payload["failed"] == 0 and payload["total"] == 2
        assert "2/2 checks passed" in err

    def test_unknown_check_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "selftest", "--only", "warp-core")
        assert code == 2


class TestConfigPlumbing:
    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"orders": [1], "kks": [0],
                                   "shifts": [0]}))
        payload = run_json(capsys, "localize", "--config", str(cfg))
        assert payload["support"] == [-0.5, 2.5]
        payload = run_json(capsys, "localize", "--config", str(cfg),
                           "--order", "2")
        assert payload["order"] == 2     # flag wins over file

    def test_bad_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text("{not json")
        code, _, _ = run_cli(capsys, "localize", "--config", str(cfg))
        assert code == 2
        cfg.write_text(json.dumps({"ordre": [2]}))
        code, _, err = run_cli(capsys, "localize", "--config", str(cfg))
        assert code == 2 and "ordre" in err

    def test_threads_env_validation(self, capsys, monkeypatch):
        monkeypatch.setenv("BLWAVE_THREADS", "lots")
        code, _, err = run_cli(capsys, "roots", "--order", "1")
        assert code == 2 and "BLWAVE_THREADS" in err

    def test_threads_env_applied(self, capsys, monkeypatch):
        monkeypatch.setenv("BLWAVE_THREADS", "1")
        monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
        assert main(["roots", "--order", "1"]) == 0
        capsys.readouterr()
        import os

        assert os.environ["OMP_NUM_THREADS"] == "1"


def test_console_script_smoke():
    """The installed entry point answers like the module does."""
    proc = subprocess.run(["blwave", "roots", "--order", "1"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["roots"][0] == pytest.approx(ROOT_1)


def test_module_invocation_smoke():
    proc = subprocess.run([sys.executable, "-m", "blwave.cli", "selftest",
                           "--only", "beta-consistency"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["failed"] == 0
