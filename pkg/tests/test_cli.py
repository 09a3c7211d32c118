"""Command-line interface: exit codes, JSON output stability, input
validation messages.  All invocations go through ``run`` in-process."""

import json
import math

import numpy as np
import pytest

from g3theta.cli import dump_json, parse_point, parse_tau, run
from g3theta.cli import InputError
from g3theta.theta import norm_theta, theta_char
from g3theta.chars import Characteristic

from conftest import FIXTURES

TAU_RANDOM = str(FIXTURES / "tau_random.json")
TAU_HYP = str(FIXTURES / "tau_hyperelliptic.json")

SMALL = ["--points", "4096", "--shifts", "4"]


def invoke(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestJsonRendering:
    def test_floats_have_17_digits(self):
        text = dump_json({"x": 1.0 / 3.0})
        assert "0.33333333333333331" in text
        assert json.loads(text)["x"] == 1.0 / 3.0

    def test_non_finite_floats(self):
        text = dump_json({"a": float("nan"), "b": float("inf")})
        assert "NaN" in text and "Infinity" in text

    def test_complex_rendering(self):
        data = json.loads(dump_json({"v": 1.5 - 2.5j}))
        assert data["v"] == {"re": 1.5, "im": -2.5}

    def test_field_order_is_insertion_order(self):
        text = dump_json({"zzz": 1, "aaa": 2})
        assert text.index("zzz") < text.index("aaa")


class TestInputParsing:
    def test_parse_tau_fixture(self):
        tau = parse_tau(TAU_RANDOM)
        assert tau.g == 3 and tau.lambda_min > 0

    def test_missing_file(self):
        with pytest.raises(InputError, match="cannot read"):
            parse_tau("/nonexistent/tau.json")

    def test_missing_field_named(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"g": 3, "re": [[0,0,0],[0,0,0],[0,0,0]]}')
        with pytest.raises(InputError, match="'im'"):
            parse_tau(str(p))

    def test_wrong_shape_named(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"g": 3, "re": [[0.0] * 3] * 2,
                                 "im": [[1.0] * 3] * 3}))
        with pytest.raises(InputError, match="'re'"):
            parse_tau(str(p))

    def test_indefinite_imaginary_part(self, tmp_path):
        p = tmp_path / "bad.json"
        im = (-np.eye(3)).tolist()
        p.write_text(json.dumps({"g": 3, "re": [[0.0] * 3] * 3, "im": im}))
        with pytest.raises(InputError, match="not positive definite"):
            parse_tau(str(p))

    def test_parse_point(self):
        z = parse_point("[[0.1, 0.2], [0.3, -0.4], [0.0, 1.0]]")
        assert np.allclose(z, [0.1 + 0.2j, 0.3 - 0.4j, 1j])

    def test_parse_point_rejects_wrong_shape(self):
        with pytest.raises(InputError, match="pairs"):
            parse_point("[[0.1, 0.2], [0.3, 0.4]]")

    def test_parse_point_rejects_garbage(self):
        with pytest.raises(InputError, match="malformed point"):
            parse_point("not json")


class TestExitCodes:
    def test_missing_tau_is_input_error(self, capsys):
        code, _, err = invoke(capsys, ["theta", "--a", "000/000",
                                       "--z", "[[0,0],[0,0],[0,0]]"])
        assert code == 2
        assert "requires --tau" in err

    def test_bad_characteristic(self, capsys):
        code, _, err = invoke(capsys, ["--tau", TAU_RANDOM, "theta",
                                       "--a", "10/0", "--z", "[[0,0],[0,0],[0,0]]"])
        assert code == 2

    def test_bad_plan(self, capsys):
        code, _, err = invoke(capsys, ["--points", "3000", "chars"])
        assert code == 2
        assert "error" in err

    def test_bad_tau_file(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        code, _, err = invoke(capsys, ["--tau", str(p), "frobenius"])
        assert code == 2
        assert "malformed tau JSON" in err


class TestCombinatoricsCommands:
    def test_chars(self, capsys):
        code, out, _ = invoke(capsys, ["chars"])
        assert code == 0
        data = json.loads(out)
        assert data["even"] == 36 and data["odd"] == 28
        assert data["diff_reps"] == 16
        assert data["diff_rep_histogram"] == {"0": 1, "16": 63}

    def test_fundsys(self, capsys):
        code, out, _ = invoke(capsys, ["fundsys"])
        assert code == 0
        data = json.loads(out)
        assert len(data["base_system"]) == 8
        assert data["pencil"] == {"translates": 64, "seven_odd": 8,
                                  "three_odd": 56}
        assert len(data["representatives"]) == 36


class TestNumericCommands:
    def test_theta_matches_library(self, capsys):
        z_json = "[[0.1, 0.05], [0.2, -0.1], [0.3, 0.0]]"
        code, out, _ = invoke(capsys, ["--tau", TAU_RANDOM, "theta",
                                       "--a", "101/011", "--z", z_json])
        assert code == 0
        data = json.loads(out)
        tau = parse_tau(TAU_RANDOM)
        a = Characteristic.from_string("101/011")
        z = parse_point(z_json)
        want = theta_char(a, z, tau)
        assert data["value"]["re"] == pytest.approx(want.real, rel=1e-12)
        assert data["value"]["im"] == pytest.approx(want.imag, rel=1e-12)
        assert data["norm"] == pytest.approx(norm_theta(a, z, tau), rel=1e-12)

    def test_frobenius_two_torsion_residual(self, capsys):
        code, out, _ = invoke(capsys, ["--tau", TAU_RANDOM, "frobenius"])
        assert code == 0
        data = json.loads(out)
        assert data["two_torsion_max_residual"] <= 1e-8

    def test_frobenius_dump_context(self, capsys):
        code, out, _ = invoke(capsys, ["--tau", TAU_RANDOM, "frobenius",
                                       "--dump-context"])
        assert code == 0
        data = json.loads(out)
        assert len(data["nulls"]) == 36
        assert len(data["h_table"]) == 64
        assert data["h_table"]["000/000"][0] == -math.inf

    def test_invariants_small_budget(self, capsys):
        code, out, _ = invoke(capsys, SMALL + ["--tau", TAU_RANDOM, "invariants"])
        assert code == 0
        data = json.loads(out)
        for key in ("log_H", "log_K", "phi_kz", "delta", "lambda", "beta_rep"):
            assert key in data
        assert abs(data["wilms_residual"]) <= 1e-12

    def test_hyperelliptic_report(self, capsys):
        code, out, _ = invoke(capsys, ["--tau", TAU_HYP, "hyperelliptic",
                                       "--k", "011/011"])
        assert code == 0
        data = json.loads(out)
        assert data["vanishing"] == "011/011"
        # 140 log psi = 7 log xi on absolute values
        assert 140 * data["psi_log"][0] == pytest.approx(
            7 * data["xi_log"][0], abs=1e-6)

    def test_height_command(self, capsys):
        code, out, _ = invoke(capsys, SMALL + [
            "--tau", TAU_RANDOM, "height", "--a", "010/110",
            "--D", "[[0.3, 0.15], [0.3, 0.3], [0.3, 0.45]]"])
        assert code == 0
        data = json.loads(out)
        assert math.isfinite(data["height"]) and data["err"] >= 0

    def test_selftest_passes(self, capsys):
        code, out, _ = invoke(capsys, ["selftest"])
        assert code == 0
        data = json.loads(out)
        assert data["pass"] is True
        assert all(c["pass"] for c in data["checks"])


class TestOutputStability:
    def test_byte_identical_reruns(self, capsys, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        for p in (p1, p2):
            code = run(SMALL + ["--tau", TAU_RANDOM,
                                "--output", str(p), "invariants"])
            capsys.readouterr()
            assert code == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_output_file_matches_stdout(self, capsys, tmp_path):
        p = tmp_path / "out.json"
        code, out, _ = invoke(capsys, ["chars"])
        assert code == 0
        run(["--output", str(p), "chars"])
        capsys.readouterr()
        assert p.read_text() == out
