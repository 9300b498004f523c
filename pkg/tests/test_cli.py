"""CLI tests: exit codes, JSON schema validity, determinism, finite-jet mode."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

import jsonschema

from crsphere.cli import (
    EXIT_GEOMETRY,
    EXIT_INCONCLUSIVE,
    EXIT_NOT_SPHERICAL,
    EXIT_SPHERICAL,
    EXIT_USAGE,
    main,
)

from _corpus import HEISENBERG, ORDER6_C1, SPHERE

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "report-schema.json").read_text())

HEIS_JET_ROWS = [
    [0, 0, 1, 0, 0.0, -0.5],
    [0, 0, 0, 1, 0.0, 0.5],
    [1, 1, 0, 0, -1.0, 0.0],
]


def run(args):
    return main(args)


def run_out(capsys, args):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- exit codes -----------------------------------------------------------


def test_check_spherical_exit_zero(capsys):
    code, out, _ = run_out(capsys, ["check", "--rho", HEISENBERG, "--point", "0,0", "0,0"])
    assert code == EXIT_SPHERICAL
    assert "spherical" in out


def test_check_not_spherical_exit_one(capsys):
    code, out, _ = run_out(capsys, ["check", "--rho", ORDER6_C1])
    assert code == EXIT_NOT_SPHERICAL
    assert "not_spherical" in out


def test_check_degenerate_exit_above_two(capsys):
    code, _, err = run_out(capsys, ["check", "--rho", "Im(w) - abs2(z)^2"])
    assert code == EXIT_GEOMETRY > 2
    assert "Levi-degenerate" in err


def test_parse_error_exit_three(capsys):
    code, _, err = run_out(capsys, ["check", "--rho", "Im(w"])
    assert code == EXIT_USAGE
    assert "offset 4" in err


def test_missing_source_is_usage_error(capsys):
    code, _, err = run_out(capsys, ["check"])
    assert code == EXIT_USAGE
    assert "--rho" in err


def test_rho_and_jet_file_conflict(tmp_path, capsys):
    f = tmp_path / "jet.json"
    f.write_text(json.dumps(HEIS_JET_ROWS))
    code, _, err = run_out(capsys, ["check", "--rho", HEISENBERG, "--jet-file", str(f)])
    assert code == EXIT_USAGE


def test_low_degree_is_usage_error(capsys):
    code, _, _ = run_out(capsys, ["check", "--rho", HEISENBERG, "--degree", "5"])
    assert code == EXIT_USAGE


def test_point_off_surface_is_geometry_error(capsys):
    code, _, err = run_out(capsys, ["check", "--rho", HEISENBERG, "--point", "0,0", "0,1"])
    assert code == EXIT_GEOMETRY
    assert "not on the surface" in err


# -- JSON reports ------------------------------------------------------------------


def test_check_json_validates_against_schema(capsys):
    code, out, _ = run_out(capsys, ["check", "--json", "--rho", SPHERE, "--point", "0,0", "1,0"])
    assert code == EXIT_SPHERICAL
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMA)
    assert payload["verdict"] == "spherical"
    assert len(payload["samples"]) == 5


def test_json_is_byte_identical_for_identical_configs(capsys):
    args = ["check", "--json", "--rho", ORDER6_C1, "--seed", "0x5EED"]
    _, out1, _ = run_out(capsys, args)
    _, out2, _ = run_out(capsys, args)
    assert out1 == out2


def test_text_and_json_agree_on_verdict(capsys):
    code_t, out_t, _ = run_out(capsys, ["check", "--rho", ORDER6_C1])
    code_j, out_j, _ = run_out(capsys, ["check", "--json", "--rho", ORDER6_C1])
    assert code_t == code_j
    assert json.loads(out_j)["verdict"] == "not_spherical"
    assert "not_spherical" in out_t


# -- finite-jet mode ----------------------------------------------------------------------


def test_jet_file_check_spherical(tmp_path, capsys):
    f = tmp_path / "heis.json"
    f.write_text(json.dumps(HEIS_JET_ROWS))
    code, out, _ = run_out(capsys, ["check", "--json", "--jet-file", str(f)])
    assert code == EXIT_SPHERICAL
    payload = json.loads(out)
    assert payload["finite_jet"] is True
    assert payload["samples"] == []


def test_jet_file_matches_expression_mode_at_base(tmp_path, capsys):
    f = tmp_path / "heis.json"
    f.write_text(json.dumps(HEIS_JET_ROWS))
    _, out_jet, _ = run_out(capsys, ["check", "--json", "--jet-file", str(f)])
    _, out_expr, _ = run_out(capsys, ["check", "--json", "--rho", HEISENBERG, "--samples", "0"])
    base_jet = json.loads(out_jet)["base"]
    base_expr = json.loads(out_expr)["base"]
    assert base_jet == base_expr


def test_jet_file_low_degree_is_inconclusive(tmp_path, capsys):
    f = tmp_path / "heis.json"
    f.write_text(json.dumps(HEIS_JET_ROWS))
    code, _, _ = run_out(capsys, ["check", "--jet-file", str(f), "--degree", "8"])
    assert code == EXIT_INCONCLUSIVE


def test_jet_file_bad_rows_rejected(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps([[0, 0, 1, 0, 0.0]]))
    code, _, err = run_out(capsys, ["check", "--jet-file", str(f)])
    assert code == EXIT_USAGE


def test_ode_requires_expression_mode(tmp_path, capsys):
    f = tmp_path / "heis.json"
    f.write_text(json.dumps(HEIS_JET_ROWS))
    code, _, err = run_out(capsys, ["ode", "--jet-file", str(f)])
    assert code == EXIT_USAGE
    assert "expression mode" in err


# -- other subcommands -------------------------------------------------------------------------


def test_ode_output(capsys):
    code, out, _ = run_out(capsys, ["ode", "--rho", HEISENBERG])
    assert code == 0
    assert "cubic in xi: True" in out
    code, out, _ = run_out(capsys, ["ode", "--json", "--rho", ORDER6_C1])
    payload = json.loads(out)
    assert payload["cubic"] is False
    assert abs(complex(*payload["invariant_value"])) > 1e-3


def test_decompose_output(capsys):
    code, out, _ = run_out(capsys, ["decompose", "--rho", HEISENBERG])
    assert code == 0
    assert "a3" in out
    code, out, _ = run_out(capsys, ["decompose", "--json", "--rho", HEISENBERG])
    payload = json.loads(out)
    assert payload["cr_defects"] == [0, 0, 0, 0]


def test_crosscheck_output(capsys):
    code, out, _ = run_out(
        capsys, ["crosscheck", "--json", "--rho", "Im(w) - abs2(z) - 0.1*Re(z^3*zbar^2)"]
    )
    assert code == 0
    assert json.loads(out)["residual"] < 1e-8


def test_levi_output(capsys):
    code, out, _ = run_out(capsys, ["levi", "--json", "--rho", SPHERE, "--point", "0,0", "1,0"])
    assert code == 0
    assert json.loads(out)["levi"] == pytest.approx(1.0)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "crsphere", "check", "--rho", HEISENBERG, "--samples", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "spherical" in proc.stdout
