"""Scenario runner: exit codes, artifacts, determinism and catalog listing."""

import io
import json

import pytest

from wignerfio import cli
from wignerfio.catalog import Registry
from wignerfio.tensorio import read_tensor


def _run(argv, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text()) if (out / "summary.json").exists() else None
    return code, summary, out


# ---------------------------------------------------------------- config


def test_load_config_roundtrip(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("config_version: 1\nscenario: moyal\ngrid: {L: 16.0, M: 128}\n")
    cfg = cli.load_config(p)
    assert cfg["scenario"] == "moyal" and cfg["grid"]["M"] == 128


def test_load_config_empty_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("")
    assert cli.load_config(p) == {}


@pytest.mark.parametrize("text", ["grid: {L: [1, 2\n", "- a\n- b\n", "config_version: 2\n"])
def test_load_config_rejects(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    with pytest.raises(cli.ConfigError):
        cli.load_config(p)


def test_missing_config_file(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")]) == 2


def test_malformed_config_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("scenario: moyal\ngrid: {M: [\n")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_parse_params():
    assert cli._parse_params(["tau=0.5", "eps=1e-1"]) == {"tau": 0.5, "eps": 0.1}
    with pytest.raises(cli.ConfigError):
        cli._parse_params(["tau"])
    with pytest.raises(cli.ConfigError):
        cli._parse_params(["tau=abc"])


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "bogus"],
    ["kernel", "--phase", "no_such_phase"],
    ["kernel", "--kernel-M", "64"],
    ["kernel", "--kernel-M", "31"],
    ["wigner", "--grid-M", "7"],
    ["certify", "--symbol", "sin_radial", "--map", "identity"],
    ["adjoint", "--kind", "type-II", "--phase", "identity", "--symbol", "one"],
    ["kernel", "--phase", "identity", "--symbol", "one", "--phase-param", "tau"],
])
def test_configuration_errors_exit_2(tmp_path, argv):
    code, _, _ = _run(argv, tmp_path)
    assert code == 2


def test_run_without_scenario_exit_2(tmp_path):
    code, _, _ = _run(["run"], tmp_path)
    assert code == 2


def test_compose_config_needs_two_specs(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("specs:\n  - {phase: identity, symbol: one}\n")
    code, _, _ = _run(["compose", "--config", str(p)], tmp_path)
    assert code == 2


def test_spec_record_errors():
    reg = Registry()
    with pytest.raises(cli.ConfigError):
        cli.spec_from_record(["identity"], reg)
    with pytest.raises(cli.ConfigError):
        cli.spec_from_record({"phase": "identity"}, reg)
    spec = cli.spec_from_record({"kind": "type-II", "phase": "free_particle", "symbol": "one",
                                 "phase_params": {"tau": 0.5}}, reg)
    assert spec.kind == "type-II"


# ---------------------------------------------------------------- scenarios


def test_run_moyal(tmp_path):
    code, s, _ = _run(["run", "--scenario", "moyal"], tmp_path)
    assert code == 0 and s["passed"] and s["command"] == "moyal"
    assert all(a["value"] <= 1e-8 for a in s["assertions"])
    assert s["settings"]["M"] == 256


def test_run_free_particle_transport(tmp_path):
    code, s, out = _run(["run", "--scenario", "free-particle-transport"], tmp_path)
    assert code == 0
    assert s["results"]["transport_constant"] == 2.0
    lines = (out / "ridge.csv").read_text().splitlines()
    assert lines[0] == "tau,xi0,x_peak,c_estimate" and len(lines) == 5


def test_run_from_config(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("config_version: 1\nscenario: moyal\nseed: 3\ngrid: {L: 16.0, M: 128}\n")
    code, s, _ = _run(["run", "--config", str(p)], tmp_path)
    assert code == 0
    assert s["settings"]["M"] == 128 and s["settings"]["seed"] == 3


def test_flags_override_config(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("scenario: moyal\ngrid: {M: 128}\n")
    _, s, _ = _run(["run", "--config", str(p), "--grid-M", "64"], tmp_path)
    assert s["settings"]["M"] == 64


def test_wigner_exports_tensors(tmp_path):
    code, s, out = _run(["wigner", "--grid-M", "128"], tmp_path)
    assert code == 0
    files = sorted(out.glob("wigner_*.tensor"))
    assert len(files) == len(s["assertions"]) > 0
    vals, _ = read_tensor(files[0])
    assert vals.shape == (128, 128)


def test_kernel_exports_and_records_route(tmp_path):
    code, s, out = _run(["kernel", "--phase", "identity", "--symbol", "gaussian", "--route", "schwartz"],
                        tmp_path)
    assert code == 0 and s["assertions"][0]["name"] == "finite_entries"
    vals, header = read_tensor(out / "kernel.tensor")
    assert vals.shape == (32,) * 4 and header


def test_decay_artifacts(tmp_path):
    code, s, out = _run(["decay", "--phase", "sin_perturbed", "--symbol", "bracket",
                         "--symbol-param", "m=-8"], tmp_path)
    assert code == 0
    rep = json.loads((out / "decay_report.json").read_text())
    assert rep["m"] == -8
    assert (out / "decay_scatter.csv").read_text().startswith("distance")


def test_compose_default(tmp_path):
    code, s, out = _run(["compose"], tmp_path)
    assert code == 0 and (out / "composed.tensor").exists()
    assert s["assertions"][0]["value"] <= 1e-3


def test_adjoint(tmp_path):
    code, s, _ = _run(["adjoint", "--phase", "sin_perturbed", "--symbol", "gaussian"], tmp_path)
    assert code == 0 and s["assertions"][0]["value"] <= 1e-6


def test_certify_phase_and_map(tmp_path):
    assert _run(["certify", "--phase", "sin_perturbed"], tmp_path, "a")[0] == 0
    code, s, _ = _run(["certify", "--map", "free_particle", "--phase-param", "tau=0.5"], tmp_path, "b")
    assert code == 0 and s["assertions"][0]["value"] <= 1e-6


def test_certify_non_member_exit_1(tmp_path):
    code, s, _ = _run(["certify", "--symbol", "sin_radial"], tmp_path)
    assert code == 1 and s["passed"] is False


def test_ghost(tmp_path):
    code, s, _ = _run(["ghost"], tmp_path)
    assert code == 0 and s["results"]["a_below_b"] is True


def test_verify_only(tmp_path, capsys):
    code, s, _ = _run(["verify", "--only", "1"], tmp_path)
    assert code == 0
    assert list(s["results"]) == ["1"]
    assert "PASS" in capsys.readouterr().out


# ---------------------------------------------------------------- invariants


def test_summary_byte_identical(tmp_path):
    argv = ["kernel", "--phase", "sin_perturbed", "--symbol", "bracket", "--symbol-param", "m=-6", "--seed", "7"]
    _, _, a = _run(argv, tmp_path, "a")
    _, _, b = _run(argv, tmp_path, "b")
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "kernel.tensor").read_bytes() == (b / "kernel.tensor").read_bytes()


def test_tolerance_override_recorded(tmp_path):
    _, s0, _ = _run(["run", "--scenario", "moyal", "--grid-M", "128"], tmp_path, "a")
    _, s1, _ = _run(["run", "--scenario", "moyal", "--grid-M", "128", "--tol", "1e-3"], tmp_path, "b")
    assert {a["tolerance"] for a in s0["assertions"]} == {cli.DEFAULT_TOL["moyal"]}
    assert {a["tolerance"] for a in s1["assertions"]} == {1e-3}


def test_tolerance_override_can_fail(tmp_path):
    code, s, _ = _run(["run", "--scenario", "moyal", "--grid-M", "128", "--tol", "0"], tmp_path)
    assert code in (0, 1)
    assert s["passed"] == all(a["value"] <= 0 for a in s["assertions"])


def test_default_tolerances_documented():
    text = cli.build_parser().format_help()
    for key in ("wigner", "compose", "adjoint"):
        assert f"{cli.DEFAULT_TOL[key]:g}" in text


# ---------------------------------------------------------------- catalog


def test_list_catalog_default(capsys):
    assert cli.main(["list-catalog"]) == 0
    out = capsys.readouterr().out
    for name in ("identity", "free_particle", "sin_perturbed"):
        assert name in out


def test_list_catalog_config_symbol(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text('symbols:\n  - {name: bump, expr: "exp(-pi*(x**2 + xi**2))", order: -10}\n')
    assert cli.main(["list-catalog", "--config", str(p)]) == 0
    assert "bump" in capsys.readouterr().out


def test_list_catalog_empty_registry(tmp_path, capsys):
    out = tmp_path / "o"
    assert cli.main(["list-catalog", "--out", str(out)], registry=Registry(empty=True)) == 0
    assert capsys.readouterr().out == ""
    assert json.loads((out / "summary.json").read_text())["results"]["entries"] == []


def test_list_catalog_stream():
    buf = io.StringIO()
    rows = cli.list_catalog(Registry(), buf)
    assert len(buf.getvalue().splitlines()) == len(rows)
    assert "not-certified" in buf.getvalue()


def test_bad_subcommand_exit_2(capsys):
    assert cli.main(["frobnicate"]) == 2
