"""Scenario config, run orchestration, manifests, determinism, and the CLI."""

import json
import os
from dataclasses import replace

import pytest

from chflow.cli import main
from chflow.harness import (
    PRESETS,
    ConfigurationError,
    Scenario,
    parse_config,
    run_scenario,
)
from chflow.schema import IDENTITY_COLUMNS, SCHEMA_VERSION, TRAJECTORY_COLUMNS

GOOD_CONFIG = """
[params]
b = 2.0
kappa = 1.0
alpha = 0.0
r = 1.0

[grid]
L = 20.0
n = 128

[control]
cfl = 0.3
dt_max = 0.01
t_final = 0.1
snapshots = 6
dealias = true

[u0]
profile = gaussian
amp = 0.4
width = 2.0

[rho0]
profile = gaussian
amp = 0.3
width = 1.5

[run]
name = demo
diagnostics = casimir, formulation
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "demo.cfg"
    path.write_text(GOOD_CONFIG)
    return str(path)


class TestConfig:
    def test_parse_good_config(self, config_file):
        sc = parse_config(config_file)
        assert sc.name == "demo"
        assert sc.n == 128
        assert sc.diagnostics == ("casimir", "formulation")
        assert dict(sc.u0)["amp"] == 0.4

    def test_missing_file(self):
        with pytest.raises(ConfigurationError):
            parse_config("/nonexistent/path.cfg")

    def test_structural_errors_all_listed(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(
            "[grid]\nL = huge\n\n[control]\nsnapshots = many\n\n[mystery]\nz = 1\n"
        )
        with pytest.raises(ConfigurationError) as exc:
            parse_config(str(path))
        text = "\n".join(exc.value.errors)
        assert "[mystery]" in text
        assert "L" in text and "snapshots" in text
        assert len(exc.value.errors) == 3

    def test_semantic_errors_all_listed(self, tmp_path):
        path = tmp_path / "bad2.cfg"
        path.write_text(
            "[grid]\nL = -3\nn = 100\n\n[params]\nr = 0.5\n\n"
            "[control]\nformulation = weird\n"
        )
        with pytest.raises(ConfigurationError) as exc:
            parse_config(str(path))
        text = "\n".join(exc.value.errors)
        for token in ("grid.L", "grid.n", "params.r", "formulation"):
            assert token in text

    def test_validation_collects_all_fields(self):
        sc = Scenario(L=-1.0, n=100, r=0.2, cfl=-0.3, formulation="bogus",
                      diagnostics=("nope",))
        errors = sc.validate()
        joined = " ".join(errors)
        for token in ("grid.L", "grid.n", "params.r", "control.cfl",
                      "formulation", "nope"):
            assert token in joined
        with pytest.raises(ConfigurationError):
            sc.build()

    def test_nonlocal_requires_r1(self):
        sc = Scenario(formulation="nonlocal", r=2.0)
        assert any("nonlocal" in e for e in sc.validate())

    def test_unknown_profile_rejected(self):
        sc = Scenario(u0=(("profile", "wiggle"),))
        assert any("wiggle" in e for e in sc.validate())


def _small_scenario(**over):
    base = Scenario(
        name="small", n=128, L=20.0, t_final=0.1, snapshots=6, dt_max=5e-3,
        u0=(("profile", "gaussian"), ("amp", 0.4), ("width", 2.0)),
        rho0=(("profile", "gaussian"), ("amp", 0.3), ("width", 1.5)),
        diagnostics=("casimir", "transport", "mflow", "formulation"),
    )
    return replace(base, **over)


class TestRunScenario:
    def test_manifest_complete(self, tmp_path):
        sc = _small_scenario()
        manifest = run_scenario(sc, str(tmp_path))
        assert manifest["schema_version"] == SCHEMA_VERSION
        assert manifest["outcome"] == "completed"
        assert set(manifest["invariants"]) == set(sc.diagnostics)
        for entry in manifest["invariants"].values():
            assert entry["status"] in ("pass", "fail", "skipped", "error")
        for fname in manifest["outputs"]:
            assert (tmp_path / fname).exists()
        assert (tmp_path / "small_manifest.json").exists()

    def test_csv_headers_match_schema(self, tmp_path):
        run_scenario(_small_scenario(), str(tmp_path))
        traj_head = (tmp_path / "small_trajectory.csv").read_text().splitlines()[0]
        assert traj_head == ",".join(TRAJECTORY_COLUMNS)
        ident_head = (tmp_path / "small_identities.csv").read_text().splitlines()[0]
        assert ident_head == ",".join(IDENTITY_COLUMNS)

    def test_no_temp_files_left(self, tmp_path):
        run_scenario(_small_scenario(), str(tmp_path))
        leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".tmp_")]
        assert leftovers == []

    def test_determinism_bit_for_bit(self, tmp_path):
        sc = _small_scenario()
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        man_a = run_scenario(sc, str(dir_a))
        man_b = run_scenario(sc, str(dir_b))
        for fname in man_a["outputs"]:
            assert (dir_a / fname).read_bytes() == (dir_b / fname).read_bytes()
        ja = json.loads((dir_a / "small_manifest.json").read_text())
        jb = json.loads((dir_b / "small_manifest.json").read_text())
        ja.pop("wall_time_s"), jb.pop("wall_time_s")
        assert ja == jb

    def test_blowup_recorded_not_raised(self, tmp_path):
        sc = _small_scenario(
            name="steep",
            u0=(("profile", "mode"), ("k", 2), ("amp", 2.0)),
            rho0=(("profile", "zero"),),
            gradient_ceiling=0.5,
        )
        manifest = run_scenario(sc, str(tmp_path))
        assert manifest["outcome"] == "blowup"
        assert manifest["blowup"]["max_gradient"] > 0.5
        assert (tmp_path / "steep_manifest.json").exists()

    def test_r2_scenario_skips_formulation(self, tmp_path):
        sc = _small_scenario(name="high", r=2.0, dt_max=2e-3, snapshots=26)
        manifest = run_scenario(sc, str(tmp_path))
        assert manifest["invariants"]["formulation"]["status"] == "skipped"
        assert manifest["invariants"]["casimir"]["status"] == "pass"
        assert manifest["invariants"]["transport"]["status"] == "pass"

    def test_alpha_nonzero_skips_mflow(self, tmp_path):
        sc = _small_scenario(name="drift", alpha=0.4)
        manifest = run_scenario(sc, str(tmp_path))
        assert manifest["invariants"]["mflow"]["status"] == "skipped"


class TestCli:
    def test_check_good(self, config_file, capsys):
        assert main(["check", config_file]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_check_bad(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("[grid]\nn = 7\n")
        assert main(["check", str(path)]) == 1
        assert "configuration error" in capsys.readouterr().err

    def test_run_requires_source(self):
        assert main(["run"]) == 1

    def test_run_unknown_preset(self):
        assert main(["run", "--preset", "nope"]) == 1

    def test_run_preset_zero(self, tmp_path, capsys):
        assert main(["run", "--preset", "zero", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "outcome: completed" in out

    def test_run_config_with_overrides(self, config_file, tmp_path):
        code = main([
            "run", "--config", config_file, "--out", str(tmp_path),
            "--n", "128", "--tfinal", "0.05",
        ])
        assert code == 0
        manifest = json.loads((tmp_path / "demo_manifest.json").read_text())
        assert manifest["scenario"]["t_final"] == 0.05

    def test_unknown_suite_is_config_error(self, tmp_path):
        assert main(["suite", "bogus", "--out", str(tmp_path)]) == 1

    def test_suite_runs(self, tmp_path, capsys):
        assert main(["suite", "friedrichs", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "friedrichs_report.json").exists()


class TestPresets:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_validate(self, name):
        assert PRESETS[name].validate() == []

    def test_zero_preset_trivially_passes(self, tmp_path):
        manifest = run_scenario(PRESETS["zero"], str(tmp_path))
        for entry in manifest["invariants"].values():
            assert entry["status"] == "pass"

    def test_ch_branch_preset_conserves_casimir(self, tmp_path):
        manifest = run_scenario(PRESETS["2cch"], str(tmp_path))
        cas = manifest["invariants"]["casimir"]
        assert cas["status"] == "pass"
        assert cas["value"] < 1e-6
        assert manifest["invariants"]["formulation"]["status"] == "pass"

    def test_highorder_preset_skips_formulation_only(self, tmp_path):
        manifest = run_scenario(PRESETS["highorder"], str(tmp_path))
        inv = manifest["invariants"]
        assert inv["formulation"]["status"] == "skipped"
        assert inv["transport"]["status"] == "pass"
        assert inv["casimir"]["status"] == "pass"
        assert inv["mflow"]["status"] == "pass"

    @pytest.mark.parametrize("name", ["2cdp", "chb", "hkmetric", "hkmetric3", "decay"])
    def test_special_case_presets_pass_end_to_end(self, name, tmp_path):
        # the preset catalogue covers the family's named branches
        # (b=3 pair, one-component with dispersion, r=2 and r=3 metrics,
        # wide-domain tail study); each must complete with green diagnostics
        manifest = run_scenario(PRESETS[name], str(tmp_path))
        assert manifest["outcome"] == "completed"
        for diag, entry in manifest["invariants"].items():
            assert entry["status"] in ("pass", "skipped"), (name, diag, entry)
