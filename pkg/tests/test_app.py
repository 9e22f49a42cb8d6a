"""
Tests for the command line application
"""

import json

import pytest

import app
from config import ConfigManager
from utils import ValidationError
from verify import AuditError


def run(*argv):
    return app.main([str(a) for a in argv])


def read_report(out_dir, name):
    return json.loads((out_dir / f"{name}.json").read_text(encoding="utf-8"))


class TestExitCodes:

    def test_missing_config(self, tmp_path):
        assert run("--config", tmp_path / "absent.json", "validate") == app.EXIT_INPUT

    def test_validate(self, write_config, tmp_path, capsys):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "validate") == app.EXIT_OK
        assert "validate: OK" in capsys.readouterr().out
        payload = read_report(out, "validate")
        assert payload["header"]["command"] == "validate"
        assert payload["report"]["params"]["lower_margin"] == pytest.approx(0.3794988762, abs=1e-9)
        assert payload["report"]["schedule"]["decay"]["certified"] is True

    def test_run_config_snapshot(self, write_config, tmp_path):
        out = tmp_path / "out"
        path = write_config(scan={"bound": 777})
        assert run("--config", path, "--out", out, "validate") == app.EXIT_OK
        snapshot = ConfigManager().load_config(out / "run_config.json")
        assert snapshot.scan.bound == 777
        assert snapshot.fingerprint == read_report(out, "validate")["header"]["config_fingerprint"]

    def test_validate_failed_clause(self, write_config, tmp_path, capsys):
        path = write_config(params={"delta2": 0.05})
        assert run("--config", path, "--out", tmp_path, "validate") == app.EXIT_FAILED
        assert "(b)" in capsys.readouterr().out

    def test_invalid_params_block_other_commands(self, write_config, tmp_path):
        path = write_config(params={"delta2": 0.05})
        assert run("--config", path, "--out", tmp_path, "enumerate", "--n", 10) == app.EXIT_FAILED

    def test_negative_seed(self, write_config, tmp_path):
        assert run("--config", write_config(), "--out", tmp_path, "--seed", -1, "validate") == app.EXIT_INPUT

    def test_zero_workers(self, write_config, tmp_path):
        assert run("--config", write_config(), "--out", tmp_path, "--workers", 0, "validate") == app.EXIT_INPUT

    def test_check_error_maps_to_failure(self, write_config, tmp_path, mocker):
        handler = mocker.Mock(side_effect=AuditError("differences must lie in [1, N]"))
        mocker.patch.dict(app.COMMANDS, {"audit": handler})
        assert run("--config", write_config(), "--out", tmp_path, "audit", "--n", 10) == app.EXIT_FAILED
        handler.assert_called_once()

    def test_input_error_maps_to_input(self, write_config, tmp_path, mocker):
        mocker.patch.dict(app.COMMANDS, {"stats": mocker.Mock(side_effect=ValidationError("bad"))})
        assert run("--config", write_config(), "--out", tmp_path, "stats", "--n", 10) == app.EXIT_INPUT


class TestWitness:

    def test_fixture(self, write_config, fixtures_dir, tmp_path):
        out = tmp_path / "out"
        code = run("--config", write_config(), "--out", out, "witness", "--bohr", fixtures_dir / "bohr_all_ones.json")
        assert code == app.EXIT_OK
        payload = read_report(out, "witness")
        assert payload["header"]["command"] == "witness"
        assert payload["report"]["sup_norm"] < 1e-9

    def test_matching_truncation(self, write_config, fixtures_dir, tmp_path):
        config = write_config(params={"m": 1200})
        code = run("--config", config, "--out", tmp_path, "witness", "--bohr", fixtures_dir / "bohr_all_ones.json")
        assert code == app.EXIT_OK

    @pytest.mark.parametrize("m", [500, 1100])
    def test_truncation_mismatch_is_input_error(self, write_config, fixtures_dir, tmp_path, capsys, m):
        config = write_config(params={"m": m})
        code = run("--config", config, "--out", tmp_path, "witness", "--bohr", fixtures_dir / "bohr_all_ones.json")
        assert code == app.EXIT_INPUT
        assert "does not match" in capsys.readouterr().err

    def test_missing_file(self, write_config, tmp_path):
        assert run("--config", write_config(), "--out", tmp_path, "witness", "--bohr", tmp_path / "none.json") == app.EXIT_INPUT

    def test_malformed_file(self, write_config, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dual": [[1, 2], [3]], "epsilon": 0.1}', encoding="utf-8")
        assert run("--config", write_config(), "--out", tmp_path, "witness", "--bohr", bad) == app.EXIT_INPUT

    def test_invalid_json(self, write_config, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        assert run("--config", write_config(), "--out", tmp_path, "witness", "--bohr", bad) == app.EXIT_INPUT


class TestEnumerate:

    def test_empty_range(self, write_config, tmp_path):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "enumerate", "--n", 0) == app.EXIT_OK
        assert (out / "enumerate.csv").read_text(encoding="utf-8") == "n,margin,special_index\n"

    def test_beyond_precision(self, write_config, tmp_path):
        assert run("--config", write_config(), "--out", tmp_path, "enumerate", "--n", 100000000) == app.EXIT_FAILED

    def test_window(self, write_config, tmp_path, window_bound, window_elements):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "enumerate", "--n", window_bound) == app.EXIT_OK
        payload = read_report(out, "enumerate")
        assert payload["report"]["elements"] == window_elements
        assert payload["header"]["summary"]["first_element"] == 35930
        assert read_report(out, "revalidate")["report"]["persisted"]

    def test_golden_round_trip(self, write_config, tmp_path, window_bound):
        config = write_config()
        golden = tmp_path / "golden.json"
        assert run("--config", config, "--out", tmp_path / "a", "--record", "enumerate", "--n", window_bound) == app.EXIT_OK
        recorded = json.loads(golden.read_text(encoding="utf-8"))
        assert recorded == {
            "first_element": 35930,
            "element_count": 71,
            "scan_bound": window_bound,
            "generator": "calibrated",
        }
        assert run("--config", config, "--out", tmp_path / "b", "enumerate", "--n", window_bound) == app.EXIT_OK

        recorded["element_count"] = 70
        golden.write_text(json.dumps(recorded), encoding="utf-8")
        assert run("--config", config, "--out", tmp_path / "c", "enumerate", "--n", window_bound) == app.EXIT_FAILED

    def test_golden_for_other_scan_is_skipped(self, write_config, tmp_path, window_bound):
        config = write_config()
        (tmp_path / "golden.json").write_text(
            json.dumps({"first_element": 1, "element_count": 1, "scan_bound": 5, "generator": "calibrated"}),
            encoding="utf-8",
        )
        assert run("--config", config, "--out", tmp_path / "out", "enumerate", "--n", window_bound) == app.EXIT_OK

    def test_csv_disabled(self, write_config, tmp_path):
        out = tmp_path / "out"
        assert run("--config", write_config(output={"write_csv": False}), "--out", out, "enumerate", "--n", 10) == app.EXIT_OK
        assert not (out / "enumerate.csv").exists()


class TestNilBohr:

    def test_vacuous_neighborhood(self, write_config, fixtures_dir, tmp_path, window_bound):
        out = tmp_path / "out"
        code = run(
            "--config", write_config(), "--out", out,
            "nilbohr", "--n", window_bound, "--nbhd", fixtures_dir / "nbhd_vacuous.json",
        )
        assert code == app.EXIT_OK
        assert read_report(out, "nilbohr")["report"]["nbhd_vacuous"]["witness"] == 35930

    def test_configured_neighborhoods(self, write_config, tmp_path, window_bound, capsys):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "nilbohr", "--n", window_bound) == app.EXIT_OK
        report = read_report(out, "nilbohr")["report"]
        assert report["quadratic"]["witness"] == 35954
        assert report["bracket"]["witness"] == 35930
        assert "quadratic: witness 35954" in capsys.readouterr().out

    def test_required_hit_missing(self, write_config, fixtures_dir, tmp_path):
        code = run(
            "--config", write_config(), "--out", tmp_path,
            "nilbohr", "--n", 1000, "--nbhd", fixtures_dir / "nbhd_vacuous.json",
        )
        assert code == app.EXIT_FAILED


class TestSampling:

    def test_sample(self, write_config, tmp_path):
        out = tmp_path / "out"
        path = write_config(scan={"sample_seeds": 20})
        assert run("--config", path, "--out", out, "--seed", 7, "sample") == app.EXIT_OK
        summary = read_report(out, "sample")["report"]
        assert summary["members"] == 20
        assert summary["blocked"] == 20
        assert summary["first_seed"] == 7


class TestAuditCommands:

    def test_audit_window(self, write_config, tmp_path, window_bound):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "audit", "--n", window_bound) == app.EXIT_OK
        payload = read_report(out, "audit")
        assert payload["report"]["difference_count"] == 71
        assert "runtime_seconds" in payload["header"]
        assert "runtime_seconds" not in payload["report"]

    def test_color_window(self, write_config, tmp_path, window_bound):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "color", "--n", window_bound) == app.EXIT_OK
        assert read_report(out, "color")["report"]["proper"] is True

    def test_stats_window(self, write_config, tmp_path, window_bound):
        out = tmp_path / "out"
        assert run("--config", write_config(), "--out", out, "stats", "--n", window_bound) == app.EXIT_OK
        report = read_report(out, "stats")["report"]
        assert report["discrepancy"]["range"]["sup_discrepancy"][0] < 0.01
        assert report["discrepancy"]["integer_set"]["sup_discrepancy"][0] < 0.1
        assert report["density"]["generator"] == "calibrated"
        assert report["density"]["occupied"] == 4

    def test_stats_checks_configured_generator(self, write_config, tmp_path, window_bound):
        out = tmp_path / "out"
        config = write_config(schedule={"generator": "prime_root"})
        assert run("--config", config, "--out", out, "stats", "--n", window_bound) == app.EXIT_OK
        density = read_report(out, "stats")["report"]["density"]
        assert density["generator"] == "prime_root"
        assert density["fraction"] == 1.0

    def test_stats_density_miss_fails(self, write_config, tmp_path, window_bound):
        config = write_config(tolerances={"density_fraction": {"calibrated": 0.5}})
        assert run("--config", config, "--out", tmp_path, "stats", "--n", window_bound) == app.EXIT_FAILED

    def test_stats_density_needs_generator_entry(self, write_config, tmp_path):
        config = write_config(tolerances={"density_fraction": {"prime_root": 0.9}})
        assert run("--config", config, "--out", tmp_path, "stats", "--n", 100) == app.EXIT_INPUT


@pytest.mark.slow
class TestFullScan:

    def test_default_pipeline(self, write_config, tmp_path):
        config = write_config(scan={"workers": 4})
        for command in ["enumerate", "audit", "nilbohr", "stats"]:
            assert run("--config", config, "--out", tmp_path / command, command) == app.EXIT_OK
        assert read_report(tmp_path / "enumerate", "enumerate")["header"]["summary"]["element_count"] == 71
