"""
Tests for config
"""

import json

import pytest

from config import CONFIG_ENV_VAR, DEFAULT_CONFIG_PATH, ConfigError, ConfigManager, RunConfig
from construction import Params


class TestConfigManager:

    def test_load_shipped_config(self):
        config = ConfigManager().load_config(DEFAULT_CONFIG_PATH)
        assert config.params == Params(delta1=0.1, delta2=1e-4)
        assert config.schedule.generator == "calibrated"
        assert config.scan.bound == 100000
        assert [entry.name for entry in config.neighborhoods] == ["quadratic", "bracket"]

    def test_save_and_reload(self, tmp_path):
        manager = ConfigManager()
        original = RunConfig(params=Params(delta1=0.2, delta2=1e-3))
        manager.save_config(original, tmp_path / "nested" / "run.json")
        reloaded = manager.load_config(tmp_path / "nested" / "run.json")
        assert reloaded == original
        assert reloaded.fingerprint == original.fingerprint

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read"):
            ConfigManager().load_config(tmp_path / "absent.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="Invalid configuration"):
            ConfigManager().load_config(path)

    @pytest.mark.parametrize("section, overrides", [
        ("params", {"delta1": 1e-5}),
        ("scan", {"workers": 0}),
        ("logging", {"level": "LOUD"}),
        ("schedule", {"generator": "random"}),
    ])
    def test_invalid_fields(self, write_config, section, overrides):
        path = write_config(**{section: overrides})
        with pytest.raises(ConfigError):
            ConfigManager().load_config(path)

    def test_environment_variable(self, tmp_path, monkeypatch):
        path = tmp_path / "env.json"
        path.write_text(json.dumps({"scan": {"bound": 500}}), encoding="utf-8")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
        manager = ConfigManager()
        assert manager.resolve_path() == path
        assert manager.load_config().scan.bound == 500
        assert manager.source == path

    def test_explicit_path_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv(CONFIG_ENV_VAR, str(tmp_path / "elsewhere.json"))
        assert ConfigManager().resolve_path(DEFAULT_CONFIG_PATH) == DEFAULT_CONFIG_PATH

    def test_default_path(self, monkeypatch):
        monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
        assert ConfigManager().resolve_path() == DEFAULT_CONFIG_PATH

    def test_resolve_relative(self, tmp_path):
        manager = ConfigManager()
        assert manager.resolve_relative("fixtures/golden.json") == DEFAULT_CONFIG_PATH.parent.parent / "fixtures" / "golden.json"
        assert manager.resolve_relative(tmp_path) == tmp_path


class TestRunConfig:

    def test_level_is_normalised(self):
        assert RunConfig.model_validate({"logging": {"level": "debug"}}).logging.level == "DEBUG"

    def test_fingerprint_tracks_content(self):
        base = RunConfig()
        assert base.fingerprint == RunConfig().fingerprint
        assert base.fingerprint != RunConfig(scan={"bound": 10}).fingerprint
        assert len(base.fingerprint) == 16

    def test_partial_config_uses_defaults(self):
        config = RunConfig.model_validate({"params": {"delta1": 0.05}})
        assert config.params.delta2 == 1e-4
        assert config.tolerances.bins == 20
        assert config.neighborhoods == []
