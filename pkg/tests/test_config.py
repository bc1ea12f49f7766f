from __future__ import annotations

import json

import pytest

from socsim.config import ConfigError, load_config
from socsim.model import DEFAULT_REGIONS


def test_defaults_with_no_args():
    config, catalog = load_config([], env={})
    assert config.port == 8080
    assert config.rate_per_minute == 30
    assert config.fp_ratio == 0.6
    assert config.regions == DEFAULT_REGIONS
    assert config.teacher_token  # generated when unset
    assert config.generated_token
    assert 0 <= config.seed < 2 ** 64  # randomized
    assert len(catalog) == 12


def test_cli_beats_config_file(tmp_path):
    cfg = tmp_path / "exercise.json"
    cfg.write_text(json.dumps({"fpRatio": 0.5, "port": 9000, "teacherToken": "filetoken"}))
    config, _ = load_config(
        ["--config", str(cfg), "--seed", "42", "--fp-ratio", "0.9"], env={})
    assert config.fp_ratio == 0.9  # flag wins
    assert config.port == 9000    # file fills the gap
    assert config.seed == 42
    assert config.teacher_token == "filetoken"
    assert not config.generated_token


def test_env_token_beats_file(tmp_path):
    cfg = tmp_path / "exercise.json"
    cfg.write_text(json.dumps({"teacherToken": "filetoken"}))
    config, _ = load_config(["--config", str(cfg)],
                            env={"SOCSIM_TEACHER_TOKEN": "envtoken"})
    assert config.teacher_token == "envtoken"


def test_invalid_values_all_reported():
    with pytest.raises(ConfigError) as excinfo:
        load_config(["--fp-ratio", "1.5", "--rate", "0", "--port", "99999"], env={})
    text = "\n".join(excinfo.value.errors)
    assert "fpRatio" in text
    assert "ratePerMinute" in text
    assert "port" in text


def test_unreadable_config_file_fails():
    with pytest.raises(ConfigError):
        load_config(["--config", "/nonexistent/path.json"], env={})


def test_invalid_template_catalog_fails(tmp_path):
    bad = tmp_path / "catalog.json"
    bad.write_text(json.dumps([
        {"id": "only", "pattern": "x {bogus}", "statusClass": "attack",
         "applicableDevices": [], "severityWeights": {"high": 1}},
    ]))
    with pytest.raises(ConfigError) as excinfo:
        load_config(["--templates", str(bad)], env={})
    text = "\n".join(excinfo.value.errors)
    assert "bogus" in text
    assert "benign_noise" in text


def test_custom_catalog_loads(tmp_path):
    good = tmp_path / "catalog.json"
    good.write_text(json.dumps([
        {"id": "atk", "pattern": "attack on {device}", "statusClass": "attack",
         "applicableDevices": [], "severityWeights": {"high": 1}},
        {"id": "noise", "pattern": "noise from {ip}", "statusClass": "benign_noise",
         "applicableDevices": [], "severityWeights": {"low": 1}},
    ]))
    config, catalog = load_config(["--templates", str(good)], env={})
    assert [t.id for t in catalog] == ["atk", "noise"]
    assert config.template_catalog_path == str(good)


def test_region_and_device_lists_parse():
    config, _ = load_config(["--regions", "A,B", "--devices", "x,y,z"], env={})
    assert config.regions == ("A", "B")
    assert config.devices == ("x", "y", "z")


def test_token_elided_from_export_record():
    config, _ = load_config(["--teacher-token", "hush"], env={})
    record = config.to_record()
    assert "teacherToken" not in record
    assert config.to_record(include_token=True)["teacherToken"] == "hush"
