from pathlib import Path

import pytest
import yaml

from src.passive_homing.config import (
    PROVENANCE_KEY,
    HomingSettings,
    dump_provenance,
    dump_resolved_config,
    load_run_config,
    resolve_run_config,
)
from src.passive_homing.dependencies import (
    get_settings,
    reset_dependencies,
    set_custom_settings,
)
from src.passive_homing.errors import ConfigurationError
from src.passive_homing.models import RunConfig
from src.passive_homing.presets import PRESET_NAMES, apply_preset


@pytest.fixture
def write_yaml(tmp_path):
    def _write(text, name="run.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def settings(monkeypatch):
    """Settings isolated from the caller's environment"""
    for var in ("OUTPUT_DIR", "THREAD_COUNT", "LOG_LEVEL"):
        monkeypatch.delenv(f"PASSIVE_HOMING_{var}", raising=False)
    return HomingSettings(_env_file=None)


# load_run_config Tests


def test_load_nested_document(write_yaml):
    """Test a YAML document fills the nested sections"""
    path = write_yaml(
        "master_seed: 12\n"
        "scenario:\n"
        "  range_km: [60, 65]\n"
        "ppo:\n"
        "  total_batches: 5\n"
        "campaign:\n"
        "  guidance: zem\n"
        "  n_episodes: 20\n"
    )
    config = load_run_config(path)
    assert config.master_seed == 12
    assert config.scenario.range_km == (60.0, 65.0)
    assert config.ppo.total_batches == 5
    assert config.campaign.n_episodes == 20


def test_load_empty_document(write_yaml):
    """Test an empty document gives the defaults"""
    assert load_run_config(write_yaml("")) == RunConfig()


def test_load_missing_file(tmp_path):
    """Test a missing file raises with the path in the message"""
    path = tmp_path / "absent.yaml"
    with pytest.raises(ConfigurationError, match="absent.yaml"):
        load_run_config(path)


def test_load_reports_line_of_bad_value(write_yaml):
    """Test validation errors point at the offending line"""
    path = write_yaml("master_seed: 1\nscenario:\n  range_km: [60, 50]\n")
    with pytest.raises(ConfigurationError) as exc_info:
        load_run_config(path)

    message = str(exc_info.value)
    assert "line 3" in message
    assert "scenario.range_km" in message


def test_load_rejects_unknown_key(write_yaml):
    """Test unknown keys are reported with their line"""
    path = write_yaml("scenario:\n  rnage_km: [50, 55]\n")
    with pytest.raises(ConfigurationError) as exc_info:
        load_run_config(path)

    assert "line 2: scenario.rnage_km" in str(exc_info.value)


def test_load_rejects_invalid_yaml(write_yaml):
    """Test malformed YAML raises ConfigurationError"""
    with pytest.raises(ConfigurationError, match="Invalid YAML"):
        load_run_config(write_yaml("scenario: [1, 2\n"))


def test_load_rejects_non_mapping(write_yaml):
    """Test a top-level list is rejected"""
    with pytest.raises(ConfigurationError, match="mapping"):
        load_run_config(write_yaml("- 1\n- 2\n"))


# resolve_run_config Tests


def test_resolve_defaults_only(settings):
    """Test no file and no overrides gives the defaults"""
    assert resolve_run_config(None, settings) == RunConfig()


def test_resolve_precedence(write_yaml, settings):
    """Test command line beats environment beats file"""
    path = write_yaml("master_seed: 5\nthread_count: 2\n")
    env = settings.model_copy(update={"thread_count": 3})

    config = resolve_run_config(path, env)
    assert config.master_seed == 5
    assert config.thread_count == 3

    config = resolve_run_config(path, env, {"master_seed": 9, "thread_count": 4})
    assert config.master_seed == 9
    assert config.thread_count == 4


def test_resolve_ignores_unset_flags(write_yaml, settings):
    """Test None overrides leave file values alone"""
    path = write_yaml("master_seed: 5\n")
    config = resolve_run_config(path, settings, {"master_seed": None})
    assert config.master_seed == 5


def test_resolve_section_overrides(settings, tmp_path):
    """Test campaign and training flags land in their sections"""
    config = resolve_run_config(
        None,
        settings,
        {
            "n_episodes": 10,
            "guidance": "rl",
            "checkpoint": tmp_path / "best.npz",
            "total_batches": 2,
            "output_dir": tmp_path,
        },
    )
    assert config.campaign.n_episodes == 10
    assert config.campaign.guidance == "rl"
    assert config.campaign.checkpoint == tmp_path / "best.npz"
    assert config.ppo.total_batches == 2
    assert config.output_dir == tmp_path


def test_resolve_invalid_override(settings):
    """Test an invalid flag value raises ConfigurationError"""
    with pytest.raises(ConfigurationError):
        resolve_run_config(None, settings, {"n_episodes": 0})


def test_resolve_applies_preset(settings):
    """Test the preset flag rewrites the scenario"""
    config = resolve_run_config(None, settings, {"preset": "zero-error"})
    assert config.scenario.heading_error_deg == (0.0, 0.0)
    assert config.scenario.maneuver_kind == "none"
    assert config.campaign.preset == "zero-error"


def test_settings_from_environment(monkeypatch):
    """Test prefixed environment variables populate the settings"""
    monkeypatch.setenv("PASSIVE_HOMING_THREAD_COUNT", "6")
    monkeypatch.setenv("PASSIVE_HOMING_LOG_LEVEL", "DEBUG")
    settings = HomingSettings(_env_file=None)
    assert settings.thread_count == 6
    assert settings.log_level == "DEBUG"


# dump_resolved_config Tests


def test_dump_and_reload(tmp_path):
    """Test a dumped document reloads to the same configuration"""
    config = RunConfig(master_seed=17, thread_count=2, output_dir=Path("out"))
    path = dump_resolved_config(config, tmp_path / "resolved_config.yaml", {"cmd": "x"})

    document = yaml.safe_load(path.read_text(encoding="utf-8"))
    assert document[PROVENANCE_KEY]["cmd"] == "x"
    assert "package_version" in document[PROVENANCE_KEY]
    assert load_run_config(path) == config



def test_dump_provenance_only(tmp_path):
    """Test a provenance record without a run document"""
    path = dump_provenance(tmp_path / "p.yaml", {"command": "compare"})
    document = yaml.safe_load(path.read_text(encoding="utf-8"))
    assert list(document) == [PROVENANCE_KEY]
    assert document[PROVENANCE_KEY]["command"] == "compare"


# Preset Tests


def test_presets_known():
    """Test every named preset applies"""
    for name in PRESET_NAMES:
        assert apply_preset(RunConfig(), name).campaign.preset == name


def test_preset_worst_case_flags():
    """Test worst-case presets set the campaign flag"""
    assert apply_preset(RunConfig(), "table6").campaign.fixed_worst_case
    assert not apply_preset(RunConfig(), "table7").campaign.fixed_worst_case
    assert not apply_preset(RunConfig(), "table5").campaign.fixed_worst_case


def test_barrel_roll_preset_keeps_nominal_errors():
    """Test the barrel-roll preset pins only the target acceleration"""
    base = RunConfig()
    table7 = apply_preset(base, "table7")
    assert table7.scenario.maneuver_kind == "barrel-roll"
    assert table7.scenario.accel_pinned
    assert table7.scenario.heading_error_deg == base.scenario.heading_error_deg
    assert table7.scenario.attitude_error_deg == base.scenario.attitude_error_deg


def test_preset_heading_error():
    """Test the heading-error preset pins six degrees"""
    config = apply_preset(RunConfig(), "table8")
    assert config.scenario.heading_error_deg == (6.0, 6.0)
    assert config.scenario.accel_pinned


def test_unknown_preset():
    """Test an unknown preset raises ConfigurationError"""
    with pytest.raises(ConfigurationError, match="Unknown preset"):
        apply_preset(RunConfig(), "table9")


# Dependency Tests


def test_custom_settings_override():
    """Test injected settings are returned until reset"""
    custom = HomingSettings(_env_file=None, thread_count=8)
    set_custom_settings(custom)
    try:
        assert get_settings() is custom
    finally:
        reset_dependencies()
    assert get_settings() is not custom
    reset_dependencies()
