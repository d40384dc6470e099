"""Integration tests for the command-line entry point"""

import pytest
import yaml

from src.passive_homing.cli import (
    COMPARE_PROVENANCE_NAME,
    RESOLVED_CONFIG_NAME,
    build_parser,
    main,
)
from src.passive_homing.config import HomingSettings, load_run_config
from src.passive_homing.dependencies import reset_dependencies, set_custom_settings
from src.passive_homing.storage.reports import (
    read_calibration,
    read_report,
    read_trajectory,
)

TINY_RUN = {
    "master_seed": 2,
    "ppo": {
        "total_batches": 2,
        "episodes_per_batch": 2,
        "episodes_per_minibatch": 1,
        "epochs_per_batch": 1,
    },
}


@pytest.fixture(autouse=True)
def settings():
    """Settings that ignore the caller's environment and .env file"""
    custom = HomingSettings(_env_file=None, output_dir=None, thread_count=None)
    set_custom_settings(custom)
    yield custom
    reset_dependencies()


@pytest.fixture
def run_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(TINY_RUN), encoding="utf-8")
    return path


# Parser Tests


def test_parser_requires_command():
    """Test a missing subcommand exits with a usage error"""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_parser_rejects_unknown_preset():
    """Test preset names are validated by the parser"""
    with pytest.raises(SystemExit):
        build_parser().parse_args(["eval", "--preset", "table9"])


# Command Tests


def test_train_then_eval(run_file, tmp_path, capsys):
    """Test training writes checkpoints that eval can load"""
    out = tmp_path / "train"
    assert main(["train", "--config", str(run_file), "--out", str(out)]) == 0
    assert (out / "best.npz").is_file()
    assert (out / "final.npz").is_file()
    assert (out / "learning_curve.csv").is_file()
    assert "Trained 2 batches" in capsys.readouterr().out

    evals = tmp_path / "eval"
    code = main(
        [
            "eval",
            "--config",
            str(run_file),
            "--guidance",
            "rl",
            "--checkpoint",
            str(out / "final.npz"),
            "--episodes",
            "2",
            "--out",
            str(evals),
        ]
    )
    assert code == 0
    report = read_report(evals / "campaign_rl_custom_seed2.json")
    assert report.guidance == "rl"
    assert report.n_episodes == 2
    assert (evals / "campaign_rl_custom_seed2_episodes.csv").is_file()


def test_eval_writes_provenance(tmp_path, capsys):
    """Test eval records the resolved configuration next to its report"""
    code = main(
        [
            "eval",
            "--preset",
            "zero-error",
            "--episodes",
            "3",
            "--seed",
            "7",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert "zem (zero-error)" in capsys.readouterr().out

    resolved = load_run_config(tmp_path / RESOLVED_CONFIG_NAME)
    assert resolved.master_seed == 7
    assert resolved.campaign.n_episodes == 3
    assert resolved.campaign.preset == "zero-error"
    assert (tmp_path / "campaign_zem_zero-error_seed7.json").is_file()


def test_compare_reports(tmp_path, capsys):
    """Test compare tabulates two campaign reports"""
    for guidance in ("zem", "pn"):
        args = ["eval", "--guidance", guidance, "--episodes", "2"]
        assert main([*args, "--out", str(tmp_path)]) == 0
    capsys.readouterr()

    tables = tmp_path / "tables"
    code = main(
        [
            "compare",
            str(tmp_path / "campaign_zem_custom_seed0.json"),
            str(tmp_path / "campaign_pn_custom_seed0.json"),
            "--out",
            str(tables),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "zem" in printed and "pn" in printed
    assert (tables / "comparison.txt").read_text(encoding="utf-8") == printed
    assert (tables / "comparison.csv").is_file()

    provenance = yaml.safe_load(
        (tables / COMPARE_PROVENANCE_NAME).read_text(encoding="utf-8")
    )["_provenance"]
    assert provenance["command"] == "compare"
    assert len(provenance["reports"]) == 2
    assert "package_version" in provenance


def test_compare_needs_two_reports(tmp_path):
    """Test compare with a single report fails"""
    assert main(["compare", str(tmp_path / "only.json")]) == 1


def test_dump_trajectory(tmp_path, capsys):
    """Test dump writes one trajectory CSV"""
    code = main(
        [
            "dump",
            "--preset",
            "zero-error",
            "--episode-seed",
            "11",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    rows = read_trajectory(tmp_path / "trajectory_zem_zero-error_seed11.csv")
    assert rows
    assert f"Wrote {len(rows)} rows" in capsys.readouterr().out


def test_calibrate_sweep(tmp_path, capsys):
    """Test calibrate writes one row per thrust plus provenance"""
    code = main(
        [
            "calibrate",
            "--preset",
            "zero-error",
            "--episodes",
            "2",
            "--thrust",
            "2452.5",
            "4905",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    rows = read_calibration(tmp_path / "calibration_zem_zero-error_seed0.csv")
    assert [r.max_thrust for r in rows] == [2452.5, 4905.0]
    assert all(r.n_episodes == 2 for r in rows)
    assert "4905.00" in capsys.readouterr().out
    assert load_run_config(tmp_path / RESOLVED_CONFIG_NAME).campaign.n_episodes == 2


# Failure Tests


def test_missing_config_file(tmp_path, capsys):
    """Test an unreadable config file exits with status 1"""
    code = main(["eval", "--config", str(tmp_path / "nope.yaml")])
    assert code == 1
    assert "nope.yaml" in capsys.readouterr().err


def test_rl_without_checkpoint(tmp_path, capsys):
    """Test the rl selector without a checkpoint exits with status 1"""
    code = main(["eval", "--guidance", "rl", "--out", str(tmp_path)])
    assert code == 1
    assert "checkpoint" in capsys.readouterr().err


def test_unreadable_report(tmp_path, capsys):
    """Test compare reports a malformed file"""
    bad = tmp_path / "bad.json"
    bad.write_text("{}", encoding="utf-8")
    assert main(["compare", str(bad), str(bad)]) == 1
    assert "bad.json" in capsys.readouterr().err
