import logging

import pytest

from src.passive_homing.errors import UsageError
from src.passive_homing.evaluation import (
    campaign_env,
    compare,
    format_calibration,
    format_comparison,
    miss_histogram,
    summarize,
    summary_row,
    thrust_sweep,
    wilson_interval,
)
from src.passive_homing.models import (
    CampaignConfig,
    EpisodeRecord,
    MissileConfig,
    RunConfig,
    ScenarioConfig,
)
from src.passive_homing.presets import apply_preset


def record(index, miss, fuel=10.0, outcome="miss"):
    return EpisodeRecord(
        index=index,
        seed=index,
        outcome=outcome,
        miss_distance=miss,
        fuel_used=fuel,
        steps=80,
        duration=8.0,
    )


@pytest.fixture
def records():
    return [
        record(0, 0.2, 8.0, "hit"),
        record(1, 0.7, 9.0),
        record(2, 0.4, 10.0, "hit"),
        record(3, 3.0, 13.0),
    ]


# Wilson Interval Tests


def test_wilson_half():
    """Test the interval for 50 of 100"""
    low, high = wilson_interval(50, 100)
    assert low == pytest.approx(40.38, abs=0.01)
    assert high == pytest.approx(59.62, abs=0.01)


def test_wilson_extremes():
    """Test the interval stays inside [0, 100] at the edges"""
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 100.0
    low, high = wilson_interval(10, 10)
    assert 0.0 < low < high


@pytest.mark.parametrize("n", [7, 40, 1000, 5000])
def test_wilson_edges_exact(n):
    """Test the edge bounds equal the point estimate exactly"""
    assert wilson_interval(0, n)[0] == 0.0
    assert wilson_interval(n, n)[1] == 100.0


@pytest.mark.parametrize("successes, n", [(3, 40), (37, 40), (1, 5000), (4999, 5000)])
def test_wilson_contains_estimate(successes, n):
    """Test the interval brackets the observed rate"""
    low, high = wilson_interval(successes, n)
    assert low <= 100.0 * successes / n <= high


@pytest.mark.parametrize("successes, n", [(1, 0), (-1, 5), (6, 5)])
def test_wilson_invalid(successes, n):
    """Test impossible counts raise"""
    with pytest.raises(ValueError):
        wilson_interval(successes, n)


# Histogram Tests


def test_histogram_one_per_bin():
    """Test each bin receives its miss"""
    counts = miss_histogram([0.1, 0.3, 0.6, 1.5, 3.0, 7.0])
    assert counts == {
        "0-25": 1,
        "25-50": 1,
        "50-100": 1,
        "100-200": 1,
        "200-500": 1,
        "500+": 1,
    }


def test_histogram_bin_edges():
    """Test a miss on an edge falls in the upper bin"""
    counts = miss_histogram([0.25, 0.5])
    assert counts["25-50"] == 1
    assert counts["50-100"] == 1


# summarize Tests


def test_summarize_rates(records):
    """Test hit percentages and fuel statistics"""
    report = summarize(records, "zem", 7, "table5")
    assert report.n_episodes == 4
    assert report.pct_miss_lt_100cm == 75.0
    assert report.pct_miss_lt_50cm == 50.0
    assert report.fuel_mean == pytest.approx(10.0)
    assert report.fuel_sd == pytest.approx((14.0 / 3.0) ** 0.5)
    assert report.master_seed == 7
    assert report.preset == "table5"
    assert sum(report.miss_histogram.values()) == 4


def test_summarize_single_episode():
    """Test one episode reports its own values with zero spread"""
    report = summarize([record(0, 0.3, 9.5, "hit")], "zem", 0)
    assert report.pct_miss_lt_50cm == 100.0
    assert report.fuel_mean == 9.5
    assert report.fuel_sd == 0.0


def test_summarize_order_independent(records):
    """Test statistics do not depend on episode order"""
    forward = summarize(records, "zem", 0)
    backward = summarize(list(reversed(records)), "zem", 0)
    assert forward == backward
    assert [r.index for r in forward.episodes] == [0, 1, 2, 3]


def test_summarize_error_episodes(records):
    """Test failed episodes count in the total but never as hits"""
    failed = record(4, 0.0, 0.0, "error")
    report = summarize([*records, failed], "zem", 0)
    assert report.n_episodes == 5
    assert report.pct_miss_lt_50cm == 40.0
    assert report.fuel_mean == pytest.approx(10.0)
    assert sum(report.miss_histogram.values()) == 4


def test_summarize_empty():
    """Test an empty campaign cannot be summarized"""
    with pytest.raises(UsageError):
        summarize([], "zem", 0)


def test_summary_row(records):
    """Test the one-line summary carries the four columns"""
    line = summary_row(summarize(records, "zem", 0, "table6"))
    assert line.startswith("zem (table6):")
    assert "<100 cm 75.0%" in line
    assert "<50 cm 50.0%" in line
    assert "fuel 10.00" in line


# compare Tests


def test_compare_identical_reports(records):
    """Test identical reports give identical rows"""
    report = summarize(records, "zem", 0, "table5")
    rows = compare([report, report])
    assert len(rows) == 2
    assert rows[0] == rows[1]
    assert rows[0].pct_miss_lt_100cm == 75.0


def test_compare_needs_two_reports(records):
    """Test a single report is rejected"""
    with pytest.raises(UsageError):
        compare([summarize(records, "zem", 0)])


def test_compare_warns_on_mixed_presets(records, caplog):
    """Test mixing presets logs a warning"""
    a = summarize(records, "zem", 0, "table5")
    b = summarize(records, "rl", 0, "table6")
    with caplog.at_level(logging.WARNING):
        compare([a, b])
    assert "different scenario presets" in caplog.text


def test_format_comparison(records):
    """Test the text table has a header, a rule and one line per row"""
    report = summarize(records, "zem", 0, "table5")
    table = format_comparison(compare([report, report]))
    lines = table.splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("Guidance")
    assert set(lines[1]) == {"-"}
    assert lines[2].split()[:2] == ["zem", "table5"]


# Campaign Setup Tests


def test_campaign_env_worst_case():
    """Test the worst-case flag pins the error cones"""
    config = RunConfig(campaign=CampaignConfig(fixed_worst_case=True))
    env = campaign_env(config)
    assert env.scenario.heading_error_deg == (5.0, 5.0)
    assert env.scenario.attitude_error_deg == (5.0, 5.0)
    assert env.scenario.accel_pinned


def test_campaign_env_randomized():
    """Test the scenario is used unchanged without the worst-case flag"""
    config = RunConfig(scenario=ScenarioConfig(range_km=(60.0, 61.0)))
    assert campaign_env(config).scenario == config.scenario


# Thrust Sweep Tests


@pytest.fixture
def sweep_config():
    """Two zero-error episodes; the sweep switches the selector to ZEM"""
    config = RunConfig(campaign=CampaignConfig(n_episodes=2, guidance="pn"))
    return apply_preset(config, "zero-error")


def test_thrust_sweep_rows(sweep_config):
    """Test one ZEM row per thrust with its dry-mass acceleration"""
    rows = thrust_sweep(sweep_config, [2452.5, 4905.0])
    assert [r.max_thrust for r in rows] == [2452.5, 4905.0]
    assert rows[0].max_accel_g == pytest.approx(10.0)
    assert rows[1].max_accel_g == pytest.approx(20.0)
    assert all(r.preset == "zero-error" and r.n_episodes == 2 for r in rows)


def test_thrust_sweep_replaces_layout(sweep_config):
    """Test an explicit thruster layout is rebuilt at each thrust"""
    config = sweep_config.model_copy(
        update={"missile": MissileConfig(max_thrust=1000.0)}
    )
    (row,) = thrust_sweep(config, [4905.0])
    assert row.max_accel_g == pytest.approx(20.0)


def test_thrust_sweep_rejects_bad_thrusts(sweep_config):
    """Test an empty sweep or a non-positive thrust raises"""
    with pytest.raises(ValueError):
        thrust_sweep(sweep_config, [])
    with pytest.raises(ValueError):
        thrust_sweep(sweep_config, [0.0])


def test_format_calibration(sweep_config):
    """Test the sweep table has one line per thrust"""
    rows = thrust_sweep(sweep_config, [4905.0])
    lines = format_calibration(rows).splitlines()
    assert len(lines) == 3
    assert lines[2].split()[:2] == ["4905.00", "20.0"]
