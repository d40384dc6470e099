"""Monte Carlo campaigns, trajectory dumps and comparison tables"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .environment import EngagementEnv, run_episode
from .errors import HomingError, UsageError
from .guidance import create_guidance
from .interfaces import GuidanceLaw
from .models import (
    G0,
    CalibrationRow,
    CampaignReport,
    ComparisonRow,
    EpisodeRecord,
    MissileConfig,
    RunConfig,
    TrajectoryRow,
)
from .scenario import episode_rng
from .utils.rotations import angle_between, quat_to_dcm

logger = logging.getLogger(__name__)

HIT_RADIUS_100CM = 1.0
HIT_RADIUS_50CM = 0.5
WILSON_Z = 1.959963984540054

# Per-thruster thrusts (N) tried by the calibration sweep: 10, 15, 20 and 25 g
DEFAULT_THRUST_SWEEP = (2452.5, 3678.75, 4905.0, 6131.25)

# Histogram bin edges in cm; the last bin is open-ended
MISS_BINS_CM = (0.0, 25.0, 50.0, 100.0, 200.0, 500.0)


def wilson_interval(successes: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial rate, in percent

    The interval always contains the point estimate; it is pinned to exactly
    0 with no successes and exactly 100 when every trial succeeds.

    Raises:
        ValueError: If ``n`` is not positive or ``successes`` is out of range
    """
    if n <= 0 or not 0 <= successes <= n:
        raise ValueError(f"Invalid binomial counts {successes}/{n}")
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    pct = 100.0 * successes / n
    low = 0.0 if successes == 0 else min(100.0 * (centre - half), pct)
    high = 100.0 if successes == n else max(100.0 * (centre + half), pct)
    return low, high


def _bin_label(low: float, high: Optional[float]) -> str:
    return f"{low:g}-{high:g}" if high is not None else f"{low:g}+"


def miss_histogram(misses_m: Sequence[float]) -> dict[str, int]:
    """Counts per miss-distance bin (labels in cm)"""
    edges = list(MISS_BINS_CM)
    labels = [
        _bin_label(lo, hi) for lo, hi in zip(edges, [*edges[1:], None])
    ]
    counts = dict.fromkeys(labels, 0)
    for miss in misses_m:
        cm = 100.0 * miss
        idx = int(np.searchsorted(edges, cm, side="right")) - 1
        counts[labels[max(idx, 0)]] += 1
    return counts


def summarize(
    records: Sequence[EpisodeRecord],
    guidance: str,
    master_seed: int,
    preset: Optional[str] = None,
) -> CampaignReport:
    """Aggregate per-episode records into a campaign report

    Records are sorted by index first, so the result does not depend on the
    order in which workers returned them. Failed episodes count towards the
    episode total but never as hits, and are left out of fuel statistics and
    the histogram.
    """
    if not records:
        raise UsageError("Cannot summarize an empty campaign")
    records = sorted(records, key=lambda r: r.index)
    n = len(records)
    flown = [r for r in records if r.outcome != "error"]

    lt_100 = sum(1 for r in flown if r.miss_distance < HIT_RADIUS_100CM)
    lt_50 = sum(1 for r in flown if r.miss_distance < HIT_RADIUS_50CM)
    fuel = np.array([r.fuel_used for r in flown])
    return CampaignReport(
        guidance=guidance,  # type: ignore[arg-type]
        preset=preset,
        master_seed=master_seed,
        n_episodes=n,
        pct_miss_lt_100cm=100.0 * lt_100 / n,
        pct_miss_lt_50cm=100.0 * lt_50 / n,
        ci_lt_100cm=wilson_interval(lt_100, n),
        ci_lt_50cm=wilson_interval(lt_50, n),
        fuel_mean=float(fuel.mean()) if fuel.size else 0.0,
        fuel_sd=float(fuel.std(ddof=1)) if fuel.size > 1 else 0.0,
        miss_histogram=miss_histogram([r.miss_distance for r in flown]),
        episodes=list(records),
    )


def _campaign_chunk(
    env: EngagementEnv,
    guidance: GuidanceLaw,
    master_seed: int,
    indices: Sequence[int],
) -> list[EpisodeRecord]:
    records = []
    for i in indices:
        seed = master_seed + i
        try:
            s = run_episode(env, guidance, episode_rng(master_seed, i))
            records.append(
                EpisodeRecord(
                    index=i,
                    seed=seed,
                    outcome=s.outcome,
                    miss_distance=s.miss_distance,
                    fuel_used=s.fuel_used,
                    steps=s.steps,
                    duration=s.duration,
                )
            )
        except (HomingError, ArithmeticError) as e:
            logger.error("Episode %d (seed %d) failed: %s", i, seed, e)
            records.append(
                EpisodeRecord(
                    index=i,
                    seed=seed,
                    outcome="error",
                    miss_distance=0.0,
                    fuel_used=0.0,
                    steps=0,
                    duration=0.0,
                )
            )
    return records


def build_guidance(config: RunConfig) -> GuidanceLaw:
    """Guidance law selected by the campaign section (RL acts greedily)"""
    campaign = config.campaign
    return create_guidance(
        campaign.guidance,
        config.missile,
        checkpoint=campaign.checkpoint,
        zem_gain=campaign.zem_gain,
    )


def campaign_env(config: RunConfig) -> EngagementEnv:
    """Environment for a campaign, pinned to the worst case when requested"""
    scenario = config.scenario
    if config.campaign.fixed_worst_case:
        scenario = scenario.worst_case()
    return EngagementEnv(scenario, config.missile, config.seeker, config.reward)


def run_campaign(
    config: RunConfig, guidance: Optional[GuidanceLaw] = None
) -> CampaignReport:
    """Fly ``config.campaign.n_episodes`` independent engagements

    Episode ``i`` uses seed ``master_seed + i``, so the report is identical
    for any ``thread_count``.

    Args:
        config: Run document
        guidance: Guidance law override (built from ``config.campaign`` if None)

    Returns:
        Campaign report including every per-episode record

    Raises:
        ConfigurationError: If the rl selector has no usable checkpoint
    """
    campaign = config.campaign
    guidance = guidance or build_guidance(config)
    env = campaign_env(config)
    indices = list(range(campaign.n_episodes))
    workers = min(config.thread_count, len(indices))

    if workers <= 1:
        records = _campaign_chunk(env, guidance, config.master_seed, indices)
    else:
        size = math.ceil(len(indices) / workers)
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _campaign_chunk,
                    env,
                    guidance,
                    config.master_seed,
                    indices[i : i + size],
                )
                for i in range(0, len(indices), size)
            ]
            for future in futures:
                records.extend(future.result())

    report = summarize(records, guidance.name, config.master_seed, campaign.preset)
    logger.info(
        "Campaign %s/%s: %d episodes, <100 cm %.1f%%, <50 cm %.1f%%, "
        "fuel %.2f ± %.2f kg",
        guidance.name,
        campaign.preset or "custom",
        report.n_episodes,
        report.pct_miss_lt_100cm,
        report.pct_miss_lt_50cm,
        report.fuel_mean,
        report.fuel_sd,
    )
    return report


def thrust_sweep(
    config: RunConfig, thrusts: Sequence[float] = DEFAULT_THRUST_SWEEP
) -> list[CalibrationRow]:
    """ZEM campaigns over a range of per-thruster thrusts

    Every campaign flies the same episode seeds, so rows differ only in the
    thruster calibration. Any explicit thruster layout in ``config`` is
    replaced by the default cross at each thrust.

    Raises:
        ValueError: If ``thrusts`` is empty or holds a non-positive thrust
    """
    if not thrusts:
        raise ValueError("thrust sweep needs at least one thrust")
    rows = []
    for thrust in thrusts:
        missile = MissileConfig.model_validate(
            {**config.missile.model_dump(), "max_thrust": thrust, "thrusters": None}
        )
        campaign = config.campaign.model_copy(update={"guidance": "zem"})
        run = config.model_copy(update={"missile": missile, "campaign": campaign})
        report = run_campaign(run)
        rows.append(
            CalibrationRow(
                max_thrust=thrust,
                max_accel_g=missile.max_accel / G0,
                preset=campaign.preset or "custom",
                n_episodes=report.n_episodes,
                pct_miss_lt_100cm=report.pct_miss_lt_100cm,
                pct_miss_lt_50cm=report.pct_miss_lt_50cm,
                fuel_mean=report.fuel_mean,
                fuel_sd=report.fuel_sd,
            )
        )
    return rows


def format_calibration(rows: Sequence[CalibrationRow]) -> str:
    """Fixed-width text table of a thrust sweep"""
    header = (
        f"{'Thrust (N)':>12}{'a_max (g)':>11}{'<100 cm (%)':>13}"
        f"{'<50 cm (%)':>12}{'Fuel μ':>9}{'Fuel σ':>9}"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.max_thrust:>12.2f}{r.max_accel_g:>11.1f}"
            f"{r.pct_miss_lt_100cm:>13.1f}{r.pct_miss_lt_50cm:>12.1f}"
            f"{r.fuel_mean:>9.2f}{r.fuel_sd:>9.2f}"
        )
    return "\n".join(lines) + "\n"


def trajectory_dump(
    config: RunConfig, episode_seed: int, guidance: Optional[GuidanceLaw] = None
) -> list[TrajectoryRow]:
    """Per-cycle record of a single engagement

    The seeker is read every cycle whatever the guidance law, so ZEM runs
    carry seeker angles too.
    """
    guidance = guidance or build_guidance(config)
    env = campaign_env(config)
    rows: list[TrajectoryRow] = []

    def record(env: EngagementEnv, action: np.ndarray) -> None:
        state = env.state
        obs = env.observation
        rel = state.missile.position - state.target.position
        body_x = quat_to_dcm(state.missile.attitude)[0]
        rows.append(
            TrajectoryRow(
                time=state.time,
                x=float(rel[0]),
                y=float(rel[1]),
                z=float(rel[2]),
                theta_u=obs.theta_u,
                theta_v=obs.theta_v,
                d_theta_u=obs.d_theta_u,
                d_theta_v=obs.d_theta_v,
                thruster_1=int(action[0]),
                thruster_2=int(action[1]),
                thruster_3=int(action[2]),
                thruster_4=int(action[3]),
                mass=state.missile.mass,
                theta_cv=angle_between(state.missile.velocity, body_x),
                range=state.range,
            )
        )

    run_episode(env, guidance, np.random.default_rng(episode_seed), on_step=record)
    return rows


def compare(reports: Sequence[CampaignReport]) -> list[ComparisonRow]:
    """Four-column comparison rows, one per report

    Raises:
        UsageError: If fewer than two reports are given
    """
    if len(reports) < 2:
        raise UsageError("compare needs at least two reports")
    presets = {r.preset for r in reports}
    if len(presets) > 1:
        logger.warning(
            "Comparing campaigns from different scenario presets: %s",
            ", ".join(sorted(p or "custom" for p in presets)),
        )
    return [
        ComparisonRow(
            label=r.guidance,
            preset=r.preset,
            pct_miss_lt_100cm=r.pct_miss_lt_100cm,
            pct_miss_lt_50cm=r.pct_miss_lt_50cm,
            fuel_mean=r.fuel_mean,
            fuel_sd=r.fuel_sd,
        )
        for r in reports
    ]


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    """Fixed-width text table"""
    header = (
        f"{'Guidance':<12}{'Preset':<14}{'<100 cm (%)':>12}{'<50 cm (%)':>12}"
        f"{'Fuel μ':>9}{'Fuel σ':>9}"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.label:<12}{(r.preset or 'custom'):<14}"
            f"{r.pct_miss_lt_100cm:>12.1f}{r.pct_miss_lt_50cm:>12.1f}"
            f"{r.fuel_mean:>9.2f}{r.fuel_sd:>9.2f}"
        )
    return "\n".join(lines) + "\n"


def summary_row(report: CampaignReport) -> str:
    """One-line four-column summary of a report"""
    return (
        f"{report.guidance} ({report.preset or 'custom'}): "
        f"<100 cm {report.pct_miss_lt_100cm:.1f}% "
        f"[{report.ci_lt_100cm[0]:.1f}, {report.ci_lt_100cm[1]:.1f}], "
        f"<50 cm {report.pct_miss_lt_50cm:.1f}% "
        f"[{report.ci_lt_50cm[0]:.1f}, {report.ci_lt_50cm[1]:.1f}], "
        f"fuel {report.fuel_mean:.2f} ± {report.fuel_sd:.2f} kg"
    )
