"""Pydantic models for configuration documents and reports"""

import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

G0 = 9.81

# Per-thruster thrust giving 20 g at dry mass; set from a ZEM thrust sweep
DEFAULT_MAX_THRUST = 4905.0

ManeuverKind = Literal["bang-bang", "barrel-roll", "none"]
GuidanceSelector = Literal["rl", "zem", "pn"]
Outcome = Literal["hit", "miss", "fov_exit", "timeout", "error"]
Interval = tuple[float, float]

_STRICT = {"extra": "forbid"}


def _check_interval(value: Interval) -> Interval:
    low, high = value
    if low > high:
        raise ValueError(f"Interval minimum {low} exceeds maximum {high}")
    return value


class ThrusterSpec(BaseModel):
    """Divert thruster placement in the missile body frame

    Attributes:
        direction: Unit vector of the force produced when the thruster fires
        position: Thruster location relative to the missile centroid (m)
        max_thrust: Thrust when on (N)
        min_thrust: Thrust when off (N)
    """

    direction: tuple[float, float, float]
    position: tuple[float, float, float]
    max_thrust: float = Field(
        default=DEFAULT_MAX_THRUST, gt=0, description="Thrust when on (N)"
    )
    min_thrust: float = Field(default=0.0, ge=0, description="Thrust when off (N)")

    model_config = _STRICT

    @field_validator("direction")
    @classmethod
    def validate_direction(
        cls, value: tuple[float, float, float]
    ) -> tuple[float, float, float]:
        """Direction must be a unit vector"""
        norm = sum(c * c for c in value) ** 0.5
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"Thruster direction must be unit length (got {norm})")
        return value


def default_thrusters(max_thrust: float = DEFAULT_MAX_THRUST) -> list[ThrusterSpec]:
    """The four lateral divert thrusters of the reference missile"""
    layout = [
        ((0.0, -1.0, 0.0), (0.0, -0.25, 0.0)),
        ((0.0, 1.0, 0.0), (0.0, 0.25, 0.0)),
        ((0.0, 0.0, 1.0), (0.0, 0.0, 0.25)),
        ((0.0, 0.0, -1.0), (0.0, 0.0, -0.25)),
    ]
    return [
        ThrusterSpec(direction=d, position=p, max_thrust=max_thrust)
        for d, p in layout
    ]


class MissileConfig(BaseModel):
    """Missile mass properties, propulsion and integration settings"""

    wet_mass: float = Field(default=50.0, gt=0, description="Initial mass (kg)")
    dry_mass: float = Field(default=25.0, gt=0, description="Mass with no fuel (kg)")
    max_thrust: float = Field(
        default=DEFAULT_MAX_THRUST,
        gt=0,
        description="Per-thruster thrust used when thrusters are not listed (N)",
    )
    isp: float = Field(default=250.0, gt=0, description="Specific impulse (s)")
    g_ref: float = Field(default=9.8, gt=0, description="Reference gravity (m/s^2)")
    thrusters: Optional[list[ThrusterSpec]] = Field(
        default=None, description="Thruster layout (defaults to the 4-thruster cross)"
    )
    guidance_period: float = Field(default=0.1, gt=0, description="Guidance cycle (s)")
    coarse_dt: float = Field(default=0.02, gt=0, description="Far-range substep (s)")
    fine_dt: float = Field(default=0.067e-3, gt=0, description="Near-range substep (s)")
    fine_range: float = Field(
        default=1000.0, gt=0, description="Range below which fine_dt is used (m)"
    )
    max_episode_time: float = Field(default=15.0, gt=0, description="Episode cap (s)")

    model_config = _STRICT

    @model_validator(mode="after")
    def fill_thrusters(self) -> "MissileConfig":
        """Check mass ordering and default the thruster layout"""
        if self.dry_mass > self.wet_mass:
            raise ValueError("dry_mass must not exceed wet_mass")
        if self.thrusters is None:
            self.thrusters = default_thrusters(self.max_thrust)
        return self

    @property
    def thruster_list(self) -> list[ThrusterSpec]:
        """Thrusters, never None after validation"""
        return self.thrusters or default_thrusters(self.max_thrust)

    @property
    def max_accel(self) -> float:
        """Maximum thrust over dry mass (m/s^2)"""
        return max(t.max_thrust for t in self.thruster_list) / self.dry_mass


class SeekerConfig(BaseModel):
    """Stabilized seeker settings"""

    fov_deg: float = Field(default=135.0, gt=0, le=360, description="Field of view")
    fov_is_full_cone: bool = Field(
        default=True,
        description="Interpret fov_deg as the full cone (per-axis limit is half)",
    )
    angle_noise_std: float = Field(
        default=0.0, ge=0, description="Gaussian noise on seeker angles (rad)"
    )

    model_config = _STRICT

    @property
    def fov_limit_rad(self) -> float:
        """Per-axis seeker angle limit (rad)"""
        limit = self.fov_deg / 2.0 if self.fov_is_full_cone else self.fov_deg
        return math.radians(limit)


class ScenarioConfig(BaseModel):
    """Engagement initial-condition ranges

    Every interval is sampled uniformly. Angles are in degrees.
    """

    range_km: Interval = (50.0, 55.0)
    missile_speed: Interval = (3000.0, 3000.0)
    target_speed: Interval = (4000.0, 4000.0)
    theta_deg: Interval = (-10.0, 10.0)
    phi_deg: Interval = (-10.0, 10.0)
    beta_deg: Interval = (-10.0, 10.0)
    alpha_deg: Interval = (-10.0, 10.0)
    heading_error_deg: Interval = (0.0, 5.0)
    attitude_error_deg: Interval = (0.0, 5.0)
    target_accel_max: float = Field(
        default=5 * G0, ge=0, le=5 * G0, description="Maneuver magnitude cap (m/s^2)"
    )
    accel_pinned: bool = Field(
        default=False, description="Use target_accel_max instead of sampling"
    )
    maneuver_kind: ManeuverKind = "bang-bang"
    bang_bang_start_s: Interval = (0.0, 5.0)
    bang_bang_switch_offset_s: Interval = (1.0, 4.0)
    bang_bang_duration_s: Interval = (2.0, 10.0)
    weave_period_s: Interval = (1.0, 5.0)
    max_resample_attempts: int = Field(default=100, ge=1)

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "examples": [{"range_km": [50.0, 75.0], "theta_deg": [-20.0, 20.0]}]
        },
    }

    @field_validator(
        "range_km",
        "missile_speed",
        "target_speed",
        "theta_deg",
        "phi_deg",
        "beta_deg",
        "alpha_deg",
        "heading_error_deg",
        "attitude_error_deg",
        "bang_bang_start_s",
        "bang_bang_switch_offset_s",
        "bang_bang_duration_s",
        "weave_period_s",
    )
    @classmethod
    def validate_interval(cls, value: Interval) -> Interval:
        """Intervals must be ordered"""
        return _check_interval(value)

    @field_validator("range_km", "missile_speed", "target_speed", "weave_period_s")
    @classmethod
    def validate_positive(cls, value: Interval) -> Interval:
        """Ranges, speeds and periods must be strictly positive"""
        if value[0] <= 0:
            raise ValueError("Value must be positive")
        return value

    def worst_case(self) -> "ScenarioConfig":
        """Copy with heading error, attitude error and target accel at maxima

        Directions on the error cones stay random.
        """
        he = self.heading_error_deg[1]
        ae = self.attitude_error_deg[1]
        return self.model_copy(
            update={
                "heading_error_deg": (he, he),
                "attitude_error_deg": (ae, ae),
                "accel_pinned": True,
            }
        )


class RewardConfig(BaseModel):
    """Shaping/terminal reward coefficients and discount rates"""

    alpha: float = Field(default=0.1, ge=0, description="Shaping reward weight")
    sigma_e: float = Field(default=0.01, gt=0, description="Angle error scale (rad)")
    sigma_dtheta: float = Field(
        default=0.001, gt=0, description="Angle change scale (rad per cycle)"
    )
    terminal_bonus: float = Field(default=10.0, description="Reward for a hit")
    hit_radius: float = Field(default=0.5, gt=0, description="Hit threshold (m)")
    gamma1: float = Field(default=0.90, gt=0, le=1, description="Shaping discount")
    gamma2: float = Field(default=0.995, gt=0, le=1, description="Terminal discount")

    model_config = _STRICT


class PpoConfig(BaseModel):
    """Recurrent PPO trainer settings"""

    episodes_per_batch: int = Field(default=30, ge=1)
    episodes_per_minibatch: int = Field(default=5, ge=1)
    epochs_per_batch: int = Field(default=10, ge=1)
    total_batches: int = Field(default=1000, ge=1)
    kl_target: float = Field(default=0.001, gt=0)
    clip_eps_init: float = Field(default=0.2, gt=0)
    clip_eps_min: float = Field(default=0.02, gt=0)
    clip_eps_max: float = Field(default=0.5, gt=0)
    policy_lr: float = Field(default=2e-4, ge=0, description="Policy step size")
    value_lr: float = Field(default=1e-3, ge=0, description="Value step size")
    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    entropy_coef: float = Field(default=0.0, ge=0)
    obs_scale: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    obs_offset: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    model_config = _STRICT

    @model_validator(mode="after")
    def validate_clip_bounds(self) -> "PpoConfig":
        """Clip range must contain the initial clip value"""
        if not self.clip_eps_min <= self.clip_eps_init <= self.clip_eps_max:
            raise ValueError("clip_eps_init must lie in [clip_eps_min, clip_eps_max]")
        return self


class CampaignConfig(BaseModel):
    """Monte Carlo evaluation settings"""

    n_episodes: int = Field(default=5000, ge=1)
    guidance: GuidanceSelector = "zem"
    checkpoint: Optional[Path] = Field(
        default=None, description="Policy checkpoint for the rl selector"
    )
    preset: Optional[str] = Field(default=None, description="Scenario preset name")
    fixed_worst_case: bool = False
    zem_gain: float = Field(default=3.0, gt=0, description="Navigation constant N")

    model_config = _STRICT


class RunConfig(BaseModel):
    """Top-level run document"""

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    missile: MissileConfig = Field(default_factory=MissileConfig)
    seeker: SeekerConfig = Field(default_factory=SeekerConfig)
    reward: RewardConfig = Field(default_factory=RewardConfig)
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    campaign: CampaignConfig = Field(default_factory=CampaignConfig)
    master_seed: int = Field(default=0, ge=0)
    output_dir: Path = Path("runs")
    thread_count: int = Field(default=1, ge=1)

    model_config = _STRICT


class EpisodeRecord(BaseModel):
    """One row of a campaign's per-episode table"""

    index: int
    seed: int
    outcome: Outcome
    miss_distance: float = Field(..., ge=0, description="Closest approach (m)")
    fuel_used: float = Field(..., ge=0, description="Consumed mass (kg)")
    steps: int = Field(..., ge=0)
    duration: float = Field(..., ge=0, description="Simulated time (s)")


class CampaignReport(BaseModel):
    """Aggregated Monte Carlo statistics

    Attributes:
        pct_miss_lt_100cm: Share of episodes with miss below 1 m (%)
        pct_miss_lt_50cm: Share of episodes with miss below 0.5 m (%)
        ci_lt_100cm: Wilson 95% interval for the 1 m rate (%)
        ci_lt_50cm: Wilson 95% interval for the 0.5 m rate (%)
        fuel_mean: Mean consumed mass (kg)
        fuel_sd: Sample standard deviation of consumed mass (0 for one episode)
    """

    format_version: int = 1
    guidance: GuidanceSelector
    preset: Optional[str] = None
    master_seed: int
    n_episodes: int = Field(..., ge=1)
    pct_miss_lt_100cm: float = Field(..., ge=0, le=100)
    pct_miss_lt_50cm: float = Field(..., ge=0, le=100)
    ci_lt_100cm: Interval
    ci_lt_50cm: Interval
    fuel_mean: float
    fuel_sd: float
    miss_histogram: dict[str, int]
    episodes: list[EpisodeRecord]

    model_config = _STRICT

    @model_validator(mode="after")
    def validate_rates(self) -> "CampaignReport":
        """A 0.5 m hit is also a 1 m hit"""
        if self.pct_miss_lt_50cm > self.pct_miss_lt_100cm:
            raise ValueError("pct_miss_lt_50cm cannot exceed pct_miss_lt_100cm")
        return self


class LearningCurveRow(BaseModel):
    """Per-batch training statistics

    ``sd_reward`` is the mean episode reward less one standard deviation,
    the lower band of the reward learning curve.
    """

    batch: int
    mean_reward: float
    sd_reward: float
    min_reward: float
    max_reward: float
    mean_steps: float
    hit_rate: float
    mean_miss: float
    sd_miss: float


class TrajectoryRow(BaseModel):
    """One guidance cycle of a trajectory dump

    Position is the missile relative to the target (target-centred frame).
    ``theta_cv`` is the angle between the missile velocity and body x-axis.
    Angles in radians.
    """

    time: float
    x: float
    y: float
    z: float
    theta_u: float
    theta_v: float
    d_theta_u: float
    d_theta_v: float
    thruster_1: int
    thruster_2: int
    thruster_3: int
    thruster_4: int
    mass: float
    theta_cv: float
    range: float


class ComparisonRow(BaseModel):
    """Four-column summary of one campaign"""

    label: str
    preset: Optional[str] = None
    pct_miss_lt_100cm: float
    pct_miss_lt_50cm: float
    fuel_mean: float
    fuel_sd: float


class CalibrationRow(BaseModel):
    """ZEM campaign result for one per-thruster thrust"""

    max_thrust: float = Field(..., gt=0, description="Per-thruster thrust (N)")
    max_accel_g: float = Field(..., description="Acceleration at dry mass (g)")
    preset: str = "custom"
    n_episodes: int
    pct_miss_lt_100cm: float
    pct_miss_lt_50cm: float
    fuel_mean: float
    fuel_sd: float
