"""Randomized engagement generation

Builds head-on engagements: target placement, collision-triangle missile
velocity, heading/attitude error cones and the target maneuver.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .dynamics import EngagementState, MissileBody, TargetBody
from .errors import ConfigurationError, NoCollisionSolutionError
from .models import ManeuverKind, MissileConfig, ScenarioConfig, SeekerConfig
from .seeker import SeekerFrame, make_frame
from .utils.rotations import (
    Vec3,
    dcm_from_x_axis,
    dcm_to_quat,
    orthonormal_basis,
    unit,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ManeuverProfile:
    """Target maneuver parameters

    Attributes:
        kind: ``bang-bang``, ``barrel-roll`` or ``none``
        accel_magnitude: Lateral acceleration magnitude (m/s^2)
        direction: Unit vector orthogonal to the initial target velocity
        normal: Unit vector completing ``direction`` in the orthogonal plane
        start_time: Bang-bang start (s)
        switch_time: Bang-bang sign flip, absolute (s)
        duration: Bang-bang length from ``start_time`` (s)
        weave_period: Barrel-roll period (s)
        phase: Barrel-roll initial phase (rad)
    """

    kind: ManeuverKind
    accel_magnitude: float
    direction: Vec3
    normal: Vec3
    start_time: float = 0.0
    switch_time: float = 0.0
    duration: float = 0.0
    weave_period: float = 1.0
    phase: float = 0.0

    def accel_fn(self) -> "_ManeuverAccel":
        """Callable ``(t, v_T) -> a_T`` for the integrator"""
        return _ManeuverAccel(self)


class _ManeuverAccel:
    def __init__(self, profile: ManeuverProfile):
        self.profile = profile

    def __call__(self, t: float, v_t: Vec3) -> Vec3:
        return maneuver_accel(self.profile, v_t, t)


class SampledScenario(NamedTuple):
    """Initial state, frozen seeker frame, maneuver and the raw draws"""

    state: EngagementState
    frame: SeekerFrame
    maneuver: ManeuverProfile
    params: dict[str, float]


def place_target(range_m: float, theta: float, phi: float) -> Vec3:
    """Target position in the missile-centred frame from spherical angles"""
    if range_m <= 0:
        raise ValueError("range must be positive")
    s = math.sin(theta)
    return range_m * np.array([s * math.cos(phi), s * math.sin(phi), math.cos(theta)])


def target_velocity(speed: float, alpha: float, beta: float) -> Vec3:
    """Target velocity vector from its magnitude and two angles"""
    if speed <= 0:
        raise ValueError("speed must be positive")
    s = math.sin(beta)
    return speed * np.array([s * math.cos(alpha), s * math.sin(alpha), math.cos(beta)])


def lead_angle(target_speed: float, aspect: float, missile_speed: float) -> float:
    """Planar lead angle (rad) putting the missile on a collision triangle

    Args:
        target_speed: Target speed (m/s)
        aspect: Angle between the target velocity and the line of sight (rad)
        missile_speed: Missile speed (m/s)

    Raises:
        NoCollisionSolutionError: If the arcsine argument leaves [-1, 1]
    """
    arg = target_speed * math.sin(aspect) / missile_speed
    if abs(arg) > 1.0:
        raise NoCollisionSolutionError(
            f"Lead angle infeasible: |{arg:.4f}| > 1 (target too fast off-LOS)"
        )
    return math.asin(arg)


def collision_velocity(v_t: Vec3, los_hat: Vec3, missile_speed: float) -> Vec3:
    """Missile velocity of the given speed on a collision triangle

    The planar lead-angle solution is built in the plane spanned by the target
    velocity and the line of sight and expressed back in the original frame.
    The missile matches the target's velocity component across the line of
    sight, so the relative velocity points straight down the line of sight.

    Raises:
        NoCollisionSolutionError: If no lead angle exists or the resulting
            geometry does not close
    """
    los = unit(np.asarray(los_hat, dtype=float))
    v_t = np.asarray(v_t, dtype=float)
    speed_t = float(np.linalg.norm(v_t))

    v_along = float(np.dot(v_t, los))
    v_across = v_t - v_along * los
    across = float(np.linalg.norm(v_across))

    # Plane normal v_t x los vanishes when the target flies along the LOS
    if across <= 1e-12 * max(speed_t, 1.0):
        e_across = np.zeros(3)
        lead = 0.0
    else:
        e_across = v_across / across
        aspect = math.atan2(across, v_along)
        lead = lead_angle(speed_t, aspect, missile_speed)

    v_m = missile_speed * (math.cos(lead) * los + math.sin(lead) * e_across)
    if v_along - missile_speed * math.cos(lead) >= 0.0:
        raise NoCollisionSolutionError("Collision geometry does not close")
    return v_m


def perturb_on_cone(ideal: Vec3, cone_angle: float, rng: np.random.Generator) -> Vec3:
    """Rotate ``ideal`` by exactly ``cone_angle`` about a uniform azimuth

    One azimuth is always drawn so the random stream stays aligned whatever
    the cone angle.
    """
    if cone_angle < 0:
        raise ValueError("cone_angle must be non-negative")
    azimuth = float(rng.uniform(0.0, TWO_PI))
    if cone_angle == 0.0:
        return np.array(ideal, dtype=float)

    magnitude = float(np.linalg.norm(ideal))
    axis = np.asarray(ideal, dtype=float) / magnitude
    e1, e2 = orthonormal_basis(axis)
    side = math.cos(azimuth) * e1 + math.sin(azimuth) * e2
    return magnitude * (math.cos(cone_angle) * axis + math.sin(cone_angle) * side)


def _uniform(rng: np.random.Generator, interval: tuple[float, float]) -> float:
    low, high = interval
    if low == high:
        return float(low)
    return float(rng.uniform(low, high))


def sample_maneuver(
    config: ScenarioConfig, v_t: Vec3, rng: np.random.Generator
) -> ManeuverProfile:
    """Draw a maneuver orthogonal to the initial target velocity"""
    v_hat = unit(v_t)
    e1, e2 = orthonormal_basis(v_hat)
    psi = float(rng.uniform(0.0, TWO_PI))
    direction = math.cos(psi) * e1 + math.sin(psi) * e2
    normal = np.cross(v_hat, direction)

    if config.maneuver_kind == "none" or config.target_accel_max == 0.0:
        return ManeuverProfile("none", 0.0, direction, normal)

    if config.maneuver_kind == "barrel-roll":
        return ManeuverProfile(
            kind="barrel-roll",
            accel_magnitude=config.target_accel_max,
            direction=direction,
            normal=normal,
            weave_period=_uniform(rng, config.weave_period_s),
            phase=float(rng.uniform(0.0, TWO_PI)),
        )

    if config.accel_pinned:
        magnitude = config.target_accel_max
    else:
        magnitude = float(rng.uniform(0.0, config.target_accel_max))
    start = _uniform(rng, config.bang_bang_start_s)
    switch = start + _uniform(rng, config.bang_bang_switch_offset_s)
    duration = _uniform(rng, config.bang_bang_duration_s)
    return ManeuverProfile(
        kind="bang-bang",
        accel_magnitude=magnitude,
        direction=direction,
        normal=normal,
        start_time=start,
        switch_time=switch,
        duration=duration,
    )


def maneuver_accel(profile: ManeuverProfile, v_t_current: Vec3, t: float) -> Vec3:
    """Commanded target acceleration at time ``t``

    The raw command is re-orthogonalized against the current target velocity
    and rescaled to the profile magnitude, so ``a · v = 0`` holds as the
    maneuver bends the trajectory.
    """
    mag = profile.accel_magnitude
    if profile.kind == "none" or mag == 0.0:
        return np.zeros(3)

    if profile.kind == "bang-bang":
        if t < profile.start_time or t >= profile.start_time + profile.duration:
            return np.zeros(3)
        sign = 1.0 if t < profile.switch_time else -1.0
        raw = sign * mag * profile.direction
    else:
        w = TWO_PI * t / profile.weave_period + profile.phase
        raw = mag * (math.cos(w) * profile.direction + math.sin(w) * profile.normal)

    speed = float(np.linalg.norm(v_t_current))
    if speed == 0.0:
        return raw
    v_hat = v_t_current / speed
    lateral = raw - float(np.dot(raw, v_hat)) * v_hat
    norm = float(np.linalg.norm(lateral))
    if norm == 0.0:
        return lateral
    return lateral * (mag / norm)


def sample_scenario(
    config: ScenarioConfig,
    rng: np.random.Generator,
    missile: Optional[MissileConfig] = None,
    seeker: Optional[SeekerConfig] = None,
) -> SampledScenario:
    """Draw one randomized engagement

    Args:
        config: Initial-condition ranges
        rng: Episode random stream
        missile: Missile constants (defaults used when None)
        seeker: Seeker settings (defaults used when None)

    Returns:
        ``SampledScenario`` with the missile at the origin

    Raises:
        NoCollisionSolutionError: If no feasible geometry is found within
            ``config.max_resample_attempts`` draws
    """
    missile = missile or MissileConfig()
    seeker = seeker or SeekerConfig()

    for attempt in range(config.max_resample_attempts):
        range_m = _uniform(rng, config.range_km) * 1000.0
        theta = math.radians(_uniform(rng, config.theta_deg))
        phi = math.radians(_uniform(rng, config.phi_deg))
        speed_t = _uniform(rng, config.target_speed)
        alpha = math.radians(_uniform(rng, config.alpha_deg))
        beta = math.radians(_uniform(rng, config.beta_deg))
        speed_m = _uniform(rng, config.missile_speed)

        r_t = place_target(range_m, theta, phi)
        # Head-on: the target flies toward the missile
        v_t = -target_velocity(speed_t, alpha, beta)
        try:
            v_ideal = collision_velocity(v_t, r_t / range_m, speed_m)
            break
        except NoCollisionSolutionError as e:
            logger.warning(
                "Resampling infeasible scenario (attempt %d): %s", attempt + 1, e
            )
    else:
        raise NoCollisionSolutionError(
            f"No feasible scenario after {config.max_resample_attempts} attempts"
        )

    heading_error = math.radians(_uniform(rng, config.heading_error_deg))
    v_m = perturb_on_cone(v_ideal, heading_error, rng)

    attitude_error = math.radians(_uniform(rng, config.attitude_error_deg))
    x_body = perturb_on_cone(unit(v_m), attitude_error, rng)
    attitude = dcm_to_quat(dcm_from_x_axis(x_body))

    maneuver = sample_maneuver(config, v_t, rng)

    state = EngagementState(
        missile=MissileBody(
            position=np.zeros(3), velocity=v_m, attitude=attitude, mass=missile.wet_mass
        ),
        target=TargetBody(
            position=r_t,
            velocity=v_t,
            commanded_accel=maneuver_accel(maneuver, v_t, 0.0),
        ),
    )
    frame = make_frame(attitude, state.r_tm, seeker.fov_limit_rad)
    params = {
        "range_km": range_m / 1000.0,
        "theta_deg": math.degrees(theta),
        "phi_deg": math.degrees(phi),
        "target_speed": speed_t,
        "alpha_deg": math.degrees(alpha),
        "beta_deg": math.degrees(beta),
        "missile_speed": speed_m,
        "heading_error_deg": math.degrees(heading_error),
        "attitude_error_deg": math.degrees(attitude_error),
        "target_accel": maneuver.accel_magnitude,
    }
    return SampledScenario(state, frame, maneuver, params)


def episode_rng(master_seed: int, episode_index: int) -> np.random.Generator:
    """Independent random stream for one episode

    Episode ``i`` of a run seeded with ``s`` always uses seed ``s + i``.
    """
    seed = master_seed + episode_index
    if seed < 0:
        raise ConfigurationError("Episode seed must be non-negative")
    return np.random.default_rng(seed)
