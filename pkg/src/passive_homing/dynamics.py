"""Translational dynamics for the missile/target pair

The missile attitude is held fixed for a whole engagement, so only the
translational states and the missile mass are integrated. State objects are
immutable; every step returns a new ``EngagementState``.
"""

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .models import MissileConfig, ThrusterSpec
from .utils.rotations import Quaternion, Vec3, check_unit_quaternion, quat_to_dcm

ThrusterAction = NDArray[np.int8]
TargetAccelFn = Callable[[float, Vec3], Vec3]

# Layout of the packed state vector used by the integrator
_RM, _VM, _M, _RT, _VT = slice(0, 3), slice(3, 6), 6, slice(7, 10), slice(10, 13)
_STATE_SIZE = 13
_CYCLE_EPS = 1e-9


@dataclass(frozen=True)
class MissileBody:
    """Missile translational state

    Attributes:
        position: Inertial position (m)
        velocity: Inertial velocity (m/s)
        attitude: Scalar-first quaternion, constant during an engagement
        mass: Current mass (kg)
    """

    position: Vec3
    velocity: Vec3
    attitude: Quaternion
    mass: float


@dataclass(frozen=True)
class TargetBody:
    """Target translational state and current commanded acceleration"""

    position: Vec3
    velocity: Vec3
    commanded_accel: Vec3


@dataclass(frozen=True)
class EngagementState:
    """Ground-truth engagement kinematics at one instant"""

    missile: MissileBody
    target: TargetBody
    time: float = 0.0
    fuel_used: float = 0.0

    @property
    def r_tm(self) -> Vec3:
        """Target position relative to the missile"""
        return self.target.position - self.missile.position

    @property
    def v_tm(self) -> Vec3:
        """Target velocity relative to the missile"""
        return self.target.velocity - self.missile.velocity

    @property
    def range(self) -> float:
        return float(np.linalg.norm(self.r_tm))


class CycleResult(NamedTuple):
    """Outcome of one guidance cycle of propagation"""

    state: EngagementState
    min_range: float
    substeps: int


def coerce_action(action: Sequence[int] | NDArray[np.integer]) -> ThrusterAction:
    """Validate an on/off command vector

    Raises:
        ValueError: If any element is not 0 or 1
    """
    arr = np.asarray(action, dtype=np.int8).reshape(-1)
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError(f"Thruster commands must be 0 or 1, got {list(action)}")
    return arr


def body_force_torque(
    action: Sequence[int] | ThrusterAction,
    thrusters: Sequence[ThrusterSpec],
    r_com: Optional[Vec3] = None,
) -> tuple[Vec3, Vec3]:
    """Body-frame force and torque for a set of thruster commands

    Args:
        action: One 0/1 command per thruster
        thrusters: Thruster layout
        r_com: Body-frame centre of mass (defaults to the centroid)

    Returns:
        ``(force, torque)`` in N and N·m. Torque is diagnostic only.
    """
    cmd = coerce_action(action)
    if cmd.shape[0] != len(thrusters):
        raise ValueError(
            f"Expected {len(thrusters)} thruster commands, got {cmd.shape[0]}"
        )
    com = np.zeros(3) if r_com is None else np.asarray(r_com, dtype=np.float64)

    force = np.zeros(3)
    torque = np.zeros(3)
    for on, spec in zip(cmd, thrusters):
        thrust = spec.max_thrust if on else spec.min_thrust
        f_i = np.asarray(spec.direction) * thrust
        force += f_i
        torque += np.cross(np.asarray(spec.position) - com, f_i)
    return force, torque


def thrust_magnitude_sum(
    action: Sequence[int] | ThrusterAction, thrusters: Sequence[ThrusterSpec]
) -> float:
    """Sum of individual thruster force magnitudes (N)"""
    cmd = coerce_action(action)
    return float(
        sum(t.max_thrust if on else t.min_thrust for on, t in zip(cmd, thrusters))
    )


def body_to_inertial(force_b: Vec3, q: Quaternion) -> Vec3:
    """Rotate a body-frame vector into the inertial frame

    Raises:
        InvalidAttitudeError: If ``q`` is not unit-norm within 1e-6
    """
    check_unit_quaternion(q)
    return quat_to_dcm(q).T @ np.asarray(force_b, dtype=np.float64)


def missile_derivatives(
    state: EngagementState,
    action: Sequence[int] | ThrusterAction,
    config: MissileConfig,
) -> tuple[Vec3, Vec3, float]:
    """Missile position, velocity and mass rates

    Gravity is neglected. Once the mass reaches ``dry_mass`` the missile is
    out of fuel and every thruster produces zero thrust.

    Returns:
        ``(r_dot, v_dot, m_dot)``
    """
    missile = state.missile
    if missile.mass <= config.dry_mass:
        return missile.velocity.copy(), np.zeros(3), 0.0
    force_b, _ = body_force_torque(action, config.thruster_list)
    force_n = body_to_inertial(force_b, missile.attitude)
    m_dot = -thrust_magnitude_sum(action, config.thruster_list) / (
        config.isp * config.g_ref
    )
    return missile.velocity.copy(), force_n / missile.mass, m_dot


def target_derivatives(target: TargetBody) -> tuple[Vec3, Vec3]:
    """Target position and velocity rates under its commanded acceleration"""
    return target.velocity.copy(), np.asarray(target.commanded_accel, dtype=float)


def closest_approach_on_segment(r0: Vec3, r1: Vec3) -> float:
    """Minimum distance to the origin along the chord from ``r0`` to ``r1``

    Relative motion within a substep is treated as linear, which removes the
    sampling bias of only looking at substep end points.
    """
    d = r1 - r0
    dd = float(np.dot(d, d))
    if dd == 0.0:
        return float(np.linalg.norm(r0))
    s = min(max(-float(np.dot(r0, d)) / dd, 0.0), 1.0)
    return float(np.linalg.norm(r0 + s * d))


def _pack(state: EngagementState) -> NDArray[np.float64]:
    y = np.empty(_STATE_SIZE)
    y[_RM] = state.missile.position
    y[_VM] = state.missile.velocity
    y[_M] = state.missile.mass
    y[_RT] = state.target.position
    y[_VT] = state.target.velocity
    return y


def _unpack(
    y: NDArray[np.float64],
    template: EngagementState,
    time: float,
    target_accel: Vec3,
    wet_mass: float,
) -> EngagementState:
    missile = replace(
        template.missile,
        position=y[_RM].copy(),
        velocity=y[_VM].copy(),
        mass=float(y[_M]),
    )
    target = TargetBody(
        position=y[_RT].copy(), velocity=y[_VT].copy(), commanded_accel=target_accel
    )
    return EngagementState(
        missile=missile,
        target=target,
        time=time,
        fuel_used=max(wet_mass - float(y[_M]), 0.0),
    )


class _Rhs:
    """Joint missile/target ODE with the thruster command frozen"""

    def __init__(
        self,
        force_n: Vec3,
        thrust_sum: float,
        config: MissileConfig,
        target_accel: TargetAccelFn,
    ):
        self.force_n = force_n
        self.m_dot = -thrust_sum / (config.isp * config.g_ref)
        self.dry_mass = config.dry_mass
        self.target_accel = target_accel

    def __call__(self, t: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
        dy = np.empty(_STATE_SIZE)
        dy[_RM] = y[_VM]
        if y[_M] > self.dry_mass:
            dy[_VM] = self.force_n / y[_M]
            dy[_M] = self.m_dot
        else:
            dy[_VM] = 0.0
            dy[_M] = 0.0
        dy[_RT] = y[_VT]
        dy[_VT] = self.target_accel(t, y[_VT])
        return dy


def _rk4(
    rhs: _Rhs, t: float, y: NDArray[np.float64], dt: float, dry_mass: float
) -> NDArray[np.float64]:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if y_next[_M] < dry_mass:
        y_next[_M] = dry_mass
    return y_next


def _build_rhs(
    state: EngagementState,
    action: Sequence[int] | ThrusterAction,
    config: MissileConfig,
    target_accel_fn: Optional[TargetAccelFn],
) -> tuple[_Rhs, TargetAccelFn]:
    force_b, _ = body_force_torque(action, config.thruster_list)
    force_n = body_to_inertial(force_b, state.missile.attitude)
    thrust_sum = thrust_magnitude_sum(action, config.thruster_list)
    if target_accel_fn is None:
        constant = np.asarray(state.target.commanded_accel, dtype=float).copy()

        def constant_accel(_t: float, _v: Vec3) -> Vec3:
            return constant

        target_accel_fn = constant_accel

    return _Rhs(force_n, thrust_sum, config, target_accel_fn), target_accel_fn


def rk4_step(
    state: EngagementState,
    action: Sequence[int] | ThrusterAction,
    dt: float,
    config: MissileConfig,
    target_accel_fn: Optional[TargetAccelFn] = None,
) -> EngagementState:
    """Advance the engagement by one classical RK4 step

    Args:
        state: Current engagement state
        action: Thruster commands, held constant over the step
        dt: Step size (s), must be positive
        config: Missile configuration
        target_accel_fn: Target acceleration as a function of ``(t, v_T)``;
            defaults to the state's constant commanded acceleration

    Returns:
        New engagement state with the mass clamped at ``dry_mass``
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    rhs, accel_fn = _build_rhs(state, action, config, target_accel_fn)
    y = _rk4(rhs, state.time, _pack(state), dt, config.dry_mass)
    t_next = state.time + dt
    return _unpack(y, state, t_next, accel_fn(t_next, y[_VT]), config.wet_mass)


def propagate_guidance_cycle(
    state: EngagementState,
    action: Sequence[int] | ThrusterAction,
    config: MissileConfig,
    target_accel_fn: Optional[TargetAccelFn] = None,
) -> CycleResult:
    """Integrate one guidance cycle with a range-dependent substep

    The substep is ``coarse_dt`` while the range exceeds ``fine_range`` and
    ``fine_dt`` afterwards; the switch is evaluated before every substep.

    Returns:
        ``CycleResult`` with the new state, the minimum within-substep
        closest approach over the cycle and the number of substeps taken
    """
    rhs, accel_fn = _build_rhs(state, action, config, target_accel_fn)
    y = _pack(state)
    t0 = state.time
    elapsed = 0.0
    substeps = 0
    min_range = float(np.linalg.norm(y[_RT] - y[_RM]))

    while config.guidance_period - elapsed > _CYCLE_EPS:
        r_rel = y[_RT] - y[_RM]
        rng = float(np.linalg.norm(r_rel))
        dt = config.coarse_dt if rng > config.fine_range else config.fine_dt
        dt = min(dt, config.guidance_period - elapsed)

        y = _rk4(rhs, t0 + elapsed, y, dt, config.dry_mass)
        elapsed += dt
        substeps += 1
        min_range = min(min_range, closest_approach_on_segment(r_rel, y[_RT] - y[_RM]))

    t_end = t0 + config.guidance_period
    new_state = _unpack(y, state, t_end, accel_fn(t_end, y[_VT]), config.wet_mass)
    return CycleResult(new_state, min_range, substeps)
