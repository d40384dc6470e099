"""Stabilized passive seeker

The seeker platform frame is frozen at the missile attitude at the start of
homing. Seeker angles are the arcsines of the line-of-sight projections onto
the platform y and z axes.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .dynamics import EngagementState
from .errors import DegenerateGeometryError
from .utils.rotations import DCM, Quaternion, Vec3, quat_to_dcm

DEFAULT_FOV_LIMIT = math.radians(67.5)

Angles = tuple[float, float]


@dataclass(frozen=True)
class SeekerFrame:
    """Seeker platform frame and the homing-start reference angles

    Attributes:
        c_sn: DCM mapping inertial components to seeker components
        theta_u0: Seeker angle about the platform z-axis at homing start (rad)
        theta_v0: Seeker angle about the platform y-axis at homing start (rad)
        fov_limit: Per-axis angle limit (rad)
    """

    c_sn: DCM
    theta_u0: float
    theta_v0: float
    fov_limit: float = DEFAULT_FOV_LIMIT


@dataclass(frozen=True)
class SeekerObservation:
    """Policy observation for one guidance cycle

    ``e_u``, ``e_v`` are angle errors against the homing-start angles and
    ``d_theta_u``, ``d_theta_v`` the raw change over the last cycle (rad,
    not divided by the cycle time). ``theta_u``/``theta_v`` carry the current
    angles for the next cycle's differencing and are not part of the vector.
    """

    e_u: float
    e_v: float
    d_theta_u: float
    d_theta_v: float
    theta_u: float
    theta_v: float

    def as_array(self) -> NDArray[np.float64]:
        """The 4-element observation vector ``[e_u, e_v, dθ_u, dθ_v]``"""
        return np.array([self.e_u, self.e_v, self.d_theta_u, self.d_theta_v])

    @property
    def angles(self) -> Angles:
        return self.theta_u, self.theta_v


def los_in_seeker_frame(r_tm_inertial: Vec3, c_sn: DCM) -> Vec3:
    """Unit line-of-sight vector expressed in the seeker frame

    Raises:
        DegenerateGeometryError: If the range is zero
    """
    r_s = c_sn @ np.asarray(r_tm_inertial, dtype=np.float64)
    norm = float(np.linalg.norm(r_s))
    if norm == 0.0 or not math.isfinite(norm):
        raise DegenerateGeometryError("Line of sight undefined at zero range")
    return r_s / norm


def seeker_angles(r_tm_inertial: Vec3, c_sn: DCM) -> Angles:
    """Seeker angles ``(θ_u, θ_v)`` in radians

    Args:
        r_tm_inertial: Target position relative to the missile, inertial frame
        c_sn: Inertial-to-seeker DCM

    Raises:
        DegenerateGeometryError: If the range is zero
    """
    los = los_in_seeker_frame(r_tm_inertial, c_sn)
    theta_u = math.asin(min(max(float(los[1]), -1.0), 1.0))
    theta_v = math.asin(min(max(float(los[2]), -1.0), 1.0))
    return theta_u, theta_v


def make_frame(
    attitude: Quaternion,
    r_tm_inertial: Vec3,
    fov_limit: float = DEFAULT_FOV_LIMIT,
) -> SeekerFrame:
    """Freeze the seeker frame at the homing-start attitude"""
    c_sn = quat_to_dcm(attitude)
    theta_u0, theta_v0 = seeker_angles(r_tm_inertial, c_sn)
    return SeekerFrame(
        c_sn=c_sn, theta_u0=theta_u0, theta_v0=theta_v0, fov_limit=fov_limit
    )


def observe(
    state: EngagementState,
    frame: SeekerFrame,
    prev_angles: Optional[Angles] = None,
    noise_std: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> SeekerObservation:
    """Build the policy observation for the current guidance cycle

    Args:
        state: Ground-truth engagement state
        frame: Seeker frame fixed at homing start
        prev_angles: Angles measured on the previous cycle, None on the first
        noise_std: Standard deviation of Gaussian angle noise (rad)
        rng: Random stream for the noise, required when ``noise_std > 0``

    Returns:
        Observation with angle changes set to zero on the first cycle

    Raises:
        DegenerateGeometryError: If the range is zero
    """
    theta_u, theta_v = seeker_angles(state.r_tm, frame.c_sn)
    if noise_std > 0.0:
        if rng is None:
            raise ValueError("A random generator is required for seeker noise")
        theta_u += float(rng.normal(0.0, noise_std))
        theta_v += float(rng.normal(0.0, noise_std))

    if prev_angles is None:
        d_u = d_v = 0.0
    else:
        d_u = theta_u - prev_angles[0]
        d_v = theta_v - prev_angles[1]

    return SeekerObservation(
        e_u=theta_u - frame.theta_u0,
        e_v=theta_v - frame.theta_v0,
        d_theta_u=d_u,
        d_theta_v=d_v,
        theta_u=theta_u,
        theta_v=theta_v,
    )


def fov_violated(
    theta_u: float, theta_v: float, limit: float = DEFAULT_FOV_LIMIT
) -> bool:
    """True iff either seeker angle exceeds the per-axis limit"""
    return max(abs(theta_u), abs(theta_v)) > limit


def target_behind(r_tm_inertial: Vec3, c_sn: DCM) -> bool:
    """True when the target is not in front of the seeker boresight plane

    The arcsine angles stay small for a target directly behind the seeker,
    so the FOV check alone cannot see a flyby.
    """
    return bool(los_in_seeker_frame(r_tm_inertial, c_sn)[0] <= 0.0)
