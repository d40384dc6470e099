"""Augmented zero-effort-miss guidance with a pulsed-thruster mapping"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..dynamics import EngagementState, ThrusterAction
from ..errors import TargetOpeningError
from ..interfaces import GuidanceLaw
from ..models import MissileConfig, ThrusterSpec
from ..seeker import SeekerFrame, SeekerObservation
from ..utils.rotations import Quaternion, Vec3, quat_to_dcm

DEFAULT_NAVIGATION_GAIN = 3.0
PULSE_THRESHOLD_RATIO = 1.0 / 3.0


@dataclass(frozen=True)
class ZemCommand:
    """Augmented ZEM quantities for one guidance cycle

    Attributes:
        zem: Predicted miss vector (m)
        v_c: Closing velocity (m/s)
        t_go: Time to go (s)
        a_com: Commanded acceleration, inertial frame (m/s^2)
    """

    zem: Vec3
    v_c: float
    t_go: float
    a_com: Vec3


def closing_velocity(r_tm: Vec3, v_tm: Vec3) -> float:
    """Negative range rate ``-(r·v)/|r|``"""
    r = np.asarray(r_tm, dtype=np.float64)
    return -float(np.dot(r, v_tm)) / float(np.linalg.norm(r))


def zem_command(
    r_tm: Vec3, v_tm: Vec3, a_t: Vec3, n: float = DEFAULT_NAVIGATION_GAIN
) -> ZemCommand:
    """Augmented ZEM acceleration command from the true relative state

    Args:
        r_tm: Target position relative to the missile (m)
        v_tm: Target velocity relative to the missile (m/s)
        a_t: Target acceleration (m/s^2)
        n: Navigation constant

    Returns:
        ``ZemCommand`` with ``a_com = n·ZEM/t_go²``

    Raises:
        TargetOpeningError: If the closing velocity is not positive
    """
    r = np.asarray(r_tm, dtype=np.float64)
    v = np.asarray(v_tm, dtype=np.float64)
    a = np.asarray(a_t, dtype=np.float64)

    range_m = float(np.linalg.norm(r))
    if range_m == 0.0:
        raise TargetOpeningError("Zero range; nothing left to guide")
    v_c = -float(np.dot(r, v)) / range_m
    if v_c <= 0.0 or not math.isfinite(v_c):
        raise TargetOpeningError(f"Target is opening (v_c = {v_c:.3f} m/s)")

    t_go = range_m / v_c
    zem = r + v * t_go + 0.5 * a * t_go**2
    return ZemCommand(zem=zem, v_c=v_c, t_go=t_go, a_com=n * zem / t_go**2)


def pulse_map(
    a_com_inertial: Vec3,
    q: Quaternion,
    thrusters: Sequence[ThrusterSpec],
    a_max: float,
) -> ThrusterAction:
    """Discretize an acceleration command into thruster on/off pulses

    Thruster ``i`` fires iff the body-frame command projected on its force
    direction exceeds ``a_max/3``. The body x component has no actuator.

    Raises:
        ValueError: If ``a_max`` is not positive
    """
    if a_max <= 0:
        raise ValueError("a_max must be positive")
    a_body = quat_to_dcm(q) @ np.asarray(a_com_inertial, dtype=np.float64)
    threshold = PULSE_THRESHOLD_RATIO * a_max
    return np.array(
        [1 if float(np.dot(a_body, t.direction)) > threshold else 0 for t in thrusters],
        dtype=np.int8,
    )


class ZemGuidance(GuidanceLaw):
    """Pulsed augmented ZEM benchmark fed with ground truth"""

    name = "zem"

    def __init__(
        self,
        missile: Optional[MissileConfig] = None,
        n: float = DEFAULT_NAVIGATION_GAIN,
    ):
        self.missile = missile or MissileConfig()
        self.n = n
        self._thrusters = self.missile.thruster_list
        self._a_max = self.missile.max_accel

    def reset(
        self, frame: SeekerFrame, rng: Optional[np.random.Generator] = None
    ) -> None:
        pass

    def act(
        self, state: EngagementState, observation: SeekerObservation
    ) -> ThrusterAction:
        try:
            cmd = zem_command(
                state.r_tm, state.v_tm, state.target.commanded_accel, self.n
            )
        except TargetOpeningError:
            # Coast; episode termination ends the run
            return np.zeros(len(self._thrusters), dtype=np.int8)
        return pulse_map(
            cmd.a_com, state.missile.attitude, self._thrusters, self._a_max
        )
