"""Pure proportional navigation, pulsed through the divert thrusters"""

from typing import Optional

import numpy as np

from ..dynamics import EngagementState, ThrusterAction
from ..errors import TargetOpeningError
from ..interfaces import GuidanceLaw
from ..models import MissileConfig
from ..seeker import SeekerFrame, SeekerObservation
from ..utils.rotations import Vec3
from .zem import DEFAULT_NAVIGATION_GAIN, closing_velocity, pulse_map


def los_rate(r_tm: Vec3, v_tm: Vec3) -> Vec3:
    """Inertial line-of-sight angular velocity ``r×v/|r|²``"""
    r = np.asarray(r_tm, dtype=np.float64)
    return np.cross(r, v_tm) / float(np.dot(r, r))


def pn_command(
    r_tm: Vec3, v_tm: Vec3, n: float = DEFAULT_NAVIGATION_GAIN
) -> Vec3:
    """PN acceleration ``n·v_c·(Ω × λ̂)``, normal to the line of sight

    Raises:
        TargetOpeningError: If the closing velocity is not positive
    """
    r = np.asarray(r_tm, dtype=np.float64)
    v_c = closing_velocity(r, v_tm)
    if v_c <= 0.0:
        raise TargetOpeningError(f"Target is opening (v_c = {v_c:.3f} m/s)")
    los_hat = r / float(np.linalg.norm(r))
    return n * v_c * np.cross(los_rate(r, v_tm), los_hat)


class PnGuidance(GuidanceLaw):
    """Secondary baseline; not used in the benchmark tables"""

    name = "pn"

    def __init__(
        self,
        missile: Optional[MissileConfig] = None,
        n: float = DEFAULT_NAVIGATION_GAIN,
    ):
        self.missile = missile or MissileConfig()
        self.n = n

    def reset(
        self, frame: SeekerFrame, rng: Optional[np.random.Generator] = None
    ) -> None:
        pass

    def act(
        self, state: EngagementState, observation: SeekerObservation
    ) -> ThrusterAction:
        thrusters = self.missile.thruster_list
        try:
            a_com = pn_command(state.r_tm, state.v_tm, self.n)
        except TargetOpeningError:
            return np.zeros(len(thrusters), dtype=np.int8)
        return pulse_map(
            a_com, state.missile.attitude, thrusters, self.missile.max_accel
        )
