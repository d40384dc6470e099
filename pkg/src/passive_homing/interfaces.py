from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from .dynamics import EngagementState, ThrusterAction
from .seeker import SeekerFrame, SeekerObservation


class GuidanceLaw(ABC):
    """Interface for terminal guidance laws

    Every law actuates the same pulsed divert thrusters, so campaigns can swap
    the RL policy for a classical benchmark without touching the simulator.
    Laws that need ground truth read it from ``state``; the RL policy uses
    only the seeker observation.
    """

    name: str = "guidance"

    @abstractmethod
    def reset(
        self, frame: SeekerFrame, rng: Optional[np.random.Generator] = None
    ) -> None:
        """Prepare for a new engagement

        Args:
            frame: Seeker frame frozen at homing start
            rng: Episode random stream, used by stochastic laws
        """
        pass

    @abstractmethod
    def act(
        self, state: EngagementState, observation: SeekerObservation
    ) -> ThrusterAction:
        """Thruster commands for the coming guidance cycle

        Args:
            state: Ground-truth engagement state
            observation: Seeker observation for this cycle

        Returns:
            One 0/1 command per thruster
        """
        pass
