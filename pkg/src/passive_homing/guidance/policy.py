"""Learned recurrent guidance law"""

from typing import Optional

import numpy as np

from ..dynamics import EngagementState, ThrusterAction
from ..errors import UsageError
from ..interfaces import GuidanceLaw
from ..neuralnet import PolicyNetwork, greedy_action, policy_forward, sample_action
from ..seeker import SeekerFrame, SeekerObservation


class PolicyGuidance(GuidanceLaw):
    """Maps seeker observations to thruster pulses with a trained policy

    Evaluation runs greedily; sampling mode draws from the policy
    distribution with the episode random stream.
    """

    name = "rl"

    def __init__(self, policy: PolicyNetwork, sample: bool = False):
        self.policy = policy
        self.sample = sample
        self._rng: Optional[np.random.Generator] = None

    def reset(
        self, frame: SeekerFrame, rng: Optional[np.random.Generator] = None
    ) -> None:
        self.policy.reset_state()
        self._rng = rng

    def act(
        self, state: EngagementState, observation: SeekerObservation
    ) -> ThrusterAction:
        dist, _ = policy_forward(self.policy, observation)
        if not self.sample:
            return greedy_action(dist)
        if self._rng is None:
            raise UsageError("Sampling guidance needs a random stream from reset()")
        action, _ = sample_action(dist, self._rng)
        return action
