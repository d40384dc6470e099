"""Guidance-cycle engagement environment

One ``step`` applies a thruster command for a full guidance period, then
reads the seeker. The episode ends when the target leaves the seeker field
of view (including passing behind the seeker), when the range starts to open
after closest approach, or at the time cap.
"""

import logging
from typing import Callable, NamedTuple, Optional

import numpy as np

from .dynamics import (
    EngagementState,
    TargetAccelFn,
    ThrusterAction,
    coerce_action,
    propagate_guidance_cycle,
)
from .errors import DegenerateGeometryError, UsageError
from .interfaces import GuidanceLaw
from .models import (
    MissileConfig,
    Outcome,
    RewardConfig,
    RunConfig,
    ScenarioConfig,
    SeekerConfig,
)
from .rewards import shaping_reward, terminal_reward
from .scenario import ManeuverProfile, sample_scenario
from .seeker import (
    SeekerFrame,
    SeekerObservation,
    fov_violated,
    observe,
    target_behind,
)

logger = logging.getLogger(__name__)

_TIME_EPS = 1e-9


class StepResult(NamedTuple):
    """What one guidance cycle produced

    ``shaping`` is the unweighted shaping reward of the new observation;
    ``terminal`` is non-zero only on the last step of a hit.
    """

    observation: SeekerObservation
    shaping: float
    terminal: float
    done: bool
    outcome: Optional[Outcome]


class EpisodeSummary(NamedTuple):
    outcome: Outcome
    miss_distance: float
    fuel_used: float
    steps: int
    duration: float


StepCallback = Callable[["EngagementEnv", ThrusterAction], None]


class EngagementEnv:
    """Randomized homing engagement driven one guidance cycle at a time"""

    def __init__(
        self,
        scenario: Optional[ScenarioConfig] = None,
        missile: Optional[MissileConfig] = None,
        seeker: Optional[SeekerConfig] = None,
        reward: Optional[RewardConfig] = None,
    ):
        self.scenario = scenario or ScenarioConfig()
        self.missile = missile or MissileConfig()
        self.seeker = seeker or SeekerConfig()
        self.reward = reward or RewardConfig()

        self._rng: Optional[np.random.Generator] = None
        self._state: Optional[EngagementState] = None
        self._frame: Optional[SeekerFrame] = None
        self._maneuver: Optional[ManeuverProfile] = None
        self._accel_fn: Optional[TargetAccelFn] = None
        self._observation: Optional[SeekerObservation] = None
        self._min_range = float("inf")
        self._steps = 0
        self._done = False
        self._outcome: Optional[Outcome] = None

    @classmethod
    def from_config(cls, config: RunConfig) -> "EngagementEnv":
        return cls(config.scenario, config.missile, config.seeker, config.reward)

    @property
    def state(self) -> EngagementState:
        if self._state is None:
            raise UsageError("Environment has not been reset")
        return self._state

    @property
    def frame(self) -> SeekerFrame:
        if self._frame is None:
            raise UsageError("Environment has not been reset")
        return self._frame

    @property
    def observation(self) -> SeekerObservation:
        if self._observation is None:
            raise UsageError("Environment has not been reset")
        return self._observation

    @property
    def maneuver(self) -> Optional[ManeuverProfile]:
        return self._maneuver

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def done(self) -> bool:
        return self._done

    @property
    def outcome(self) -> Optional[Outcome]:
        return self._outcome

    @property
    def miss_distance(self) -> float:
        """Smallest separation seen so far (m)"""
        return self._min_range

    def reset(self, rng: np.random.Generator) -> SeekerObservation:
        """Start a new episode from the given episode stream

        Returns:
            First observation (angle changes are zero)
        """
        sampled = sample_scenario(self.scenario, rng, self.missile, self.seeker)
        self._rng = rng
        self._state = sampled.state
        self._frame = sampled.frame
        self._maneuver = sampled.maneuver
        self._accel_fn = sampled.maneuver.accel_fn()
        self._min_range = sampled.state.range
        self._steps = 0
        self._done = False
        self._outcome = None
        self._observation = observe(
            sampled.state,
            sampled.frame,
            None,
            self.seeker.angle_noise_std,
            rng,
        )
        return self._observation

    def step(self, action: ThrusterAction) -> StepResult:
        """Hold ``action`` for one guidance period

        Raises:
            UsageError: If called before ``reset`` or after the episode ended
        """
        if self._state is None or self._frame is None or self._observation is None:
            raise UsageError("Call reset() before step()")
        if self._done:
            raise UsageError("Episode has finished; call reset()")

        cycle = propagate_guidance_cycle(
            self._state, coerce_action(action), self.missile, self._accel_fn
        )
        state = cycle.state
        self._state = state
        self._min_range = min(self._min_range, cycle.min_range)
        self._steps += 1

        lost = False
        try:
            obs = observe(
                state,
                self._frame,
                self._observation.angles,
                self.seeker.angle_noise_std,
                self._rng,
            )
            lost = target_behind(state.r_tm, self._frame.c_sn) or fov_violated(
                obs.theta_u, obs.theta_v, self._frame.fov_limit
            )
        except DegenerateGeometryError:
            # Exact coincidence; the cycle minimum already recorded the hit
            obs = self._observation
            lost = True
        self._observation = obs

        closing = float(np.dot(state.r_tm, state.v_tm)) < 0.0
        timed_out = state.time >= self.missile.max_episode_time - _TIME_EPS
        done = lost or not closing or timed_out

        shaping = shaping_reward(obs, self.reward)
        terminal = 0.0
        outcome: Optional[Outcome] = None
        if done:
            outcome = self._classify(lost, closing)
            terminal = terminal_reward(self._min_range, self.reward, outcome)
            self._done = True
            self._outcome = outcome
        return StepResult(obs, shaping, terminal, done, outcome)

    def _classify(self, lost: bool, closing: bool) -> Outcome:
        if self._min_range < self.reward.hit_radius:
            return "hit"
        if not closing:
            return "miss"
        if lost:
            return "fov_exit"
        return "timeout"

    def summary(self) -> EpisodeSummary:
        """Episode result once ``done``"""
        if not self._done or self._outcome is None:
            raise UsageError("Episode is still running")
        return EpisodeSummary(
            outcome=self._outcome,
            miss_distance=self._min_range,
            fuel_used=self.state.fuel_used,
            steps=self._steps,
            duration=self.state.time,
        )


def run_episode(
    env: EngagementEnv,
    guidance: GuidanceLaw,
    rng: np.random.Generator,
    on_step: Optional[StepCallback] = None,
) -> EpisodeSummary:
    """Fly one engagement under ``guidance``

    Args:
        env: Environment to reset and drive
        guidance: Guidance law
        rng: Episode random stream
        on_step: Called after every step with the environment and the action

    Returns:
        Episode summary
    """
    obs = env.reset(rng)
    guidance.reset(env.frame, rng)
    while True:
        action = guidance.act(env.state, obs)
        result = env.step(action)
        if on_step is not None:
            on_step(env, action)
        obs = result.observation
        if result.done:
            break
    summary = env.summary()
    logger.debug(
        "Episode finished: %s, miss %.3f m after %d steps",
        summary.outcome,
        summary.miss_distance,
        summary.steps,
    )
    return summary
