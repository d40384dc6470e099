"""Shaping and terminal rewards"""

import math
from typing import Optional

from .models import Outcome, RewardConfig
from .seeker import SeekerObservation


def shaping_reward(obs: SeekerObservation, cfg: RewardConfig) -> float:
    """Dense reward in (0, 1] for small angle errors and small angle changes

    ``exp(-|[e_u, e_v]|/σ_e - |[dθ_u, dθ_v]|/σ_dθ)``; the step reward weights
    it by ``cfg.alpha``.
    """
    err = math.hypot(obs.e_u, obs.e_v)
    rate = math.hypot(obs.d_theta_u, obs.d_theta_v)
    return math.exp(-err / cfg.sigma_e - rate / cfg.sigma_dtheta)


def terminal_reward(
    miss: float, cfg: Optional[RewardConfig] = None, outcome: Optional[Outcome] = None
) -> float:
    """Terminal bonus for a miss strictly inside the hit radius

    A seeker FOV exit earns nothing whatever the miss so far.
    """
    cfg = cfg or RewardConfig()
    if outcome == "fov_exit":
        return 0.0
    return cfg.terminal_bonus if miss < cfg.hit_radius else 0.0


def step_reward(shaping: float, terminal: float, cfg: RewardConfig) -> float:
    """Combined per-step reward ``α·r_shaping + r_terminal``"""
    return cfg.alpha * shaping + terminal
