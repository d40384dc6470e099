"""
Passive Homing

Angle-only terminal homing with a recurrent PPO policy driving pulsed divert
thrusters, benchmarked against augmented zero-effort-miss guidance.
"""

__version__ = "0.2.0"

from .config import HomingSettings, load_run_config, resolve_run_config
from .dependencies import get_settings, reset_dependencies, set_custom_settings
from .environment import EngagementEnv, run_episode
from .evaluation import compare, run_campaign, trajectory_dump, wilson_interval
from .guidance import create_guidance, pulse_map, zem_command
from .models import (
    CampaignConfig,
    CampaignReport,
    MissileConfig,
    PpoConfig,
    RewardConfig,
    RunConfig,
    ScenarioConfig,
    SeekerConfig,
)
from .neuralnet import PolicyNetwork, ValueNetwork
from .ppo import PpoTrainer, collect_rollouts, ppo_update, train
from .presets import apply_preset
from .scenario import sample_scenario

__all__ = [
    # Models
    "CampaignConfig",
    "CampaignReport",
    "MissileConfig",
    "PpoConfig",
    "RewardConfig",
    "RunConfig",
    "ScenarioConfig",
    "SeekerConfig",
    # Configuration
    "HomingSettings",
    "load_run_config",
    "resolve_run_config",
    "apply_preset",
    "get_settings",
    "set_custom_settings",
    "reset_dependencies",
    # Simulation
    "EngagementEnv",
    "run_episode",
    "sample_scenario",
    # Guidance
    "create_guidance",
    "pulse_map",
    "zem_command",
    # Learning
    "PolicyNetwork",
    "ValueNetwork",
    "PpoTrainer",
    "collect_rollouts",
    "ppo_update",
    "train",
    # Evaluation
    "compare",
    "run_campaign",
    "trajectory_dump",
    "wilson_interval",
]
