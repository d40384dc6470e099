from .checkpoints import Checkpoint, load_checkpoint, save_checkpoint
from .reports import (
    read_calibration,
    read_learning_curve,
    read_report,
    read_trajectory,
    write_calibration,
    write_comparison,
    write_episodes,
    write_learning_curve,
    write_report,
    write_trajectory,
)

__all__ = [
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "read_calibration",
    "read_learning_curve",
    "read_report",
    "read_trajectory",
    "write_calibration",
    "write_comparison",
    "write_episodes",
    "write_learning_curve",
    "write_report",
    "write_trajectory",
]
