"""Utility functions for passive-homing"""

from .rotations import (
    angle_between,
    dcm_from_x_axis,
    dcm_to_quat,
    orthonormal_basis,
    quat_to_dcm,
)

__all__ = [
    "angle_between",
    "dcm_from_x_axis",
    "dcm_to_quat",
    "orthonormal_basis",
    "quat_to_dcm",
]
