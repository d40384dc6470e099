"""Attitude and vector helpers

Quaternions are scalar-first ``(q0, q1, q2, q3)``. ``quat_to_dcm`` returns
``[BN]``, the matrix that maps inertial-frame components to body-frame
components, so ``v_B = [BN] v_N`` and ``v_N = [BN]^T v_B``.
"""

import numpy as np
from numpy.typing import NDArray

from ..errors import DegenerateGeometryError, InvalidAttitudeError

Vec3 = NDArray[np.float64]
Quaternion = NDArray[np.float64]
DCM = NDArray[np.float64]

QUATERNION_TOLERANCE = 1e-6

IDENTITY_QUATERNION: Quaternion = np.array([1.0, 0.0, 0.0, 0.0])


def as_vec3(value: object) -> Vec3:
    """Convert a sequence to a float 3-vector

    Raises:
        ValueError: If the input does not have exactly three elements
    """
    vec = np.asarray(value, dtype=np.float64).reshape(-1)
    if vec.shape != (3,):
        raise ValueError(f"Expected a 3-vector, got shape {vec.shape}")
    return vec


def unit(vec: Vec3) -> Vec3:
    """Return ``vec`` normalized to unit length

    Raises:
        DegenerateGeometryError: If ``vec`` has zero length
    """
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise DegenerateGeometryError("Cannot normalize a zero-length vector")
    return vec / norm


def angle_between(a: Vec3, b: Vec3) -> float:
    """Angle in radians between two non-zero vectors

    Uses atan2 of the cross and dot products, which stays accurate for
    nearly parallel vectors where arccos loses precision.
    """
    cross = float(np.linalg.norm(np.cross(a, b)))
    dot = float(np.dot(a, b))
    return float(np.arctan2(cross, dot))


def check_unit_quaternion(q: Quaternion, tol: float = QUATERNION_TOLERANCE) -> None:
    """Validate quaternion norm

    Raises:
        InvalidAttitudeError: If ``|‖q‖ - 1| > tol``
    """
    norm = float(np.linalg.norm(q))
    if q.shape != (4,) or abs(norm - 1.0) > tol:
        raise InvalidAttitudeError(
            f"Attitude quaternion must be unit-norm (got norm {norm:.9f})"
        )


def quat_to_dcm(q: Quaternion) -> DCM:
    """Build ``[BN]`` from a scalar-first unit quaternion

    Args:
        q: Attitude quaternion ``(q0, q1, q2, q3)``

    Returns:
        3x3 direction cosine matrix mapping inertial to body components

    Raises:
        InvalidAttitudeError: If ``q`` is not unit-norm
    """
    check_unit_quaternion(q)
    q0, q1, q2, q3 = q
    return np.array(
        [
            [
                q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3,
                2.0 * (q1 * q2 + q0 * q3),
                2.0 * (q1 * q3 - q0 * q2),
            ],
            [
                2.0 * (q1 * q2 - q0 * q3),
                q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3,
                2.0 * (q2 * q3 + q0 * q1),
            ],
            [
                2.0 * (q1 * q3 + q0 * q2),
                2.0 * (q2 * q3 - q0 * q1),
                q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3,
            ],
        ]
    )


def dcm_to_quat(dcm: DCM) -> Quaternion:
    """Convert ``[BN]`` to a scalar-first quaternion (Shepperd's method)

    The returned quaternion has a non-negative scalar part.
    """
    trace = float(np.trace(dcm))
    candidates = np.array(
        [
            0.25 * (1.0 + trace),
            0.25 * (1.0 + 2.0 * dcm[0, 0] - trace),
            0.25 * (1.0 + 2.0 * dcm[1, 1] - trace),
            0.25 * (1.0 + 2.0 * dcm[2, 2] - trace),
        ]
    )
    idx = int(np.argmax(candidates))
    q = np.empty(4)
    if idx == 0:
        q[0] = np.sqrt(candidates[0])
        q[1] = (dcm[1, 2] - dcm[2, 1]) / (4.0 * q[0])
        q[2] = (dcm[2, 0] - dcm[0, 2]) / (4.0 * q[0])
        q[3] = (dcm[0, 1] - dcm[1, 0]) / (4.0 * q[0])
    elif idx == 1:
        q[1] = np.sqrt(candidates[1])
        q[0] = (dcm[1, 2] - dcm[2, 1]) / (4.0 * q[1])
        q[2] = (dcm[0, 1] + dcm[1, 0]) / (4.0 * q[1])
        q[3] = (dcm[2, 0] + dcm[0, 2]) / (4.0 * q[1])
    elif idx == 2:
        q[2] = np.sqrt(candidates[2])
        q[0] = (dcm[2, 0] - dcm[0, 2]) / (4.0 * q[2])
        q[1] = (dcm[0, 1] + dcm[1, 0]) / (4.0 * q[2])
        q[3] = (dcm[1, 2] + dcm[2, 1]) / (4.0 * q[2])
    else:
        q[3] = np.sqrt(candidates[3])
        q[0] = (dcm[0, 1] - dcm[1, 0]) / (4.0 * q[3])
        q[1] = (dcm[2, 0] + dcm[0, 2]) / (4.0 * q[3])
        q[2] = (dcm[1, 2] + dcm[2, 1]) / (4.0 * q[3])
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def axis_angle_quat(axis: Vec3, angle: float) -> Quaternion:
    """Quaternion for a frame rotation of ``angle`` radians about ``axis``"""
    axis = unit(as_vec3(axis))
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis))


def is_orthonormal(dcm: DCM, tol: float = 1e-9) -> bool:
    """Check ``DᵀD = I`` and ``det D = +1`` within ``tol``"""
    gram_ok = np.allclose(dcm.T @ dcm, np.eye(3), atol=tol, rtol=0.0)
    return bool(gram_ok and abs(np.linalg.det(dcm) - 1.0) <= tol)


def orthonormal_basis(axis: Vec3) -> tuple[Vec3, Vec3]:
    """Two unit vectors completing ``axis`` to a right-handed frame

    Returns:
        ``(e1, e2)`` with ``e1 × e2`` parallel to ``axis``
    """
    a = unit(axis)
    ref = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = unit(ref - np.dot(ref, a) * a)
    e2 = np.cross(a, e1)
    return e1, e2


def dcm_from_x_axis(x_axis: Vec3) -> DCM:
    """``[BN]`` whose body x-axis points along ``x_axis``

    Roll about the x-axis is fixed by ``orthonormal_basis``.
    """
    x_b = unit(x_axis)
    y_b, z_b = orthonormal_basis(x_b)
    return np.vstack((x_b, y_b, z_b))
