"""Body-frame conventions, rotations and rigid poses.

Body frame is Forward-Right-Down (FRD):

    +x  forward (roll axis)
    +y  right   (pitch axis)
    +z  down    (yaw axis), so "up" is -z

A positive moment about +x is a right-handed roll: the right wing drops
and the vehicle turns right.

Vectors are plain ``numpy`` arrays of shape ``(3,)``; rotation matrices
are ``(3, 3)`` arrays.  Poses are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])
UP = -EZ

_MIRROR = np.diag([1.0, -1.0, 1.0])


def vec3(x=0.0, y=0.0, z=0.0) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


def skew(w) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rot_axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit ``axis`` by ``angle`` radians."""
    a = as_vec3(axis)
    n = np.linalg.norm(a)
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must be a unit vector (|axis| = {n!r})")
    K = skew(a)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def is_rotation(R, tol: float = 1e-12) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return bool(
        np.max(np.abs(R.T @ R - np.eye(3))) <= tol
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


@dataclass(frozen=True)
class Pose:
    """Rigid transform ``p -> rotation @ p + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float)
        t = np.array(self.translation, dtype=float)
        if R.shape != (3, 3) or t.shape != (3,):
            raise ValueError("Pose needs a 3x3 rotation and a 3-vector translation")
        R.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    def inverse(self) -> "Pose":
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose(self, other)


def compose(a: Pose, *rest: Pose) -> Pose:
    """Compose poses; ``compose(a, b)`` applies ``b`` first, then ``a``."""
    R, t = a.rotation, a.translation
    for b in rest:
        t = R @ b.translation + t
        R = R @ b.rotation
    return Pose(R, t)


def transform_point(p: Pose, v) -> np.ndarray:
    return p.rotation @ np.asarray(v, dtype=float) + p.translation


def transform_vector(p: Pose, v) -> np.ndarray:
    return p.rotation @ np.asarray(v, dtype=float)


def mirror_xz(v) -> np.ndarray:
    """Reflect a position-like vector through the body x-z plane."""
    v = np.asarray(v, dtype=float)
    out = v.copy()
    out[..., 1] = -out[..., 1]
    return out


def mirror_axial(w) -> np.ndarray:
    """Reflect an axial vector (angular velocity, moment) through the x-z plane.

    Axial vectors pick up the determinant of the reflection, so
    ``(wx, wy, wz) -> (-wx, wy, -wz)``.
    """
    return -mirror_xz(w)


def mirror_rotation(R) -> np.ndarray:
    # conjugation keeps det = +1
    return _MIRROR @ np.asarray(R, dtype=float) @ _MIRROR


def mirror_pose(p: Pose) -> Pose:
    return Pose(mirror_rotation(p.rotation), mirror_xz(p.translation))
