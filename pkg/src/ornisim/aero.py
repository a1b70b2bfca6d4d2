"""Quasi-steady flat-plate strip forces and their wrench about the CoM."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import StripSet, StripState


class AeroModel(str, enum.Enum):
    NORMAL_PRESSURE = "normal_pressure"
    FLAT_PLATE_LIFT_DRAG = "flat_plate_lift_drag"


@dataclass(frozen=True)
class AeroParams:
    rho: float = 1.225
    c_n0: float = 1.28
    model: AeroModel = AeroModel.NORMAL_PRESSURE

    def __post_init__(self):
        object.__setattr__(self, "model", AeroModel(self.model))
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be > 0, got {self.rho!r}")
        if not (math.isfinite(self.c_n0) and self.c_n0 > 0):
            raise ValueError(f"c_n0 must be > 0, got {self.c_n0!r}")


@dataclass(frozen=True)
class Wrench:
    """Force (N) and moment (N m) about ``ref_point``; ``moment[0]`` is roll."""

    force: np.ndarray
    moment: np.ndarray
    ref_point: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def about(self, r0) -> "Wrench":
        r0 = np.asarray(r0, dtype=float)
        shift = r0 - self.ref_point
        return Wrench(self.force.copy(), self.moment - np.cross(shift, self.force), r0)


def _normal_pressure(v_air, normal, area, p: AeroParams):
    vn = np.einsum("...i,...i->...", v_air, normal)
    mag = -0.5 * p.rho * p.c_n0 * area * vn * np.abs(vn)
    return mag[..., None] * normal


def _lift_drag(v_air, normal, area, p: AeroParams):
    v_air = np.atleast_2d(v_air)
    normal = np.atleast_2d(normal)
    area = np.atleast_1d(area)
    speed = np.linalg.norm(v_air, axis=1)
    out = np.zeros_like(v_air)
    moving = speed > 0.0
    if not np.any(moving):
        return out
    vhat = v_air[moving] / speed[moving, None]
    n = normal[moving]
    vn = np.einsum("ij,ij->i", vhat, n)
    sin_a = np.abs(vn)
    cos_a = np.sqrt(np.clip(1.0 - sin_a * sin_a, 0.0, 1.0))
    # lift: normal component perpendicular to v, oriented against the normal motion
    perp = n - vn[:, None] * vhat
    pn = np.linalg.norm(perp, axis=1)
    e_lift = np.zeros_like(perp)
    ok = pn > 1e-15
    e_lift[ok] = -np.sign(vn[ok])[:, None] * perp[ok] / pn[ok, None]
    q = 0.5 * p.rho * area[moving] * speed[moving] ** 2
    c_l = 2.0 * sin_a * cos_a
    c_d = 2.0 * sin_a * sin_a
    out[moving] = q[:, None] * (c_l[:, None] * e_lift - c_d[:, None] * vhat)
    return out


def strip_forces(strips: StripSet, p: AeroParams) -> np.ndarray:
    """Force on every strip, shape ``(n, 3)``, applied at the strip centroids."""
    if p.model is AeroModel.NORMAL_PRESSURE:
        return _normal_pressure(strips.v_air, strips.normal, strips.area, p)
    return _lift_drag(strips.v_air, strips.normal, strips.area, p)


def strip_force(s: StripState, p: AeroParams) -> np.ndarray:
    v = np.asarray(s.v_air, dtype=float)
    n = np.asarray(s.normal, dtype=float)
    if p.model is AeroModel.NORMAL_PRESSURE:
        return _normal_pressure(v, n, s.area, p)
    return _lift_drag(v, n, s.area, p)[0]


def wrench_from_forces(centroids, forces, ref_point=(0.0, 0.0, 0.0)) -> Wrench:
    ref = np.asarray(ref_point, dtype=float)
    forces = np.asarray(forces, dtype=float)
    moments = np.cross(np.asarray(centroids, dtype=float) - ref, forces)
    # fixed summation order keeps results bit-reproducible
    return Wrench(forces.sum(axis=0), moments.sum(axis=0), ref)


def total_wrench(strips, p: AeroParams) -> Wrench:
    """Sum of strip forces and their moments about the CoM (body origin)."""
    if not isinstance(strips, StripSet):
        strips = list(strips)
        if not strips:
            raise ValueError("total_wrench needs at least one strip")
        strips = StripSet(
            np.array([s.centroid for s in strips], dtype=float),
            np.array([s.normal for s in strips], dtype=float),
            np.array([s.area for s in strips], dtype=float),
            np.array([s.v_air for s in strips], dtype=float),
            np.zeros(len(strips), dtype=int),
        )
    if len(strips) == 0:
        raise ValueError("total_wrench needs at least one strip")
    return wrench_from_forces(strips.centroid, strip_forces(strips, p))
