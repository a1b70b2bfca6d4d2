"""Kinematic chain of the two-section articulated wing.

Each wing is a planar double pendulum in the frontal plane: a shoulder flap
hinge parallel to body x, an inner panel, an elbow fold hinge (also
parallel to x) at the inner tip, and an outer panel that can be twisted
about its own spanwise spar axis.

Right-wing chain (left wing is its x-z mirror, with its own twist)::

    hinge_inner = Pose(Rx(-phi), shoulder)
    hinge_outer = hinge_inner @ Pose(Rx(-psi), (0, inner_span, 0))
    panel       = hinge @ Pose(Ry(incidence [+ twist]))

Panel-local axes are x chordwise forward, y spanwise outboard (right wing;
the mirrored left panel runs along local -y) and z the plate normal, which
points down when the wing is flat.  ``Ry(+delta)`` drops the trailing edge.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .frames import (
    EZ,
    Pose,
    compose,
    mirror_axial,
    mirror_pose,
    mirror_xz,
    rot_x,
    rot_y,
    vec3,
)


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Section(str, enum.Enum):
    INNER = "inner"
    OUTER = "outer"


class Washout(str, enum.Enum):
    RIGID = "rigid"
    LINEAR_TO_TIP = "linear_to_tip"


@dataclass(frozen=True)
class WingGeometry:
    """Half-wing dimensions (m).  Defaults are repo choices, not measurements."""

    inner_span: float = 0.35
    outer_span: float = 0.35
    inner_chord: float = 0.12
    outer_chord: float = 0.12
    strips_inner: int = 16
    strips_outer: int = 16
    h_com: float = 0.05
    shoulder_y: float = 0.03

    def __post_init__(self):
        for name in ("inner_span", "outer_span", "inner_chord", "outer_chord"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be > 0, got {v!r}")
        for name in ("strips_inner", "strips_outer"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        if not (math.isfinite(self.h_com) and self.h_com >= 0):
            raise ValueError(f"h_com must be >= 0, got {self.h_com!r}")
        if not (math.isfinite(self.shoulder_y) and self.shoulder_y >= 0):
            raise ValueError(f"shoulder_y must be >= 0, got {self.shoulder_y!r}")

    @property
    def shoulder_offset(self) -> np.ndarray:
        """Right shoulder pivot relative to the CoM; up is -z."""
        return vec3(0.0, self.shoulder_y, -self.h_com)

    @property
    def semi_span(self) -> float:
        return self.inner_span + self.outer_span

    @property
    def total_area(self) -> float:
        return 2.0 * (self.inner_span * self.inner_chord + self.outer_span * self.outer_chord)


@dataclass(frozen=True)
class FlapDrive:
    """Prescribed flap and fold angles (radians, Hz).

    ``phi`` is the shoulder flap angle (positive = tip up), ``psi`` the
    elbow fold angle (positive = outer panel raised relative to inner).
    ``downstroke_fraction`` is the share of each period spent on the
    downstroke.
    """

    freq_hz: float = 6.25
    phi_mid: float = math.radians(10.0)
    phi_amp: float = math.radians(35.0)
    psi_mid: float = 0.0
    psi_amp: float = math.radians(75.0)
    phase_lag: float = 0.0
    downstroke_fraction: float = 0.35

    def __post_init__(self):
        if not (math.isfinite(self.freq_hz) and self.freq_hz > 0):
            raise ValueError(f"freq_hz must be > 0, got {self.freq_hz!r}")
        if self.phi_amp < 0 or self.psi_amp < 0:
            raise ValueError("flap and fold amplitudes must be >= 0")
        if abs(self.phi_mid) + self.phi_amp >= math.pi / 2:
            raise ValueError("|phi_mid| + phi_amp must stay below 90 deg")
        if not (0.0 < self.downstroke_fraction < 1.0):
            raise ValueError(
                f"downstroke_fraction must lie in (0, 1), got {self.downstroke_fraction!r}"
            )

    @property
    def period(self) -> float:
        return 1.0 / self.freq_hz


@dataclass(frozen=True)
class TwistCommand:
    """Quasi-static outer-panel twist, positive = trailing edge down."""

    delta_L: float = 0.0
    delta_R: float = 0.0
    washout: Washout = Washout.RIGID

    def __post_init__(self):
        object.__setattr__(self, "washout", Washout(self.washout))
        for name in ("delta_L", "delta_R"):
            v = getattr(self, name)
            if not (math.isfinite(v) and abs(v) < math.pi / 4):
                raise ValueError(f"|{name}| must be below 45 deg, got {v!r}")

    @classmethod
    def differential(cls, delta: float, washout: Washout = Washout.RIGID) -> "TwistCommand":
        """Aileron-style command: left trailing edge up, right trailing edge down."""
        return cls(delta_L=-delta, delta_R=delta, washout=washout)


@dataclass(frozen=True)
class PanelPose:
    side: Side
    section: Section
    pose: Pose
    angular_velocity: np.ndarray
    hinge: Pose = field(default_factory=Pose)
    origin_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    incidence: float = 0.0
    twist: float = 0.0
    washout: Washout = Washout.RIGID
    span: float = 0.0
    chord: float = 0.0

    @property
    def spanwise_sign(self) -> float:
        return 1.0 if self.side is Side.RIGHT else -1.0

    def point_velocity(self, r) -> np.ndarray:
        return self.origin_velocity + np.cross(self.angular_velocity, np.asarray(r) - self.hinge.translation)


def _warp(x: float, D: float):
    x = x % 1.0
    if x < D:
        return 0.5 * x / D, 0.5 / D
    return 0.5 + 0.5 * (x - D) / (1.0 - D), 0.5 / (1.0 - D)


def flap_angles(drive: FlapDrive, t: float):
    """Return ``(phi, psi, phi_dot, psi_dot)`` at time ``t``."""
    f = drive.freq_hz
    w, dw = _warp(t * f, drive.downstroke_fraction)
    th = 2.0 * math.pi * w
    thd = 2.0 * math.pi * dw * f
    phi = drive.phi_mid + drive.phi_amp * math.cos(th)
    phi_dot = -drive.phi_amp * math.sin(th) * thd
    psi = drive.psi_mid + drive.psi_amp * math.cos(th + drive.phase_lag)
    psi_dot = -drive.psi_amp * math.sin(th + drive.phase_lag) * thd
    return phi, psi, phi_dot, psi_dot


def _right_chain(geom: WingGeometry, phi, psi, phi_dot, psi_dot, delta, incidence):
    shoulder = geom.shoulder_offset
    h_in = Pose(rot_x(-phi), shoulder)
    w_in = vec3(-phi_dot, 0.0, 0.0)
    h_out = compose(h_in, Pose(rot_x(-psi), vec3(0.0, geom.inner_span, 0.0)))
    w_out = w_in + vec3(-psi_dot, 0.0, 0.0)
    v_elbow = np.cross(w_in, h_out.translation - shoulder)
    inner = (
        Section.INNER,
        compose(h_in, Pose(rot_y(incidence))),
        w_in,
        h_in,
        np.zeros(3),
        0.0,
        geom.inner_span,
        geom.inner_chord,
    )
    outer = (
        Section.OUTER,
        compose(h_out, Pose(rot_y(incidence + delta))),
        w_out,
        h_out,
        v_elbow,
        delta,
        geom.outer_span,
        geom.outer_chord,
    )
    return inner, outer


def panel_poses(
    geom: WingGeometry,
    phi: float,
    psi: float,
    phi_dot: float,
    psi_dot: float,
    twist: TwistCommand = TwistCommand(),
    incidence: float = 0.0,
) -> list[PanelPose]:
    """Poses of the four panels: right inner, right outer, left inner, left outer."""
    out = []
    for side, delta in ((Side.RIGHT, twist.delta_R), (Side.LEFT, twist.delta_L)):
        for section, pose, w, hinge, v0, tw, span, chord in _right_chain(
            geom, phi, psi, phi_dot, psi_dot, delta, incidence
        ):
            if side is Side.LEFT:
                pose, hinge = mirror_pose(pose), mirror_pose(hinge)
                w, v0 = mirror_axial(w), mirror_xz(v0)
            out.append(
                PanelPose(
                    side=side,
                    section=section,
                    pose=pose,
                    angular_velocity=w,
                    hinge=hinge,
                    origin_velocity=v0,
                    incidence=incidence,
                    twist=tw,
                    washout=twist.washout,
                    span=span,
                    chord=chord,
                )
            )
    return out


def wing_snapshot(geom, drive, twist, t, incidence=0.0) -> list[PanelPose]:
    return panel_poses(geom, *flap_angles(drive, t), twist=twist, incidence=incidence)


@dataclass(frozen=True)
class StripState:
    centroid: np.ndarray
    normal: np.ndarray
    area: float
    v_air: np.ndarray


@dataclass(frozen=True)
class StripSet:
    """All strips of a snapshot as row-aligned arrays."""

    centroid: np.ndarray  # (n, 3)
    normal: np.ndarray  # (n, 3)
    area: np.ndarray  # (n,)
    v_air: np.ndarray  # (n, 3)
    panel: np.ndarray  # (n,) index into the panel list

    def __len__(self):
        return len(self.area)

    def __getitem__(self, i) -> StripState:
        return StripState(self.centroid[i], self.normal[i], float(self.area[i]), self.v_air[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _panel_strip_arrays(p: PanelPose, n: int):
    eta = (np.arange(n) + 0.5) / n
    y = eta * p.span
    R, t0 = p.hinge.rotation, p.hinge.translation
    spanwise = R[:, 1] * p.spanwise_sign
    centroid = t0 + y[:, None] * spanwise
    if p.washout is Washout.LINEAR_TO_TIP and p.section is Section.OUTER:
        pitch = p.incidence + p.twist * eta
        local = np.stack([np.sin(pitch), np.zeros(n), np.cos(pitch)], axis=1)
        normal = local @ R.T
    else:
        normal = np.tile(p.pose.rotation @ EZ, (n, 1))
    v = p.origin_velocity + np.cross(p.angular_velocity, centroid - t0)
    area = np.full(n, p.span * p.chord / n)
    return centroid, normal, area, v


def strip_geometry(panels: list[PanelPose], geom: WingGeometry):
    """Centroids, normals, areas and structural velocities of every strip."""
    cs, ns, As, vs, ids = [], [], [], [], []
    for k, p in enumerate(panels):
        n = geom.strips_inner if p.section is Section.INNER else geom.strips_outer
        c, nn, a, v = _panel_strip_arrays(p, n)
        cs.append(c)
        ns.append(nn)
        As.append(a)
        vs.append(v)
        ids.append(np.full(n, k))
    return (
        np.concatenate(cs),
        np.concatenate(ns),
        np.concatenate(As),
        np.concatenate(vs),
        np.concatenate(ids),
    )


def make_strips(
    panels: list[PanelPose],
    geom: WingGeometry,
    body_velocity=(0.0, 0.0, 0.0),
    freestream_u: float = 0.0,
    body_rate=None,
) -> StripSet:
    """Discretize panels into spanwise strips with air-relative velocities.

    ``v_air`` is each centroid's velocity through the air mass: structural
    velocity, plus ``body_velocity``, plus ``(U, 0, 0)`` for cruise at
    speed ``U``, plus ``body_rate x r`` if the body rotates.
    """
    c, n, a, v, ids = strip_geometry(panels, geom)
    v_air = v + np.asarray(body_velocity, dtype=float) + np.array([freestream_u, 0.0, 0.0])
    if body_rate is not None:
        v_air = v_air + np.cross(np.asarray(body_rate, dtype=float), c)
    return StripSet(c, n, a, v_air, ids)


def strip_velocity_check(geom, drive, twist, t, h, incidence=0.0) -> float:
    """Max relative error between analytic and finite-difference strip velocities.

    Errors are normalized by the fastest strip at ``t``.
    """
    _, _, _, v, _ = strip_geometry(wing_snapshot(geom, drive, twist, t, incidence), geom)
    cp = strip_geometry(wing_snapshot(geom, drive, twist, t + h, incidence), geom)[0]
    cm = strip_geometry(wing_snapshot(geom, drive, twist, t - h, incidence), geom)[0]
    fd = (cp - cm) / (2.0 * h)
    err = np.max(np.linalg.norm(fd - v, axis=1))
    ref = np.max(np.linalg.norm(v, axis=1))
    if ref == 0.0:
        return float(err)
    return float(err / ref)
