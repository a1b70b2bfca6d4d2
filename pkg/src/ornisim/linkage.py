"""Planar four-bar linkage position and velocity analysis.

Geometry follows the usual vector-loop layout: the crank pivot ``O2`` sits
at the origin, the rocker pivot ``O4`` at ``(d, 0)``, and all angles are
measured counterclockwise from the ground line::

    a e^{i th2} + b e^{i th3} - d - c e^{i th4} = 0

For the outer-wing twist mechanism the crank is the servo arm, the coupler
is the connecting bar, the rocker is the horn on the wing spar and the
ground link is the (virtual) distance between servo shaft and spar axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Branch(str, enum.Enum):
    OPEN = "open"
    CROSSED = "crossed"


class GrashofClass(str, enum.Enum):
    CRANK_ROCKER = "crank_rocker"
    DOUBLE_CRANK = "double_crank"
    DOUBLE_ROCKER = "double_rocker"
    CHANGE_POINT = "change_point"
    NON_GRASHOF_TRIPLE_ROCKER = "non_grashof_triple_rocker"


class NotAssemblableError(ValueError):
    """The loop cannot close at the requested input angle."""


class SingularConfigurationError(ValueError):
    """Degenerate geometry or a toggle (collinear) position."""


@dataclass(frozen=True)
class FourBar:
    ground_d: float
    crank_a: float
    coupler_b: float
    rocker_c: float
    branch: Branch = Branch.OPEN

    def __post_init__(self):
        for name in ("ground_d", "crank_a", "coupler_b", "rocker_c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be a positive length, got {v!r}")
        object.__setattr__(self, "branch", Branch(self.branch))

    @property
    def max_length(self) -> float:
        return max(self.ground_d, self.crank_a, self.coupler_b, self.rocker_c)


# Repo default for the servo-to-spar twist mechanism (not a measured value).
DEFAULT_TWIST_LINKAGE = FourBar(ground_d=0.030, crank_a=0.012, coupler_b=0.030, rocker_c=0.015)


@dataclass(frozen=True)
class LinkageState:
    theta2: float
    theta3: float
    theta4: float


def classify(fb: FourBar) -> GrashofClass:
    lengths = {
        "d": fb.ground_d,
        "a": fb.crank_a,
        "b": fb.coupler_b,
        "c": fb.rocker_c,
    }
    ordered = sorted(lengths.values())
    s, p, q, l = ordered
    lhs, rhs = s + l, p + q
    if abs(lhs - rhs) <= 1e-12 * l:
        return GrashofClass.CHANGE_POINT
    if lhs > rhs:
        return GrashofClass.NON_GRASHOF_TRIPLE_ROCKER
    # ties on the shortest link resolve in ground, crank, rocker, coupler order
    shortest = min(("d", "a", "c", "b"), key=lambda k: lengths[k])
    if shortest == "d":
        return GrashofClass.DOUBLE_CRANK
    if shortest == "b":
        return GrashofClass.DOUBLE_ROCKER
    return GrashofClass.CRANK_ROCKER


def _closure_coefficients(fb: FourBar, theta2: float):
    # K1 cos th4 + K2 sin th4 + K3 = 0
    ax, ay = fb.crank_a * math.cos(theta2), fb.crank_a * math.sin(theta2)
    P, Q = fb.ground_d - ax, -ay
    c, b = fb.rocker_c, fb.coupler_b
    K1 = 2.0 * c * P
    K2 = 2.0 * c * Q
    K3 = P * P + Q * Q + c * c - b * b
    return (ax, ay), math.hypot(P, Q), K1, K2, K3


def solve(fb: FourBar, theta2: float) -> LinkageState:
    """Closed-form position solution (tangent half-angle of the output angle)."""
    (ax, ay), diag, K1, K2, K3 = _closure_coefficients(fb, theta2)
    scale = fb.max_length
    if diag <= 1e-12 * scale:
        raise SingularConfigurationError(
            f"crank tip coincides with the output pivot at theta2={theta2!r} rad"
        )
    b, c = fb.coupler_b, fb.rocker_c
    slack = 1e-12 * scale
    if diag > b + c + slack or diag < abs(b - c) - slack:
        raise NotAssemblableError(
            f"linkage not assemblable at theta2={math.degrees(theta2):.6g} deg: "
            f"diagonal {diag:.6g} outside [{abs(b - c):.6g}, {b + c:.6g}]"
        )
    disc = max(K1 * K1 + K2 * K2 - K3 * K3, 0.0)
    root = math.sqrt(disc)
    if fb.branch is Branch.OPEN:
        root = -root
    # tan(theta4/2) = (-K2 + root)/(K3 - K1) = (K3 + K1)/(-K2 - root); use the
    # form whose terms do not cancel
    if abs(-K2 + root) >= abs(-K2 - root):
        num, den = -K2 + root, K3 - K1
    else:
        num, den = K3 + K1, -K2 - root
    theta4 = (2.0 * math.atan2(num, den)) % (2.0 * math.pi)
    bx = fb.ground_d + c * math.cos(theta4)
    by = c * math.sin(theta4)
    theta3 = math.atan2(by - ay, bx - ax) % (2.0 * math.pi)
    return LinkageState(theta2=theta2, theta3=theta3, theta4=theta4)


def closure_residual(fb: FourBar, st: LinkageState) -> float:
    re = (
        fb.crank_a * math.cos(st.theta2)
        + fb.coupler_b * math.cos(st.theta3)
        - fb.ground_d
        - fb.rocker_c * math.cos(st.theta4)
    )
    im = (
        fb.crank_a * math.sin(st.theta2)
        + fb.coupler_b * math.sin(st.theta3)
        - fb.rocker_c * math.sin(st.theta4)
    )
    return math.hypot(re, im)


def transmission_ratio(fb: FourBar, theta2: float, toggle_tol: float = 1e-6) -> float:
    """Output/input angular velocity ratio d(theta4)/d(theta2)."""
    st = solve(fb, theta2)
    den = fb.rocker_c * math.sin(st.theta4 - st.theta3)
    if abs(math.sin(st.theta4 - st.theta3)) < toggle_tol:
        raise SingularConfigurationError(
            f"coupler and rocker collinear at theta2={math.degrees(theta2):.6g} deg"
        )
    return fb.crank_a * math.sin(st.theta2 - st.theta3) / den


def servo_to_spar(fb: FourBar, servo_angle_from_neutral: float, neutral_theta2: float) -> float:
    """Spar twist produced by moving the servo ``servo_angle_from_neutral`` off neutral."""
    if servo_angle_from_neutral == 0.0:
        solve(fb, neutral_theta2)
        return 0.0
    t0 = solve(fb, neutral_theta2).theta4
    t1 = solve(fb, neutral_theta2 + servo_angle_from_neutral).theta4
    return math.remainder(t1 - t0, 2.0 * math.pi)
