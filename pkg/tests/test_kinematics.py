import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ornisim.frames import compose, mirror_xz, Pose, rot_x, rot_y, transform_point
from ornisim.kinematics import (
    FlapDrive,
    Section,
    Side,
    TwistCommand,
    Washout,
    WingGeometry,
    flap_angles,
    make_strips,
    panel_poses,
    strip_velocity_check,
    wing_snapshot,
)

from oracles import mp_right_outer_tip

RAD = math.pi / 180.0
GEOM = WingGeometry()
DRIVE = FlapDrive()


def outer_tip(panels, side=Side.RIGHT):
    p = next(q for q in panels if q.side is side and q.section is Section.OUTER)
    return transform_point(p.pose, [0.0, p.spanwise_sign * p.span, 0.0])


def test_top_of_stroke_at_t0():
    d = FlapDrive(downstroke_fraction=0.5)
    phi, _, phi_dot, _ = flap_angles(d, 0.0)
    assert phi == d.phi_mid + d.phi_amp
    assert phi_dot == 0.0


def test_fold_follows_flap_when_matched():
    d = FlapDrive(psi_mid=10 * RAD, psi_amp=35 * RAD, phase_lag=0.0, downstroke_fraction=0.4)
    for t in np.linspace(0, 0.5, 37):
        phi, psi, phi_dot, psi_dot = flap_angles(d, t)
        assert psi == pytest.approx(phi, abs=1e-15) and psi_dot == pytest.approx(phi_dot, abs=1e-12)


@given(st.floats(0, 10), st.floats(0.05, 0.95), st.floats(0.5, 20))
def test_flap_angles_periodic(t, D, f):
    d = FlapDrive(freq_hz=f, downstroke_fraction=D, phase_lag=0.7)
    a, b = flap_angles(d, t), flap_angles(d, t + d.period)
    assert abs(a[0] - b[0]) < 1e-12 and abs(a[1] - b[1]) < 1e-12


def test_downstroke_fraction_sets_bottom_time():
    d = FlapDrive(downstroke_fraction=0.3)
    phi, _, _, _ = flap_angles(d, 0.3 * d.period)
    assert phi == pytest.approx(d.phi_mid - d.phi_amp, abs=1e-12)


def test_rates_match_finite_differences():
    h = 1e-7
    for t in (0.011, 0.037, 0.09, 0.13):
        up, dn, mid = flap_angles(DRIVE, t + h), flap_angles(DRIVE, t - h), flap_angles(DRIVE, t)
        assert (up[0] - dn[0]) / (2 * h) == pytest.approx(mid[2], rel=1e-6)
        assert (up[1] - dn[1]) / (2 * h) == pytest.approx(mid[3], rel=1e-6)


def test_drive_validation():
    with pytest.raises(ValueError):
        FlapDrive(phi_mid=50 * RAD, phi_amp=45 * RAD)
    with pytest.raises(ValueError):
        FlapDrive(downstroke_fraction=1.0)
    with pytest.raises(ValueError):
        TwistCommand(delta_R=50 * RAD)


def test_flat_wing_tip():
    tip = outer_tip(panel_poses(GEOM, 0, 0, 0, 0))
    np.testing.assert_allclose(tip, GEOM.shoulder_offset + [0, GEOM.semi_span, 0], atol=1e-15)


def test_capital_m_pose():
    tip = outer_tip(panel_poses(GEOM, 0, math.pi / 2, 0, 0))
    np.testing.assert_allclose(tip, GEOM.shoulder_offset + [0, GEOM.inner_span, -GEOM.outer_span], atol=1e-15)


def test_tip_against_arbitrary_precision_chain():
    phi, psi, delta = 20 * RAD, 50 * RAD, 5 * RAD
    panels = panel_poses(GEOM, phi, psi, 0, 0, TwistCommand(delta_R=delta), incidence=0.1)
    expected = mp_right_outer_tip(GEOM.shoulder_offset, GEOM.inner_span, GEOM.outer_span, phi, psi, delta, 0.1)
    np.testing.assert_allclose(outer_tip(panels), expected, atol=1e-15)
    # twist about the spar leaves the spar tip in place; check a trailing-edge point too
    p = panels[1]
    te = transform_point(p.pose, [-0.5 * p.chord, p.span, 0.0])
    ex = np.array(expected) + p.pose.rotation @ [-0.5 * p.chord, 0, 0]
    np.testing.assert_allclose(te, ex, atol=1e-15)


def test_positive_twist_lowers_trailing_edge():
    p = panel_poses(GEOM, 0, 0, 0, 0, TwistCommand(delta_R=5 * RAD))[1]
    te = transform_point(p.pose, [-p.chord / 2, p.span / 2, 0])
    assert te[2] > p.hinge.translation[2]  # +z is down


def test_chain_consistency_step_by_step():
    phi, psi, delta = 0.4, 0.9, 0.1
    outer = panel_poses(GEOM, phi, psi, 0, 0, TwistCommand(delta_R=delta))[1]
    inner_hinge = Pose(rot_x(-phi), GEOM.shoulder_offset)
    elbow = Pose(rot_x(-psi), np.array([0, GEOM.inner_span, 0.0]))
    step = compose(compose(inner_hinge, elbow), Pose(rot_y(delta)))
    np.testing.assert_allclose(outer.pose.rotation, step.rotation, atol=1e-15)
    np.testing.assert_allclose(outer.pose.translation, step.translation, atol=1e-15)


def test_angular_velocity_accumulates():
    panels = panel_poses(GEOM, 0.2, 0.3, 1.5, -2.0)
    np.testing.assert_allclose(panels[0].angular_velocity, [-1.5, 0, 0])
    np.testing.assert_allclose(panels[1].angular_velocity, [-1.5 + 2.0, 0, 0])


def test_static_strips_have_zero_airspeed():
    s = make_strips(panel_poses(GEOM, 0.3, 0.5, 0, 0), GEOM)
    assert np.all(s.v_air == 0.0)


def test_pure_freestream():
    s = make_strips(panel_poses(GEOM, 0.3, 0.5, 0, 0), GEOM, freestream_u=6.0)
    assert np.all(s.v_air == np.array([6.0, 0.0, 0.0]))


def test_flat_wing_flap_velocity():
    omega, U = 3.0, 2.0
    geom = WingGeometry(shoulder_y=0.0)
    s = make_strips(panel_poses(geom, 0, 0, omega, 0), geom, freestream_u=U)
    for k in range(geom.strips_inner + geom.strips_outer):
        r = s.centroid[k, 1]
        np.testing.assert_allclose(s.v_air[k], [U, 0, -omega * r], atol=1e-14)


def strips_at(t, twist=TwistCommand(), drive=DRIVE, geom=GEOM, U=2.5):
    return make_strips(wing_snapshot(geom, drive, twist, t, 15 * RAD), geom, freestream_u=U)


@settings(max_examples=30)
@given(st.floats(0, 0.16))
def test_mirror_symmetry_without_twist(t):
    s = strips_at(t)
    n = len(s) // 2
    for field in ("centroid", "normal", "v_air"):
        right, left = getattr(s, field)[:n], getattr(s, field)[n:]
        assert np.max(np.abs(left - mirror_xz(right))) < 1e-12


@settings(max_examples=30)
@given(st.floats(0, 1), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.booleans())
def test_area_invariant(t, dl, dr, linear):
    tw = TwistCommand(dl, dr, Washout.LINEAR_TO_TIP if linear else Washout.RIGID)
    s = strips_at(t, tw)
    assert abs(s.area.sum() - GEOM.total_area) <= 1e-12 * GEOM.total_area
    assert np.max(np.abs(np.linalg.norm(s.normal, axis=1) - 1.0)) < 1e-9


@settings(max_examples=20)
@given(st.floats(0, 1))
def test_strips_periodic(t):
    a, b = strips_at(t, TwistCommand.differential(0.1)), strips_at(t + DRIVE.period, TwistCommand.differential(0.1))
    for field in ("centroid", "normal", "v_air"):
        assert np.max(np.abs(getattr(a, field) - getattr(b, field))) < 1e-9


@given(st.floats(-0.7, 0.7), st.floats(-0.7, 0.7))
def test_twist_at_vertical_fold_keeps_normal_z(dl, dr):
    base = make_strips(panel_poses(GEOM, 0, math.pi / 2, 0, 0), GEOM)
    tw = make_strips(panel_poses(GEOM, 0, math.pi / 2, 0, 0, TwistCommand(dl, dr)), GEOM)
    outer = np.isin(base.panel, [1, 3])
    assert np.max(np.abs(tw.normal[outer, 2] - base.normal[outer, 2])) < 1e-12
    if abs(dl) > 1e-3 and abs(dr) > 1e-3:
        assert np.all(np.abs(tw.normal[outer, 0] - base.normal[outer, 0]) > 0)


def test_linear_washout_reaches_full_twist_at_tip():
    tw = TwistCommand(delta_R=0.2, washout=Washout.LINEAR_TO_TIP)
    geom = WingGeometry(strips_outer=200)
    s = make_strips(panel_poses(geom, 0, 0, 0, 0, tw), geom)
    rigid = make_strips(panel_poses(geom, 0, 0, 0, 0, TwistCommand(delta_R=0.2)), geom)
    k_tip = geom.strips_inner + geom.strips_outer - 1
    assert np.dot(s.normal[k_tip], rigid.normal[k_tip]) == pytest.approx(1.0, abs=1e-5)
    k_root = geom.strips_inner
    assert s.normal[k_root][0] == pytest.approx(0.0, abs=2e-3)


def test_velocity_check_static_is_zero():
    static = FlapDrive(phi_amp=0.0, psi_amp=0.0)
    assert strip_velocity_check(GEOM, static, TwistCommand(), 0.1, 1e-6) == 0.0


def test_velocity_check_default_drive():
    # half-step offsets keep the stencil off the stroke reversals, where the
    # wing is momentarily at rest and relative error is undefined
    ts = (np.arange(200) + 0.5) * DRIVE.period / 200
    worst = max(strip_velocity_check(GEOM, DRIVE, TwistCommand.differential(5 * RAD), t, 1e-6, 15 * RAD) for t in ts)
    assert worst < 1e-5


def test_velocity_check_is_second_order():
    t = 0.2 * DRIVE.period
    e1 = strip_velocity_check(GEOM, DRIVE, TwistCommand(), t, 1e-3)
    e2 = strip_velocity_check(GEOM, DRIVE, TwistCommand(), t, 5e-4)
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)
