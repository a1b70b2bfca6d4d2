import dataclasses
import math

import numpy as np
import pytest

from ornisim.aero import AeroParams
from ornisim.kinematics import FlapDrive, TwistCommand, WingGeometry, flap_angles
from ornisim.sim import (
    ConfigError,
    ControlSchedule,
    InsufficientDataError,
    SimSettings,
    TimeSeries,
    Variant,
    VehicleConfig,
    compare_configs,
    cycle_average,
    downstroke_rates,
    force_scale,
    m_static_oracle,
    make_variant,
    moment_scale,
    roll_response,
    run_average,
    sign_with_floor,
    simulate_tethered,
    sweep,
    with_param,
    zero_crossings,
)

from oracles import hand_wrench

RAD = math.pi / 180.0
BASE = VehicleConfig()
FAST = SimSettings(n_cycles=2, skip_cycles=1)


def geom_dict(g):
    return {f.name: getattr(g, f.name) for f in dataclasses.fields(g)}


def test_symmetric_run_has_no_lateral_wrench():
    ts = simulate_tethered(BASE, TwistCommand(), FAST)
    scale = moment_scale(BASE)
    for col in ("mx", "mz"):
        assert np.max(np.abs(ts[col])) < 1e-12 * scale
    assert np.max(np.abs(ts["fy"])) < 1e-12 * force_scale(BASE)


def test_time_series_grid():
    ts = simulate_tethered(BASE, TwistCommand(), FAST)
    assert len(ts) == 400
    assert np.all(np.diff(ts["t"]) > 0)
    np.testing.assert_allclose(np.diff(ts["t"]), FAST.dt, rtol=1e-9)


@pytest.mark.parametrize("delta", [0.0, 3 * RAD, -7 * RAD])
def test_flat_symmetric_hover_cancels(delta):
    drive = FlapDrive(phi_mid=0.0, psi_amp=0.0, downstroke_fraction=0.5)
    cfg = VehicleConfig(Variant.FLAPPER_FLAT_HOVER, drive=drive, u_cruise=0.0)
    avg = run_average(cfg, TwistCommand(-delta, delta * 0.5), FAST)
    scale = moment_scale(cfg)
    for v in (avg.L_bar, avg.M_bar, avg.N_bar):
        assert abs(v) < 1e-10 * scale
    for v in (avg.thrust_bar, avg.lift_bar, avg.side_bar):
        assert abs(v) < 1e-10 * force_scale(cfg)


def test_one_step_against_hand_oracle():
    ts = simulate_tethered(BASE, TwistCommand.differential(5 * RAD), FAST)
    i = 37
    t = ts["t"][i]
    phi, psi, phi_dot, psi_dot = flap_angles(BASE.drive, t)
    F, M = hand_wrench(
        geom_dict(BASE.geom), phi, psi, phi_dot, psi_dot, -5 * RAD, 5 * RAD,
        BASE.u_cruise, BASE.wing_incidence, BASE.aero.rho, BASE.aero.c_n0,
    )
    np.testing.assert_allclose(ts.force[i], F, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(ts.moment[i], M, rtol=1e-10, atol=1e-12)


def test_deterministic():
    a = simulate_tethered(BASE, TwistCommand.differential(5 * RAD), FAST)
    b = simulate_tethered(BASE, TwistCommand.differential(5 * RAD), FAST)
    assert a.data.tobytes() == b.data.tobytes()


def test_plane_series_is_static():
    plane = make_variant(BASE, Variant.PLANE)
    ts = simulate_tethered(plane, TwistCommand.differential(5 * RAD), FAST)
    assert np.all(ts.moment == ts.moment[0])


def test_cycle_average_constant_and_sinusoid():
    dt, f = 0.001, 2.0
    t = np.arange(2000) * dt
    data = np.zeros((len(t), 10))
    data[:, 0] = t
    data[:, 7] = 3.25
    data[:, 8] = 7.0 * np.sin(2 * math.pi * f * t + 0.3)
    avg = cycle_average(TimeSeries(dt, data), f, skip_cycles=1)
    assert avg.cycles_used == 3
    assert avg.L_bar == pytest.approx(3.25, abs=1e-14)
    assert abs(avg.M_bar) < 1e-12 * 7.0


def test_cycle_average_needs_data():
    data = np.zeros((100, 10))
    data[:, 0] = np.arange(100) * 0.001
    with pytest.raises(InsufficientDataError):
        cycle_average(TimeSeries(0.001, data), 2.0, skip_cycles=1)


def test_twist_antisymmetry_fast():
    a = run_average(BASE, TwistCommand.differential(5 * RAD), FAST).L_bar
    b = run_average(BASE, TwistCommand.differential(-5 * RAD), FAST).L_bar
    assert b == pytest.approx(-a, rel=1e-9)


def test_sign_with_floor():
    assert sign_with_floor(1e-3, 1e-6) == 1
    assert sign_with_floor(-1e-3, 1e-6) == -1
    assert sign_with_floor(1e-7, 1e-6) == 0


def test_compare_zero_twist_all_zero_signs():
    rows = compare_configs(BASE, 0.0, FAST)
    assert [r.sign for r in rows] == [0, 0, 0, 0]


def test_compare_parallel_matches_serial():
    serial = compare_configs(BASE, 5 * RAD, FAST)
    parallel = compare_configs(BASE, 5 * RAD, FAST, workers=2)
    assert serial == parallel


def test_variant_invariants():
    with pytest.raises(ConfigError):
        VehicleConfig(Variant.PLANE)
    with pytest.raises(ConfigError):
        VehicleConfig(Variant.FLAPPER_FLAT_CRUISE)
    with pytest.raises(ConfigError):
        VehicleConfig(Variant.FLAPPER_FLAT_HOVER, drive=FlapDrive(psi_amp=0.0))
    with pytest.raises(ConfigError):
        VehicleConfig(drive=FlapDrive(psi_amp=0.0))
    with pytest.raises(ConfigError):
        VehicleConfig(variant="glider")
    for v in Variant:
        make_variant(BASE, v)


def test_settings_invariants():
    with pytest.raises(ConfigError):
        SimSettings(n_cycles=1)
    with pytest.raises(ConfigError):
        SimSettings(dt=-1.0)
    with pytest.raises(ConfigError):
        simulate_tethered(BASE, TwistCommand(), SimSettings(dt=0.001))


# -- folded snapshot ---------------------------------------------------------


def mstatic(delta, geom=BASE.geom):
    phi_dot, psi_dot = downstroke_rates(BASE.drive)
    return m_static_oracle(
        geom, BASE.aero, delta, BASE.drive.phi_mid, math.pi / 2, phi_dot, psi_dot,
        u_cruise=BASE.u_cruise, incidence=BASE.wing_incidence,
    )


def test_mstatic_zero_twist_mirror_pair():
    rep = mstatic(0.0)
    assert rep.outer_lateral_left == pytest.approx(-rep.outer_lateral_right, abs=1e-12)
    assert abs(rep.wrench.moment[0]) < 1e-12 * moment_scale(BASE)


def test_mstatic_twist_sign_flip():
    a, b = mstatic(5 * RAD), mstatic(-5 * RAD)
    assert a.outer_lateral_left == pytest.approx(-b.outer_lateral_right, rel=1e-12)
    assert a.wrench.moment[0] == pytest.approx(-b.wrench.moment[0], rel=1e-12)


def test_mstatic_single_strip_hand_cross_product():
    g = dataclasses.replace(BASE.geom, strips_inner=1, strips_outer=1)
    rep = mstatic(5 * RAD, g)
    phi_dot, psi_dot = downstroke_rates(BASE.drive)
    F, M = hand_wrench(
        geom_dict(g), BASE.drive.phi_mid, math.pi / 2, phi_dot, psi_dot, -5 * RAD, 5 * RAD,
        BASE.u_cruise, BASE.wing_incidence, BASE.aero.rho, BASE.aero.c_n0,
    )
    np.testing.assert_allclose(rep.wrench.force, F, rtol=1e-12)
    np.testing.assert_allclose(rep.wrench.moment, M, rtol=1e-12)
    total = sum(rep.panel_forces.values())
    np.testing.assert_allclose(total, F, rtol=1e-12)


def test_downstroke_rates_are_downward():
    phi_dot, _ = downstroke_rates(BASE.drive)
    assert phi_dot < 0


# -- roll response -----------------------------------------------------------


def test_schedule_shapes():
    s = ControlSchedule.step(1.0, 0.1)
    assert s(0.5) == 0.0 and s(1.0) == 0.1 and s(3.0) == 0.1
    sq = ControlSchedule.square_wave(0.1, 4.0, 10.0)
    assert sq(1.0) == 0.1 and sq(3.0) == -0.1 and sq(5.0) == 0.1
    with pytest.raises(ValueError):
        ControlSchedule((0.0, 0.0), (1.0, 2.0))


def test_roll_response_zero_twist_stays_level():
    r = roll_response(BASE, ControlSchedule.constant(0.0), SimSettings(), 0.5)
    assert np.max(np.abs(r.roll_angle)) < 1e-10


def test_roll_response_forced_first_order():
    cfg = BASE.replace(i_xx=0.05, roll_damping=0.5)
    L0, c, I = 0.3, 0.5, 0.05
    t_end = 5 * I / c
    r = roll_response(cfg, ControlSchedule.constant(0.0), SimSettings(), t_end, moment_fn=lambda t, p, d: L0)
    exact = (L0 / c) * (1 - math.exp(-c * r.t[-1] / I))
    assert r.p[-1] == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("variant, direction", [(Variant.FLAPPER_ARTICULATED, 1), (Variant.PLANE, -1)])
def test_roll_after_step(variant, direction):
    cfg = make_variant(BASE, variant)
    r = roll_response(cfg, ControlSchedule.step(1.0, 5 * RAD), SimSettings(), 2.0)
    n = 200  # one flap period of samples
    before = r.roll_angle[r.t <= 1.0]
    assert np.max(np.abs(before)) < 1e-10
    # compare wingbeat-period samples so the in-stroke wobble cancels
    after = r.roll_angle[np.searchsorted(r.t, 1.0 + 1e-9)::n]
    assert np.all(direction * np.diff(after[2:]) > 0)


# -- sweeps ------------------------------------------------------------------


def test_sweep_zero_fold_equals_flat():
    row = sweep(BASE, "psi_amp", [0.0], 5 * RAD, FAST)[0]
    flat = run_average(make_variant(BASE, Variant.FLAPPER_FLAT_CRUISE), TwistCommand.differential(5 * RAD), FAST)
    assert row.L_bar == flat.L_bar


def test_sweep_order_independent_of_workers():
    vals = [60 * RAD, 20 * RAD, 40 * RAD]
    a = sweep(BASE, "psi_amp", vals, 5 * RAD, FAST)
    b = sweep(BASE, "psi_amp", vals, 5 * RAD, FAST, workers=3)
    assert a == b
    assert [r.value for r in a] == vals


def test_sweep_unknown_param():
    with pytest.raises(ConfigError):
        sweep(BASE, "wingspan", [1.0], 0.0, FAST)


def test_frequency_sweep_keeps_samples_per_period():
    cfg, s = with_param(BASE, SimSettings(), "freq_hz", 12.5)
    assert cfg.period / s.dt == pytest.approx(200.0)


def test_h_com_grows_moment():
    rows = sweep(BASE, "h_com", [0.0, 0.05, 0.10], 5 * RAD, FAST)
    mags = [abs(r.L_bar) for r in rows]
    assert mags[0] < mags[1] < mags[2]


def test_zero_crossings():
    assert zero_crossings([0, 1, 2], [-1.0, 1.0, 3.0]) == [0.5]
    assert zero_crossings([0, 1], [1.0, 2.0]) == []
