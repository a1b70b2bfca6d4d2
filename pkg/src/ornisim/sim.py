"""Tethered wrench sampling, cycle averages, vehicle comparisons and roll response.

The body is held fixed (or, for :func:`roll_response`, free to roll only)
while the prescribed wing motion is sampled on a fixed time grid.  All
runs are deterministic: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .aero import AeroParams, Wrench, strip_forces, total_wrench, wrench_from_forces
from .kinematics import (
    FlapDrive,
    PanelPose,
    Section,
    Side,
    TwistCommand,
    WingGeometry,
    flap_angles,
    make_strips,
    panel_poses,
)


class ConfigError(ValueError):
    """A configuration violates a model invariant."""


class InsufficientDataError(ValueError):
    pass


class Variant(str, enum.Enum):
    PLANE = "plane"
    FLAPPER_FLAT_HOVER = "flapper_flat_hover"
    FLAPPER_FLAT_CRUISE = "flapper_flat_cruise"
    FLAPPER_ARTICULATED = "flapper_articulated"


VARIANT_ORDER = (
    Variant.PLANE,
    Variant.FLAPPER_FLAT_CRUISE,
    Variant.FLAPPER_FLAT_HOVER,
    Variant.FLAPPER_ARTICULATED,
)


@dataclass(frozen=True)
class VehicleConfig:
    variant: Variant = Variant.FLAPPER_ARTICULATED
    geom: WingGeometry = field(default_factory=WingGeometry)
    drive: FlapDrive = field(default_factory=FlapDrive)
    aero: AeroParams = field(default_factory=AeroParams)
    u_cruise: float = 2.5
    wing_incidence: float = math.radians(15.0)
    i_xx: float = 0.05
    roll_damping: float = 0.02

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not (math.isfinite(self.u_cruise) and self.u_cruise >= 0):
            raise ConfigError(f"u_cruise must be >= 0, got {self.u_cruise!r}")
        if not (math.isfinite(self.i_xx) and self.i_xx > 0):
            raise ConfigError(f"i_xx must be > 0, got {self.i_xx!r}")
        if not (math.isfinite(self.roll_damping) and self.roll_damping >= 0):
            raise ConfigError(f"roll_damping must be >= 0, got {self.roll_damping!r}")
        d, v = self.drive, self.variant
        if v is Variant.PLANE:
            if d.phi_amp != 0 or d.psi_amp != 0:
                raise ConfigError("plane variant requires zero flap and fold amplitudes")
            if self.u_cruise <= 0:
                raise ConfigError("plane variant requires u_cruise > 0")
        elif v in (Variant.FLAPPER_FLAT_HOVER, Variant.FLAPPER_FLAT_CRUISE):
            if d.psi_mid != 0 or d.psi_amp != 0:
                raise ConfigError(f"{v.value} requires psi_mid = psi_amp = 0")
            if v is Variant.FLAPPER_FLAT_HOVER and self.u_cruise != 0:
                raise ConfigError("flapper_flat_hover requires u_cruise = 0")
        elif d.psi_amp <= 0:
            raise ConfigError("flapper_articulated requires psi_amp > 0")

    @property
    def period(self) -> float:
        return self.drive.period

    def replace(self, **kw) -> "VehicleConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class SimSettings:
    dt: float = 0.0008
    n_cycles: int = 4
    skip_cycles: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be > 0, got {self.dt!r}")
        if int(self.n_cycles) != self.n_cycles or self.n_cycles < 2:
            raise ConfigError(f"n_cycles must be an integer >= 2, got {self.n_cycles!r}")
        if int(self.skip_cycles) != self.skip_cycles or self.skip_cycles < 0:
            raise ConfigError(f"skip_cycles must be an integer >= 0, got {self.skip_cycles!r}")
        if self.skip_cycles >= self.n_cycles:
            raise ConfigError("skip_cycles must be smaller than n_cycles")

    def check_period(self, period: float):
        if self.dt > period / 200.0 * (1.0 + 1e-9):
            raise ConfigError(
                f"dt = {self.dt:.6g} s exceeds period/200 = {period / 200.0:.6g} s"
            )


def moment_scale(cfg: VehicleConfig) -> float:
    """Characteristic moment 0.5 rho v_ref^2 S b, with v_ref = max(U, 2 pi f b)."""
    b = cfg.geom.semi_span
    v_ref = max(cfg.u_cruise, 2.0 * math.pi * cfg.drive.freq_hz * b)
    return 0.5 * cfg.aero.rho * v_ref**2 * cfg.geom.total_area * b


def force_scale(cfg: VehicleConfig) -> float:
    return moment_scale(cfg) / cfg.geom.semi_span


# -- snapshots -------------------------------------------------------------


def snapshot_panels(cfg: VehicleConfig, twist: TwistCommand, t: float) -> list[PanelPose]:
    return panel_poses(cfg.geom, *flap_angles(cfg.drive, t), twist=twist, incidence=cfg.wing_incidence)


def snapshot_wrench(cfg: VehicleConfig, twist: TwistCommand, t: float, roll_rate: float = 0.0) -> Wrench:
    panels = snapshot_panels(cfg, twist, t)
    rate = (roll_rate, 0.0, 0.0) if roll_rate != 0.0 else None
    strips = make_strips(panels, cfg.geom, freestream_u=cfg.u_cruise, body_rate=rate)
    return total_wrench(strips, cfg.aero)


# -- time series -----------------------------------------------------------

TS_COLUMNS = ("t", "phi", "psi", "delta_a", "fx", "fy", "fz", "mx", "my", "mz")


@dataclass(frozen=True)
class TimeSeries:
    dt: float
    data: np.ndarray  # (n, 10), columns TS_COLUMNS

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, TS_COLUMNS.index(name)]

    @property
    def force(self) -> np.ndarray:
        return self.data[:, 4:7]

    @property
    def moment(self) -> np.ndarray:
        return self.data[:, 7:10]


def _n_samples(span: float, dt: float) -> int:
    x = span / dt
    n = round(x)
    return int(n) if abs(x - n) < 1e-6 else int(math.ceil(x))


def simulate_tethered(cfg: VehicleConfig, twist: TwistCommand, settings: SimSettings) -> TimeSeries:
    """Sample the aerodynamic wrench on a fixed body over ``settings.n_cycles`` periods."""
    settings.check_period(cfg.period)
    n = _n_samples(settings.n_cycles * cfg.period, settings.dt)
    delta_a = 0.5 * (twist.delta_R - twist.delta_L)
    rows = np.empty((n, len(TS_COLUMNS)))
    static = None
    for i in range(n):
        t = i * settings.dt
        phi, psi, phi_dot, psi_dot = flap_angles(cfg.drive, t)
        if cfg.variant is Variant.PLANE:
            if static is None:
                static = snapshot_wrench(cfg, twist, 0.0)
            w = static
        else:
            panels = panel_poses(cfg.geom, phi, psi, phi_dot, psi_dot, twist, cfg.wing_incidence)
            w = total_wrench(make_strips(panels, cfg.geom, freestream_u=cfg.u_cruise), cfg.aero)
        rows[i, :4] = (t, phi, psi, delta_a)
        rows[i, 4:7] = w.force
        rows[i, 7:10] = w.moment
    return TimeSeries(settings.dt, rows)


@dataclass(frozen=True)
class CycleAverage:
    L_bar: float
    M_bar: float
    N_bar: float
    thrust_bar: float
    lift_bar: float
    side_bar: float
    cycles_used: int


def cycle_average(ts: TimeSeries, freq_hz: float, skip_cycles: int) -> CycleAverage:
    """Mean over the largest whole number of periods after ``skip_cycles``."""
    T = 1.0 / freq_hz
    t = ts["t"]
    per = T / ts.dt
    start = _n_samples(skip_cycles * T, ts.dt) if skip_cycles else 0
    avail = len(ts) - start
    if abs(per - round(per)) < 1e-6:
        m = int(round(per))
        k = avail // m if avail > 0 else 0
        stop = start + k * m
    else:
        k = int(math.floor(avail * ts.dt / T + 1e-9)) if avail > 0 else 0
        stop = start + int(np.searchsorted(t[start:], (skip_cycles + k) * T - 1e-9 * ts.dt))
    if k < 1:
        raise InsufficientDataError(
            f"series of {len(ts)} samples does not cover {skip_cycles} + 1 periods"
        )
    seg = ts.data[start:stop]
    mean = seg.mean(axis=0)
    return CycleAverage(
        L_bar=float(mean[7]),
        M_bar=float(mean[8]),
        N_bar=float(mean[9]),
        thrust_bar=float(mean[4]),
        lift_bar=float(-mean[6]),
        side_bar=float(mean[5]),
        cycles_used=int(k),
    )


def run_average(cfg: VehicleConfig, twist: TwistCommand, settings: SimSettings) -> CycleAverage:
    return cycle_average(simulate_tethered(cfg, twist, settings), cfg.drive.freq_hz, settings.skip_cycles)


def sign_with_floor(value: float, floor: float) -> int:
    if abs(value) <= floor:
        return 0
    return 1 if value > 0 else -1


def noise_floor(cfg: VehicleConfig, settings: SimSettings) -> float:
    """Roll-moment floor: ``|L_bar|`` at zero twist, never below 1e-12 of the moment scale."""
    l0 = run_average(cfg, TwistCommand(), settings).L_bar
    return max(abs(l0), 1e-12 * moment_scale(cfg))


# -- the four vehicles -----------------------------------------------------


def make_variant(base: VehicleConfig, variant: Variant, hover_downstroke_fraction: float = 0.6) -> VehicleConfig:
    """Derive one vehicle of the comparison family from a shared base config."""
    variant = Variant(variant)
    d = base.drive
    if variant is Variant.PLANE:
        drive = dataclasses.replace(d, phi_mid=0.0, phi_amp=0.0, psi_mid=0.0, psi_amp=0.0)
        return base.replace(variant=variant, drive=drive)
    if variant is Variant.FLAPPER_FLAT_CRUISE:
        drive = dataclasses.replace(d, psi_mid=0.0, psi_amp=0.0)
        return base.replace(variant=variant, drive=drive)
    if variant is Variant.FLAPPER_FLAT_HOVER:
        drive = dataclasses.replace(
            d, psi_mid=0.0, psi_amp=0.0, downstroke_fraction=hover_downstroke_fraction
        )
        return base.replace(variant=variant, drive=drive, u_cruise=0.0)
    return base.replace(variant=variant)


@dataclass(frozen=True)
class CompareRow:
    variant: Variant
    L_bar: float
    sign: int
    noise_floor: float


def _compare_one(args):
    cfg, delta, settings = args
    avg = run_average(cfg, TwistCommand.differential(delta), settings)
    floor = noise_floor(cfg, settings)
    return CompareRow(cfg.variant, avg.L_bar, sign_with_floor(avg.L_bar, floor), floor)


def _map(fn, items, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def compare_configs(
    base: VehicleConfig,
    delta: float,
    settings: SimSettings,
    hover_downstroke_fraction: float = 0.6,
    workers: int | None = None,
) -> list[CompareRow]:
    """Cycle-averaged roll moment of all four vehicles under ``TwistCommand.differential(delta)``."""
    jobs = [
        (make_variant(base, v, hover_downstroke_fraction), delta, settings) for v in VARIANT_ORDER
    ]
    return _map(_compare_one, jobs, workers)


# -- extreme-fold snapshot -------------------------------------------------


@dataclass(frozen=True)
class MStaticReport:
    wrench: Wrench
    panel_forces: dict  # (side, section) -> force vector
    outer_lateral_left: float
    outer_lateral_right: float

    @property
    def common_mode(self) -> bool:
        return self.outer_lateral_left * self.outer_lateral_right > 0


def m_static_oracle(
    geom: WingGeometry,
    aero: AeroParams,
    delta: float,
    phi: float,
    psi: float = math.pi / 2,
    phi_dot: float = 0.0,
    psi_dot: float = 0.0,
    u_cruise: float = 0.0,
    incidence: float = 0.0,
) -> MStaticReport:
    """Single-snapshot wrench with the outer panels folded (default: vertical)."""
    panels = panel_poses(geom, phi, psi, phi_dot, psi_dot, TwistCommand.differential(delta), incidence)
    strips = make_strips(panels, geom, freestream_u=u_cruise)
    forces = strip_forces(strips, aero)
    per_panel = {}
    for k, p in enumerate(panels):
        per_panel[(p.side.value, p.section.value)] = forces[strips.panel == k].sum(axis=0)
    w = wrench_from_forces(strips.centroid, forces)
    return MStaticReport(
        wrench=w,
        panel_forces=per_panel,
        outer_lateral_left=float(per_panel[(Side.LEFT.value, Section.OUTER.value)][1]),
        outer_lateral_right=float(per_panel[(Side.RIGHT.value, Section.OUTER.value)][1]),
    )


def downstroke_rates(drive: FlapDrive):
    """Flap and fold rates at mid-downstroke."""
    t_mid = 0.5 * drive.downstroke_fraction * drive.period
    _, _, phi_dot, psi_dot = flap_angles(drive, t_mid)
    return phi_dot, psi_dot


# -- roll response ---------------------------------------------------------


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant twist command: ``values[i]`` holds from ``times[i]``."""

    times: tuple
    values: tuple

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("schedule needs matching, non-empty times and values")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("schedule times must be strictly increasing")

    def __call__(self, t: float) -> float:
        i = int(np.searchsorted(self.times, t + 1e-12, side="right")) - 1
        return float(self.values[max(i, 0)])

    @classmethod
    def constant(cls, value: float) -> "ControlSchedule":
        return cls((0.0,), (value,))

    @classmethod
    def step(cls, t_step: float, value: float) -> "ControlSchedule":
        return cls((0.0, t_step), (0.0, value))

    @classmethod
    def square_wave(cls, amplitude: float, period: float, t_end: float) -> "ControlSchedule":
        half = 0.5 * period
        n = int(math.ceil(t_end / half)) + 1
        return cls(tuple(i * half for i in range(n)), tuple(amplitude * (1 if i % 2 == 0 else -1) for i in range(n)))


def rk4_step(f: Callable, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class RollResponse:
    t: np.ndarray
    delta_a: np.ndarray
    p: np.ndarray
    roll_angle: np.ndarray


def roll_response(
    cfg: VehicleConfig,
    schedule: ControlSchedule,
    settings: SimSettings,
    t_end: float,
    moment_fn: Callable[[float, float, float], float] | None = None,
) -> RollResponse:
    """Single roll degree of freedom: ``i_xx dp/dt = Mx - roll_damping p``.

    ``moment_fn(t, p, delta_a)`` replaces the aerodynamic roll moment when
    given.  The command is sampled at the start of each step and held
    across its RK4 stages.
    """
    settings.check_period(cfg.period)
    n = _n_samples(t_end, settings.dt)
    h = settings.dt

    if moment_fn is None:
        # RK4 stages share time points (k2/k3, and k4 with the next k1), so
        # the strip geometry for the last few (t, delta) pairs is reused
        cache: dict = {}

        def moment_fn(t, p, delta):
            key = (t, delta)
            strips = cache.get(key)
            if strips is None:
                if len(cache) > 4:
                    cache.clear()
                panels = snapshot_panels(cfg, TwistCommand.differential(delta), t)
                strips = cache[key] = make_strips(panels, cfg.geom, freestream_u=cfg.u_cruise)
            v_air = strips.v_air + np.cross((p, 0.0, 0.0), strips.centroid)
            moved = dataclasses.replace(strips, v_air=v_air)
            return wrench_from_forces(strips.centroid, strip_forces(moved, cfg.aero)).moment[0]

    t_out = np.arange(n + 1) * h
    cmd = np.empty(n + 1)
    y_out = np.empty((n + 1, 2))
    y = np.zeros(2)  # (roll angle, roll rate)
    y_out[0] = y
    for i in range(n):
        t = t_out[i]
        delta = schedule(t)
        cmd[i] = delta

        def rhs(tt, yy, delta=delta):
            return np.array([yy[1], (moment_fn(tt, yy[1], delta) - cfg.roll_damping * yy[1]) / cfg.i_xx])

        y = rk4_step(rhs, t, y, h)
        y_out[i + 1] = y
    cmd[n] = schedule(t_out[n])
    return RollResponse(t_out, cmd, y_out[:, 1], y_out[:, 0])


# -- sweeps ----------------------------------------------------------------

SWEEP_PARAMS = ("psi_amp", "psi_mid", "phi_mid", "phase_lag", "u_cruise", "h_com", "freq_hz")


@dataclass(frozen=True)
class SweepRow:
    value: float
    L_bar: float
    N_bar: float
    thrust_bar: float


def with_param(cfg: VehicleConfig, settings: SimSettings, param: str, value: float):
    """Copy of ``cfg``/``settings`` with one parameter set (SI units, radians)."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; expected one of {', '.join(SWEEP_PARAMS)}")
    if param in ("psi_amp", "psi_mid", "phi_mid", "phase_lag", "freq_hz"):
        drive = dataclasses.replace(cfg.drive, **{param: value})
        if param == "freq_hz":
            # keep samples per period fixed
            settings = dataclasses.replace(settings, dt=settings.dt * cfg.drive.freq_hz / value)
        cfg_kw = {"drive": drive}
    elif param == "h_com":
        cfg_kw = {"geom": dataclasses.replace(cfg.geom, h_com=value)}
    else:
        cfg_kw = {"u_cruise": value}
    variant = cfg.variant
    drive = cfg_kw.get("drive", cfg.drive)
    u = cfg_kw.get("u_cruise", cfg.u_cruise)
    if variant is Variant.FLAPPER_ARTICULATED and drive.psi_amp == 0 and drive.psi_mid == 0:
        # a fold-free articulated wing is the flat flapper
        variant = Variant.FLAPPER_FLAT_CRUISE if u > 0 else Variant.FLAPPER_FLAT_HOVER
    return cfg.replace(variant=variant, **cfg_kw), settings


def _sweep_one(args):
    cfg, settings, param, value, delta = args
    c, s = with_param(cfg, settings, param, value)
    avg = run_average(c, TwistCommand.differential(delta), s)
    return SweepRow(value, avg.L_bar, avg.N_bar, avg.thrust_bar)


def sweep(
    cfg: VehicleConfig,
    param: str,
    values: Sequence[float],
    delta: float,
    settings: SimSettings,
    workers: int | None = None,
) -> list[SweepRow]:
    """Independent runs per value; rows come back in input order."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; expected one of {', '.join(SWEEP_PARAMS)}")
    jobs = [(cfg, settings, param, float(v), delta) for v in values]
    return _map(_sweep_one, jobs, workers)


def zero_crossings(xs: Sequence[float], ys: Sequence[float]) -> list[float]:
    """Linearly interpolated locations where ``ys`` changes sign."""
    out = []
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 == 0.0:
            out.append(float(x0))
        elif y0 * y1 < 0:
            out.append(float(x0 + (x1 - x0) * y0 / (y0 - y1)))
    return out
