"""Command-line front end.

Exit codes: 0 success, 1 runtime/model/data error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import linkage as lk
from .config import ConfigError, RunConfig, load_config
from .sim import (
    ControlSchedule,
    TwistCommand,
    cycle_average,
    downstroke_rates,
    m_static_oracle,
    noise_floor,
    roll_response,
    sign_with_floor,
    simulate_tethered,
    sweep,
    zero_crossings,
    compare_configs,
)
from .telemetry import correlate, parse_log, synth_log

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

TS_HEADER = "t,phi_deg,psi_deg,delta_a_deg,fx,fy,fz,mx,my,mz"

# CLI parameter name -> (sim parameter, factor from CLI units to SI/radians)
SWEEP_CLI = {
    "psi_amp_deg": ("psi_amp", math.pi / 180.0),
    "psi_mid_deg": ("psi_mid", math.pi / 180.0),
    "phi_mid_deg": ("phi_mid", math.pi / 180.0),
    "phase_lag_deg": ("phase_lag", math.pi / 180.0),
    "u_cruise_mps": ("u_cruise", 1.0),
    "h_com_m": ("h_com", 1.0),
    "freq_hz": ("freq_hz", 1.0),
}
# bare model names use the same CLI units
for _sim, _factor in list(SWEEP_CLI.values()):
    SWEEP_CLI.setdefault(_sim, (_sim, _factor))


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _sign_char(s: int) -> str:
    return {1: "+", -1: "-", 0: "0"}[s]


def _write_text(path: str, text: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _load(args) -> RunConfig:
    return load_config(args.config)


# -- subcommands -----------------------------------------------------------


def cmd_simulate(args) -> int:
    rc = _load(args)
    cfg, settings = rc.vehicle, rc.settings
    delta = math.radians(args.twist_deg)
    ts = simulate_tethered(cfg, TwistCommand.differential(delta), settings)
    avg = cycle_average(ts, cfg.drive.freq_hz, settings.skip_cycles)
    floor = noise_floor(cfg, settings)
    summary = {
        "config_hash": rc.hash,
        "delta_a_deg": args.twist_deg,
        "l_bar": avg.L_bar,
        "m_bar": avg.M_bar,
        "n_bar": avg.N_bar,
        "thrust_bar": avg.thrust_bar,
        "lift_bar": avg.lift_bar,
        "sign_l": sign_with_floor(avg.L_bar, floor),
        "cycles_used": avg.cycles_used,
        "noise_floor": floor,
    }
    if args.out:
        lines = [TS_HEADER]
        for row in ts.data:
            t, phi, psi, da = row[:4]
            vals = [t, math.degrees(phi), math.degrees(psi), math.degrees(da), *row[4:]]
            lines.append(",".join(fmt(x) for x in vals))
        _write_text(args.out, "\n".join(lines) + "\n")
    text = json.dumps(summary, indent=2) + "\n"
    if args.summary:
        _write_text(args.summary, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_compare(args) -> int:
    rc = _load(args)
    rows = compare_configs(rc.vehicle, math.radians(args.twist_deg), rc.settings, workers=args.workers)
    width = max(len(r.variant.value) for r in rows)
    print(f"{'variant':<{width}}  {'l_bar':>20}  sign")
    for r in rows:
        print(f"{r.variant.value:<{width}}  {fmt(r.L_bar):>20}  {_sign_char(r.sign)}")
    if args.out:
        lines = ["variant,l_bar,sign"] + [f"{r.variant.value},{fmt(r.L_bar)},{_sign_char(r.sign)}" for r in rows]
        _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


GNUPLOT_TEMPLATE = """\
# gnuplot script: roll moment versus {param}
set datafile separator ","
set key autotitle columnhead
set xlabel "{param}"
set ylabel "cycle-averaged moment [N m]"
set grid
set zeroaxis
set terminal pngcairo size 900,600
set output "{png}"
plot "{csv}" using 2:3 with linespoints title "l_bar", \\
     "{csv}" using 2:4 with linespoints title "n_bar"
"""


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if args.param not in SWEEP_CLI:
        raise UsageError(f"unknown --param {args.param!r}; choose from {', '.join(sorted(SWEEP_CLI))}")
    rc = _load(args)
    sim_name, factor = SWEEP_CLI[args.param]
    n = args.steps
    values = [args.start + (args.stop - args.start) * i / (n - 1) for i in range(n)]
    rows = sweep(
        rc.vehicle,
        sim_name,
        [v * factor for v in values],
        math.radians(args.twist_deg),
        rc.settings,
        workers=args.workers,
    )
    lines = ["param,value,l_bar,n_bar,thrust_bar"]
    for v, r in zip(values, rows):
        lines.append(f"{args.param},{fmt(v)},{fmt(r.L_bar)},{fmt(r.N_bar)},{fmt(r.thrust_bar)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
        out = Path(args.out)
        gp = out.with_suffix(".gp")
        _write_text(
            str(gp),
            GNUPLOT_TEMPLATE.format(param=args.param, csv=out.name, png=out.with_suffix(".png").name),
        )
    else:
        sys.stdout.write(text)
    xs = zero_crossings(values, [r.L_bar for r in rows])
    if xs:
        print("l_bar sign change at " + ", ".join(f"{args.param} = {fmt(x)}" for x in xs))
    else:
        print("l_bar does not change sign over the sweep")
    return EXIT_OK


def cmd_mstatic(args) -> int:
    rc = _load(args)
    cfg = rc.vehicle
    delta = math.radians(args.twist_deg)
    phi = cfg.drive.phi_mid if args.phi_deg is None else math.radians(args.phi_deg)
    phi_dot, psi_dot = downstroke_rates(cfg.drive)
    rep = m_static_oracle(
        cfg.geom,
        cfg.aero,
        delta,
        phi,
        math.radians(args.psi_deg),
        phi_dot,
        psi_dot,
        u_cruise=cfg.u_cruise,
        incidence=cfg.wing_incidence,
    )
    print(
        f"psi = {fmt(args.psi_deg)} deg, phi = {fmt(math.degrees(phi))} deg, "
        f"phi_dot = {fmt(phi_dot)} rad/s, psi_dot = {fmt(psi_dot)} rad/s, twist = {fmt(args.twist_deg)} deg"
    )
    for (side, section), f in rep.panel_forces.items():
        print(f"{side:>5} {section:<5} force = ({fmt(f[0])}, {fmt(f[1])}, {fmt(f[2])}) N")
    F, M = rep.wrench.force, rep.wrench.moment
    print(f"total force  = ({fmt(F[0])}, {fmt(F[1])}, {fmt(F[2])}) N")
    print(f"total moment = ({fmt(M[0])}, {fmt(M[1])}, {fmt(M[2])}) N m")
    print(f"Mx = {fmt(M[0])} N m")
    if delta != 0.0 and not rep.common_mode:
        print(
            "common-mode check failed: outer-panel lateral forces "
            f"left {fmt(rep.outer_lateral_left)} N, right {fmt(rep.outer_lateral_right)} N differ in sign",
            file=sys.stderr,
        )
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_linkage(args) -> int:
    try:
        fb = lk.FourBar(args.d, args.a, args.b, args.c, lk.Branch(args.branch))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    th2 = math.radians(args.theta2_deg)
    print(f"grashof class: {lk.classify(fb).value}")
    st = lk.solve(fb, th2)
    print(f"theta3 = {math.degrees(st.theta3):.6f} deg")
    print(f"theta4 = {math.degrees(st.theta4):.6f} deg")
    try:
        ratio = lk.transmission_ratio(fb, th2)
        print(f"transmission ratio = {fmt(ratio)}")
    except lk.SingularConfigurationError as exc:
        print(f"transmission ratio undefined: {exc}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    try:
        with open(args.log, newline="") as fh:
            recs = parse_log(fh)
    except OSError as exc:
        print(f"error: cannot read log {args.log!r}: {exc.strerror}", file=sys.stderr)
        return EXIT_RUNTIME
    rep = correlate(recs, max_lag=args.max_lag, resample_dt=args.resample_dt)
    print(f"best_lag = {fmt(rep.best_lag)} s")
    print(f"pearson_r_at_best_lag = {fmt(rep.pearson_r_at_best_lag)}")
    print(f"sign = {rep.sign}")
    print(f"n_samples = {rep.n_samples}")
    return EXIT_OK


def cmd_synth_log(args) -> int:
    rc = _load(args)
    amp = math.radians(args.amplitude_deg)
    sched = ControlSchedule.square_wave(amp, args.period, args.duration)
    resp = roll_response(rc.vehicle, sched, rc.settings, args.duration)
    _write_text(args.out, synth_log(resp))
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ornisim", description="Articulated-wing ornithopter roll-control simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="run configuration file (default: packaged default.cfg)")
        return sp

    s = with_config(sub.add_parser("simulate", help="tethered run and cycle-averaged summary"))
    s.add_argument("--twist-deg", type=float, required=True)
    s.add_argument("--out", help="time-series CSV")
    s.add_argument("--summary", help="summary JSON (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    s = with_config(sub.add_parser("compare", help="roll moment of the four vehicles"))
    s.add_argument("--twist-deg", type=float, required=True)
    s.add_argument("--out", help="CSV with variant,l_bar,sign")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_compare)

    s = with_config(sub.add_parser("sweep", help="one-parameter sweep"))
    s.add_argument("--param", required=True, help=", ".join(sorted(SWEEP_CLI)))
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--twist-deg", type=float, required=True)
    s.add_argument("--out", help="sweep CSV; a gnuplot .gp script is written next to it")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    s = with_config(sub.add_parser("mstatic", help="single snapshot with folded outer panels"))
    s.add_argument("--twist-deg", type=float, required=True)
    s.add_argument("--psi-deg", type=float, default=90.0)
    s.add_argument("--phi-deg", type=float, default=None, help="flap angle (default: drive phi_mid)")
    s.set_defaults(func=cmd_mstatic)

    s = sub.add_parser("linkage", help="four-bar position analysis")
    for name in ("a", "b", "c", "d"):
        s.add_argument(f"--{name}", type=float, required=True)
    s.add_argument("--theta2-deg", type=float, required=True)
    s.add_argument("--branch", choices=[b.value for b in lk.Branch], default="open")
    s.set_defaults(func=cmd_linkage)

    s = sub.add_parser("correlate", help="control vs roll-rate correlation of a log")
    s.add_argument("--log", required=True)
    s.add_argument("--max-lag", type=float, default=2.0)
    s.add_argument("--resample-dt", type=float, default=0.02)
    s.set_defaults(func=cmd_correlate)

    s = with_config(sub.add_parser("synth-log", help="roll response to a square-wave twist, written as a log"))
    s.add_argument("--amplitude-deg", type=float, default=5.0)
    s.add_argument("--period", type=float, default=4.0)
    s.add_argument("--duration", type=float, default=12.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth_log)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except lk.NotAssemblableError as exc:
        print(f"error: not assemblable: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
