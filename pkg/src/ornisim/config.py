"""Run-configuration files (INI syntax) and their mapping onto model objects."""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .aero import AeroParams
from .kinematics import FlapDrive, WingGeometry
from .sim import ConfigError, SimSettings, VehicleConfig

DEFAULT_CONFIG_NAME = "default.cfg"

# section -> key -> kind; "deg" values are converted to radians on load
SCHEMA = {
    "vehicle": {
        "variant": "str",
        "u_cruise_mps": "float",
        "wing_incidence_deg": "deg",
        "i_xx": "float",
        "roll_damping": "float",
    },
    "geometry": {
        "inner_span_m": "float",
        "outer_span_m": "float",
        "inner_chord_m": "float",
        "outer_chord_m": "float",
        "h_com_m": "float",
        "strips_inner": "int",
        "strips_outer": "int",
    },
    "drive": {
        "freq_hz": "float",
        "phi_mid_deg": "deg",
        "phi_amp_deg": "deg",
        "psi_mid_deg": "deg",
        "psi_amp_deg": "deg",
        "phase_lag_deg": "deg",
        "downstroke_fraction": "float",
    },
    "aero": {"rho": "float", "c_n0": "float", "model": "str"},
    "sim": {"dt_s": "float", "n_cycles": "int", "skip_cycles": "int"},
}


class ConfigFileError(ConfigError):
    pass


@dataclass(frozen=True)
class RunConfig:
    vehicle: VehicleConfig
    settings: SimSettings
    values: dict  # "section.key" -> value in file units

    @property
    def hash(self) -> str:
        blob = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def default_config_text() -> str:
    return resources.files("ornisim").joinpath(DEFAULT_CONFIG_NAME).read_text()


def _line_index(text: str) -> dict:
    """Map ``section.key`` and ``[section]`` to 1-based line numbers."""
    where = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where.setdefault(f"[{section}]", no)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", s)
        if m and section is not None:
            where.setdefault(f"{section}.{m.group(1)}", no)
    return where


def _convert(kind, raw, loc):
    try:
        if kind == "str":
            return raw.strip()
        if kind == "int":
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError
        return v
    except ValueError:
        raise ConfigFileError(f"{loc}: expected {'an integer' if kind == 'int' else 'a number'}, got {raw!r}") from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigFileError(f"{source}: {exc}".replace("\n", " ")) from None
    lines = _line_index(text)

    base = parse_defaults()
    values = dict(base)
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigFileError(
                f"{source}:{lines.get(f'[{section}]', '?')}: unknown section [{section}]"
            )
        for key, raw in cp.items(section):
            name = f"{section}.{key}"
            loc = f"{source}:{lines.get(name, '?')}: {name}"
            if key not in SCHEMA[section]:
                raise ConfigFileError(f"{loc}: unknown key")
            values[name] = _convert(SCHEMA[section][key], raw, loc)
    return build(values, source, lines)


_DEFAULTS_CACHE: dict | None = None


def parse_defaults() -> dict:
    """Values of the packaged default configuration, in file units."""
    global _DEFAULTS_CACHE
    if _DEFAULTS_CACHE is None:
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        cp.read_string(default_config_text())
        out = {}
        for section, keys in SCHEMA.items():
            for key, kind in keys.items():
                out[f"{section}.{key}"] = _convert(kind, cp.get(section, key), key)
        _DEFAULTS_CACHE = out
    return dict(_DEFAULTS_CACHE)


def build(values: dict, source: str = "<config>", lines: dict | None = None) -> RunConfig:
    """Construct model objects from flat file-unit values, re-validating invariants."""
    lines = lines or {}
    v = values
    rad = math.radians

    def make(section, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            line = lines.get(f"[{section}]", "?")
            raise ConfigFileError(f"{source}:{line}: [{section}] {exc}") from None

    geom = make(
        "geometry",
        lambda: WingGeometry(
            inner_span=v["geometry.inner_span_m"],
            outer_span=v["geometry.outer_span_m"],
            inner_chord=v["geometry.inner_chord_m"],
            outer_chord=v["geometry.outer_chord_m"],
            strips_inner=v["geometry.strips_inner"],
            strips_outer=v["geometry.strips_outer"],
            h_com=v["geometry.h_com_m"],
        ),
    )
    drive = make(
        "drive",
        lambda: FlapDrive(
            freq_hz=v["drive.freq_hz"],
            phi_mid=rad(v["drive.phi_mid_deg"]),
            phi_amp=rad(v["drive.phi_amp_deg"]),
            psi_mid=rad(v["drive.psi_mid_deg"]),
            psi_amp=rad(v["drive.psi_amp_deg"]),
            phase_lag=rad(v["drive.phase_lag_deg"]),
            downstroke_fraction=v["drive.downstroke_fraction"],
        ),
    )
    aero = make("aero", lambda: AeroParams(rho=v["aero.rho"], c_n0=v["aero.c_n0"], model=v["aero.model"]))
    vehicle = make(
        "vehicle",
        lambda: VehicleConfig(
            variant=v["vehicle.variant"],
            geom=geom,
            drive=drive,
            aero=aero,
            u_cruise=v["vehicle.u_cruise_mps"],
            wing_incidence=rad(v["vehicle.wing_incidence_deg"]),
            i_xx=v["vehicle.i_xx"],
            roll_damping=v["vehicle.roll_damping"],
        ),
    )
    settings = make(
        "sim",
        lambda: SimSettings(dt=v["sim.dt_s"], n_cycles=v["sim.n_cycles"], skip_cycles=v["sim.skip_cycles"]),
    )
    make("sim", lambda: settings.check_period(drive.period))
    return RunConfig(vehicle, settings, dict(values))


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        return parse_config(default_config_text(), DEFAULT_CONFIG_NAME)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
    return parse_config(text, str(p))
