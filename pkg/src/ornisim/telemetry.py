"""Flight-log ingestion and lagged control/roll-rate correlation.

Log schema (CSV, comma separated, header required)::

    t,ctrl,roll_deg

``ctrl`` is normalized to [-1, 1]; positive means left outer wing trailing
edge up, right trailing edge down.  ``roll_deg`` is positive right wing down.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

HEADER = ("t", "ctrl", "roll_deg")


class LogParseError(ValueError):
    pass


class EmptyLogError(LogParseError):
    pass


class InsufficientDurationError(ValueError):
    pass


@dataclass(frozen=True)
class LogRecord:
    t: float
    ctrl: float
    roll_deg: float


@dataclass(frozen=True)
class CorrelationReport:
    best_lag: float
    pearson_r_at_best_lag: float
    sign: str  # "+", "-" or "indeterminate"
    n_samples: int


def parse_log(stream: TextIO | str, format: str = "csv") -> list[LogRecord]:
    """Strictly parse a ``t,ctrl,roll_deg`` CSV log.

    Row numbers in error messages count data rows from 1 (the header is
    row 0).
    """
    if format != "csv":
        raise ValueError(f"unsupported log format {format!r}")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyLogError("empty log file (no header)") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise LogParseError(f"missing or wrong header: expected {','.join(HEADER)!r}, got {','.join(header)!r}")
    records: list[LogRecord] = []
    bad: list[str] = []
    prev_t = -math.inf
    for row_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            bad.append(f"row {row_no}: blank line")
            continue
        if len(row) != 3:
            bad.append(f"row {row_no}: expected 3 fields, got {len(row)}")
            continue
        try:
            t, ctrl, roll = (float(x) for x in row)
        except ValueError:
            bad.append(f"row {row_no}: non-numeric field in {','.join(row)!r}")
            continue
        if not all(math.isfinite(v) for v in (t, ctrl, roll)):
            bad.append(f"row {row_no}: non-finite value")
            continue
        if t < prev_t:
            raise LogParseError(f"row {row_no}: time {t!r} goes backwards (previous {prev_t!r})")
        prev_t = t
        records.append(LogRecord(t, ctrl, roll))
    if bad:
        raise LogParseError(f"{len(bad)} malformed row(s): " + "; ".join(bad[:5]))
    if not records:
        raise EmptyLogError("log contains a header but no data rows")
    return records


def format_log(t: Iterable[float], ctrl: Iterable[float], roll_deg: Iterable[float]) -> str:
    """Render samples as a log in the ``parse_log`` schema (LF line endings)."""
    lines = [",".join(HEADER)]
    for a, b, c in zip(t, ctrl, roll_deg):
        lines.append(f"{a:.12g},{b:.12g},{c:.12g}")
    return "\n".join(lines) + "\n"


def synth_log(resp, ctrl_scale: float | None = None) -> str:
    """Log text from a :class:`~ornisim.sim.RollResponse`.

    The twist command is normalized by ``ctrl_scale`` (default: its largest
    magnitude) so that ``ctrl`` lies in [-1, 1].
    """
    delta = np.asarray(resp.delta_a, dtype=float)
    if ctrl_scale is None:
        ctrl_scale = float(np.max(np.abs(delta))) if delta.size else 0.0
    ctrl = delta / ctrl_scale if ctrl_scale > 0 else np.zeros_like(delta)
    return format_log(resp.t, ctrl, np.degrees(resp.roll_angle))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    y = y - y.mean()
    den = math.sqrt(float(np.dot(x, x)) * float(np.dot(y, y)))
    if den == 0.0 or not math.isfinite(den):
        return 0.0
    return float(np.dot(x, y) / den)


def correlate(records: list[LogRecord], max_lag: float = 2.0, resample_dt: float = 0.02) -> CorrelationReport:
    """Correlate control against roll rate over lags in ``[0, max_lag]``.

    Both channels are linearly resampled onto a uniform grid and the roll
    angle is differentiated with central differences.  The reported lag
    maximizes ``|r|``.
    """
    if resample_dt <= 0:
        raise ValueError("resample_dt must be > 0")
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if not records:
        raise EmptyLogError("no records to correlate")
    t = np.array([r.t for r in records])
    duration = t[-1] - t[0]
    if not duration > 4.0 * max_lag:
        raise InsufficientDurationError(
            f"log duration {duration:.6g} s must exceed 4 x max_lag = {4.0 * max_lag:.6g} s"
        )
    ctrl = np.array([r.ctrl for r in records])
    roll = np.radians([r.roll_deg for r in records])
    grid = t[0] + resample_dt * np.arange(int(math.floor(duration / resample_dt + 1e-9)) + 1)
    c = np.interp(grid, t, ctrl)
    rate = np.gradient(np.interp(grid, t, roll), resample_dt)
    n = len(grid)
    n_lags = int(math.floor(max_lag / resample_dt + 1e-9))
    best_r, best_k = 0.0, 0
    for k in range(n_lags + 1):
        r = _pearson(c[: n - k], rate[k:])
        if abs(r) > abs(best_r):
            best_r, best_k = r, k
    if abs(best_r) < 0.2 or n < 32:
        sign = "indeterminate"
    else:
        sign = "+" if best_r > 0 else "-"
    return CorrelationReport(best_k * resample_dt, best_r, sign, n)
