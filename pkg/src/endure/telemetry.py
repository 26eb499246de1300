"""Burner-test log parsing, smoothing and reduction to headline figures."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Iterable, TextIO

import numpy as np

from .errors import LogFormatError, TelemetryError
from .powerplant import FuelSpec, burner_thermal_power, exhaust_split
from .quantities import non_negative, open_fraction, positive

TEMPERATURE_COLUMNS = {"t": "timestamp", "T_hot": "T_hot_C", "T_cold": "T_cold_C", "T_ambient": "T_amb_C"}
POWER_COLUMNS = {"t": "time_s", "voltage": "voltage_V", "current": "current_A"}

# backwards timestamp steps up to this many seconds are clamped, larger ones rejected
BACKSTEP_TOLERANCE = 2.0
ALIGN_TOLERANCE = 5.0
POWER_MISMATCH = 0.01


@dataclass(frozen=True)
class TemperatureSample:
    t: float  # s since first sample
    T_hot: float
    T_cold: float
    T_ambient: float


@dataclass(frozen=True)
class PowerSample:
    t: float  # s since first sample
    voltage: float
    current: float
    power: float


@dataclass
class ParsedLog:
    samples: list
    skipped: int = 0
    clamped: int = 0
    warnings: int = 0
    t0: float | None = None  # absolute epoch seconds of the first sample, when known

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)


def _parse_time(text: str) -> tuple[float, bool]:
    """Seconds as float plus whether the value was an absolute timestamp."""
    text = text.strip()
    try:
        return float(text), False
    except ValueError:
        pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    return stamp.timestamp(), True


def _reader(stream: TextIO | str, delimiter: str):
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    text = stream.read()
    if not text.strip():
        raise LogFormatError("log is empty")
    # newline="" semantics: let csv handle CRLF and LF alike
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    try:
        header = [h.strip().lstrip("\ufeff") for h in next(reader)]
    except StopIteration:
        raise LogFormatError("log has no header row") from None
    return header, reader


def _index(header: list[str], column_map: dict[str, str], required: Iterable[str]):
    idx = {}
    for key in required:
        col = column_map.get(key)
        if col is None:
            raise LogFormatError(f"no column mapped for {key!r}")
        if col not in header:
            raise LogFormatError(f"column {col!r} (for {key}) not in header {header}")
        idx[key] = header.index(col)
    return idx


def _parse(stream, column_map, required, optional, build, delimiter) -> ParsedLog:
    header, reader = _reader(stream, delimiter)
    idx = _index(header, column_map, required)
    for key in optional:
        col = column_map.get(key)
        if col is not None:
            idx.update(_index(header, column_map, [key]))
    log = ParsedLog(samples=[])
    first = None
    last = -math.inf
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        try:
            t_raw, absolute = _parse_time(row[idx["t"]])
            values = {k: float(row[i]) for k, i in idx.items() if k != "t"}
        except (ValueError, IndexError):
            log.skipped += 1
            continue
        if not all(math.isfinite(v) for v in values.values()) or not math.isfinite(t_raw):
            log.skipped += 1
            continue
        if first is None:
            first = t_raw
            log.t0 = t_raw if absolute else None
        t = t_raw - first
        if t < last:
            if last - t > BACKSTEP_TOLERANCE:
                raise LogFormatError(
                    f"timestamp goes back {last - t:.3g} s at row {len(log.samples) + log.skipped + 2}"
                )
            t = last
            log.clamped += 1
        last = t
        sample, warn = build(t, values)
        log.warnings += warn
        log.samples.append(sample)
    if not log.samples:
        raise LogFormatError("log has no parseable rows")
    return log


def parse_temperature_log(
    stream: TextIO | str, column_map: dict[str, str] | None = None, *, delimiter: str = ","
) -> ParsedLog:
    """Read a thermocouple log into TemperatureSamples.

    ``column_map`` maps ``t``, ``T_hot``, ``T_cold`` and ``T_ambient`` to
    header names. Timestamps may be plain seconds or ISO-8601; they become
    seconds elapsed since the first good row. Rows that fail to parse are
    skipped and counted.
    """
    cmap = {**TEMPERATURE_COLUMNS, **(column_map or {})}

    def build(t, v):
        return TemperatureSample(t, v["T_hot"], v["T_cold"], v["T_ambient"]), 0

    return _parse(stream, cmap, ("t", "T_hot", "T_cold", "T_ambient"), (), build, delimiter)


def parse_power_log(
    stream: TextIO | str, column_map: dict[str, str] | None = None, *, delimiter: str = ","
) -> ParsedLog:
    """Read an electronic-load log into PowerSamples.

    Power is taken from a mapped ``power`` column when present (rows where
    it disagrees with V·I by more than 1 % are counted in ``warnings``),
    otherwise computed as V·I.
    """
    cmap = {**POWER_COLUMNS, **(column_map or {})}

    def build(t, v):
        vi = v["voltage"] * v["current"]
        if "power" not in v:
            return PowerSample(t, v["voltage"], v["current"], vi), 0
        p = v["power"]
        warn = int(abs(p - vi) > POWER_MISMATCH * max(abs(vi), abs(p)))
        return PowerSample(t, v["voltage"], v["current"], p), warn

    return _parse(stream, cmap, ("t", "voltage", "current"), ("power",), build, delimiter)


def sliding_mean(values, window: int) -> np.ndarray:
    """Centered moving average with shrinking windows at the edges.

    For index i the window spans ``i - window//2`` to
    ``i + (window - 1)//2``, clipped to the series; the output has the same
    length as the input.
    """
    y = np.asarray(values, dtype=float)
    if y.size == 0:
        raise TelemetryError("cannot smooth an empty series")
    if window < 1:
        raise TelemetryError(f"window must be >= 1, got {window}")
    if window == 1:
        return y.copy()
    n = y.size
    left, right = window // 2, (window - 1) // 2
    csum = np.concatenate(([0.0], np.cumsum(y)))
    i = np.arange(n)
    start = np.clip(i - left, 0, n)
    stop = np.clip(i + right + 1, 0, n)
    return (csum[stop] - csum[start]) / (stop - start)


def integrate_energy(times_s, power_w) -> float:
    """Trapezoidal energy (Wh) of a power series sampled at ``times_s`` seconds."""
    t = np.asarray(times_s, dtype=float)
    p = np.asarray(power_w, dtype=float)
    if t.size < 2:
        raise TelemetryError("need at least two power samples to integrate")
    if np.any(np.diff(t) < 0):
        raise TelemetryError("timestamps must be non-decreasing")
    return float(np.trapezoid(p, t)) / 3600.0


def integrate_log(log: ParsedLog) -> float:
    return integrate_energy(log.times, log.column("power"))


@dataclass(frozen=True)
class TestSummary:
    __test__ = False  # not a pytest class

    duration: float  # h
    avg_power: float  # W
    energy: float  # Wh
    fuel_burned: float  # kg
    burn_rate: float  # kg/h
    chemical_energy: float  # Wh
    thermal_power: float  # W
    delivered_power: float  # W
    exhaust_loss: float  # W
    exhaust_efficiency: float
    system_efficiency: float
    device_efficiency: float
    extrapolated_energy: float  # Wh over a full canister
    system_mass: float  # kg, dry device plus full canister
    specific_energy: float  # Wh/kg
    specific_power: float  # W/kg
    delta_t_mean: float | None  # °C
    cold_side_resistance: float | None  # °C/W
    power_std: float  # W, of the smoothed series
    first_power: float  # W
    last_power: float  # W
    smoothing_window: int
    aligned_samples: int
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = asdict(self)
        out.pop("extra")
        out.update(self.extra)
        return out

    def extrapolate(self, device_efficiency: float, from_efficiency: float | None = None) -> dict[str, float]:
        """Specific energy and power if the module ran at ``device_efficiency``.

        Both scale linearly with efficiency. ``from_efficiency`` defaults to
        the measured device efficiency.
        """
        base = self.device_efficiency if from_efficiency is None else from_efficiency
        ratio = positive("device_efficiency", device_efficiency) / positive("from_efficiency", base)
        return {
            "specific_energy": self.specific_energy * ratio,
            "specific_power": self.specific_power * ratio,
        }


def _time_base(log: ParsedLog, other: ParsedLog) -> float:
    """Offset to add to ``log`` elapsed times to share an axis with ``other``."""
    if log.t0 is not None and other.t0 is not None:
        return log.t0 - other.t0
    return 0.0


def _align(temps: ParsedLog, powers: ParsedLog) -> tuple[np.ndarray, np.ndarray]:
    """Indices of (temperature, power) samples paired by nearest time within tolerance."""
    tt = temps.times + _time_base(temps, powers)
    tp = powers.times
    pos = np.searchsorted(tt, tp)
    lo = np.clip(pos - 1, 0, tt.size - 1)
    hi = np.clip(pos, 0, tt.size - 1)
    nearest = np.where(np.abs(tt[lo] - tp) <= np.abs(tt[hi] - tp), lo, hi)
    ok = np.abs(tt[nearest] - tp) <= ALIGN_TOLERANCE
    return nearest[ok], np.nonzero(ok)[0]


def reduce_test(
    temps: ParsedLog,
    powers: ParsedLog,
    fuel_burned: float,
    device_dry_mass: float,
    canister_fuel_capacity: float,
    fuel: FuelSpec,
    exhaust_efficiency: float,
    *,
    window: int = 100,
) -> TestSummary:
    """Reduce one burner test to energies, efficiencies and specific figures.

    Masses are in kg. Duration is the span of the power log; burn rate is
    the weighed fuel over that span. The system mass used for specific
    figures is the dry device plus a full canister (fuel plus tare).
    """
    positive("fuel_burned", fuel_burned)
    non_negative("device_dry_mass", device_dry_mass)
    positive("canister_fuel_capacity", canister_fuel_capacity)
    open_fraction("exhaust_efficiency", exhaust_efficiency, include_one=True)
    if len(powers) < 2:
        raise TelemetryError("power log needs at least two samples")
    if len(temps) == 0:
        raise TelemetryError("temperature log is empty")

    t_p = powers.times
    p = powers.column("power")
    duration_s = t_p[-1] - t_p[0]
    if duration_s <= 0:
        raise TelemetryError("power log spans zero time")

    t_t = temps.times + _time_base(temps, powers)
    overlap = min(t_t[-1], t_p[-1]) - max(t_t[0], t_p[0])
    span_t = t_t[-1] - t_t[0]
    if overlap < 0.5 * duration_s or (span_t > 0 and overlap < 0.5 * span_t):
        raise TelemetryError(
            f"temperature and power logs overlap for {max(overlap, 0):.0f} s, "
            "less than half of either log"
        )

    duration = duration_s / 3600.0
    energy = integrate_energy(t_p, p)
    avg_power = float(np.mean(p))
    burn_rate = fuel_burned / duration
    chemical = fuel_burned * fuel.specific_energy
    thermal = burner_thermal_power(burn_rate, fuel)
    delivered, lost = exhaust_split(thermal, exhaust_efficiency)
    # system = device × η_exh holds bit-for-bit; energy / chemical to rounding
    device_eff = energy / (chemical * exhaust_efficiency)
    system_eff = device_eff * exhaust_efficiency
    extrapolated = avg_power * (canister_fuel_capacity / burn_rate)
    system_mass = device_dry_mass + canister_fuel_capacity * (1.0 + fuel.tank_tare_ratio)

    ti, pi = _align(temps, powers)
    dt_mean = resistance = None
    if ti.size:
        hot = temps.column("T_hot")[ti]
        cold = temps.column("T_cold")[ti]
        amb = temps.column("T_ambient")[ti]
        dt_mean = float(np.mean(hot - cold))
        rise = float(np.mean(cold) - np.mean(amb))
        if rise > 0 and delivered > 0:
            resistance = rise / delivered

    smoothed = sliding_mean(p, window)
    return TestSummary(
        duration=duration,
        avg_power=avg_power,
        energy=energy,
        fuel_burned=fuel_burned,
        burn_rate=burn_rate,
        chemical_energy=chemical,
        thermal_power=thermal,
        delivered_power=delivered,
        exhaust_loss=lost,
        exhaust_efficiency=exhaust_efficiency,
        system_efficiency=system_eff,
        device_efficiency=device_eff,
        extrapolated_energy=extrapolated,
        system_mass=system_mass,
        specific_energy=extrapolated / system_mass if system_mass > 0 else math.nan,
        specific_power=avg_power / system_mass if system_mass > 0 else math.nan,
        delta_t_mean=dt_mean,
        cold_side_resistance=resistance,
        power_std=float(np.std(smoothed)),
        first_power=float(p[0]),
        last_power=float(p[-1]),
        smoothing_window=window,
        aligned_samples=int(ti.size),
    )


def format_report(summary: TestSummary) -> str:
    """Aligned two-column text report."""
    s = summary
    rows = [
        ("duration", f"{s.duration:.3f} h"),
        ("average power", f"{s.avg_power:.3f} W"),
        ("energy", f"{s.energy:.3f} Wh"),
        ("fuel burned", f"{s.fuel_burned * 1000:.1f} g"),
        ("burn rate", f"{s.burn_rate * 1000:.2f} g/h"),
        ("chemical energy", f"{s.chemical_energy:.1f} Wh"),
        ("burner thermal power", f"{s.thermal_power:.1f} W"),
        ("delivered to module", f"{s.delivered_power:.1f} W"),
        ("lost to exhaust", f"{s.exhaust_loss:.1f} W"),
        ("system efficiency", f"{s.system_efficiency * 100:.3f} %"),
        ("device efficiency", f"{s.device_efficiency * 100:.3f} %"),
        ("full-canister energy", f"{s.extrapolated_energy:.2f} Wh"),
        ("system mass", f"{s.system_mass * 1000:.1f} g"),
        ("specific energy", f"{s.specific_energy:.2f} Wh/kg"),
        ("specific power", f"{s.specific_power:.2f} W/kg"),
        ("mean ΔT", "n/a" if s.delta_t_mean is None else f"{s.delta_t_mean:.1f} °C"),
        (
            "cold-side resistance",
            "n/a" if s.cold_side_resistance is None else f"{s.cold_side_resistance:.4f} °C/W",
        ),
        ("power std (smoothed)", f"{s.power_std:.3f} W"),
        ("first / last power", f"{s.first_power:.3f} / {s.last_power:.3f} W"),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
