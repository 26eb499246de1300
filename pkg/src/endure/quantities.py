"""Scalar quantities, unit tags and conversions.

Canonical units are kg, Wh, W, L, h and degC. Values travel through the
package as plain floats; units are checked only where they cross a
boundary (``convert``) and magnitudes are checked by the validators below.
"""

from __future__ import annotations

import math

from .errors import ConfigError

# unit -> (kind, factor to the canonical unit of that kind)
# factors are stored as (multiplier, divisor) so that factor-of-ten pairs
# convert with a single correctly-rounded operation
_UNITS: dict[str, tuple[str, float, float]] = {
    "kg": ("mass", 1.0, 1.0),
    "g": ("mass", 1.0, 1000.0),
    "lb": ("mass", 0.45359237, 1.0),
    "Wh": ("energy", 1.0, 1.0),
    "kWh": ("energy", 1000.0, 1.0),
    "J": ("energy", 1.0, 3600.0),
    "kJ": ("energy", 1.0, 3.6),
    "W": ("power", 1.0, 1.0),
    "kW": ("power", 1000.0, 1.0),
    "mW": ("power", 1.0, 1000.0),
    "L": ("volume", 1.0, 1.0),
    "mL": ("volume", 1.0, 1000.0),
    "m3": ("volume", 1000.0, 1.0),
    "h": ("time", 1.0, 1.0),
    "min": ("time", 1.0, 60.0),
    "s": ("time", 1.0, 3600.0),
    "Wh/kg": ("specific_energy", 1.0, 1.0),
    "W/kg": ("specific_power", 1.0, 1.0),
    "kg/L": ("density", 1.0, 1.0),
    "g/mL": ("density", 1.0, 1.0),
    "kg/m3": ("density", 1.0, 1000.0),
    "W/cm2": ("areal_power", 1.0, 1.0),
    "W/m2": ("areal_power", 1.0, 10000.0),
    "cm": ("length", 1.0, 1.0),
    "mm": ("length", 1.0, 10.0),
    "m": ("length", 100.0, 1.0),
    "1": ("fraction", 1.0, 1.0),
    "%": ("fraction", 1.0, 100.0),
}

_TEMPERATURE = {"degC", "K", "degF"}

KINDS = frozenset(kind for kind, _, _ in _UNITS.values()) | {"temperature"}


def unit_kind(unit: str) -> str:
    if unit in _TEMPERATURE:
        return "temperature"
    try:
        return _UNITS[unit][0]
    except KeyError:
        raise ConfigError(f"unknown unit {unit!r}") from None


def _to_celsius(value: float, unit: str) -> float:
    if unit == "K":
        return value - 273.15
    if unit == "degF":
        return (value - 32.0) * 5.0 / 9.0
    return value


def _from_celsius(value: float, unit: str) -> float:
    if unit == "K":
        return value + 273.15
    if unit == "degF":
        return value * 9.0 / 5.0 + 32.0
    return value


def convert(value: float, from_unit: str, to_unit: str) -> float:
    """Convert ``value`` between two units of the same kind.

    >>> convert(227, "g", "kg")
    0.227
    >>> convert(12, "Wh", "J")
    43200.0
    """
    kind_from, kind_to = unit_kind(from_unit), unit_kind(to_unit)
    if kind_from != kind_to:
        raise ConfigError(
            f"cannot convert {from_unit!r} ({kind_from}) to {to_unit!r} ({kind_to})"
        )
    value = float(value)
    if from_unit == to_unit:
        return value
    if kind_from == "temperature":
        return _from_celsius(_to_celsius(value, from_unit), to_unit)
    _, mul_a, div_a = _UNITS[from_unit]
    _, mul_b, div_b = _UNITS[to_unit]
    # combined factor = (mul_a * div_b) / (div_a * mul_b); apply as one
    # multiplication or one division whichever is an exact float
    num = mul_a * div_b
    den = div_a * mul_b
    if den == 1.0:
        return value * num
    if num == 1.0:
        return value / den
    return value * num / den


def _check_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if math.isnan(value) or math.isinf(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


def non_negative(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if value < 0:
        raise ConfigError(f"{name} must be >= 0, got {value!r}")
    return value


def positive(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if value <= 0:
        raise ConfigError(f"{name} must be > 0, got {value!r}")
    return value


def temperature(name: str, value: float) -> float:
    """Temperatures may be negative; only NaN/inf are rejected."""
    return _check_finite(name, value)


def make_fraction(x: float, name: str = "fraction") -> float:
    """Return ``x`` if it lies in [0, 1], otherwise raise ConfigError.

    The error message carries the offending value.
    """
    x = _check_finite(name, x)
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def open_fraction(name: str, x: float, *, include_one: bool = False) -> float:
    """Fraction strictly above zero (and below one unless ``include_one``)."""
    x = make_fraction(x, name)
    if x == 0.0 or (x == 1.0 and not include_one):
        upper = "1]" if include_one else "1)"
        raise ConfigError(f"{name} must lie in (0, {upper}, got {x!r}")
    return x
