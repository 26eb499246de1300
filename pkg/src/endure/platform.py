"""Unmanned platforms and mass closure from stated endurance."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError, InfeasibleError
from .quantities import positive

PLATFORM_CLASSES = ("ground", "multicopter", "fixed_wing", "fixed_wing_vtol")
REGISTRY_ENV = "ENDURE_PLATFORMS"


@dataclass(frozen=True)
class PlatformSpec:
    """A vehicle described by its stock battery and average power demand.

    ``specific_power_req`` is average electrical power per kg of total
    vehicle mass (airframe plus battery). ``empty_mass`` may be omitted, in
    which case :func:`mass_closure` derives it so the stock battery gives
    exactly ``stated_endurance``.
    """

    name: str
    platform_class: str
    specific_power_req: float  # W/kg
    battery_energy: float  # Wh
    battery_mass: float  # kg
    battery_volume: float  # L
    stated_endurance: float  # h
    empty_mass: float | None = None  # kg
    provenance: str = ""

    def __post_init__(self):
        if self.platform_class not in PLATFORM_CLASSES:
            raise ConfigError(
                f"{self.name}: class must be one of {', '.join(PLATFORM_CLASSES)}, "
                f"got {self.platform_class!r}"
            )
        positive(f"{self.name}.specific_power_req", self.specific_power_req)
        positive(f"{self.name}.battery_energy", self.battery_energy)
        positive(f"{self.name}.battery_mass", self.battery_mass)
        positive(f"{self.name}.battery_volume", self.battery_volume)
        positive(f"{self.name}.stated_endurance", self.stated_endurance)
        if self.empty_mass is not None:
            positive(f"{self.name}.empty_mass", self.empty_mass)

    @property
    def battery_specific_energy(self) -> float:
        """The stock pack's own Wh/kg; off-stock packs scale at this rate."""
        return self.battery_energy / self.battery_mass

    def battery_mass_for(self, energy: float) -> float:
        return self.battery_mass * (energy / self.battery_energy)

    @property
    def airframe_mass(self) -> float:
        return mass_closure(self)

    @classmethod
    def from_dict(cls, record: dict) -> PlatformSpec:
        record = dict(record)
        if "class" in record:
            record["platform_class"] = record.pop("class")
        known = {f.name for f in fields(cls)}
        unknown = set(record) - known
        if unknown:
            raise ConfigError(f"unknown platform field(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**record)
        except TypeError as exc:
            raise ConfigError(f"bad platform record {record.get('name', '?')!r}: {exc}") from None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "class": self.platform_class,
            "specific_power_req": self.specific_power_req,
            "battery_energy": self.battery_energy,
            "battery_mass": self.battery_mass,
            "battery_volume": self.battery_volume,
            "stated_endurance": self.stated_endurance,
        }
        if self.empty_mass is not None:
            out["empty_mass"] = self.empty_mass
        if self.provenance:
            out["provenance"] = self.provenance
        return out


def closed_total_mass(spec: PlatformSpec) -> float:
    """Total stock mass implied by E / (t · p)."""
    return spec.battery_energy / (spec.stated_endurance * spec.specific_power_req)


def mass_closure(spec: PlatformSpec) -> float:
    """Airframe (empty) mass in kg.

    Returns ``spec.empty_mass`` when given; otherwise the mass that makes the
    stock battery last exactly ``stated_endurance`` at the required specific
    power. Use :func:`closure_residual` to see how far a given empty mass is
    from that value.
    """
    if spec.empty_mass is not None:
        return spec.empty_mass
    empty = closed_total_mass(spec) - spec.battery_mass
    if empty <= 0:
        raise InfeasibleError(
            f"{spec.name}: inconsistent spec, battery_energy={spec.battery_energy} Wh, "
            f"stated_endurance={spec.stated_endurance} h and "
            f"specific_power_req={spec.specific_power_req} W/kg imply a total mass "
            f"{closed_total_mass(spec):.4g} kg that does not exceed the "
            f"{spec.battery_mass} kg battery"
        )
    return empty


def closure_residual(spec: PlatformSpec) -> float:
    """Given empty mass minus the closed value (kg); 0 when derived."""
    if spec.empty_mass is None:
        return 0.0
    return spec.empty_mass - (closed_total_mass(spec) - spec.battery_mass)


def stock_power(spec: PlatformSpec) -> float:
    """Average power draw (W) in the stock battery configuration."""
    return spec.specific_power_req * (mass_closure(spec) + spec.battery_mass)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _registry_text(path: str | os.PathLike | None) -> str:
    if path is None:
        path = os.environ.get(REGISTRY_ENV) or None
    if path is None:
        return resources.files("endure.data").joinpath("platforms.json").read_text("utf-8")
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read platform registry {path}: {exc}") from None


def parse_registry(text: str) -> list[PlatformSpec]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"platform registry is not valid JSON: {exc}") from None
    records = raw["platforms"] if isinstance(raw, dict) else raw
    if not isinstance(records, list):
        raise ConfigError("platform registry must be a list of platform records")
    return [PlatformSpec.from_dict(r) for r in records]


def load_platforms(path: str | os.PathLike | None = None) -> list[PlatformSpec]:
    """Load a registry file; defaults to $ENDURE_PLATFORMS, then the bundled file."""
    return parse_registry(_registry_text(path))


def _key(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


def get_platform(name: str, platforms: list[PlatformSpec] | None = None) -> PlatformSpec:
    """Look a platform up by name, ignoring case, spaces and punctuation."""
    if platforms is None:
        platforms = load_platforms()
    wanted = _key(name)
    for p in platforms:
        if _key(p.name) == wanted:
            return p
    names = ", ".join(p.name for p in platforms)
    raise ConfigError(f"unknown platform {name!r}; known: {names}")


def with_empty_mass(spec: PlatformSpec, empty_mass: float | None) -> PlatformSpec:
    return replace(spec, empty_mass=empty_mass)
