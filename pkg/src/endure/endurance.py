"""Endurance of battery / fuel hybrids with mass-dependent power.

Every configuration is evaluated at constant mass: average power is the
platform's specific power requirement times the configured total mass, and
endurance is usable energy over that power. A generator only contributes
when it can carry the whole platform load; the TE array is sized to that
load by fixed-point iteration because the load depends on generator mass.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Literal

from .errors import ConfigError, SizingError
from .platform import PlatformSpec, mass_closure
from .powerplant import (
    GeneratorBuild,
    GeneratorDesign,
    build_generator,
    electrical_energy_from_fuel,
)
from .quantities import non_negative, positive

Binding = Literal["none", "mass_cap", "volume_cap", "te_power"]

MAX_SIZING_ITERATIONS = 32


@dataclass(frozen=True)
class HybridConfig:
    battery_energy: float  # Wh
    fuel_volume: float  # L

    def __post_init__(self):
        non_negative("battery_energy", self.battery_energy)
        non_negative("fuel_volume", self.fuel_volume)
        if self.battery_energy == 0 and self.fuel_volume == 0:
            raise ConfigError("a configuration needs battery energy or fuel")


@dataclass(frozen=True)
class ConstraintSet:
    """Caps a generator must respect when it replaces (part of) a battery.

    ``cc_volume_per_watt`` (mL/W) overrides the design's chamber coefficient
    when set.
    """

    mass_cap: float  # kg
    volume_cap: float  # L
    volume_slack: float = 1.05
    cc_volume_per_watt: float | None = None

    def __post_init__(self):
        positive("mass_cap", self.mass_cap)
        positive("volume_cap", self.volume_cap)
        if not 1.0 <= self.volume_slack <= 1.25:
            raise ConfigError(f"volume_slack must lie in [1, 1.25], got {self.volume_slack!r}")
        if self.cc_volume_per_watt is not None:
            positive("cc_volume_per_watt", self.cc_volume_per_watt)

    @classmethod
    def for_platform(cls, platform: PlatformSpec, **overrides) -> ConstraintSet:
        """Caps equal to the stock battery's mass and volume."""
        return cls(mass_cap=platform.battery_mass, volume_cap=platform.battery_volume, **overrides)

    @property
    def volume_limit(self) -> float:
        return self.volume_cap * self.volume_slack

    def apply_to(self, design: GeneratorDesign) -> GeneratorDesign:
        if self.cc_volume_per_watt is None or self.cc_volume_per_watt == design.cc_volume_per_watt:
            return design
        return replace(design, cc_volume_per_watt=self.cc_volume_per_watt)


@dataclass(frozen=True)
class MassBreakdown:
    airframe: float
    battery: float
    generator_hardware: float
    tank: float
    fuel: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "total", self.airframe + self.battery + self.generator_hardware + self.tank + self.fuel
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "airframe": self.airframe,
            "battery": self.battery,
            "generator_hardware": self.generator_hardware,
            "tank": self.tank,
            "fuel": self.fuel,
            "total": self.total,
        }


@dataclass(frozen=True)
class EnduranceResult:
    battery_energy: float  # Wh
    fuel_volume: float  # L
    endurance: float  # h
    avg_power: float  # W
    total_energy: float  # Wh, battery plus fuel-derived electrical
    fuel_energy: float  # Wh, electrical energy in the fuel load
    breakdown: MassBreakdown
    feasible: bool
    binding_constraint: Binding
    fuel_usable: bool
    generator: GeneratorBuild | None = None

    @property
    def usable_energy(self) -> float:
        return self.total_energy if self.fuel_usable else self.battery_energy


@dataclass(frozen=True)
class _Sizing:
    module_count: float
    usable: bool
    feasible: bool
    binding: Binding
    limit: Literal["none", "mass", "volume"]


def _least_module_count(
    specific_power: float, base_mass: float, design: GeneratorDesign, limit: float
) -> float | None:
    """Least n with n = modules(p · (base + m_mod · n)), or None if above ``limit``.

    ``base_mass`` is everything except the per-module hardware.
    """
    pm = design.hardware_mass_per_module
    pmod = design.module_power
    denom = pmod - specific_power * pm
    if denom <= 0:
        # a module cannot carry its own weight
        return None
    if design.module_sizing == "fractional":
        n = specific_power * base_mass / denom
        return n if n <= limit else None

    n = 1
    for _ in range(MAX_SIZING_ITERATIONS):
        power = specific_power * (base_mass + pm * n)
        nxt = max(1, math.ceil(power / pmod * (1.0 - 1e-12)))
        if nxt == n:
            return float(n) if n <= limit else None
        if nxt > limit:
            return None
        n = nxt
    raise SizingError(
        f"TE array sizing did not converge within {MAX_SIZING_ITERATIONS} iterations (last n={n})"
    )


def _cap_modules(design: GeneratorDesign, constraints: ConstraintSet, room: float, volume_room: float) -> float:
    """Most modules that fit in ``room`` kg and whose chamber fits ``volume_room`` L."""
    pm = design.hardware_mass_per_module
    by_mass = math.inf if pm == 0 else max(0.0, room) / pm
    by_volume = max(0.0, volume_room) * 1000.0 / (design.cc_volume_per_watt * design.module_power)
    n = min(by_mass, by_volume)
    if design.module_sizing == "discrete":
        n = float(math.floor(n * (1.0 + 1e-12)))
    return n


def _size(
    specific_power: float,
    rest_mass: float,
    fuel_volume: float,
    design: GeneratorDesign,
    constraints: ConstraintSet,
) -> _Sizing:
    """Decide the module count for a generator carrying ``fuel_volume``.

    ``rest_mass`` is airframe plus battery. The array is sized to the whole
    platform load. When that array and the fuel do not fit the caps together,
    the fuel is dead weight and the array is held at the smaller of what the
    load needs and what the caps admit with no fuel aboard. The held array
    never shrinks as fuel is added, so extra dead fuel always costs endurance.
    """
    fuel = design.fuel
    fuel_mass = fuel_volume * fuel.liquid_density
    load = design.fixed_overhead_mass + fuel_mass * (1.0 + fuel.tank_tare_ratio)
    base = rest_mass + load
    dry_room = constraints.mass_cap - design.fixed_overhead_mass
    ceiling = _cap_modules(design, constraints, dry_room, constraints.volume_limit)
    n = _least_module_count(specific_power, base, design, ceiling)
    held = ceiling if n is None else n

    if fuel_volume >= constraints.volume_limit:
        return _Sizing(held, False, False, "volume_cap", "volume")
    room = constraints.mass_cap - load
    pm = design.hardware_mass_per_module
    if room < 0 or (design.module_sizing == "discrete" and room < pm):
        return _Sizing(held, False, False, "mass_cap", "mass")
    if n is None:
        # even the largest array the caps admit cannot carry the load
        limit = "mass" if pm * ceiling >= dry_room * (1.0 - 1e-12) else "volume"
        return _Sizing(held, False, False, "te_power", limit)

    if pm * n > room * (1.0 + 1e-12):
        return _Sizing(held, False, False, "mass_cap", "mass")
    power = specific_power * (base + pm * n)
    if fuel_volume + design.cc_volume_per_watt * power / 1000.0 > constraints.volume_limit:
        return _Sizing(held, False, False, "volume_cap", "volume")
    return _Sizing(n, True, True, "none", "none")


def _battery_only(platform, battery_energy, airframe, battery_mass) -> EnduranceResult:
    breakdown = MassBreakdown(airframe, battery_mass, 0.0, 0.0, 0.0)
    power = platform.specific_power_req * breakdown.total
    return EnduranceResult(
        battery_energy=battery_energy,
        fuel_volume=0.0,
        endurance=battery_energy / power,
        avg_power=power,
        total_energy=battery_energy,
        fuel_energy=0.0,
        breakdown=breakdown,
        feasible=True,
        binding_constraint="none",
        fuel_usable=False,
    )


def evaluate(
    platform: PlatformSpec,
    design: GeneratorDesign,
    config: HybridConfig,
    constraints: ConstraintSet | None = None,
) -> EnduranceResult:
    """Endurance of one (battery energy, fuel volume) configuration.

    ``constraints`` default to the platform's stock battery mass and volume.
    When the generator that carries the whole platform load does not fit the
    caps together with its fuel, the fuel is carried as dead weight:
    ``fuel_usable`` and ``feasible`` are False and ``binding_constraint``
    names the cap that broke, or ``te_power`` when no array within the caps
    could carry the load at all.
    """
    if constraints is None:
        constraints = ConstraintSet.for_platform(platform)
    design = constraints.apply_to(design)
    airframe = mass_closure(platform)
    battery_mass = platform.battery_mass_for(config.battery_energy)
    if config.fuel_volume == 0:
        return _battery_only(platform, config.battery_energy, airframe, battery_mass)

    p = platform.specific_power_req
    sizing = _size(p, airframe + battery_mass, config.fuel_volume, design, constraints)
    pm = design.hardware_mass_per_module
    fuel = design.fuel
    fuel_mass = config.fuel_volume * fuel.liquid_density
    base = airframe + battery_mass + design.fixed_overhead_mass + fuel_mass * (1.0 + fuel.tank_tare_ratio)
    power = p * (base + pm * sizing.module_count)
    gen = build_generator(power, config.fuel_volume, design, module_count=sizing.module_count)
    breakdown = MassBreakdown(airframe, battery_mass, gen.dry_hardware_mass, gen.tank_mass, gen.fuel_mass)
    power = p * breakdown.total
    fuel_energy = gen.electrical_energy
    total_energy = config.battery_energy + fuel_energy
    usable = sizing.usable
    return EnduranceResult(
        battery_energy=config.battery_energy,
        fuel_volume=config.fuel_volume,
        endurance=(total_energy if usable else config.battery_energy) / power,
        avg_power=power,
        total_energy=total_energy,
        fuel_energy=fuel_energy,
        breakdown=breakdown,
        feasible=sizing.feasible,
        binding_constraint=sizing.binding,
        fuel_usable=usable,
        generator=gen,
    )


def mass_breakdown(
    platform: PlatformSpec,
    design: GeneratorDesign,
    config: HybridConfig,
    constraints: ConstraintSet | None = None,
) -> MassBreakdown:
    return evaluate(platform, design, config, constraints).breakdown


# ---------------------------------------------------------------------------
# maximum fuel load
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaxFuel:
    volume: float  # L
    binding_constraint: Binding
    feasible: bool  # False when not even a token fuel load fits
    generator: GeneratorBuild | None = None

    @property
    def volume_ml(self) -> float:
        return self.volume * 1000.0


def _pure_fuel_sizing(platform, design, constraints, volume) -> _Sizing:
    return _size(platform.specific_power_req, mass_closure(platform), volume, design, constraints)


def max_fuel_volume(
    platform: PlatformSpec,
    design: GeneratorDesign,
    constraints: ConstraintSet | None = None,
    *,
    resolution: float = 1e-3,
) -> MaxFuel:
    """Largest fuel load a battery-free generator can carry within the caps.

    Bisection on volume to ``resolution`` litres. The returned volume is
    always on the feasible side. The generator is sized to the pure-fuel
    load at each probe, so the answer moves with device efficiency.
    """
    if constraints is None:
        constraints = ConstraintSet.for_platform(platform)
    design = constraints.apply_to(design)
    positive("resolution", resolution)

    def reason(s: _Sizing) -> Binding:
        return "mass_cap" if s.limit == "mass" else "volume_cap"

    lo = min(resolution, constraints.volume_limit / 2)
    first = _pure_fuel_sizing(platform, design, constraints, lo)
    if not first.usable:
        return MaxFuel(0.0, reason(first), False)
    hi = constraints.volume_limit
    hi_sizing = _pure_fuel_sizing(platform, design, constraints, hi)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        s = _pure_fuel_sizing(platform, design, constraints, mid)
        if s.usable:
            lo = mid
        else:
            hi, hi_sizing = mid, s
    result = evaluate(platform, design, HybridConfig(0.0, lo), constraints)
    return MaxFuel(lo, reason(hi_sizing), True, result.generator)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    i: int  # battery index
    j: int  # fuel index
    result: EnduranceResult


@dataclass(frozen=True)
class SweepGrid:
    platform: PlatformSpec
    design: GeneratorDesign
    constraints: ConstraintSet
    battery_axis: tuple[float, ...]  # Wh
    fuel_axis: tuple[float, ...]  # L
    max_fuel: MaxFuel
    cells: tuple[tuple[SweepCell, ...], ...]  # [battery][fuel]

    def cell(self, i: int, j: int) -> EnduranceResult:
        return self.cells[i][j].result

    def __iter__(self):
        for row in self.cells:
            yield from row

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.battery_axis), len(self.fuel_axis)


def _axis(top: float, steps: int) -> tuple[float, ...]:
    return tuple(top * (k / (steps - 1)) for k in range(steps))


def _origin(platform: PlatformSpec) -> EnduranceResult:
    airframe = mass_closure(platform)
    breakdown = MassBreakdown(airframe, 0.0, 0.0, 0.0, 0.0)
    return EnduranceResult(
        battery_energy=0.0,
        fuel_volume=0.0,
        endurance=0.0,
        avg_power=platform.specific_power_req * breakdown.total,
        total_energy=0.0,
        fuel_energy=0.0,
        breakdown=breakdown,
        feasible=False,
        binding_constraint="none",
        fuel_usable=False,
    )


def evaluate_cell(platform, design, constraints, battery_energy, fuel_volume) -> EnduranceResult:
    if battery_energy == 0 and fuel_volume == 0:
        return _origin(platform)
    return evaluate(platform, design, HybridConfig(battery_energy, fuel_volume), constraints)


def _row(platform, design, constraints, fuel_axis, battery_energy) -> list[EnduranceResult]:
    return [evaluate_cell(platform, design, constraints, battery_energy, v) for v in fuel_axis]


def sweep(
    platform: PlatformSpec,
    design: GeneratorDesign,
    battery_steps: int,
    fuel_steps: int,
    constraints: ConstraintSet | None = None,
    *,
    jobs: int = 1,
    order: list[tuple[int, int]] | None = None,
) -> SweepGrid:
    """Evaluate a rectangular grid of battery energy × fuel volume.

    Battery runs over [0, stock energy], fuel over [0, max_fuel_volume].
    Cells are independent; ``jobs`` > 1 evaluates battery rows in worker
    processes and ``order`` evaluates cells in a caller-given sequence.
    Neither changes any result.
    """
    if battery_steps < 2 or fuel_steps < 2:
        raise ConfigError("sweep needs at least 2 steps on each axis")
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    if constraints is None:
        constraints = ConstraintSet.for_platform(platform)
    maxfuel = max_fuel_volume(platform, design, constraints)
    b_axis = _axis(platform.battery_energy, battery_steps)
    f_axis = _axis(maxfuel.volume, fuel_steps)

    if order is not None:
        results: dict[tuple[int, int], EnduranceResult] = {}
        for i, j in order:
            results[i, j] = evaluate_cell(platform, design, constraints, b_axis[i], f_axis[j])
        rows = [[results[i, j] for j in range(fuel_steps)] for i in range(battery_steps)]
    elif jobs == 1:
        rows = [_row(platform, design, constraints, f_axis, b) for b in b_axis]
    else:
        work = partial(_row, platform, design, constraints, f_axis)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(work, b_axis))

    cells = tuple(
        tuple(SweepCell(i, j, r) for j, r in enumerate(row)) for i, row in enumerate(rows)
    )
    return SweepGrid(platform, design, constraints, b_axis, f_axis, maxfuel, cells)
