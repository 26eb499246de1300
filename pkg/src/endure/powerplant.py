"""Fuels, batteries, thermoelectric modules and complete generator builds.

The generator model is deliberately small: chemical energy of the fuel is
discounted by the device and exhaust efficiencies, the TE array is sized
by scaling each module's rated output with the ratio of device to rated
efficiency, and dry hardware mass is a fixed overhead plus a per-module
charge.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Literal

from .errors import ConfigError, InfeasibleError
from .quantities import make_fraction, non_negative, open_fraction, positive, temperature

ModuleSizing = Literal["fractional", "discrete"]

# tolerance used when rounding module counts up, so that an exact fit
# (e.g. 20 W from one 20 W module) is not pushed to the next integer
_CEIL_RTOL = 1e-12


@dataclass(frozen=True)
class FuelSpec:
    name: str
    specific_energy: float  # Wh/kg
    liquid_density: float  # kg/L
    tank_tare_ratio: float = 0.0  # tank kg per fuel kg

    def __post_init__(self):
        positive("specific_energy", self.specific_energy)
        positive("liquid_density", self.liquid_density)
        non_negative("tank_tare_ratio", self.tank_tare_ratio)

    def with_tare(self, ratio: float) -> FuelSpec:
        return replace(self, tank_tare_ratio=ratio)


@dataclass(frozen=True)
class BatteryRef:
    chemistry: str
    specific_energy: float  # Wh/kg
    specific_power: float  # W/kg

    def __post_init__(self):
        positive("specific_energy", self.specific_energy)
        positive("specific_power", self.specific_power)


@dataclass(frozen=True)
class TEModuleSpec:
    name: str
    rated_power: float  # W per module
    rated_efficiency: float
    max_hot_temp: float  # degC
    side_length: float  # cm
    module_mass: float  # kg
    exhaust_efficiency_default: float = 0.4

    def __post_init__(self):
        positive("rated_power", self.rated_power)
        open_fraction("rated_efficiency", self.rated_efficiency)
        temperature("max_hot_temp", self.max_hot_temp)
        positive("side_length", self.side_length)
        non_negative("module_mass", self.module_mass)
        open_fraction("exhaust_efficiency_default", self.exhaust_efficiency_default, include_one=True)

    @property
    def area(self) -> float:
        """Module face area in cm²."""
        return self.side_length**2


@dataclass(frozen=True)
class GeneratorDesign:
    """Everything needed to turn a power requirement and a fuel load into hardware.

    ``module_sizing`` selects how the TE array is charged for:
    ``"discrete"`` rounds up to whole modules (a physical build);
    ``"fractional"`` charges array area and hardware in proportion to the
    power actually required, which lets very small platforms carry a
    generator smaller than one full prototype stack.
    """

    te_module: TEModuleSpec
    device_efficiency: float
    exhaust_efficiency: float
    fuel: FuelSpec
    fixed_overhead_mass: float = 0.083  # kg
    hardware_mass_per_module: float = 0.330  # kg
    cc_volume_per_watt: float = 1.4  # mL/W
    module_sizing: ModuleSizing = "fractional"

    def __post_init__(self):
        open_fraction("device_efficiency", self.device_efficiency)
        open_fraction("exhaust_efficiency", self.exhaust_efficiency, include_one=True)
        non_negative("fixed_overhead_mass", self.fixed_overhead_mass)
        non_negative("hardware_mass_per_module", self.hardware_mass_per_module)
        positive("cc_volume_per_watt", self.cc_volume_per_watt)
        if self.module_sizing not in ("fractional", "discrete"):
            raise ConfigError(
                f"module_sizing must be 'fractional' or 'discrete', got {self.module_sizing!r}"
            )

    @property
    def module_power(self) -> float:
        """Electrical output of one module at this design's device efficiency (W)."""
        m = self.te_module
        return m.rated_power * (self.device_efficiency / m.rated_efficiency)

    @property
    def electrical_energy_per_litre(self) -> float:
        """Wh of electricity delivered per litre of fuel burned."""
        f = self.fuel
        return f.liquid_density * f.specific_energy * self.device_efficiency * self.exhaust_efficiency

    @property
    def loaded_mass_per_litre(self) -> float:
        """kg of fuel plus tank per litre of fuel."""
        return self.fuel.liquid_density * (1.0 + self.fuel.tank_tare_ratio)

    def with_efficiency(self, device_efficiency: float) -> GeneratorDesign:
        return replace(self, device_efficiency=device_efficiency)

    @classmethod
    def default(cls, device_efficiency: float = 0.12, **overrides) -> GeneratorDesign:
        """monTEG-based design with the bundled mass model."""
        d = load_defaults()
        params = dict(
            te_module=d.te_modules["monTEG"],
            device_efficiency=device_efficiency,
            exhaust_efficiency=d.te_modules["monTEG"].exhaust_efficiency_default,
            fuel=d.fuels["butane"],
            **d.mass_model,
        )
        params.update(overrides)
        return cls(**params)

    @classmethod
    def prototype(cls, **overrides) -> GeneratorDesign:
        """The single-module bench prototype (1.8 % device efficiency)."""
        d = load_defaults()
        p = d.prototype
        params = dict(
            te_module=d.te_modules[p["te_module"]],
            device_efficiency=p["device_efficiency"],
            exhaust_efficiency=p["exhaust_efficiency"],
            fuel=d.fuels["butane"],
            **d.mass_model,
        )
        params["module_sizing"] = p["module_sizing"]
        params.update(overrides)
        return cls(**params)


@dataclass(frozen=True)
class TEArray:
    n_modules: int  # whole modules needed
    module_count: float  # count the array is charged for (== n_modules when discrete)
    te_array_side: float  # cm
    max_electrical_power: float  # W


@dataclass(frozen=True)
class GeneratorBuild:
    n_modules: int
    module_count: float
    dry_hardware_mass: float  # kg
    fuel_mass: float  # kg
    tank_mass: float  # kg
    fuel_volume: float  # L
    cc_volume: float  # L
    te_array_side: float  # cm
    max_electrical_power: float  # W
    electrical_energy: float  # Wh

    @property
    def total_mass(self) -> float:
        return self.dry_hardware_mass + self.tank_mass + self.fuel_mass

    @property
    def fuel_mass_fraction(self) -> float:
        total = self.total_mass
        return self.fuel_mass / total if total > 0 else 0.0

    @property
    def volume(self) -> float:
        """Fuel plus combustion chamber volume (L); the cold-side sink sits outside."""
        return self.fuel_volume + self.cc_volume


@dataclass(frozen=True)
class Defaults:
    fuels: dict[str, FuelSpec]
    batteries: dict[str, BatteryRef]
    te_modules: dict[str, TEModuleSpec]
    mass_model: dict = field(default_factory=dict)
    prototype: dict = field(default_factory=dict)


def _strip_notes(record: dict) -> dict:
    return {k: v for k, v in record.items() if k not in ("note", "provenance")}


@lru_cache(maxsize=1)
def load_defaults() -> Defaults:
    raw = json.loads(resources.files("endure.data").joinpath("defaults.json").read_text("utf-8"))
    return Defaults(
        fuels={k: FuelSpec(**_strip_notes(v)) for k, v in raw["fuels"].items()},
        batteries={k: BatteryRef(**_strip_notes(v)) for k, v in raw["batteries"].items()},
        te_modules={k: TEModuleSpec(**_strip_notes(v)) for k, v in raw["te_modules"].items()},
        mass_model=dict(raw["mass_model"]),
        prototype=dict(raw["prototype"]),
    )


def butane() -> FuelSpec:
    return load_defaults().fuels["butane"]


# ---------------------------------------------------------------------------
# specific energy relations
# ---------------------------------------------------------------------------

def parity_specific_efficiency(e_target: float, e_fuel: float) -> float:
    """Overall conversion fraction at which fuel matches a battery's specific energy.

    ``e_target / e_fuel``. Against 13,600 Wh/kg butane a 150 Wh/kg pack gives
    1.10 % and a 200 Wh/kg pack 1.47 %; the often-quoted "1.5 %" is the
    latter.
    """
    positive("e_target", e_target)
    positive("e_fuel", e_fuel)
    if e_target > e_fuel:
        raise InfeasibleError(
            f"target {e_target} Wh/kg exceeds fuel specific energy {e_fuel} Wh/kg"
        )
    return e_target / e_fuel


def system_specific_energy(
    fuel: FuelSpec, fuel_mass_fraction: float, device_efficiency: float, exhaust_efficiency: float
) -> float:
    """Generator system specific energy in Wh/kg."""
    open_fraction("fuel_mass_fraction", fuel_mass_fraction, include_one=True)
    open_fraction("device_efficiency", device_efficiency, include_one=True)
    open_fraction("exhaust_efficiency", exhaust_efficiency, include_one=True)
    return fuel.specific_energy * fuel_mass_fraction * device_efficiency * exhaust_efficiency


def min_fuel_mass_fraction(
    e_target: float, fuel: FuelSpec, device_efficiency: float, exhaust_efficiency: float
) -> float:
    """Smallest fuel mass fraction whose system specific energy reaches ``e_target``."""
    positive("e_target", e_target)
    open_fraction("device_efficiency", device_efficiency, include_one=True)
    open_fraction("exhaust_efficiency", exhaust_efficiency, include_one=True)
    ceiling = fuel.specific_energy * device_efficiency * exhaust_efficiency
    if e_target > ceiling:
        raise InfeasibleError(
            f"{e_target} Wh/kg is unreachable: the maximum at fuel mass fraction 1 "
            f"is {ceiling:.4g} Wh/kg"
        )
    return e_target / ceiling


def fuel_mass_fraction(fuel_mass: float, dry_mass: float) -> float:
    non_negative("fuel_mass", fuel_mass)
    non_negative("dry_mass", dry_mass)
    total = fuel_mass + dry_mass
    if total == 0:
        raise ConfigError("fuel mass fraction undefined for zero total mass")
    return fuel_mass / total


def chemical_energy(fuel_mass: float, fuel: FuelSpec) -> float:
    """Heat content (Wh) of ``fuel_mass`` kg of fuel."""
    return non_negative("fuel_mass", fuel_mass) * fuel.specific_energy


def electrical_energy_from_fuel(fuel_volume: float, design: GeneratorDesign) -> float:
    """Electrical energy (Wh) recoverable from ``fuel_volume`` litres."""
    return non_negative("fuel_volume", fuel_volume) * design.electrical_energy_per_litre


# ---------------------------------------------------------------------------
# burner and heat path
# ---------------------------------------------------------------------------

def burner_thermal_power(burn_rate: float, fuel: FuelSpec) -> float:
    """Thermal power (W) of a burner consuming ``burn_rate`` kg/h."""
    return non_negative("burn_rate", burn_rate) * fuel.specific_energy


def burn_rate_for_power(thermal_power: float, fuel: FuelSpec) -> float:
    """Fuel flow (kg/h) needed for ``thermal_power`` W."""
    return non_negative("thermal_power", thermal_power) / fuel.specific_energy


def canister_duration(fuel_capacity: float, burn_rate: float) -> float:
    """Hours a canister of ``fuel_capacity`` kg lasts at ``burn_rate`` kg/h."""
    non_negative("fuel_capacity", fuel_capacity)
    positive("burn_rate", burn_rate)
    return fuel_capacity / burn_rate


def exhaust_split(thermal_power: float, exhaust_efficiency: float) -> tuple[float, float]:
    """Split burner output into (delivered to the module, lost to exhaust), in W.

    The two parts always sum back to ``thermal_power`` bit-for-bit.
    """
    thermal_power = non_negative("thermal_power", thermal_power)
    exhaust_efficiency = make_fraction(exhaust_efficiency, "exhaust_efficiency")
    delivered = thermal_power * exhaust_efficiency
    lost = thermal_power - delivered
    if delivered + lost != thermal_power:
        # lost >= P/2 here, so P - lost is exact (Sterbenz) and the parts close
        delivered = thermal_power - lost
    return delivered, lost


def heat_sink_flow(duct_width: float, duct_height: float, air_velocity: float) -> float:
    """Volumetric flow (m³/min) through a duct of the given cross-section (m) at ``air_velocity`` m/s."""
    positive("duct_width", duct_width)
    positive("duct_height", duct_height)
    positive("air_velocity", air_velocity)
    return duct_width * duct_height * air_velocity * 60.0


def cold_side_resistance(t_cold: float, t_ambient: float, heat_rejected: float) -> float:
    """Cold-side thermal resistance (°C/W) from a steady temperature rise."""
    temperature("t_cold", t_cold)
    temperature("t_ambient", t_ambient)
    positive("heat_rejected", heat_rejected)
    if t_cold <= t_ambient:
        raise ConfigError(
            f"cold side ({t_cold} °C) must be warmer than ambient ({t_ambient} °C)"
        )
    return (t_cold - t_ambient) / heat_rejected


def scale_with_delta_t(
    power: float, efficiency: float, delta_t_ref: float, delta_t_new: float
) -> tuple[float, float]:
    """Rescale a TE operating point to a new hot/cold temperature difference.

    Power goes with the square of the ratio and efficiency linearly.
    """
    non_negative("power", power)
    make_fraction(efficiency, "efficiency")
    positive("delta_t_ref", delta_t_ref)
    non_negative("delta_t_new", delta_t_new)
    ratio = delta_t_new / delta_t_ref
    new_eff = efficiency * ratio
    if new_eff > 1.0:
        raise InfeasibleError(
            f"scaled efficiency {new_eff:.4g} exceeds 1 at ΔT = {delta_t_new}"
        )
    return power * ratio * ratio, new_eff


# ---------------------------------------------------------------------------
# sizing
# ---------------------------------------------------------------------------

def _ceil(x: float) -> int:
    return max(1, math.ceil(x * (1.0 - _CEIL_RTOL)))


def _array(design: GeneratorDesign, module_count: float) -> TEArray:
    n = _ceil(module_count) if module_count > 0 else 0
    return TEArray(
        n_modules=n,
        module_count=module_count,
        te_array_side=design.te_module.side_length * math.sqrt(module_count),
        max_electrical_power=module_count * design.module_power,
    )


def modules_for_power(required_power: float, design: GeneratorDesign) -> float:
    """Module count charged for ``required_power`` W under the design's sizing rule."""
    exact = required_power / design.module_power
    if design.module_sizing == "discrete":
        return float(_ceil(exact))
    return exact


def size_te_array(required_power: float, design: GeneratorDesign) -> TEArray:
    """Smallest TE array whose output covers ``required_power`` W."""
    positive("required_power", required_power)
    return _array(design, modules_for_power(required_power, design))


def hardware_mass(design: GeneratorDesign, module_count: float) -> float:
    return design.fixed_overhead_mass + module_count * design.hardware_mass_per_module


def build_generator(
    required_power: float,
    fuel_volume: float,
    design: GeneratorDesign,
    *,
    module_count: float | None = None,
) -> GeneratorBuild:
    """Assemble a generator for ``required_power`` W carrying ``fuel_volume`` L of fuel.

    ``module_count`` overrides the sizing rule; the endurance model uses it
    when mass or volume caps leave room for fewer modules than the load needs.
    The combustion chamber is charged against the electrical power the
    generator is run at, which is ``required_power`` or the array's capacity,
    whichever is lower.
    """
    positive("required_power", required_power)
    non_negative("fuel_volume", fuel_volume)
    if module_count is None:
        array = size_te_array(required_power, design)
    else:
        array = _array(design, non_negative("module_count", module_count))
    fuel_mass = fuel_volume * design.fuel.liquid_density
    run_power = min(required_power, array.max_electrical_power)
    return GeneratorBuild(
        n_modules=array.n_modules,
        module_count=array.module_count,
        dry_hardware_mass=hardware_mass(design, array.module_count),
        fuel_mass=fuel_mass,
        tank_mass=fuel_mass * design.fuel.tank_tare_ratio,
        fuel_volume=fuel_volume,
        cc_volume=design.cc_volume_per_watt * run_power / 1000.0,
        te_array_side=array.te_array_side,
        max_electrical_power=array.max_electrical_power,
        electrical_energy=electrical_energy_from_fuel(fuel_volume, design),
    )
