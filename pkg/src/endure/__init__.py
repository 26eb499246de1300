"""Endurance trade studies for small uncrewed vehicles with combustion-driven thermoelectric generators."""

__version__ = "0.1.0"

from .endurance import (
    ConstraintSet,
    EnduranceResult,
    HybridConfig,
    MassBreakdown,
    MaxFuel,
    SweepGrid,
    evaluate,
    mass_breakdown,
    max_fuel_volume,
    sweep,
)
from .errors import (
    BracketError,
    ConfigError,
    EndureError,
    InfeasibleError,
    LogFormatError,
    ModelError,
    SizingError,
    TelemetryError,
)
from .parity import ParityFailure, ParityResult, parity_table, required_efficiency
from .platform import PlatformSpec, get_platform, load_platforms, mass_closure
from .powerplant import (
    FuelSpec,
    GeneratorBuild,
    GeneratorDesign,
    TEModuleSpec,
    build_generator,
    butane,
    load_defaults,
    min_fuel_mass_fraction,
    parity_specific_efficiency,
    scale_with_delta_t,
    system_specific_energy,
)
from .telemetry import parse_power_log, parse_temperature_log, reduce_test

__all__ = [name for name in dir() if not name.startswith("_")]
