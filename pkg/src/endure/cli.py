"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 model error.
Settings resolve as built-in defaults < ``--config`` JSON file < flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .endurance import ConstraintSet, max_fuel_volume, sweep
from .errors import ConfigError, EndureError, InfeasibleError
from .export import csv_text, atomic_write, write_json, write_sweep
from .parity import ParityFailure, parity_table
from .platform import get_platform, load_platforms, mass_closure
from .powerplant import GeneratorDesign, load_defaults, scale_with_delta_t
from .telemetry import (
    POWER_COLUMNS,
    TEMPERATURE_COLUMNS,
    format_report,
    parse_power_log,
    parse_temperature_log,
    reduce_test,
    sliding_mean,
)

DEFAULTS = {
    "registry": None,
    "eta_dev": 0.12,
    "eta_exh": None,
    "te_module": "monTEG",
    "fuel": "butane",
    "fuel_density": None,
    "tank_tare": None,
    "fixed_overhead_kg": None,
    "per_module_kg": None,
    "cc_ml_per_w": None,
    "module_sizing": None,
    "volume_slack": 1.05,
    "mass_cap_kg": None,
    "volume_cap_l": None,
    "steps": 50,
    "battery_steps": None,
    "fuel_steps": None,
    "out": ".",
    "jobs": 1,
    "seed": 0,
    "reserve_wh": None,
    "multiple": None,
    "objective": "pure_fuel",
    "window": 100,
    "eta_exh_reduce": 0.4,
    "delimiter": ",",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _design_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("generator design")
    g.add_argument("--eta-dev", type=float, help="TE device efficiency (0-1)")
    g.add_argument("--eta-exh", type=float, help="exhaust-loss efficiency (0-1)")
    g.add_argument("--te-module", help="bundled TE module name")
    g.add_argument("--fuel", help="bundled fuel name")
    g.add_argument("--fuel-density", type=float, help="liquid fuel density, kg/L")
    g.add_argument("--tank-tare", type=float, help="tank kg per fuel kg")
    g.add_argument("--fixed-overhead-kg", type=float)
    g.add_argument("--per-module-kg", type=float)
    g.add_argument("--cc-ml-per-w", type=float, help="combustion chamber mL per W")
    g.add_argument("--module-sizing", choices=["fractional", "discrete"])
    c = p.add_argument_group("constraints")
    c.add_argument("--volume-slack", type=float)
    c.add_argument("--mass-cap-kg", type=float, help="default: stock battery mass")
    c.add_argument("--volume-cap-l", type=float, help="default: stock battery volume")


def _platform_args(p: argparse.ArgumentParser, *, many: bool = False) -> None:
    if many:
        p.add_argument("--platform", action="append", help="platform name (repeatable)")
        p.add_argument("--all", action="store_true", help="every platform in the registry")
    else:
        p.add_argument("--platform", help="platform name")
    p.add_argument("--registry", help="platform registry JSON (overrides $ENDURE_PLATFORMS)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="endure", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of settings (flag names with underscores)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("sweep", help="battery × fuel endurance grid")
    _platform_args(p)
    _design_args(p)
    p.add_argument("--steps", type=int, help="grid steps on both axes")
    p.add_argument("--battery-steps", type=int)
    p.add_argument("--fuel-steps", type=int)
    p.add_argument("--reserve-wh", type=float, help="flag cells with less battery than this")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("parity", help="device efficiency for lithium parity and multiples")
    _platform_args(p, many=True)
    _design_args(p)
    p.add_argument("--multiple", type=float, action="append", help="endurance multiple (repeatable)")
    p.add_argument("--objective", choices=["pure_fuel", "hybrid_grid"])
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_parity)

    p = sub.add_parser("maxfuel", help="maximum fuel volume under the mass and volume caps")
    _platform_args(p, many=True)
    _design_args(p)
    p.set_defaults(func=cmd_maxfuel)

    p = sub.add_parser("reduce", help="reduce burner-test logs")
    p.add_argument("--temps", required=True, help="temperature log CSV")
    p.add_argument("--power", required=True, help="power log CSV")
    p.add_argument("--fuel-burned-g", type=float, required=True)
    p.add_argument("--dry-mass-g", type=float, required=True, help="device mass without canister")
    p.add_argument("--canister-g", type=float, required=True, help="fuel capacity of a full canister")
    p.add_argument("--eta-exh", dest="eta_exh_reduce", type=float)
    p.add_argument("--fuel", help="bundled fuel name")
    p.add_argument("--window", type=int, help="sliding-mean window in samples")
    p.add_argument("--temp-columns", help="key=column,... for t,T_hot,T_cold,T_ambient")
    p.add_argument("--power-columns", help="key=column,... for t,voltage,current[,power]")
    p.add_argument("--delimiter")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("scale-dt", help="rescale TE power and efficiency with ΔT")
    p.add_argument("--power", type=float, required=True, help="W at the reference ΔT")
    p.add_argument("--efficiency", type=float, required=True)
    p.add_argument("--dt-ref", type=float, required=True)
    p.add_argument("--dt-max", type=float, required=True)
    p.add_argument("--dt-min", type=float, help="default: --dt-ref")
    p.add_argument("--points", type=int, default=None, help="rows in the table (default 7)")
    p.set_defaults(func=cmd_scale_dt)

    p = sub.add_parser("platforms", help="platform registry")
    psub = p.add_subparsers(dest="action", parser_class=_Parser, required=True)
    pl = psub.add_parser("list", help="list registry platforms")
    pl.add_argument("--registry")
    pl.set_defaults(func=cmd_platforms_list)
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS) - {"platform", "all"}
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        settings.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key not in ("func", "config", "command", "action"):
            settings[key] = value
    return settings


def design_from(s: dict) -> GeneratorDesign:
    d = load_defaults()
    try:
        module = d.te_modules[s["te_module"]]
    except KeyError:
        raise ConfigError(f"te_module: unknown module {s['te_module']!r}") from None
    try:
        fuel = d.fuels[s["fuel"]]
    except KeyError:
        raise ConfigError(f"fuel: unknown fuel {s['fuel']!r}") from None
    if s["fuel_density"] is not None:
        fuel = type(fuel)(fuel.name, fuel.specific_energy, s["fuel_density"], fuel.tank_tare_ratio)
    if s["tank_tare"] is not None:
        fuel = fuel.with_tare(s["tank_tare"])
    overrides = {"te_module": module, "fuel": fuel}
    if s["eta_exh"] is not None:
        overrides["exhaust_efficiency"] = s["eta_exh"]
    for key, field_name in (
        ("fixed_overhead_kg", "fixed_overhead_mass"),
        ("per_module_kg", "hardware_mass_per_module"),
        ("cc_ml_per_w", "cc_volume_per_watt"),
        ("module_sizing", "module_sizing"),
    ):
        if s[key] is not None:
            overrides[field_name] = s[key]
    return GeneratorDesign.default(s["eta_dev"], **overrides)


def constraints_from(s: dict, platform) -> ConstraintSet:
    return ConstraintSet(
        mass_cap=s["mass_cap_kg"] if s["mass_cap_kg"] is not None else platform.battery_mass,
        volume_cap=s["volume_cap_l"] if s["volume_cap_l"] is not None else platform.battery_volume,
        volume_slack=s["volume_slack"],
    )


def _platforms(s: dict, *, many: bool):
    registry = load_platforms(s["registry"])
    names = s.get("platform")
    if many:
        if s.get("all"):
            return registry
        if not names:
            raise ConfigError("platform: give --platform NAME or --all")
        if isinstance(names, str):
            names = [names]
        return [get_platform(n, registry) for n in names]
    if not names:
        raise ConfigError("platform: --platform is required")
    if isinstance(names, list):
        names = names[0]
    return get_platform(names, registry)


def cmd_sweep(s: dict) -> int:
    platform = _platforms(s, many=False)
    design = design_from(s)
    constraints = constraints_from(s, platform)
    nb = s["battery_steps"] or s["steps"]
    nf = s["fuel_steps"] or s["steps"]
    grid = sweep(platform, design, nb, nf, constraints, jobs=s["jobs"])
    extra = {"seed": s["seed"]}
    if s["reserve_wh"] is not None:
        low = [[c.i, c.j] for c in grid if c.result.battery_energy < s["reserve_wh"]]
        extra["reserve_Wh"] = s["reserve_wh"]
        extra["below_reserve"] = low
    csv_path, meta_path = write_sweep(grid, s["out"], extra)
    corners = [(0, nf - 1, "fuel only"), (nb - 1, 0, "battery only"), (nb - 1, nf - 1, "both max")]
    print(f"{platform.name}: η_dev={design.device_efficiency:g}, max fuel "
          f"{grid.max_fuel.volume_ml:.0f} mL ({grid.max_fuel.binding_constraint})")
    for i, j, label in corners:
        r = grid.cell(i, j)
        print(f"  {label:<13} battery {r.battery_energy:8.1f} Wh  fuel {r.fuel_volume * 1000:7.0f} mL"
              f"  endurance {r.endurance:7.3f} h  {r.binding_constraint}")
    if s["reserve_wh"] is not None:
        print(f"  {len(extra['below_reserve'])} cells below the {s['reserve_wh']:g} Wh reserve")
    print(f"wrote {csv_path} and {meta_path}")
    return 0


PARITY_FIELDS = (
    ("eta", "required_efficiency"),
    ("max_fuel_mL", "max_fuel_volume"),
    ("fuel_mass_fraction", "fuel_mass_fraction"),
    ("volume_fraction", "volume_fraction"),
    ("te_side_cm", "te_array_side"),
    ("achieved_h", "achieved_endurance"),
)


def _mlabel(m: float) -> str:
    return f"x{m:g}"


def cmd_parity(s: dict) -> int:
    platforms = _platforms(s, many=True)
    design = design_from(s)
    multiples = tuple(s["multiple"] or (1.0, 2.0))
    overrides = any(s[k] is not None for k in ("mass_cap_kg", "volume_cap_l")) or s["volume_slack"] != 1.05
    rows = []
    for p in platforms:
        c = constraints_from(s, p) if overrides else ConstraintSet.for_platform(p, volume_slack=s["volume_slack"])
        rows.extend(parity_table([p], design, c, multiples=multiples, objective=s["objective"], jobs=1))
    header = ["platform", "specific_power_W_per_kg"]
    for m in multiples:
        header += [f"{name}_{_mlabel(m)}" for name, _ in PARITY_FIELDS]
    header.append("errors")
    table = []
    ok = 0
    for p, row in zip(platforms, rows):
        line = [p.name, p.specific_power_req]
        errors = []
        for r in row:
            if isinstance(r, ParityFailure):
                line += [""] * len(PARITY_FIELDS)
                errors.append(f"{_mlabel(r.multiple)}: {r.error}")
                continue
            ok += 1
            for name, attr in PARITY_FIELDS:
                v = getattr(r, attr)
                line.append(v * 1000.0 if name == "max_fuel_mL" else v)
        line.append("; ".join(errors))
        table.append(line)

    out = Path(s["out"])
    atomic_write(out / "parity.csv", csv_text(header, table))
    write_json(out / "parity.json", {
        "design": {"eta_exh": design.exhaust_efficiency, "module_sizing": design.module_sizing},
        "multiples": list(multiples),
        "rows": [
            [r.as_dict() if not isinstance(r, ParityFailure) else r.__dict__ for r in row]
            for row in rows
        ],
    })
    _print_parity(platforms, rows, multiples)
    return 0 if ok else 3


def _print_parity(platforms, rows, multiples) -> None:
    head = f"{'platform':<12} {'W/kg':>5}"
    for m in multiples:
        head += f" {'η ' + _mlabel(m):>8} {'fuel mL':>8} {'fmf':>6} {'vol':>5} {'side cm':>7}"
    print(head)
    for p, row in zip(platforms, rows):
        line = f"{p.name:<12} {p.specific_power_req:>5g}"
        notes = []
        for r in row:
            if isinstance(r, ParityFailure):
                line += f" {'-':>8} {'':>8} {'':>6} {'':>5} {'':>7}"
                notes.append(r.error)
            else:
                line += (f" {r.required_efficiency * 100:7.2f}% {r.max_fuel_volume * 1000:8.0f}"
                         f" {r.fuel_mass_fraction * 100:5.1f}% {r.volume_fraction * 100:4.0f}%"
                         f" {r.te_array_side:7.1f}")
        print(line)
        for n in notes:
            print(f"  ! {n}")


def cmd_maxfuel(s: dict) -> int:
    platforms = _platforms(s, many=True)
    design = design_from(s)
    print(f"{'platform':<12} {'max fuel mL':>11} {'binding':>11} {'gen kg':>7} {'fmf':>6}")
    for p in platforms:
        mf = max_fuel_volume(p, design, constraints_from(s, p))
        g = mf.generator
        gen = f"{g.total_mass:7.3f} {g.fuel_mass_fraction * 100:5.1f}%" if g else f"{'-':>7} {'-':>6}"
        print(f"{p.name:<12} {mf.volume_ml:11.0f} {mf.binding_constraint:>11} {gen}")
    return 0


def _column_map(text: str | None, defaults: dict) -> dict:
    if not text:
        return dict(defaults)
    cmap = dict(defaults)
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"column map entry {part!r} must look like key=column")
        key, col = (x.strip() for x in part.split("=", 1))
        if key not in defaults and key != "power":
            raise ConfigError(f"unknown column key {key!r}")
        cmap[key] = col
    return cmap


def _read(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def cmd_reduce(s: dict) -> int:
    fuel = load_defaults().fuels.get(s["fuel"])
    if fuel is None:
        raise ConfigError(f"fuel: unknown fuel {s['fuel']!r}")
    temps = parse_temperature_log(
        _read(s["temps"]), _column_map(s.get("temp_columns"), TEMPERATURE_COLUMNS), delimiter=s["delimiter"]
    )
    powers = parse_power_log(
        _read(s["power"]), _column_map(s.get("power_columns"), POWER_COLUMNS), delimiter=s["delimiter"]
    )
    summary = reduce_test(
        temps,
        powers,
        fuel_burned=s["fuel_burned_g"] / 1000.0,
        device_dry_mass=s["dry_mass_g"] / 1000.0,
        canister_fuel_capacity=s["canister_g"] / 1000.0,
        fuel=fuel,
        exhaust_efficiency=s["eta_exh_reduce"],
        window=s["window"],
    )
    out = Path(s["out"])
    payload = summary.as_dict()
    payload["parse"] = {
        "temperature": {"samples": len(temps), "skipped": temps.skipped, "clamped": temps.clamped},
        "power": {"samples": len(powers), "skipped": powers.skipped, "clamped": powers.clamped,
                  "power_mismatch_warnings": powers.warnings},
    }
    write_json(out / "summary.json", payload)
    p = powers.column("power")
    smooth = sliding_mean(p, s["window"])
    atomic_write(out / "power_smoothed.csv",
                 csv_text(("t_s", "power_W", "power_smoothed_W"), zip(powers.times, p, smooth)))
    print(format_report(summary))
    return 0


def cmd_scale_dt(s: dict) -> int:
    dt_min = s["dt_min"] if s.get("dt_min") is not None else s["dt_ref"]
    points = s.get("points") or 7
    if s["dt_max"] == dt_min:
        points = 1
    elif points < 2:
        raise ConfigError("points must be >= 2 for a range")
    rows = []
    for k in range(points):
        dt = dt_min if points == 1 else dt_min + (s["dt_max"] - dt_min) * (k / (points - 1))
        try:
            power, eff = scale_with_delta_t(s["power"], s["efficiency"], s["dt_ref"], dt)
        except InfeasibleError as exc:
            # an out-of-range request, not a model failure
            raise ConfigError(f"dt-max: {exc}") from None
        rows.append((dt, power, eff))
    print(f"{'ΔT °C':>8} {'power W':>10} {'efficiency':>10}")
    for dt, power, eff in rows:
        print(f"{dt:8.1f} {power:10.3f} {eff * 100:9.3f}%")
    return 0


def cmd_platforms_list(s: dict) -> int:
    for p in load_platforms(s["registry"]):
        print(f"{p.name:<12} {p.platform_class:<16} {p.specific_power_req:5g} W/kg  "
              f"{p.battery_energy:7g} Wh  {p.battery_mass:5g} kg  {p.battery_volume:5g} L  "
              f"{p.stated_endurance:5g} h  empty {mass_closure(p):.3f} kg")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _resolve(args)
        return args.func(settings)
    except ConfigError as exc:
        print(f"endure: error: {exc}", file=sys.stderr)
        return 2
    except EndureError as exc:
        print(f"endure: model error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
