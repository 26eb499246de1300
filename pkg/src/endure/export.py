"""CSV/JSON artifacts. All files are written to a temp file and renamed into place."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict
from pathlib import Path

from .endurance import EnduranceResult, SweepGrid

SCHEMA_VERSION = 1

SWEEP_COLUMNS = (
    "battery_Wh",
    "fuel_mL",
    "endurance_h",
    "avg_power_W",
    "total_mass_kg",
    "m_airframe_kg",
    "m_battery_kg",
    "m_hardware_kg",
    "m_tank_kg",
    "m_fuel_kg",
    "feasible",
    "binding_constraint",
    "fuel_usable",
)


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def write_json(path: str | os.PathLike, payload: dict) -> Path:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    return atomic_write(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def sweep_row(r: EnduranceResult) -> tuple:
    b = r.breakdown
    return (
        r.battery_energy,
        r.fuel_volume * 1000.0,
        r.endurance,
        r.avg_power,
        b.total,
        b.airframe,
        b.battery,
        b.generator_hardware,
        b.tank,
        b.fuel,
        r.feasible,
        r.binding_constraint,
        r.fuel_usable,
    )


def sweep_csv(grid: SweepGrid) -> str:
    """Row-major, battery outer loop."""
    return csv_text(SWEEP_COLUMNS, (sweep_row(c.result) for c in grid))


def sweep_meta(grid: SweepGrid, extra: dict | None = None) -> dict:
    nb, nf = grid.shape
    meta = {
        "platform": grid.platform.to_dict(),
        "design": asdict(grid.design),
        "constraints": asdict(grid.constraints),
        "grid": {
            "order": "row-major, battery outer",
            "battery_Wh": {"min": grid.battery_axis[0], "max": grid.battery_axis[-1], "steps": nb},
            "fuel_mL": {"min": 0.0, "max": grid.fuel_axis[-1] * 1000.0, "steps": nf},
        },
        "max_fuel": {
            "volume_mL": grid.max_fuel.volume_ml,
            "binding_constraint": grid.max_fuel.binding_constraint,
            "feasible": grid.max_fuel.feasible,
        },
        "columns": list(SWEEP_COLUMNS),
    }
    if extra:
        meta.update(extra)
    return meta


def write_sweep(grid: SweepGrid, directory: str | os.PathLike, extra: dict | None = None) -> tuple[Path, Path]:
    directory = Path(directory)
    csv_path = atomic_write(directory / "sweep.csv", sweep_csv(grid))
    meta_path = write_json(directory / "sweep.meta.json", sweep_meta(grid, extra))
    return csv_path, meta_path
