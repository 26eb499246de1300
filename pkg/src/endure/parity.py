"""Device efficiency needed to match (or multiply) a platform's battery endurance."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Literal

from .endurance import ConstraintSet, HybridConfig, evaluate, max_fuel_volume, sweep
from .errors import BracketError, ConfigError, EndureError
from .platform import PlatformSpec
from .powerplant import GeneratorDesign

Objective = Literal["pure_fuel", "hybrid_grid"]

ETA_BRACKET = (0.001, 0.95)
MAX_ITERATIONS = 200
RTOL = 1e-6
# fuel volume resolution (L) used inside the solver; fine enough that the
# volume quantisation never shows up at RTOL
SOLVER_RESOLUTION = 1e-10
HYBRID_GRID_STEPS = 11


@dataclass(frozen=True)
class ParityResult:
    platform_name: str
    multiple: float
    target_endurance: float  # h
    required_efficiency: float
    achieved_endurance: float  # h
    fuel_volume_at_solution: float  # L
    max_fuel_volume: float  # L, at the solution efficiency
    fuel_mass_fraction: float
    volume_fraction: float  # (fuel + chamber) / stock battery volume
    generator_mass: float  # kg
    te_array_side: float  # cm
    iterations: int
    on_step: bool = False  # target falls inside a jump of the objective

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ParityFailure:
    platform_name: str
    multiple: float
    error: str


def best_fuel_endurance(
    platform: PlatformSpec,
    design: GeneratorDesign,
    constraints: ConstraintSet | None = None,
    *,
    resolution: float = 1e-3,
) -> tuple[float, float]:
    """(endurance h, fuel volume L) of the battery-free configuration at maximum fuel."""
    maxfuel = max_fuel_volume(platform, design, constraints, resolution=resolution)
    if not maxfuel.feasible or maxfuel.volume == 0:
        return 0.0, 0.0
    r = evaluate(platform, design, HybridConfig(0.0, maxfuel.volume), constraints)
    return r.endurance, maxfuel.volume


def best_hybrid_endurance(
    platform: PlatformSpec,
    design: GeneratorDesign,
    constraints: ConstraintSet | None = None,
    *,
    steps: int = HYBRID_GRID_STEPS,
) -> tuple[float, float]:
    """Best endurance over a battery × fuel grid; (endurance h, fuel volume L)."""
    grid = sweep(platform, design, steps, steps, constraints)
    best = max(grid, key=lambda c: c.result.endurance)
    return best.result.endurance, best.result.fuel_volume


def _objective(platform, design_template, constraints, objective, eta):
    design = design_template.with_efficiency(eta)
    if objective == "pure_fuel":
        return best_fuel_endurance(platform, design, constraints, resolution=SOLVER_RESOLUTION)
    return best_hybrid_endurance(platform, design, constraints)


def _fuel_for_target(platform, design, constraints, target, v_max):
    """Smallest pure-fuel volume reaching ``target`` hours at a fixed efficiency."""
    lo, hi = 0.0, v_max
    for _ in range(MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= 0:
            break
        t = evaluate(platform, design, HybridConfig(0.0, mid), constraints).endurance
        if abs(t - target) <= RTOL * target * 1e-2:
            return mid
        if t < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    return hi


def required_efficiency(
    platform: PlatformSpec,
    design_template: GeneratorDesign,
    multiple: float = 1.0,
    constraints: ConstraintSet | None = None,
    *,
    objective: Objective = "pure_fuel",
    bracket: tuple[float, float] = ETA_BRACKET,
) -> ParityResult:
    """Bisect device efficiency until endurance reaches ``multiple`` × stated endurance.

    The objective is pure-fuel endurance at maximum fuel, re-solving the
    fuel cap at every probe. It is non-decreasing in efficiency but may
    jump (a discrete TE array drops a module); if the target lies inside
    such a jump the solver returns the jump efficiency and trims the fuel
    load to hit the target exactly, flagging ``on_step``.
    """
    if multiple < 0.5:
        raise ConfigError(f"multiple must be >= 0.5, got {multiple}")
    if constraints is None:
        constraints = ConstraintSet.for_platform(platform)
    target = multiple * platform.stated_endurance
    f = partial(_objective, platform, design_template, constraints, objective)

    lo, hi = bracket
    t_lo, _ = f(lo)
    t_hi, v_hi = f(hi)
    if not t_lo < target <= t_hi:
        raise BracketError(
            f"{platform.name}: target {target:.4g} h not bracketed; endurance is "
            f"{t_lo:.4g} h at η={lo} and {t_hi:.4g} h at η={hi}",
            t_lo,
            t_hi,
        )

    iterations = 0
    eta, t_eta, v_eta = hi, t_hi, v_hi
    while iterations < MAX_ITERATIONS:
        iterations += 1
        mid = 0.5 * (lo + hi)
        t_mid, v_mid = f(mid)
        if t_mid >= target:
            hi, eta, t_eta, v_eta = mid, mid, t_mid, v_mid
        else:
            lo = mid
        if abs(t_eta - target) <= RTOL * target:
            break
        if hi - lo <= 1e-15 * hi:
            break

    design = design_template.with_efficiency(eta)
    on_step = abs(t_eta - target) > RTOL * target
    v_sol = v_eta
    if on_step and objective == "pure_fuel":
        v_sol = _fuel_for_target(platform, design, constraints, target, v_eta)
    solution = evaluate(platform, design, HybridConfig(0.0, v_sol), constraints) if v_sol > 0 else None
    if solution is None:
        achieved, fmf, vol_frac, gen_mass, side = t_eta, 0.0, 0.0, 0.0, 0.0
    else:
        g = solution.generator
        achieved = solution.endurance if objective == "pure_fuel" else t_eta
        fmf = g.fuel_mass_fraction
        vol_frac = g.volume / platform.battery_volume
        gen_mass = g.total_mass
        side = g.te_array_side
    return ParityResult(
        platform_name=platform.name,
        multiple=multiple,
        target_endurance=target,
        required_efficiency=eta,
        achieved_endurance=achieved,
        fuel_volume_at_solution=v_sol,
        max_fuel_volume=v_eta,
        fuel_mass_fraction=fmf,
        volume_fraction=vol_frac,
        generator_mass=gen_mass,
        te_array_side=side,
        iterations=iterations,
        on_step=on_step,
    )


def _row(design_template, constraints, multiples, objective, platform):
    out = []
    for m in multiples:
        c = constraints if constraints is not None else ConstraintSet.for_platform(platform)
        try:
            out.append(required_efficiency(platform, design_template, m, c, objective=objective))
        except EndureError as exc:
            out.append(ParityFailure(platform.name, m, str(exc)))
    return out


def parity_table(
    platforms: list[PlatformSpec],
    design_template: GeneratorDesign,
    constraints: ConstraintSet | None = None,
    *,
    multiples: tuple[float, ...] = (1.0, 2.0),
    objective: Objective = "pure_fuel",
    jobs: int = 1,
) -> list[list[ParityResult | ParityFailure]]:
    """One row per platform, one entry per multiple; failures are recorded, not raised.

    ``constraints`` of None means each platform's own stock caps.
    """
    if not platforms:
        raise ConfigError("parity table needs at least one platform")
    work = partial(_row, design_template, constraints, multiples, objective)
    if jobs == 1:
        return [work(p) for p in platforms]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, platforms))
