from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings

from _strategies import platforms
from endure import mass_closure, BracketError, ConfigError, GeneratorDesign, ParityFailure, get_platform, parity_table, required_efficiency
from endure.parity import SOLVER_RESOLUTION, best_fuel_endurance


@pytest.fixture(scope="module")
def table(platforms):
    return parity_table(platforms, GeneratorDesign.default())


def test_best_fuel_endurance_at_parity_design(puma, parity_design):
    t, v = best_fuel_endurance(puma, parity_design)
    assert t == pytest.approx(2.0, rel=0.15)
    assert v > 0


def test_best_fuel_endurance_vanishes_at_low_efficiency(platforms):
    for p in platforms:
        assert best_fuel_endurance(p, GeneratorDesign.default(1e-4))[0] == 0.0


def test_double_endurance_efficiency_whole_modules(puma):
    t, _ = best_fuel_endurance(puma, GeneratorDesign.default(0.17, module_sizing="discrete"))
    assert t == pytest.approx(4.0, rel=0.15)


def test_puma_parity(puma):
    r = required_efficiency(puma, GeneratorDesign.default(), 1.0)
    assert r.required_efficiency == pytest.approx(0.105, abs=0.03)
    assert abs(r.achieved_endurance - 2.0) / 2.0 <= 1e-6


def test_puma_double(puma):
    r = required_efficiency(puma, GeneratorDesign.default(), 2.0)
    assert r.required_efficiency == pytest.approx(0.17, abs=0.05)


def test_round_trip_at_known_efficiency(puma):
    template = GeneratorDesign.default()
    t, _ = best_fuel_endurance(puma, template.with_efficiency(0.25), resolution=SOLVER_RESOLUTION)
    synthetic = replace(puma, name="synthetic", stated_endurance=t, empty_mass=mass_closure(puma))
    r = required_efficiency(synthetic, template, 1.0)
    assert r.required_efficiency == pytest.approx(0.25, abs=1e-6)


def test_no_straddle_reports_endpoints():
    raven = get_platform("Raven")
    with pytest.raises(BracketError, match="not bracketed") as exc:
        required_efficiency(raven, GeneratorDesign.default(module_sizing="discrete"))
    assert exc.value.low == 0.0


def test_multiple_lower_bound(puma):
    with pytest.raises(ConfigError):
        required_efficiency(puma, GeneratorDesign.default(), 0.4)


def test_table_shape(table):
    assert len(table) == 5
    assert all(len(row) == 2 for row in table)


def test_table_fixed_point(table):
    for row in table:
        for r in row:
            assert not isinstance(r, ParityFailure)
            assert abs(r.achieved_endurance - r.target_endurance) / r.target_endurance <= 1e-6
            assert 0.001 < r.required_efficiency < 0.95
            assert not r.on_step


def test_table_double_needs_more(table):
    for x1, x2 in table:
        assert x2.required_efficiency > x1.required_efficiency


def test_fixed_point_feeds_back(table, platforms):
    for p, (r, _) in zip(platforms, table):
        design = GeneratorDesign.default(r.required_efficiency)
        t, _ = best_fuel_endurance(p, design, resolution=SOLVER_RESOLUTION)
        assert t == pytest.approx(r.target_endurance, rel=1e-6)


def test_empty_table():
    with pytest.raises(ConfigError):
        parity_table([], GeneratorDesign.default())


def test_table_isolates_bad_rows(platforms):
    bad = replace(platforms[0], name="broken", battery_mass=500.0)
    rows = parity_table([*platforms[1:], bad], GeneratorDesign.default())
    good = [r for row in rows[:4] for r in row]
    assert not any(isinstance(r, ParityFailure) for r in good)
    assert all(isinstance(r, ParityFailure) for r in rows[4])
    assert "broken" in rows[4][0].error


def test_table_parallel_identical(platforms):
    design = GeneratorDesign.default()
    assert parity_table(platforms[:3], design, jobs=2) == parity_table(platforms[:3], design)


def test_whole_module_solutions_hit_target():
    for name in ("Puma", "Trinity"):
        r = required_efficiency(get_platform(name), GeneratorDesign.default(module_sizing="discrete"))
        assert abs(r.achieved_endurance - r.target_endurance) / r.target_endurance <= 1e-6


def test_hybrid_objective(puma):
    # at x1 the stock-battery corner already meets the target for any efficiency
    with pytest.raises(BracketError):
        required_efficiency(puma, GeneratorDesign.default(), objective="hybrid_grid")
    r = required_efficiency(puma, GeneratorDesign.default(), 2.0, objective="hybrid_grid")
    pure = required_efficiency(puma, GeneratorDesign.default(), 2.0)
    assert r.achieved_endurance >= r.target_endurance
    assert r.required_efficiency <= pure.required_efficiency + 1e-3


@pytest.mark.parametrize("sizing", ["fractional", "discrete"])
def test_objective_monotone_in_efficiency(platforms, sizing):
    template = GeneratorDesign.default(module_sizing=sizing)
    for p in platforms:
        ts = [best_fuel_endurance(p, template.with_efficiency(e))[0] for e in np.linspace(0.001, 0.95, 50)]
        assert all(b >= a for a, b in zip(ts, ts[1:])), p.name


@settings(max_examples=100)
@given(platforms(p_range=(2.0, 30.0)))
def test_double_needs_strictly_more(platform):
    template = GeneratorDesign.default()
    try:
        x1 = required_efficiency(platform, template, 1.0)
        x2 = required_efficiency(platform, template, 2.0)
    except BracketError:
        assume(False)
    assert x2.required_efficiency > x1.required_efficiency
    for r in (x1, x2):
        assert abs(r.achieved_endurance - r.target_endurance) / r.target_endurance <= 1e-6
