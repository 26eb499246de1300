import csv
import random
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from _strategies import designs, platforms
from endure import (
    ConfigError,
    ConstraintSet,
    GeneratorDesign,
    HybridConfig,
    MassBreakdown,
    evaluate,
    get_platform,
    mass_breakdown,
    max_fuel_volume,
    sweep,
)
from endure.errors import SizingError
from endure.export import SWEEP_COLUMNS, sweep_csv, write_sweep


class TestEvaluate:
    def test_stock_battery_matches_stated(self, puma, parity_design):
        r = evaluate(puma, parity_design, HybridConfig(297, 0))
        assert r.endurance == pytest.approx(2.0, rel=1e-12)
        assert r.feasible and not r.fuel_usable

    def test_pure_fuel_at_max(self, puma, parity_design):
        v = max_fuel_volume(puma, parity_design).volume
        r = evaluate(puma, parity_design, HybridConfig(0, v))
        assert r.fuel_usable
        assert r.endurance == pytest.approx(2.0, rel=0.15)

    def test_small_fuel_load_is_a_penalty(self, puma, parity_design):
        r = evaluate(puma, parity_design, HybridConfig(297, 0.010))
        assert r.endurance < 2.0

    def test_result_invariants(self, puma, parity_design):
        for cfg in (HybridConfig(297, 0.5), HybridConfig(100, 1.0), HybridConfig(0, 0.3)):
            r = evaluate(puma, parity_design, cfg)
            b = r.breakdown
            assert b.total == b.airframe + b.battery + b.generator_hardware + b.tank + b.fuel
            assert r.avg_power == pytest.approx(puma.specific_power_req * b.total, rel=1e-12)
            energy = r.total_energy if r.fuel_usable else r.battery_energy
            assert r.avg_power * r.endurance == pytest.approx(energy, rel=1e-9)

    def test_dead_fuel_breaks_caps(self, puma, parity_design):
        r = evaluate(puma, parity_design, HybridConfig(297, 1.2))
        assert not r.fuel_usable and not r.feasible
        assert r.binding_constraint in ("mass_cap", "volume_cap", "te_power")
        assert r.endurance == pytest.approx(297 / r.avg_power)

    def test_empty_config_rejected(self):
        with pytest.raises(ConfigError):
            HybridConfig(0, 0)

    def test_sizing_non_convergence(self, puma):
        # a module barely carries its own weight, so whole-module sizing creeps
        design = GeneratorDesign.default(
            0.05, module_sizing="discrete", te_module=replace(
                GeneratorDesign.default().te_module, rated_power=21 * 0.330 * 1.0001
            )
        )
        roomy = ConstraintSet(mass_cap=1e9, volume_cap=1e9)
        with pytest.raises(SizingError, match="32"):
            evaluate(puma, design, HybridConfig(0, 0.5), roomy)

    def test_cc_override(self, puma, parity_design):
        base = max_fuel_volume(puma, parity_design).volume
        bigger = max_fuel_volume(puma, parity_design, ConstraintSet.for_platform(puma, cc_volume_per_watt=5.0))
        assert bigger.volume < base


class TestMassBreakdown:
    def test_stock(self, puma, parity_design):
        b = mass_breakdown(puma, parity_design, HybridConfig(297, 0))
        assert b.airframe == pytest.approx(4.97, abs=0.005)
        assert (b.battery, b.generator_hardware, b.tank, b.fuel) == (2.1, 0, 0, 0)

    def test_prototype_sum(self):
        assert MassBreakdown(0.0, 0.0, 0.413, 0.1064, 0.227).total == pytest.approx(0.746, abs=0.001)

    def test_zero_battery(self, puma, parity_design):
        assert mass_breakdown(puma, parity_design, HybridConfig(0, 0.2)).battery == 0.0

    def test_battery_scales_at_own_rate(self, puma, parity_design):
        b = mass_breakdown(puma, parity_design, HybridConfig(99, 0.2))
        assert b.battery == pytest.approx(2.1 / 3)


class TestMaxFuel:
    def test_puma(self, puma, parity_design):
        mf = max_fuel_volume(puma, parity_design)
        assert 0.86 <= mf.volume <= 1.02
        assert mf.feasible

    def test_talon_volume_bound(self, talon):
        mf = max_fuel_volume(talon, GeneratorDesign.default(0.0807))
        assert mf.binding_constraint == "volume_cap"
        assert mf.volume == pytest.approx(4.95, rel=0.05)

    def test_absurd_hardware(self, puma):
        mf = max_fuel_volume(puma, GeneratorDesign.default(0.105, hardware_mass_per_module=10.0))
        assert mf.volume == 0 and not mf.feasible
        assert mf.binding_constraint == "mass_cap"

    def test_resolution(self, puma, parity_design):
        coarse = max_fuel_volume(puma, parity_design, resolution=1e-3).volume
        fine = max_fuel_volume(puma, parity_design, resolution=1e-9).volume
        assert 0 <= fine - coarse <= 1e-3

    @pytest.mark.parametrize("name", ["Talon", "Puma", "Trinity"])
    def test_monotone_in_cc_and_tare(self, name):
        p = get_platform(name)
        design = GeneratorDesign.default(0.15)
        by_cc = [max_fuel_volume(p, replace(design, cc_volume_per_watt=c)).volume for c in (0.5, 1.4, 3.0, 6.0)]
        assert by_cc == sorted(by_cc, reverse=True)
        by_tare = [
            max_fuel_volume(p, replace(design, fuel=design.fuel.with_tare(t))).volume
            for t in (0.0, 0.2, 0.469, 1.0)
        ]
        assert by_tare == sorted(by_tare, reverse=True)


class TestProperties:
    @settings(max_examples=100)
    @given(platforms(), designs(eta=(0.03, 0.25)), st.floats(0.05, 1.0), st.floats(0.0, 0.3), st.floats(1.01, 1.5))
    def test_monotone_in_efficiency(self, platform, design, fuel_share, battery_share, factor):
        mf = max_fuel_volume(platform, design)
        assume(mf.feasible and mf.volume > 0)
        cfg = HybridConfig(battery_share * platform.battery_energy, fuel_share * mf.volume)
        r1 = evaluate(platform, design, cfg)
        assume(r1.fuel_usable)
        r2 = evaluate(platform, design.with_efficiency(min(0.95, design.device_efficiency * factor)), cfg)
        assert r2.fuel_usable
        assert r2.endurance > r1.endurance

    @settings(max_examples=100)
    @given(platforms(), designs(), st.floats(0.0, 1.0))
    def test_dead_mass_costs_endurance(self, platform, design, battery_share):
        battery = max(battery_share * platform.battery_energy, 1e-3)
        limit = ConstraintSet.for_platform(platform).volume_limit
        volumes = np.linspace(0.01, 1.5, 40) * limit
        dead = [
            r for r in (evaluate(platform, design, HybridConfig(battery, v)) for v in volumes)
            if not r.fuel_usable
        ]
        assert dead  # fuel beyond the volume cap is always dead weight
        for a, b in zip(dead, dead[1:]):
            assert b.endurance < a.endurance

    @settings(max_examples=100)
    @given(platforms(), designs(), st.randoms(use_true_random=False))
    def test_sweep_order_independent(self, platform, design, rnd):
        grid = sweep(platform, design, 4, 5)
        order = [(i, j) for i in range(4) for j in range(5)]
        rnd.shuffle(order)
        shuffled = sweep(platform, design, 4, 5, order=order)
        assert shuffled.cells == grid.cells


class TestSweep:
    def test_smallest_grid(self, puma, parity_design):
        g = sweep(puma, parity_design, 2, 2)
        assert g.shape == (2, 2) and len(list(g)) == 4
        assert g.battery_axis == (0.0, 297.0)

    def test_origin_marked_infeasible(self, puma, parity_design):
        r = sweep(puma, parity_design, 3, 3).cell(0, 0)
        assert not r.feasible and r.endurance == 0.0

    def test_cells_carry_coordinates(self, puma, parity_design):
        g = sweep(puma, parity_design, 3, 4)
        assert [(c.i, c.j) for c in g] == [(i, j) for i in range(3) for j in range(4)]

    def test_puma_corners(self, puma, parity_design):
        g = sweep(puma, parity_design, 50, 50)
        assert g.cell(49, 0).endurance == pytest.approx(2.0, rel=1e-12)
        assert g.cell(0, 49).endurance == pytest.approx(2.0, rel=0.15)

    def test_battery_slice_monotone_where_usable(self, puma, parity_design):
        g = sweep(puma, parity_design, 20, 20)
        for j in range(1, 20):
            col = [g.cell(i, j) for i in range(20)]
            for a, b in zip(col, col[1:]):
                if a.fuel_usable and b.fuel_usable:
                    assert b.endurance >= a.endurance

    def test_te_power_cliff_at_high_fuel(self):
        aurelia = get_platform("Aurelia X6")
        g = sweep(aurelia, GeneratorDesign.default(0.28), 11, 11)
        pure = g.cell(0, 10)
        low_battery = g.cell(1, 10)
        assert pure.fuel_usable
        assert not low_battery.fuel_usable
        assert low_battery.endurance < 0.2 * pure.endurance

    def test_jobs_identical(self, puma, parity_design):
        serial = sweep(puma, parity_design, 6, 6)
        parallel = sweep(puma, parity_design, 6, 6, jobs=2)
        assert parallel.cells == serial.cells

    def test_bad_steps(self, puma, parity_design):
        with pytest.raises(ConfigError):
            sweep(puma, parity_design, 1, 5)


class TestExport:
    def test_csv(self, puma, parity_design, tmp_path):
        g = sweep(puma, parity_design, 5, 4)
        csv_path, meta_path = write_sweep(g, tmp_path)
        rows = list(csv.reader(csv_path.open()))
        assert tuple(rows[0]) == SWEEP_COLUMNS
        assert len(rows) == 21
        stock = rows[1 + 4 * 4]  # battery index 4, fuel index 0
        assert stock[:3] == ["297", "0", "2"]
        assert stock[10:] == ["true", "none", "false"]
        for row in rows[1:]:
            for value in row[:10]:
                digits = value.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
                assert len(digits) <= 6
        assert sorted(p.name for p in tmp_path.iterdir()) == ["sweep.csv", "sweep.meta.json"]

    def test_meta(self, puma, parity_design, tmp_path):
        import json

        _, meta_path = write_sweep(sweep(puma, parity_design, 3, 3), tmp_path, {"seed": 7})
        meta = json.loads(meta_path.read_text())
        assert meta["schema_version"] == 1
        assert meta["grid"]["battery_Wh"] == {"min": 0.0, "max": 297.0, "steps": 3}
        assert meta["platform"]["name"] == "Puma"
        assert meta["seed"] == 7

    def test_byte_identical(self, puma, parity_design):
        assert sweep_csv(sweep(puma, parity_design, 7, 7)) == sweep_csv(sweep(puma, parity_design, 7, 7, jobs=2))
