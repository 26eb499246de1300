"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from endure import GeneratorDesign, PlatformSpec


@st.composite
def platforms(draw, p_range=(2.0, 40.0)):
    """Random consistent platforms: the battery is 15-50 % of stock mass."""
    p = draw(st.floats(*p_range))
    energy = draw(st.floats(20.0, 2000.0))
    wh_per_kg = draw(st.floats(120.0, 200.0))
    share = draw(st.floats(0.15, 0.5))
    kg_per_l = draw(st.floats(1.4, 2.2))
    battery_mass = energy / wh_per_kg
    total = battery_mass / share
    return PlatformSpec(
        name="random",
        platform_class=draw(st.sampled_from(["ground", "multicopter", "fixed_wing", "fixed_wing_vtol"])),
        specific_power_req=p,
        battery_energy=energy,
        battery_mass=battery_mass,
        battery_volume=battery_mass / kg_per_l,
        stated_endurance=energy / (p * total),
    )


@st.composite
def designs(draw, eta=(0.03, 0.3)):
    return GeneratorDesign.default(
        draw(st.floats(*eta)),
        exhaust_efficiency=draw(st.floats(0.25, 0.6)),
        module_sizing=draw(st.sampled_from(["fractional", "discrete"])),
    )
