import sys
import datetime as dt

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from endure import GeneratorDesign, get_platform, load_platforms

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")

# 121.7 g at 46.3 g/h: the bench campaign duration implied by the quoted burn rate
CAMPAIGN_HOURS = 121.7 / 46.3


@pytest.fixture(autouse=True)
def _bundled_registry(monkeypatch):
    monkeypatch.delenv("ENDURE_PLATFORMS", raising=False)


@pytest.fixture(scope="session")
def platforms():
    return load_platforms()


@pytest.fixture(scope="session")
def puma():
    return get_platform("Puma")


@pytest.fixture(scope="session")
def talon():
    return get_platform("Talon")


@pytest.fixture(scope="session")
def parity_design():
    return GeneratorDesign.default(0.105)


def power_log_text(hours=CAMPAIGN_HOURS, voltage=2.0, current=2.3, step=2.0, ripple=0.0):
    """Electronic-load style CSV sampled every ``step`` s, ending exactly at ``hours``."""
    duration = hours * 3600.0
    n = int(round(duration / step)) + 1
    t = np.linspace(0.0, duration, n)
    i = current + ripple * np.sin(2 * np.pi * t / 600.0)
    lines = ["time_s,voltage_V,current_A"]
    lines += [f"{float(a)!r},{float(voltage)!r},{float(b)!r}" for a, b in zip(t, i)]
    return "\n".join(lines) + "\n"


def temperature_log_text(hours=CAMPAIGN_HOURS, hot=300.0, cold=74.0, ambient=25.0, iso=True):
    start = dt.datetime(2024, 3, 1, 10, 0, 0)
    n = int(hours * 3600.0) + 1
    lines = ["timestamp,T_hot_C,T_cold_C,T_amb_C"]
    for k in range(n):
        stamp = (start + dt.timedelta(seconds=k)).isoformat() if iso else str(k)
        lines.append(f"{stamp},{hot},{cold},{ambient}")
    return "\n".join(lines) + "\n"


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
