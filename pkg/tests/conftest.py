import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hems_sa.profiles import (  # noqa: E402
    BUNDLED_PANEL_AREA,
    HourlyProfile,
    PanelSpec,
    PricingScheme,
    bundled_profile_path,
    bundled_profiles,
    irradiance_to_power,
)


@pytest.fixture(scope="session")
def bundled():
    consumption, irradiance = bundled_profiles()
    generation = irradiance_to_power(irradiance, PanelSpec(BUNDLED_PANEL_AREA))
    return consumption, irradiance, generation


@pytest.fixture
def flat_pricing():
    return PricingScheme.flat()


@pytest.fixture(scope="session")
def data_dir():
    return bundled_profile_path("smoke.json").parent


def profile(values, kind):
    return HourlyProfile(np.asarray(values, dtype=float), kind)


def write_csv(path, values):
    path.write_text("".join(f"{h},{v}\n" for h, v in enumerate(values, start=1)), encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
