import sys

import numpy as np
import pytest

from gtd.systems import (
    catalog_gen_ideal,
    catalog_ideal_gas,
    catalog_power_log,
    catalog_separable,
    catalog_vdw,
    log_part,
)


def catalog_systems():
    """One representative per catalog family, with interior sample boxes."""
    return {
        "ideal_gas": (catalog_ideal_gas(1.0), ([0.5, 0.5], [5.0, 5.0])),
        "vdw": (catalog_vdw(1.0, 0.1, 0.05), ([0.5, 0.5], [5.0, 5.0])),
        "gen_ideal": (catalog_gen_ideal(1.0, -1.5), ([0.5, 0.5], [5.0, 5.0])),
        "power_log": (catalog_power_log("power", 1.0, 0.5, 0.3), ([0.5, 0.5], [5.0, 5.0])),
        "separable": (
            catalog_separable([log_part(1.5), log_part(1.0), log_part(0.7)]),
            ([0.5, 0.5, 0.5], [5.0, 5.0, 5.0]),
        ),
    }


@pytest.fixture
def systems():
    return catalog_systems()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.format_line(number))
