import re

import pytest

from spinbox import (
    SystemParams,
    TrapConfig,
    ZeemanConversion,
    coupling_constants,
)
from spinbox.constants import CONSTANTS, RB87_MASS

BOX_RADIUS_M = 3.9e-6
OMEGA_HZ = 30.0


def default_params(box_radius_m=BOX_RADIUS_M) -> SystemParams:
    trap = TrapConfig(187.0, 67.0, 183.0)
    couplings = coupling_constants(87.7, 95.0, 99.0, RB87_MASS)
    return SystemParams(
        mass_kg=RB87_MASS,
        trap=trap,
        couplings=couplings,
        box_radius_m=box_radius_m,
        spin_coupling_j=OMEGA_HZ * CONSTANTS.planck,
        zeeman=ZeemanConversion(coeff_hz_per_gauss2=59.3, sign=-1),
    )


@pytest.fixture(scope="session")
def params() -> SystemParams:
    return default_params()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, ()):
            match = re.search(r"test_criterion_(\d+)", getattr(report, "nodeid", ""))
            if match:
                number = int(match.group(1))
                status = "PASS" if outcome == "passed" else "FAIL"
                if rows.get(number) != "FAIL":
                    rows[number] = status
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for number in sorted(rows):
            terminalreporter.write_line(f"criterion {number}: {rows[number]}")
