import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qpmsource.dispersion import design_crystal, fitted_crystal, load_sellmeier  # noqa: E402


@pytest.fixture(scope="session")
def sellmeier():
    return load_sellmeier()


@pytest.fixture(scope="session")
def design(sellmeier):
    return design_crystal(sellmeier)


@pytest.fixture(scope="session")
def fitted(sellmeier):
    return fitted_crystal(sellmeier)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
