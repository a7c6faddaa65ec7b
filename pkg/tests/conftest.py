from __future__ import annotations

import pytest

from hilfer_bvp.scenarios import load_scenario


@pytest.fixture(scope="session")
def spec_i():
    return load_scenario("example-4.1-i").spec


@pytest.fixture(scope="session")
def spec_ii():
    return load_scenario("example-4.1-ii").spec


@pytest.fixture(scope="session")
def spec_iii():
    return load_scenario("example-4.1-iii").spec


# -- acceptance reporting -----------------------------------------------------
#
# Each acceptance test records one line; the lines are printed after the run
# so that a plain ``pytest`` shows a pass/fail verdict per criterion.

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(k: int, passed: bool, detail: str) -> bool:
        line = f"CRITERION {k}: {'PASS' if passed else 'FAIL'} {detail}"
        _CRITERIA[k] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
