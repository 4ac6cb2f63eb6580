import pytest

from invsub import (
    compound_poisson,
    deterministic_jumps,
    drift_only,
    exponential_jumps,
    gamma_process,
    inverse_gaussian,
    mixed_stable,
    stable,
)

FAMILIES = {
    "drift-only": drift_only(1.0),
    "stable": stable(0.5),
    "mixed-stable": mixed_stable([(0.5, 0.3), (0.5, 0.7)]),
    "compound-poisson": compound_poisson(1.0, exponential_jumps(1.0)),
    "compound-poisson-det": compound_poisson(2.0, deterministic_jumps(1.0)),
    "gamma": gamma_process(1.0, 1.0),
    "inverse-gaussian": inverse_gaussian(1.0, 1.0),
}

_acceptance_lines: list[str] = []


@pytest.fixture
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
