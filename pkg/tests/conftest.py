import pytest

from uecoverage.antenna import build_design
from uecoverage.codebook import generate_design_codebook
from uecoverage.geometry import make_grid


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1.0, 1.0)


@pytest.fixture(scope="session")
def designs(grid1):
    return {name: build_design(name, grid1) for name in ("face", "edge", "design3", "design4")}


@pytest.fixture(scope="session")
def codebooks(designs):
    return {name: generate_design_codebook(d) for name, d in designs.items()}


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
