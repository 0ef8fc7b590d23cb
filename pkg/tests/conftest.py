import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dscstab import Signal, StateSpace, TimeGrid

settings.register_profile(
    "dsc",
    max_examples=100,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("dsc")


@pytest.fixture
def grid():
    return TimeGrid(1.0)


@pytest.fixture
def space():
    return StateSpace(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_signal(grid, space, rng, lo=-8, hi=24, density=0.6, lattice=None):
    """Sparse random signal on ``[lo, hi]``; ``lattice`` restricts to even (0) or odd (1) indices."""
    vals = {}
    for k in range(lo, hi + 1):
        if lattice is not None and k % 2 != lattice:
            continue
        if rng.random() < density:
            vals[k] = rng.uniform(-1, 1, space.dim)
    return Signal(grid, space, vals)


ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, title: str, ok: bool, detail: str = "") -> str:
    line = f"criterion {criterion} [{title}]: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    ACCEPTANCE[criterion] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
