import hypothesis
import numpy as np
import pytest

from micropolar_rb.dynamics import State
from micropolar_rb.spectral import Grid, random_field

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_state(grid: Grid, seed: int, radius=None, mean_u=(0.0, 0.0)) -> State:
    rng = rng_for(seed)
    return State(
        random_field(grid, rng, radius),
        random_field(grid, rng, radius),
        random_field(grid, rng, radius),
        mean_u,
    )


@pytest.fixture(scope="session")
def grid16():
    return Grid(16)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64)


@pytest.fixture
def rng():
    return rng_for(1234)


@pytest.fixture
def record():
    """Store one acceptance verdict; printed in the terminal summary."""

    def _record(label: str, passed: bool, detail: str = ""):
        ACCEPTANCE[label] = (bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[0].split("/")[0]) if s[0].isdigit() else 99, s)):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
