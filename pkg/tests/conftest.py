import math
import time

import pytest

from dotdecay.potentials import SmoothDoubleBarrier
from dotdecay.schrod1d import bound_states, default_grid, resonance_poles


@pytest.fixture(scope="session")
def dot():
    """The reference dot: a = 5 nm, delta = 4 nm, V_w = 10 eV, b at the midpoint."""
    return SmoothDoubleBarrier(a=5.0, delta=4.0, v_w=10.0)


@pytest.fixture(scope="session")
def dot_grid(dot):
    return default_grid(dot)


@pytest.fixture(scope="session")
def dot_bound(dot, dot_grid):
    return bound_states(dot, dot_grid)


@pytest.fixture(scope="session")
def dot_poles(dot):
    return resonance_poles(dot)


def rel(a, b):
    return abs(a - b) / abs(b)


def log_ratio(a, b):
    return abs(math.log(a / b))


ACCEPTANCE_LINES = []


class Criterion:
    """Collects named checks for one acceptance criterion and reports a single line."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.checks = []
        self.start = time.perf_counter()

    def check(self, name: str, value, target: str, ok: bool):
        self.checks.append((name, value, target, bool(ok)))
        return ok

    def within(self, name: str, value: float, expected: float, tol: float, relative: bool = False):
        err = abs(value - expected) / abs(expected) if relative else abs(value - expected)
        target = f"{expected:g} ± {tol:g}{' rel' if relative else ''}"
        return self.check(name, value, target, err <= tol)

    @property
    def passed(self) -> bool:
        return all(c[3] for c in self.checks)

    def finish(self, time_limit: float | None = None) -> str:
        elapsed = time.perf_counter() - self.start
        if time_limit is not None:
            self.check("runtime_s", round(elapsed, 2), f"< {time_limit:g}", elapsed < time_limit)
        parts = []
        for name, value, target, ok in self.checks:
            shown = f"{value:.6g}" if isinstance(value, float) else str(value)
            parts.append(f"{name}={shown} [{target}] {'ok' if ok else 'MISS'}")
        line = f"criterion {self.number} ({self.title}): {'PASS' if self.passed else 'FAIL'} in {elapsed:.2f} s | " + "; ".join(parts)
        ACCEPTANCE_LINES.append((self.number, line))
        print(line)
        return line


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
