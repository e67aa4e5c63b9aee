import numpy as np
import pytest
from hypothesis import strategies as st

from kronmimo.profile import VarianceProfile

entries = st.floats(min_value=0.01, max_value=2.0, allow_nan=False)


@st.composite
def profiles(draw, max_dim=24):
    big_n = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    d = draw(st.lists(entries, min_size=big_n, max_size=big_n))
    dt = draw(st.lists(entries, min_size=n, max_size=n))
    return VarianceProfile(d, dt)


def random_profile(rng, max_dim=128, low=0.0, high=2.0):
    """Profile with entries uniform in (low, high]."""
    big_n, n = rng.integers(1, max_dim + 1, size=2)
    d = high - (high - low) * rng.random(big_n)
    dt = high - (high - low) * rng.random(n)
    return VarianceProfile(d, dt)


@pytest.fixture
def iid4():
    return VarianceProfile(np.ones(4), np.ones(4))


def quadratic_delta(t):
    """Root of t x^2 + x - 1 = 0: delta for D = D_tilde = I, N = n."""
    return (-1.0 + np.sqrt(1.0 + 4.0 * t)) / (2.0 * t)


def mp_capacity_per_antenna(rho):
    """Capacity per antenna of the square i.i.d. channel (Marchenko-Pastur closed form)."""
    s = np.sqrt(1.0 + 4.0 * rho)
    return 2.0 * np.log((1.0 + s) / 2.0) - (s - 1.0) ** 2 / (4.0 * rho)


ACCEPTANCE_LINES = []


def record_acceptance(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
