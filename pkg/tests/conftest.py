import numpy as np
import pytest

from svcmsi.io import ScenarioSpec, sinusoid_profile
from svcmsi.model import ModelParams
from svcmsi.simulate import SimulationPlan

# Filled by tests/test_acceptance.py, printed after the run.
ACCEPTANCE_LINES: list[str] = []

# Every full trace produced anywhere in the session is checked against the
# MSI bounds; the acceptance test for bounds reads this tally.
BOUNDS_TALLY = {"traces": 0, "violations": []}


@pytest.fixture(autouse=True, scope="session")
def _guard_msi_bounds():
    original = SimulationPlan.run

    def checked_run(self, omega_vis_grid):
        trace = original(self, omega_vis_grid)
        BOUNDS_TALLY["traces"] += 1
        lo, hi = float(trace.msi.min()), float(trace.msi.max())
        if lo < 0 or hi > self.params.p_max:
            BOUNDS_TALLY["violations"].append((lo, hi))
            raise AssertionError(f"MSI out of [0, {self.params.p_max}]: min {lo}, max {hi}")
        return trace

    SimulationPlan.run = checked_run
    yield
    SimulationPlan.run = original


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return ModelParams()


@pytest.fixture(scope="session")
def long_sinusoid():
    """Fore-aft 0.5 m/s^2 at 0.25 Hz for 30 minutes, sampled at 100 Hz."""
    return sinusoid_profile(ScenarioSpec(A=0.5, f_hz=0.25, duration=1800.0, dt=0.01))


def _band_limited(rng, n, dt, peak, f_lo=0.05, f_hi=0.5, n_tones=4):
    """Sum of random tones in [f_lo, f_hi] Hz, scaled so max |x| == peak."""
    t = np.arange(n) * dt
    x = np.zeros(n)
    for _ in range(n_tones):
        f = rng.uniform(f_lo, f_hi)
        x += rng.uniform(0.2, 1.0) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return peak * x / np.max(np.abs(x))


@pytest.fixture(scope="session")
def band_limited():
    return _band_limited
