import math

import numpy as np
import pytest

from hellinger_invariant.market_data import SimulationSpec, simulate_student_market

# Seed of the reference simulated market (dfs 4,3,3,2; T = 810) used by the
# acceptance criteria.
REFERENCE_SEED = 12345
REFERENCE_DFS = (4, 3, 3, 2)


@pytest.fixture(scope="session")
def student_market():
    return simulate_student_market(SimulationSpec(REFERENCE_DFS, 810, REFERENCE_SEED))


@pytest.fixture(scope="session")
def gaussian_market_small():
    return simulate_student_market(SimulationSpec((math.inf,) * 4, 810, REFERENCE_SEED))


def random_density(rng, max_bins=40):
    m = int(rng.integers(1, max_bins + 1))
    edges = np.cumsum(np.concatenate([[rng.normal(0, 2)], rng.uniform(0.01, 1.0, m)]))
    amps = rng.uniform(0, 1, m) * (rng.uniform(size=m) > 0.15)
    if not amps.any():
        amps[0] = 1.0
    amps /= math.sqrt(np.sum(amps**2 * np.diff(edges)))
    return edges, amps


# One line per acceptance criterion, repeated in the terminal summary.
ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
