import math

import numpy as np
import pytest

from quantum_tradeoff.quantum_objects import spin_family_state, spin_operators

SPIN_PHI = math.pi / 6

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def spin_case():
    """State and observables of the S = 3/2 scatter-plot configuration."""
    fam = spin_operators(1.5)
    rho = spin_family_state(1.5, 0.5)
    return rho, fam.Sx, fam.in_plane(SPIN_PHI)


@pytest.fixture
def record_acceptance():
    def record(number, title, passed, detail=""):
        ACCEPTANCE_RESULTS[number] = (title, passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} {detail}".rstrip())
