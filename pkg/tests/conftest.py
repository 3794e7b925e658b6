import sys

import numpy as np
import pytest

from ksgreedy.frames import harmonic_frame, random_unitary, rotate_frame
from ksgreedy.linalg import HermitianMatrix


def random_pd(rng, d, kappa=100.0):
    """Q diag(w) Q* with eigenvalues spread log-uniformly over [1, kappa]."""
    U = random_unitary(d, rng)
    w = np.exp(rng.uniform(0.0, np.log(kappa), size=d))
    if d > 1:
        w[0], w[-1] = 1.0, kappa
    return HermitianMatrix((U * w) @ U.conj().T), np.sort(w)[::-1]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def quarter_frame():
    return harmonic_frame(1, 4)


@pytest.fixture(scope="session")
def rotated_884():
    return rotate_frame(harmonic_frame(2, 884), 7)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
