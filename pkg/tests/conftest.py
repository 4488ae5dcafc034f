import numpy as np
import pytest

from wielandt.core import HermitianMatrix, diag


def brute_force_sorted_eigs(M) -> np.ndarray:
    """Eigenvalues via the characteristic polynomial; an oracle independent of eigh."""
    a = np.asarray(M.array if isinstance(M, HermitianMatrix) else M)
    return np.sort(np.roots(np.poly(a)).real)[::-1]


def random_frame(n: int, k: int, rng) -> np.ndarray:
    Z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, _ = np.linalg.qr(Z)
    return q


@pytest.fixture
def diag_pair():
    return diag(3, 1, 1), diag(0, 2, 1)


@pytest.fixture
def crossing_pair():
    return diag(1, 0), diag(-1, 1)


@pytest.fixture
def swap_matrix():
    return HermitianMatrix(np.array([[0, 1], [1, 0]], dtype=complex))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
