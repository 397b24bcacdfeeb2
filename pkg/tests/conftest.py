import numpy as np
import pytest

from mcmreg.dataset import Dataset

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def hard_feasible_instance(rng, M=None, n=None, epsilon=0.1):
    """Linear data whose noise stays strictly inside the epsilon tube."""
    M = M or int(rng.integers(5, 41))
    n = n or int(rng.integers(1, 6))
    X = rng.normal(size=(M, n))
    w = rng.normal(size=n)
    y = X @ w + rng.normal() + rng.uniform(-epsilon / 2, epsilon / 2, size=M)
    return Dataset(X, y)


def noisy_instance(rng, M=30, n=3):
    X = rng.normal(size=(M, n))
    y = np.sin(X[:, 0]) + 0.5 * X[:, -1] + 0.3 * rng.normal(size=M)
    return Dataset(X, y)


@pytest.fixture
def record_criterion():
    """Store an acceptance verdict so the terminal summary can list it."""
    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE[number] = (passed, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
