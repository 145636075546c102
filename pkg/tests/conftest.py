from __future__ import annotations

import numpy as np
import pytest

from poibinglm.dataset import Precinct

ACCEPTANCE_LINES: list[str] = []


def central_diff(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def close_componentwise(analytic, numeric, rtol=1e-4, atol=1e-8) -> bool:
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    return bool(np.all(np.abs(analytic - numeric) <= rtol * np.abs(numeric) + atol))


def random_precinct(rng: np.random.Generator, n: int, d: int, D: int | None = None) -> Precinct:
    X = rng.normal(size=(n, d))
    D = int(rng.integers(0, n + 1)) if D is None else D
    return Precinct("C", "P", X, D, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
