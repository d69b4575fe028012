import numpy as np
import pytest

from fdtrend import DesignGrid, FunctionalSample


def random_grid(rng, p=None, horizon=1.0, jitter=0.4):
    """Quasi-uniform grid: regular points perturbed by up to ``jitter`` of a step."""
    p = p or int(rng.integers(20, 120))
    step = horizon / p
    pts = (np.arange(p) + 0.5 + rng.uniform(-jitter, jitter, p) * 0.5) * step
    return DesignGrid(np.clip(pts, 0.0, horizon), horizon)


def riemann_clark(kernel, h, grid, means, t, N=1_000_000):
    """Midpoint-rule oracle for the normalized convolution, both integrals numeric."""
    T = grid.horizon
    u = (np.arange(N) + 0.5) * (T / N)
    ybar = np.interp(u, grid.points, means)
    out = []
    for ti in np.atleast_1d(t):
        k = kernel.scaled(ti - u, h)
        out.append(np.sum(k * ybar) / np.sum(k))
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sample(rng):
    grid = DesignGrid(np.linspace(0.0, 1.0, 60))
    data = np.sin(2 * np.pi * grid.points) + rng.normal(0, 0.3, (25, 60))
    return FunctionalSample(data, grid)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
