import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def circle_distance_matrix(n):
    """Exact chord distances of ``n`` evenly spaced points on the unit circle."""
    k = np.arange(n)
    steps = np.abs(k[:, None] - k[None, :])
    steps = np.minimum(steps, n - steps)
    return 2 * np.sin(np.pi * steps / n)


def fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5 ** 0.5) * i
    return np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def noisy_circle(rng, n=40, noise=0.05, center=(0.0, 0.0), radius=1.0):
    t = rng.uniform(0, 2 * np.pi, n)
    pts = radius * np.column_stack([np.cos(t), np.sin(t)]) + np.asarray(center)
    return pts + noise * rng.standard_normal(pts.shape)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` prints and records one acceptance line."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
