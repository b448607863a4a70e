import numpy as np
import pytest

from densityfm.synthetic import generate_scene

# Rectified-stereo F: m'^T F m = y - y'.
F_RECT = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])

# Five collinear points on the x axis, used across the density-peaks examples.
LINE_POINTS = np.array([0.0, 0.1, 0.2, 5.0, 5.1])


@pytest.fixture
def f_rect():
    return F_RECT.copy()


def rectified_pairs(n, seed=0):
    """Exact correspondences (x, y) <-> (x + d, y) in general position."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 600, n)
    y = rng.uniform(0, 400, n)
    d = rng.uniform(5, 60, n)
    return np.column_stack([x, y, x + d, y])


def line_vectors():
    v = np.zeros((5, 4))
    v[:, 0] = LINE_POINTS
    return v


@pytest.fixture(scope="session")
def clean_scene():
    return generate_scene(num_points=200, seed=11)


@pytest.fixture(scope="session")
def outlier_scene():
    return generate_scene(num_points=200, outlier_fraction=0.3, seed=5)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
