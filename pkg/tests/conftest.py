import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slipstokes import (MultiplierField, PressureField, VelocityField, generate_square)  # noqa: E402

SEED = 20240611


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def two_cells():
    return generate_square(1)


def random_triple(mesh, rng, scale=1.0):
    u = VelocityField(mesh, scale * rng.uniform(-1, 1, (mesh.n_vertices, 2)))
    p = PressureField(mesh, scale * rng.uniform(-1, 1, mesh.n_vertices))
    lam = MultiplierField(mesh, scale * rng.uniform(-1, 1, (mesh.n_facets, 2)))
    return u, p, lam


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
