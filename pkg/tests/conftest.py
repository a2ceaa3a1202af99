import numpy as np
import pytest
from hypothesis import strategies as st

from pdintensity.core import OmegaBox, PersistenceDiagram


@pytest.fixture
def box1():
    return OmegaBox(1.0)


@st.composite
def diagrams(draw, L=1.0, max_size=8, min_size=0):
    """Random diagram in Omega over [0, L]."""
    k = draw(st.integers(min_size, max_size))
    rows = []
    for _ in range(k):
        b = draw(st.floats(0.0, L * 0.95, allow_nan=False))
        d = draw(st.floats(b, L, allow_nan=False))
        if d > b:
            rows.append((b, d, 1))
    return PersistenceDiagram.from_pairs(rows, OmegaBox(L))


def random_diagram(rng, k, L=1.0):
    b = rng.uniform(0, L, k)
    d = rng.uniform(0, L, k)
    lo, hi = np.minimum(b, d), np.maximum(b, d)
    return PersistenceDiagram.from_pairs([(x, y, 1) for x, y in zip(lo, hi)], OmegaBox(L))


# (number, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


def record(number, passed, detail):
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE.append((number, bool(passed), line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
