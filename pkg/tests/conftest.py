import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SCALES = (1e-3, 1.0, 1e3)


def cnormal(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)
scales = st.sampled_from(SCALES)


@st.composite
def matrices(draw, k=None):
    k = draw(dims) if k is None else k
    rng = np.random.default_rng(draw(seeds))
    return draw(scales) * cnormal(rng, k, k)


@st.composite
def hermitian_matrices(draw, k=None):
    a = draw(matrices(k))
    return 0.5 * (a + a.conj().T)


@st.composite
def instances(draw, n_max=6):
    """(p, xs, ys, a, b) with random weights and shapes."""
    k, d = draw(dims), draw(dims)
    n = draw(st.integers(min_value=1, max_value=n_max))
    rng = np.random.default_rng(draw(seeds))
    sx, sy = draw(scales), draw(scales)
    p = rng.standard_exponential(n)
    p /= p.sum()
    xs = sx * cnormal(rng, n, d, k, k)
    ys = sy * cnormal(rng, n, d, k, k)
    a = sx * cnormal(rng, d, k, k)
    b = sy * cnormal(rng, d, k, k)
    return p, xs, ys, a, b


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance criteria append "PASS/FAIL ..." lines here; printed at the end of the run.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
