from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from meradc.pmf import Pmf

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
FIG4 = (0.125, 0.125, 0.25, 0.5)


@pytest.fixture
def fig4_pmf():
    return Pmf(FIG4, 2)


def random_pmf(rng: np.random.Generator, bits: int) -> Pmf:
    """Dirichlet draw; every third one gets a run of exact zeros."""
    n = 1 << bits
    alpha = rng.choice([0.2, 1.0, 5.0])
    w = rng.dirichlet(np.full(n, alpha))
    if rng.integers(3) == 0 and n > 2:
        lo = rng.integers(n - 1)
        w[lo:lo + rng.integers(1, n // 2 + 1)] = 0.0
        if w.sum() == 0:
            w[-1] = 1.0
    return Pmf.from_weights(w, bits)


@st.composite
def dyadic_pmfs(draw, min_bits=1, max_bits=5):
    """Pmfs whose entries are k / 2**m: float sums are exact, so ties are real ties."""
    bits = draw(st.integers(min_bits, max_bits))
    n = 1 << bits
    weights = draw(st.lists(st.integers(0, 64), min_size=n, max_size=n))
    if sum(weights) == 0:
        weights[0] = 1
    # pad total to a power of two via the last code
    total = sum(weights)
    target = 1 << (total - 1).bit_length()
    weights[-1] += target - total
    return Pmf(np.array(weights, dtype=np.float64) / target, bits)


@st.composite
def float_pmfs(draw, min_bits=1, max_bits=6):
    bits = draw(st.integers(min_bits, max_bits))
    n = 1 << bits
    weights = draw(st.lists(st.floats(0, 1, allow_subnormal=False), min_size=n, max_size=n))
    if sum(weights) == 0:
        weights[0] = 1.0
    return Pmf.from_weights(weights, bits)


# -- acceptance reporting -----------------------------------------------------

_CRITERIA: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        label, text = marker.args
        _CRITERIA.append((label, text, "PASS" if report.passed else "FAIL"))
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, text, status in _CRITERIA:
        terminalreporter.write_line(f"[{status}] criterion {label}: {text}")
