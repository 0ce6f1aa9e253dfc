import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from goursat.homog_poly import FormalSeries, HomogPoly, LineDivisor

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_slopes(rng, p, spread=3.0, min_gap=0.2, min_abs=0.1):
    """2p-1 slopes, pairwise separated and away from zero."""
    while True:
        a = rng.uniform(-spread, spread, 2 * p - 1)
        if np.min(np.abs(a)) < min_abs:
            continue
        if p > 1 and np.min(np.diff(np.sort(a))) < min_gap:
            continue
        return tuple(float(v) for v in a)


def random_divisor(rng, p, **kw):
    return LineDivisor(random_slopes(rng, p, **kw))


def random_poly(rng, m, real=False):
    c = rng.standard_normal(m + 1) + 1j * rng.standard_normal(m + 1)
    f = HomogPoly(c)
    if real:
        f = HomogPoly((f.coeffs + f.conjugate().coeffs) / 2)
    return f


def random_series(rng, N, real=False, decay=1.0, start=0):
    terms = []
    for m in range(N + 1):
        if m < start:
            terms.append(HomogPoly.zero(m))
        else:
            terms.append(random_poly(rng, m, real) * (decay ** m))
    return FormalSeries(tuple(terms))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
