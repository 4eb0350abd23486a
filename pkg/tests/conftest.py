from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from flexcert.poly import Polynomial, Universe

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")

_POOL = ("u", "v", "w", "y", "z")

small_scalars = st.one_of(
    st.integers(-9, 9),
    st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)),
)


@st.composite
def universes(draw, min_size=1, max_size=4):
    n = draw(st.integers(min_size, max_size))
    return Universe(_POOL[:n])


@st.composite
def polys_over(draw, universe, max_terms=5, max_exp=3, coeffs=small_scalars):
    n = len(universe)
    terms = draw(st.lists(
        st.tuples(st.tuples(*[st.integers(0, max_exp)] * n), coeffs),
        max_size=max_terms,
    ))
    return Polynomial.from_terms(universe, terms)


@st.composite
def poly_tuples(draw, k):
    u = draw(universes())
    return tuple(draw(polys_over(u)) for _ in range(k))


# -- acceptance reporting -------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _ACCEPTANCE.get(n, (title, "PASS"))[1]
        status = "PASS" if rep.outcome == "passed" and prev == "PASS" else "FAIL"
        if rep.outcome == "skipped":
            status = "SKIP"
        _ACCEPTANCE[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
