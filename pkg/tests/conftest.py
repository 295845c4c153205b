import pytest
from hypothesis import settings, strategies as st

from twisted_hodge.exterior import Form, basis
from twisted_hodge.scalars import GaussianRational

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

small_ints = st.integers(-4, 4)


@st.composite
def gaussian_rationals(draw):
    den = draw(st.integers(1, 3))
    return GaussianRational(draw(small_ints), draw(small_ints)) / den


@st.composite
def forms(draw, n, p, q):
    terms = {}
    for m in basis(n, p, q):
        if draw(st.booleans()):
            terms[m] = draw(gaussian_rationals())
    return Form(n, terms)


@st.composite
def bidegree_forms(draw, n_max=3):
    n = draw(st.integers(1, n_max))
    p = draw(st.integers(0, n))
    q = draw(st.integers(0, n))
    return draw(forms(n, p, q))


@st.composite
def one_forms_01(draw, n):
    return Form.one_form_01([draw(gaussian_rationals()) for _ in range(n)])


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
