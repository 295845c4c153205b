import numpy as np
import pytest
from hypothesis import given, strategies as st

from twisted_hodge.genus import (
    ChiPolynomial,
    FixedPointDatum,
    HodgeTable,
    InvalidTable,
    STable,
    binomial_table,
    chi,
    kosniowski_sum,
    kunneth,
    parallel_decomposition_chi,
    projective_line,
    random_stable,
    special_values,
    vaisman_hodge,
)
from twisted_hodge.exterior import Form
from twisted_hodge.model import load_model, torus_model
from twisted_hodge.twisted import hodge_table


def test_torus_chi_vanishes():
    poly = chi(binomial_table(2))
    assert poly.is_zero()
    sv = special_values(binomial_table(2))
    assert (sv.arithmetic_genus, sv.euler_number, sv.y_one) == (0, 0, 0)


def test_cp1():
    poly = chi(projective_line())
    assert poly.coeffs == (1, -1) and str(poly) == "1 - y"
    assert special_values(projective_line()).euler_number == 2


def test_kt_chi_vanishes():
    t = hodge_table(load_model("kodaira_thurston"))
    assert chi(HodgeTable(2, t.grid())).is_zero()


def test_kosniowski():
    assert kosniowski_sum([FixedPointDatum(0), FixedPointDatum(1)]) == chi(projective_line())
    assert kosniowski_sum([]).is_zero()
    prod = kunneth(projective_line(), projective_line())
    assert kosniowski_sum([0, 1, 1, 2], 2) == chi(prod)
    assert chi(prod) == chi(projective_line()) * chi(projective_line())


def test_kosniowski_range():
    with pytest.raises(ValueError):
        kosniowski_sum([3], 2)


def test_hopf_stable():
    h = vaisman_hodge(STable(2, [[1, 0], [0, 0]]))
    assert h.h == hodge_table(load_model("hopf_surface")).grid()
    assert h.serre_symmetric() and chi(h).is_zero()


def test_zero_stable():
    h = vaisman_hodge(STable(2, [[0, 0], [0, 0]]))
    assert all(v == 0 for r in h.h for v in r)


def test_n3_stable():
    h = vaisman_hodge(STable(3, [[1, 0, 0], [0, 1, 0], [0, 0, 0]]))
    assert all(h.chi_p(p) == 0 for p in range(4))


def test_asymmetric_rejected():
    with pytest.raises(InvalidTable):
        STable(2, [[1, 1], [0, 0]])


def test_negative_rejected():
    with pytest.raises(InvalidTable):
        HodgeTable(1, [[1, -1], [0, 1]])


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_random_stables_vanish(n, seed):
    h = vaisman_hodge(random_stable(np.random.default_rng(seed), n))
    assert h.serre_symmetric() and chi(h).is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_telescope(n):
    reps = parallel_decomposition_chi(torus_model(n), Form.one_form_01([1] + [0] * (n - 1)))
    assert all(r.chi_p == 0 and r.reconstruction_ok for r in reps)


def test_csv_and_dict():
    t = projective_line()
    assert t.to_csv().splitlines()[0] == "p,q,h"
    assert t.as_dict()["chi_y"] == [1, -1]


def test_chi_polynomial_trims():
    assert ChiPolynomial((1, 0, 0)).coeffs == (1,)
    assert str(ChiPolynomial((0,))) == "0"
