import numpy as np
import pytest
from hypothesis import given, strategies as st

from twisted_hodge.exterior import (
    DimensionMismatch,
    Form,
    NotHomogeneous,
    basis,
    contract_adjoint,
    hodge_star,
    inner,
    mono_wedge,
    pointwise_norm_identity,
    random_form,
    volume,
    wedge,
)
from twisted_hodge.scalars import GaussianRational

from conftest import bidegree_forms, forms, one_forms_01

phi = lambda n, i: Form.monomial(n, [i - 1], [])
phibar = lambda n, j: Form.monomial(n, [], [j - 1])


def test_wedge_examples():
    n = 2
    assert wedge(phi(n, 1), phi(n, 1)).is_zero()
    assert wedge(phi(n, 1), phibar(n, 1)).terms == {((0,), (0,)): 1}
    assert wedge(phibar(n, 1), phi(n, 1)).terms == {((0,), (0,)): -1}


def test_wedge_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        wedge(phi(2, 1), phi(3, 1))


def test_inner_examples():
    n = 2
    a = Form.monomial(n, [0], [1])
    assert inner(a, a) == 1
    assert inner(phi(n, 1), phi(n, 2)) == 0
    c = GaussianRational(2, 1)
    assert inner(phibar(n, 1).scale(c), phibar(n, 1)) == c


def test_contraction_examples():
    n = 2
    th = phibar(n, 1)
    assert contract_adjoint(th, phibar(n, 1)) == Form.constant(n, 1)
    assert contract_adjoint(th, phi(n, 1)).is_zero()
    # phibar1 ^ phi1 = -phi1 ^ phibar1, so adjointness forces a minus sign
    assert contract_adjoint(th, wedge(phi(n, 1), phibar(n, 1))) == -phi(n, 1)


def test_contraction_matches_adjointness_system():
    # solve <phibar1 ^ u, phi1 ^ phibar1> = <u, x> over the (1,0) basis
    n = 2
    v = wedge(phi(n, 1), phibar(n, 1))
    expected = {m: inner(wedge(phibar(n, 1), Form(n, {m: 1})), v).conjugate() for m in basis(n, 1, 0)}
    got = contract_adjoint(phibar(n, 1), v)
    assert {m: got.terms.get(m, 0) for m in basis(n, 1, 0)} == expected


def test_star_examples():
    for n in (1, 2, 3):
        assert hodge_star(Form.constant(n, 1)) == volume(n)
        assert hodge_star(volume(n)) == Form.constant(n, 1)
        assert hodge_star(hodge_star(phi(n, 1))) == -phi(n, 1)


def test_star_rejects_mixed_degree():
    with pytest.raises(NotHomogeneous):
        hodge_star(Form.constant(2, 1) + phi(2, 1))


@given(st.data())
def test_wedge_parity(data):
    n = data.draw(st.integers(1, 3))
    pa, qa = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    pb, qb = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    a = data.draw(forms(n, pa, qa))
    b = data.draw(forms(n, pb, qb))
    sign = (-1) ** ((pa + qa) * (pb + qb))
    assert wedge(a, b) == wedge(b, a).scale(sign)


@given(st.data())
def test_wedge_associative(data):
    n = data.draw(st.integers(1, 3))
    fs = [data.draw(forms(n, data.draw(st.integers(0, 1)), data.draw(st.integers(0, 1)))) for _ in range(3)]
    assert wedge(wedge(fs[0], fs[1]), fs[2]) == wedge(fs[0], wedge(fs[1], fs[2]))


@given(st.data())
def test_adjointness_exact(data):
    n = data.draw(st.integers(1, 3))
    p, q = data.draw(st.integers(0, n)), data.draw(st.integers(0, n - 1))
    th = data.draw(one_forms_01(n))
    u = data.draw(forms(n, p, q))
    v = data.draw(forms(n, p, q + 1))
    assert inner(wedge(th, u), v) == inner(u, contract_adjoint(th, v))


@given(st.data())
def test_norm_identity_exact(data):
    n = data.draw(st.integers(1, 3))
    th = data.draw(one_forms_01(n))
    beta = data.draw(forms(n, data.draw(st.integers(0, n)), data.draw(st.integers(0, n))))
    assert pointwise_norm_identity(th, beta) == 0


@given(bidegree_forms())
def test_star_sign_law(a):
    k = a.degree() if a.terms else 0
    n = a.n
    assert hodge_star(hodge_star(a)) == a.scale((-1) ** (k * (2 * n - k)))


@given(st.data())
def test_star_defining_property_and_isometry(data):
    n = data.draw(st.integers(1, 3))
    p, q = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    u = data.draw(forms(n, p, q))
    v = data.draw(forms(n, p, q))
    assert wedge(u, hodge_star(v)) == volume(n).scale(inner(u, v))
    assert inner(hodge_star(u), hodge_star(v)) == inner(v, u)


@given(bidegree_forms())
def test_conjugation_involution(a):
    assert a.conj().conj() == a
    assert inner(a.conj(), a.conj()) == inner(a, a)


def test_norm_identity_numeric_tolerance():
    rng = np.random.default_rng(7)
    n = 3
    th = Form.one_form_01([complex(*rng.normal(size=2)) for _ in range(n)])
    beta = Form(n, {m: complex(*rng.normal(size=2)) for m in basis(n, 1, 2)})
    res = pointwise_norm_identity(th, beta)
    assert abs(res) <= 1e-12 * (1 + abs(inner(beta, beta)) * abs(inner(th, th)))


def test_mono_wedge_overlap():
    assert mono_wedge(((0,), ()), ((0,), ()), 2)[0] == 0


def test_random_form_is_homogeneous(rng):
    f = random_form(rng, 3, 1, 2)
    assert f.bidegrees() <= {(1, 2)}
