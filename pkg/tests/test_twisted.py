from fractions import Fraction
from math import comb

import pytest

from twisted_hodge.exterior import Form, real_one_form
from twisted_hodge.model import load_model, torus_model
from twisted_hodge.twisted import (
    NotClosed,
    NotDbarClosed,
    NotFlat,
    PreconditionExact,
    build_twisted,
    cohomology_dims,
    commutator_check,
    dirac_assemble,
    dirac_index,
    h0_twisted,
    hodge_table,
    kernel_even_odd,
    primitive_decomposition,
    real_morse_novikov,
    twisted_euler,
    twisted_table,
)


def th(*coeffs):
    return Form.one_form_01(list(coeffs))


def test_torus_differential_is_wedge_only():
    tc = build_twisted(torus_model(2), th(1, 0), 0)
    assert len(tc.mats) == 2 and tc.mats[0].shape == (2, 1)


def test_kt_phibar1_accepted():
    build_twisted(load_model("kodaira_thurston"), th(1, 0), 1)


def test_not_dbar_closed():
    m = load_model("iwasawa")
    with pytest.raises(NotDbarClosed) as exc:
        build_twisted(m, th(0, 0, 1), 0)
    assert not exc.value.dbar_theta.is_zero()


def test_kt_phibar2_is_dbar_closed():
    assert twisted_table(load_model("kodaira_thurston"), th(0, 1)).grid() == [[0] * 3] * 3


@pytest.mark.parametrize("n", [1, 2, 3])
def test_untwisted_binomial(n):
    grid = hodge_table(torus_model(n)).grid()
    assert grid == [[comb(n, p) * comb(n, q) for q in range(n + 1)] for p in range(n + 1)]


def test_torus_row():
    assert hodge_table(torus_model(2)).row(1) == [2, 4, 2]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_vanishing(n):
    t = twisted_table(torus_model(n), th(1, *[0] * (n - 1)))
    assert all(v == 0 for v in t.dims.values())
    assert t.provenance == "exact-rank"


def test_koszul_n1():
    assert cohomology_dims(build_twisted(torus_model(1), th(2), 0)).row(0) == [0, 0]


def test_numeric_matches_exact():
    for name in ["kodaira_thurston", "hopf_surface", "iwasawa"]:
        m = load_model(name)
        assert hodge_table(m, "numeric").grid() == hodge_table(m).grid()


def test_known_tables():
    assert hodge_table(load_model("hopf_surface")).grid() == [[1, 1, 0], [0, 0, 0], [0, 1, 1]]
    assert hodge_table(load_model("kodaira_thurston")).grid() == [[1, 2, 1]] * 3


def test_euler():
    m = torus_model(2)
    assert twisted_euler(build_twisted(m, th(1, 0), 1)) == 0
    assert twisted_euler(build_twisted(m, th(0, 0), 1)) == 0
    assert twisted_euler(build_twisted(m, th(0, 0), 0)) == 0
    kt = load_model("kodaira_thurston")
    assert twisted_euler(build_twisted(kt, th(0, 0), 0)) == twisted_euler(build_twisted(kt, th(1, 0), 0))


@pytest.mark.parametrize("name", ["torus_n2", "kodaira_thurston", "hopf_surface"])
@pytest.mark.parametrize("t", [0, 1, 5])
def test_index_is_euler(name, t):
    m = load_model(name)
    base = hodge_table(m)
    for p in range(m.n + 1):
        assert dirac_index(dirac_assemble(m, th(0, 0), p, t)) == twisted_euler(base, p)


def test_kernel_split():
    k = kernel_even_odd(dirac_assemble(torus_model(2), th(1, 0), 0, 1))
    assert (k.even, k.odd) == (0, 0)
    k = kernel_even_odd(dirac_assemble(torus_model(2), th(0, 0), 0, 1))
    assert (k.even, k.odd) == (2, 2)


def test_kernel_split_numeric_small_t():
    m = torus_model(1).as_numeric()
    k = kernel_even_odd(dirac_assemble(m, th(1.0), 0, 0.001))
    assert (k.even, k.odd) == (0, 0)
    assert k.sigma_min == pytest.approx(0.001)


def test_h0():
    assert h0_twisted(torus_model(2), th(1, 0)) == 0
    assert h0_twisted(load_model("kodaira_thurston"), th(1, 0)) == 0
    with pytest.raises(PreconditionExact) as exc:
        h0_twisted(torus_model(2), th(0, 0))
    assert exc.value.value == 1


def dx1(n):
    return real_one_form([Fraction(1)] + [Fraction(0)] * (n - 1), [Fraction(0)] * n)


def test_morse_novikov():
    r = real_morse_novikov(torus_model(1), dx1(1))
    assert r.dims == [0, 0, 0] and r.euler == 0
    r = real_morse_novikov(torus_model(1), Form.zero(1))
    assert r.dims == [1, 2, 1]
    r = real_morse_novikov(torus_model(2), dx1(2))
    assert set(r.dims) == {0} and r.euler == r.untwisted_euler == 0


def test_morse_novikov_rejects():
    with pytest.raises(ValueError):
        real_morse_novikov(torus_model(1), th(1))
    kt = load_model("kodaira_thurston")
    from twisted_hodge.scalars import GaussianRational

    i = GaussianRational(0, 1)
    # i(phi2 - phibar2) is real with d = 2i phi1 ^ phibar1
    with pytest.raises(NotClosed):
        real_morse_novikov(kt, (Form.monomial(2, [1], []) - Form.monomial(2, [], [1])).scale(i))
    assert real_morse_novikov(kt, Form.monomial(2, [1], []) + Form.monomial(2, [], [1])).euler == 0


@pytest.mark.parametrize("n,theta", [(2, th(1, 0)), (3, th(1, 0, 1))])
def test_commutators(n, theta):
    vals = commutator_check(torus_model(n), theta)
    assert "[Laplacian_dbar, thetabar_wedge]" in vals
    assert all(v == 0 for v in vals.values())


def test_commutators_refuse_nonflat():
    with pytest.raises(NotFlat):
        commutator_check(load_model("kodaira_thurston"), th(1, 0))


@pytest.mark.parametrize(
    "n,p,q,s",
    [(2, 1, 1, (1, 1, 1, 1)), (2, 0, 0, (1, 0, 0, 0))],
)
def test_primitive_examples(n, p, q, s):
    d = primitive_decomposition(torus_model(n), th(1, *[0] * (n - 1)), p, q)
    assert d.s == s and d.balanced


def test_primitive_n3():
    d = primitive_decomposition(torus_model(3), th(1, 0, 0), 2, 1)
    assert sum(d.s) == 9 == d.h and d.balanced
