from fractions import Fraction

import pytest
from hypothesis import given

from twisted_hodge.scalars import GaussianRational, conj, is_zero, parse_coeff

from conftest import gaussian_rationals


def test_parse_grammar():
    assert parse_coeff("3") == GaussianRational(3)
    assert parse_coeff("1/2") == GaussianRational(Fraction(1, 2))
    assert parse_coeff("1/2+3/4i") == GaussianRational(Fraction(1, 2), Fraction(3, 4))
    assert parse_coeff("-i") == GaussianRational(0, -1)
    assert parse_coeff("2-i") == GaussianRational(2, -1)


@pytest.mark.parametrize("bad", ["1/0", "abc", "1.5", "", "1/2+i/0"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_coeff(bad)


def test_numeric_mode_accepts_decimals():
    assert parse_coeff("0.25", "numeric") == 0.25
    assert parse_coeff("1/4", "numeric") == 0.25


def test_reduced_denominators():
    x = GaussianRational(Fraction(2, 4), Fraction(-6, 8))
    assert x.re.denominator == 2 and x.im.denominator == 4


@given(gaussian_rationals(), gaussian_rationals(), gaussian_rationals())
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if b:
        assert (a / b) * b == a
    assert conj(a * b) == conj(a) * conj(b)
    assert (a * conj(a)).im == 0


def test_tolerance():
    assert is_zero(1e-12)
    assert not is_zero(1e-6)
    assert is_zero(GaussianRational(0))
