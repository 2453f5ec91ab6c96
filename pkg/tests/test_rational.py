from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lamiq.errors import InputError
from lamiq.rational import QQ, format_rational, parse_rational, rational_round


def test_parse_and_format_roundtrip():
    assert format_rational(parse_rational("-6/8")) == "-3/4"
    assert format_rational(parse_rational("7")) == "7"
    assert format_rational(parse_rational(" 22 / 7 ")) == "22/7"


def test_parse_rejects_garbage():
    for bad in ("", "1/0", "a/b", "1/2/3"):
        with pytest.raises(InputError):
            parse_rational(bad)


def test_round_half_toward_positive_infinity():
    assert rational_round(QQ(1, 2)) == 1
    assert rational_round(QQ(-1, 2)) == 0
    assert rational_round(QQ(5, 2)) == 3
    assert rational_round(QQ(7, 10)) == 1
    assert rational_round(QQ(-7, 10)) == -1


rationals = st.fractions(
    min_value=-(10**18), max_value=10**18, max_denominator=10**15
)


@given(rationals, rationals, rationals)
def test_field_axioms(p, q, r):
    p, q, r = QQ(p), QQ(q), QQ(r)
    assert (p + q) + r == p + (q + r)
    assert p * (q + r) == p * q + p * r
    assert p + q == q + p
    if q != 0:
        assert (p / q) * q == p


@given(rationals)
def test_fraction_interop(p):
    q = QQ(p)
    assert Fraction(int(q.numerator), int(q.denominator)) == p
    assert format_rational(q) == format_rational(parse_rational(format_rational(q)))
