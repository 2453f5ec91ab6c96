import pytest
from hypothesis import given, settings, strategies as st

from lamiq.errors import IncompatibleRadicandError, InputError
from lamiq.radical import RadQ, radq_normalize, radq_sqrt, square_free_split
from lamiq.rational import QQ


def test_normalize_extracts_square_factors():
    assert radq_normalize(1, 8) == RadQ(2, 2)
    assert radq_normalize(3, 1) == RadQ(3, 1)
    assert radq_normalize(QQ(1, 2), 12) == RadQ(1, 3)


def test_normalize_the_mixed_radicand_example():
    # 12 * (4/7)^2 + 7 = 535/49; the integer part factors as 5 * 107 (squarefree)
    outer, radical = square_free_split(535 * 49)
    assert (outer, radical) == (7, 535)


def test_canonical_zero():
    z = RadQ(0, 5)
    assert z.radicand == 1 and z.coeff == 0
    assert z == RadQ.from_rational(0)


def test_sqrt_examples():
    assert radq_sqrt(QQ(9, 4)) == RadQ(QQ(3, 2), 1)
    assert radq_sqrt(QQ(1, 2)) == RadQ(QQ(1, 2), 2)
    # cell-to-facet height squared at a = 1/2: (a^2 + 2)/4 = 9/16
    assert radq_sqrt(QQ(9, 16)) == RadQ(QQ(3, 4), 1)
    with pytest.raises(InputError):
        radq_sqrt(QQ(-1))


def test_mul_and_add():
    assert RadQ(3, 2) * RadQ(5, 2) == RadQ(30, 1)
    assert RadQ(1, 3) + RadQ(2, 3) == RadQ(3, 3)
    assert RadQ(1, 6) * RadQ(1, 10) == RadQ(2, 15)
    with pytest.raises(IncompatibleRadicandError):
        RadQ(1, 2) + RadQ(1, 3)


def test_comparison_across_radicands():
    assert RadQ(1, 2) < RadQ(1, 3)
    assert RadQ(-1, 2) < RadQ(1, 5)
    assert RadQ(-1, 2) > RadQ(-1, 3)


def test_sqrt_with_radicand_checks_the_claim():
    v = RadQ.sqrt_with_radicand(QQ(75, 4), 3)
    assert v == RadQ(QQ(5, 2), 3)
    with pytest.raises(IncompatibleRadicandError):
        RadQ.sqrt_with_radicand(QQ(75, 4), 5)


@settings(max_examples=1000, deadline=None)
@given(st.fractions(min_value=0, max_value=10**12, max_denominator=10**9))
def test_sqrt_squares_back(q):
    assert radq_sqrt(q).squared() == q


@given(
    st.integers(min_value=1, max_value=10**6),
    st.integers(min_value=1, max_value=10**6),
)
def test_product_radicand_squarefree(s1, s2):
    x = radq_normalize(1, s1)
    y = radq_normalize(1, s2)
    p = x * y
    outer, radical = square_free_split(p.radicand)
    assert outer == 1  # already squarefree
    assert p.squared() == QQ(s1) * s2
