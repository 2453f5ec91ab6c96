import random

import pytest

from lamiq.approx import ApproxReal, root_bounds, set_precision_bits, get_precision_bits
from lamiq.rational import QQ


def test_root_bounds_contain_and_are_tight():
    lo, hi = root_bounds(QQ(2), 2)
    assert lo * lo <= 2 <= hi * hi
    assert hi - lo <= QQ(1, 2**128)
    lo, hi = root_bounds(QQ(9, 4), 2)
    assert lo == hi == QQ(3, 2)


def test_interval_arithmetic_contains_exact_values():
    rng = random.Random(3)
    for _ in range(200):
        p = QQ(rng.randint(1, 50), rng.randint(1, 50))
        q = QQ(rng.randint(1, 50), rng.randint(1, 50))
        x = ApproxReal.sqrt(p)
        y = ApproxReal.sqrt(q)
        combo = (x * y + x - y) / (y + 1)
        assert combo.lo <= combo.hi
        assert (x * x).contains(p)
        assert (y * y).contains(q)


def test_random_expression_trees_preserve_containment():
    # build the same random expression over exact rationals and over widened
    # intervals around them; the exact value must stay inside the interval
    rng = random.Random(17)
    for _ in range(150):
        exact_vals = [QQ(rng.randint(-30, 30), rng.randint(1, 9)) for _ in range(4)]
        fuzz = QQ(1, 10**9)
        intervals = [ApproxReal(v - fuzz, v + fuzz) for v in exact_vals]

        def combine(av, bv, ai, bi):
            op = rng.randrange(4)
            if op == 0:
                return av + bv, ai + bi
            if op == 1:
                return av - bv, ai - bi
            if op == 2:
                return av * bv, ai * bi
            if bi.lo <= 0 <= bi.hi:
                return av + bv, ai + bi
            return av / bv, ai / bi

        ev, iv = exact_vals[0], intervals[0]
        for v, i in zip(exact_vals[1:], intervals[1:]):
            ev, iv = combine(ev, v, iv, i)
        assert iv.contains(ev)


def test_rational_power_and_ordering():
    v = ApproxReal.rational_power(QQ(2), 11, 9)
    assert v.lo**9 <= QQ(2) ** 11 <= v.hi**9
    a = ApproxReal(QQ(1, 3), QQ(1, 2))
    b = ApproxReal(QQ(3, 4), QQ(7, 8))
    assert a.separated_below(b)
    assert not b.separated_below(a)


def test_decimal_rendering():
    x = ApproxReal.exactly(QQ(1, 3))
    assert x.decimal(6) == "0.333333"
    y = ApproxReal.exactly(QQ(-5, 4))
    assert y.decimal(3) == "-1.250"


def test_precision_config():
    old = get_precision_bits()
    try:
        set_precision_bits(64)
        lo, hi = root_bounds(QQ(3), 2)
        assert hi - lo <= QQ(1, 2**64)
    finally:
        set_precision_bits(old)
    with pytest.raises(Exception):
        set_precision_bits(2)
