import random

import pytest

from lamiq.errors import InputError
from lamiq.lattice import ae9, relevant_vectors
from lamiq.linalg import vec_dot
from lamiq.rational import QQ
from lamiq.simplexlp import maximize


def test_square_cell():
    rows = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    rhs = [QQ(1, 2)] * 4
    res = maximize(rows, rhs, (3, 2))
    assert res.x == (QQ(1, 2), QQ(1, 2))
    assert res.objective == QQ(5, 2)
    res = maximize(rows, rhs, (-1, 5))
    assert res.x == (QQ(-1, 2), QQ(1, 2))


def test_degenerate_vertex():
    # square with an extra diagonal through a corner: optimum has 3 tight rows
    rows = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1)]
    rhs = [1, 1, 1, 1, QQ(2)]
    res = maximize(rows, rhs, (1, 1))
    assert res.x == (QQ(1), QQ(1))


def test_unbounded_is_an_input_error():
    rows = [(1, 0), (0, 1)]
    rhs = [1, 1]
    with pytest.raises(InputError):
        maximize(rows, rhs, (-1, -1))


def test_feasibility_certificates_on_the_big_cell():
    B = ae9(QQ(4, 7))
    rset = relevant_vectors(B)
    rows = rset.vectors
    rhs = [n / 2 for n in rset.norms2]
    rng = random.Random(77)
    for _ in range(12):
        c = tuple(rng.randint(-10**6, 10**6) for _ in range(9))
        res = maximize(rows, rhs, c)
        tight = 0
        for row, b in zip(rows, rhs):
            d = vec_dot(row, res.x)
            assert d <= b
            tight += d == b
        assert tight >= 9
        assert vec_dot(c, res.x) == res.objective
