"""Session-scoped heavy fixtures: the 9-D family models are built once and
shared by every test that needs them (the face-lattice build is the long pole)."""

import pytest

from lamiq.family import PhaseBracket, PhaseModel, reconstruct_polynomials
from lamiq.lattice import ae9_family
from lamiq.rational import QQ
from lamiq.voronoi import CellComplex

SEED = 20240


@pytest.fixture(scope="session")
def fam9():
    return ae9_family()


@pytest.fixture(scope="session")
def model_a(fam9):
    return PhaseModel.build(fam9, PhaseBracket(QQ(0), QQ(1, 2)), QQ(4, 7), seed=SEED)


@pytest.fixture(scope="session")
def model_b(fam9):
    return PhaseModel.build(fam9, PhaseBracket(QQ(1, 2), QQ(1)), QQ(4, 5), seed=SEED)


@pytest.fixture(scope="session")
def model_c(fam9):
    return PhaseModel.build(fam9, PhaseBracket(QQ(1), QQ(2)), QQ(5, 4), seed=SEED)


@pytest.fixture(scope="session")
def model_d(fam9):
    return PhaseModel.build(fam9, PhaseBracket(QQ(2), QQ(3)), QQ(3, 2), seed=SEED)


@pytest.fixture(scope="session")
def fit_a(model_a):
    return reconstruct_polynomials(model_a)


@pytest.fixture(scope="session")
def fit_b(model_b):
    return reconstruct_polynomials(model_b)


@pytest.fixture(scope="session")
def fit_c(model_c):
    return reconstruct_polynomials(model_c)


@pytest.fixture(scope="session")
def fit_d(model_d):
    return reconstruct_polynomials(model_d)


@pytest.fixture(scope="session")
def cell_at_one(fam9):
    return CellComplex(fam9.instantiate(QQ(1)), fam9.group, seed=SEED)
