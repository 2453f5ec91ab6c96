import numpy as np
import pytest

from lamiq.errors import InternalConsistencyError
from lamiq.lattice import GeneratorMatrix, ae9, laminate, relevant_vectors
from lamiq.linalg import qvec, vec_dot
from lamiq.rational import QQ
from lamiq.symmetry import ae9_group, sign_flip_group
from lamiq.voronoi import (
    CellComplex,
    classify_faces,
    enumerate_vertices,
    facet_specs,
    facet_vertex_set,
    solve_vertex,
)

Z2 = GeneratorMatrix([[1, 0], [0, 1]])
Z3 = GeneratorMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]])


@pytest.fixture(scope="module")
def z2_cell():
    return CellComplex(Z2, sign_flip_group(2), seed=3)


@pytest.fixture(scope="module")
def cube_cell():
    return CellComplex(Z3, sign_flip_group(3), seed=3)


def test_square_vertices(z2_cell):
    assert sorted(z2_cell.vset.coords) == [
        (QQ(-1, 2), QQ(-1, 2)),
        (QQ(-1, 2), QQ(1, 2)),
        (QQ(1, 2), QQ(-1, 2)),
        (QQ(1, 2), QQ(1, 2)),
    ]
    assert z2_cell.lattice.totals() == {0: 4, 1: 4}
    for j in range(4):
        assert len(facet_vertex_set(z2_cell.lattice, j)) == 2


def test_cube_face_lattice(cube_cell):
    assert cube_cell.lattice.totals() == {0: 8, 1: 12, 2: 6}
    assert cube_cell.lattice.euler_alternating_sum() == 2
    # all facets of the cube are one congruence class
    from lamiq.moments import compute_face_moments

    records = compute_face_moments(cube_cell)
    classify_faces(cube_cell.lattice, {o: r.volume.squared() for o, r in records.items()})
    assert [len(cube_cell.lattice.classes[d]) for d in range(3)] == [1, 1, 1]


def test_children_cover_parents(cube_cell):
    for d, recs in cube_cell.lattice.records.items():
        if d == 0:
            continue
        for rec in recs:
            union = np.unique(np.concatenate([cl.face for cl in rec.children]))
            assert (union == np.sort(rec.rep)).all()


def test_orbit_sizes_divide_group_order(cube_cell):
    order = 2**3
    for recs in cube_cell.lattice.records.values():
        for rec in recs:
            assert order % rec.size == 0


def test_solve_vertex_examples():
    a = QQ(4, 7)
    facets = facet_specs(relevant_vectors(ae9(a)))
    # the nine facet planes of the worked vertex: x9 = a, x1 + xk = 1 (k=2..8),
    # and the diagonal plane; solution has w = (1 - a^2)/6 = 11/98
    normals = {tuple(f.normal): i for i, f in enumerate(facets)}
    active = [normals[tuple(qvec([0] * 8 + [2 * a]))]]
    for k in range(1, 8):
        m = [0] * 9
        m[0] = 1
        m[k] = 1
        active.append(normals[tuple(qvec(m))])
    active.append(normals[tuple(qvec([QQ(1, 2)] * 8 + [a]))])
    x, err = solve_vertex(facets, active)
    assert err is None
    w = QQ(11, 98)
    assert x == (1 - w,) + (w,) * 7 + (a,)
    # rank-deficient and anti-parallel plane sets come back as reports, not exceptions
    i = normals[tuple(qvec([1, 1] + [0] * 7))]
    j = normals[tuple(qvec([-1, -1] + [0] * 7))]
    x, err = solve_vertex(facets, [i])
    assert x is None and err == "underdetermined"
    x, err = solve_vertex(facets, [i, j])
    assert x is None and err == "inconsistent"


def test_solve_vertex_h1_type():
    a = QQ(4, 7)
    facets = facet_specs(relevant_vectors(ae9(a)))
    target = qvec([0] * 7 + [1, a])
    active = [i for i, f in enumerate(facets) if vec_dot(f.normal, target) == f.rhs]
    assert len(active) >= 9
    x, err = solve_vertex(facets, active[:20])
    # the full active set of the farthest vertex type pins it down
    x2, err2 = solve_vertex(facets, active)
    assert err2 is None and x2 == tuple(target)


def test_enumerate_vertices_saturation_budget():
    from lamiq.errors import ResourceError

    facets = facet_specs(relevant_vectors(Z2))
    with pytest.raises(ResourceError):
        enumerate_vertices(facets, sign_flip_group(2), seed=1, saturation=10, draw_budget=3)


def test_tightness_pattern_guard():
    cell = CellComplex(Z2, sign_flip_group(2), seed=3)
    # geometry inconsistent with the claimed combinatorics must trip the clone guard
    from lamiq.errors import InputError

    other = GeneratorMatrix([[2, 0], [0, 2]])
    with pytest.raises(InputError):
        CellComplex.at_new_parameter(cell, other, cell.vset.coords)
