import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kwtopo import algebra, complexes
from kwtopo.complexes import (
    build_cube_3complex,
    build_grid_1complex,
    build_grid_2complex,
    build_torus_2complex,
    build_torus_3complex,
    cohomology_dims,
    homology_dims,
)
from kwtopo.errors import BoundaryConditionViolated, CompositeModulus, InvalidHoleIndex, NotATorus, UnknownCycle

BUILDERS = {
    "square graph": lambda q: build_grid_1complex(3, 3, q),
    "grid 4x4": lambda q: build_grid_2complex(4, 4, q),
    "grid with hole": lambda q: build_grid_2complex(4, 4, q, holes=[4]),
    "torus 2x3": lambda q: build_torus_2complex(2, 3, q),
    "torus 3x3": lambda q: build_torus_2complex(3, 3, q),
    "cube": lambda q: build_cube_3complex(1, q),
    "cube 2": lambda q: build_cube_3complex(2, q),
    "3-torus 1": lambda q: build_torus_3complex(1, q),
    "3-torus 2": lambda q: build_torus_3complex(2, q),
}


def test_square_graph_labels_and_sizes():
    g = build_grid_1complex(3, 3, 2)
    assert g.cell_counts() == [12, 9]
    assert g.labels[0] == tuple(f"v{i}" for i in range(9))
    for lab in ("a0,1", "a1,4", "a3,4", "a0,3", "a6,7", "a7,8", "a5,8"):
        assert lab in g.labels[1]
    assert homology_dims(g) == [4, 1]


def test_boundary_of_weighted_path_over_f5():
    g = build_grid_1complex(3, 3, 5)
    z = g.chain(1, {"a6,7": 2, "a7,8": 3})
    assert g.describe(0, g.boundary(1) @ z) == {"v6": 3, "v7": 4, "v8": 3}


def test_square_graph_cycles_span_kernel():
    g = build_grid_1complex(3, 3, 5)
    c0 = g.chain(1, {"a0,1": 1, "a1,4": 1, "a3,4": -1, "a0,3": -1})
    assert not (g.boundary(1) @ c0).any()
    assert len(algebra.kernel_basis(g.boundary(1))) == 4


def test_face_boundary_is_clockwise():
    g = build_grid_2complex(3, 3, 5)
    s0 = g.boundary(2) @ g.chain(2, {"s0": 1})
    assert g.describe(1, s0) == {"a0,1": 1, "a1,4": 1, "a3,4": 4, "a0,3": 4}
    both = g.boundary(2) @ g.chain(2, {"s0": 1, "s1": 1})
    # the shared edge a1,4 cancels
    assert "a1,4" not in g.describe(1, both)


def test_grid_tables():
    g = build_grid_2complex(4, 4, 2)
    assert g.cell_counts() == [9, 24, 16]
    assert homology_dims(g) == [0, 0, 1]
    h = build_grid_2complex(4, 4, 2, holes=[4])
    assert h.cell_counts() == [8, 24, 16]
    assert h.labels[2] == tuple(f"s{i}" for i in range(9) if i != 4)
    assert homology_dims(h) == [0, 1, 1]


def test_bad_hole_index():
    with pytest.raises(InvalidHoleIndex):
        build_grid_2complex(4, 4, 2, holes=[9])


@pytest.mark.parametrize("L1", [2, 3, 4])
@pytest.mark.parametrize("L2", [2, 3, 4])
def test_torus_homology(L1, L2):
    assert homology_dims(build_torus_2complex(L1, L2, 2)) == [1, 2, 1]


def test_cube_and_three_torus():
    cube = build_cube_3complex(1, 2)
    assert cube.cell_counts() == [1, 6, 12, 8]
    assert homology_dims(cube) == [0, 0, 0, 1]
    for L in (1, 2, 3):
        assert homology_dims(build_torus_3complex(L, 2)) == [1, 3, 3, 1]


def test_cube_faces_front_left_bottom_positive():
    cube = build_cube_3complex(1, 3)
    col = cube.boundary(3).data[:, 0].astype(int)
    assert sorted(col.tolist()) == [1, 1, 1, 2, 2, 2]


def test_single_cell_torus_labels_are_unique():
    t = build_torus_3complex(1, 2)
    assert len(set(t.labels[1])) == 3


@pytest.mark.parametrize("name", list(BUILDERS))
@pytest.mark.parametrize("q", [2, 3, 5])
def test_boundary_squared_and_cohomology(name, q):
    c = BUILDERS[name](q)
    complexes.check_boundary(c)
    for i in range(1, c.dim):
        assert (c.boundary(i) @ c.boundary(i + 1)).is_zero()
    assert cohomology_dims(c) == homology_dims(c)


@pytest.mark.parametrize("name", list(BUILDERS))
def test_coboundary_kernel_is_complement_of_boundary_image(name):
    c = BUILDERS[name](3)
    for i in range(1, c.dim + 1):
        ker_d = algebra.kernel_basis(c.coboundary(i))
        img = algebra.image_basis(c.boundary(i))
        perp = algebra.orthogonal_complement(img, 3, c.sizes[i - 1])
        assert algebra.same_span(ker_d, perp, 3, c.sizes[i - 1])


@given(st.sampled_from(list(BUILDERS)), st.sampled_from([2, 3, 5]), st.integers(0, 2**32 - 1))
def test_reorientation_keeps_homology(name, q, seed):
    c = BUILDERS[name](q)
    r = complexes.reorient(c, np.random.default_rng(seed))
    complexes.check_boundary(r)
    assert homology_dims(r) == homology_dims(c)


def test_broken_complex_detected():
    g = build_grid_2complex(3, 3, 3)
    bad = np.array(g.boundary(2).data, dtype=int)
    bad[0, 0] = (bad[0, 0] + 1) % 3 if bad[0, 0] else 1
    broken = complexes.ChainComplex(3, g.labels, (g.boundary(1), algebra.ZqMatrix(bad, 3)))
    with pytest.raises(BoundaryConditionViolated):
        homology_dims(broken)


def test_composite_modulus_homology():
    with pytest.raises(CompositeModulus):
        homology_dims(build_torus_2complex(2, 2, 4))


# ---- torus cycles and cosets


def test_torus_cycles_are_independent_cycles():
    t = build_torus_2complex(3, 3, 3)
    cyc = complexes.torus_cycles(t)
    for v in cyc.as_list():
        assert not (t.boundary(1) @ v).any()
        assert v.sum() == 3
    assert complexes.coset_label(t, cyc.c_h) == (1, 0)
    assert complexes.coset_label(t, cyc.c_v) == (0, 1)
    assert complexes.coset_label(t, np.zeros(t.sizes[1])) == (0, 0)
    boundary_of_face = t.boundary(2) @ t.chain(2, {"s0": 1})
    assert complexes.coset_label(t, boundary_of_face) == (0, 0)


def test_twist_edges_cross_each_cycle_once():
    t = build_torus_2complex(3, 4, 2)
    cyc = complexes.torus_cycles(t)
    for name, c in (("h", cyc.c_h), ("v", cyc.c_v)):
        seam = complexes.dual_twist_edges(t, name)
        assert len(seam) == (4 if name == "h" else 3)
        # the seam is a cocycle pairing to 1 with the other cycle and 0 with this one
        ind = np.zeros(t.sizes[1], dtype=int)
        ind[seam] = 1
        assert not (t.boundary(2).T @ ind).any()
    seam_h = np.zeros(t.sizes[1], dtype=int)
    seam_h[complexes.dual_twist_edges(t, "h")] = 1
    assert int(seam_h @ cyc.c_v) % 2 == 1 and int(seam_h @ cyc.c_h) % 2 == 0


@pytest.mark.parametrize(
    "build,q,count,size",
    [
        (lambda: build_torus_2complex(2, 2, 2), 2, 4, 8),
        (lambda: build_torus_2complex(3, 3, 2), 2, 4, 256),
        (lambda: build_torus_2complex(2, 2, 3), 3, 9, 27),
        (lambda: build_torus_3complex(2, 2), 2, 8, 16384),
    ],
)
def test_cosets_partition_cycle_space(build, q, count, size):
    c = build()
    parts = complexes.coset_partition(c)
    assert len(parts) == count
    assert set(parts.values()) == {size}
    assert sum(parts.values()) == q ** len(algebra.kernel_basis(c.boundary(1)))


def test_cycle_errors():
    with pytest.raises(NotATorus):
        complexes.torus_cycles(build_grid_2complex(3, 3, 2))
    with pytest.raises(UnknownCycle):
        complexes.dual_twist_edges(build_torus_2complex(2, 2, 2), "d")


# ---- export


def test_json_and_dot_export():
    g = build_grid_2complex(3, 3, 2, holes=[1])
    doc = json.loads(complexes.to_json(g))
    assert doc == complexes.to_dict(g)
    dot = complexes.to_dot(build_grid_1complex(3, 3, 2))
    assert dot.startswith("digraph") and '"v0" -> "v1"' in dot


def test_edge_endpoints_follow_boundary():
    t = build_torus_2complex(3, 3, 3)
    for j in range(t.sizes[1]):
        u, v = complexes.edge_endpoints(t, j)
        col = t.boundary(1).data[:, j]
        assert col[v] == 1 and col[u] == 2
