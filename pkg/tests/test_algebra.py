import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kwtopo import algebra
from kwtopo.algebra import Character, ZqElem, ZqMatrix
from kwtopo.complexes import build_grid_1complex, build_grid_2complex, build_torus_2complex
from kwtopo.errors import BudgetExceeded, CompositeModulus, ModulusMismatch

PRIMES = [2, 3, 5, 7]


def in_span(vectors, v, q):
    rows = algebra._stack(list(vectors), len(v))
    return algebra.span_rank(list(rows) + [v], q, len(v)) == algebra.span_rank(list(rows), q, len(v))


@st.composite
def prime_matrices(draw, max_dim=6):
    q = draw(st.sampled_from(PRIMES))
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    flat = draw(st.lists(st.integers(0, q - 1), min_size=r * c, max_size=r * c))
    return ZqMatrix(np.array(flat).reshape(r, c), q)


# ---- elements and characters


def test_elements_reduce_and_reject_mixed_moduli():
    a = ZqElem(7, 5)
    assert a.value == 2
    assert (a + 4).value == 1
    assert (a * a).value == 4
    assert (-a).value == 3
    assert (3 - a).value == 1
    assert (a.inverse() * a).value == 1
    with pytest.raises(ModulusMismatch):
        a + ZqElem(1, 3)


def test_character_at_zero_is_exactly_one():
    for q in (2, 3, 5, 12):
        for k in range(q):
            assert Character(q, k)(0) == 1


@given(st.integers(2, 11), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
def test_character_multiplicative(q, k, x, y):
    chi = Character(q, k)
    assert abs(chi(x + y) - chi(x) * chi(y)) < 1e-12


@pytest.mark.parametrize("q", [2, 3, 5, 6, 8])
def test_character_orthogonality(q):
    for j, k in itertools.product(range(q), repeat=2):
        s = sum(Character(q, j)(x) * Character(q, k)(-x) for x in range(q))
        assert abs(s - (q if j == k else 0)) < 1e-9


# ---- rank / kernel / image


def test_rank_trivial_cases():
    assert algebra.rank(ZqMatrix.identity(3, 2)) == 3
    assert algebra.rank(ZqMatrix.zeros(2, 5, 3)) == 0


def test_rank_of_square_graph_boundary():
    g = build_grid_1complex(3, 3, 2)
    assert algebra.rank(g.boundary(1)) == 8
    assert len(algebra.kernel_basis(g.boundary(1))) == 12 - 8


def test_composite_modulus_rejected():
    m = ZqMatrix.identity(2, 4)
    for fn in (algebra.rank, algebra.kernel_basis, algebra.image_basis):
        with pytest.raises(CompositeModulus):
            fn(m)
    with pytest.raises(CompositeModulus):
        algebra.orthogonal_complement([np.array([1, 1])], 6)


def test_kernel_small_cases():
    assert algebra.kernel_basis(ZqMatrix.identity(4, 2)) == []
    (v,) = algebra.kernel_basis(ZqMatrix([[1, 1]], 2))
    assert v.tolist() == [1, 1]


def test_torus_kernel_and_image_dimensions():
    t = build_torus_2complex(2, 2, 2)
    assert len(algebra.kernel_basis(t.boundary(1))) == 5
    assert len(algebra.image_basis(t.boundary(2))) == 3


def test_image_of_square_grid_faces():
    g = build_grid_2complex(4, 4, 2)
    assert algebra.image_basis(ZqMatrix.zeros(3, 3, 2)) == []
    assert len(algebra.image_basis(g.boundary(2))) == 9


@given(prime_matrices())
def test_rank_equals_rank_of_transpose(m):
    assert algebra.rank(m) == algebra.rank(m.T)


@given(prime_matrices())
def test_rank_nullity_and_kernel_vectors(m):
    ker = algebra.kernel_basis(m)
    img = algebra.image_basis(m)
    assert len(ker) + len(img) == m.cols
    assert len(img) == algebra.rank(m)
    for v in ker:
        assert not (m @ v).any()
    assert algebra.span_rank(ker, m.q, m.cols) == len(ker)


@given(prime_matrices())
def test_double_complement_returns_original_span(m):
    rows = list(m.data)
    perp = algebra.orthogonal_complement(rows, m.q)
    assert len(perp) == m.cols - algebra.rank(m)
    back = algebra.orthogonal_complement(perp, m.q, m.cols)
    assert algebra.same_span(rows, back, m.q, m.cols)


def test_complement_examples():
    (v,) = algebra.orthogonal_complement([np.array([1, 1])], 2)
    assert v.tolist() == [1, 1]
    assert algebra.orthogonal_complement(list(np.eye(3, dtype=int)), 5) == []


def test_kernel_complement_is_transpose_image_on_torus():
    t = build_torus_2complex(2, 2, 2)
    perp = algebra.orthogonal_complement(algebra.kernel_basis(t.boundary(1)), 2, 8)
    assert algebra.same_span(perp, algebra.image_basis(t.boundary(1).T), 2, 8)


@given(prime_matrices(), st.data())
def test_solve_finds_preimages(m, data):
    x = np.array(data.draw(st.lists(st.integers(0, m.q - 1), min_size=m.cols, max_size=m.cols)))
    b = m @ x
    sol = algebra.solve(m, b)
    assert sol is not None
    assert np.array_equal(m @ sol, b)


def test_solve_reports_inconsistency():
    assert algebra.solve(ZqMatrix([[1, 0], [1, 0]], 3), [1, 2]) is None


# ---- span enumeration


def test_enumerate_empty_and_single():
    assert [v.tolist() for v in algebra.enumerate_span([], 2, length=3)] == [[0, 0, 0]]
    got = {tuple(v) for v in algebra.enumerate_span([np.array([1, 0, 1])], 2)}
    assert got == {(0, 0, 0), (1, 0, 1)}


def test_enumerate_torus_face_boundaries_against_filter():
    t = build_torus_2complex(2, 2, 2)
    basis = algebra.image_basis(t.boundary(2))
    spanned = {tuple(v) for v in algebra.enumerate_span(basis, 2)}
    assert len(spanned) == 8
    cols = t.boundary(2).data.T
    filtered = {v for v in itertools.product(range(2), repeat=8) if in_span(cols, np.array(v), 2)}
    assert spanned == filtered


def test_enumerate_partitions_deterministically():
    basis = [np.array([1, 2, 0, 1]), np.array([0, 1, 1, 1])]
    whole = [tuple(v) for v in algebra.enumerate_span(basis, 3)]
    pieces = [tuple(v) for lo in range(0, 9, 4) for v in algebra.enumerate_span(basis, 3, start=lo, stop=lo + 4)]
    assert whole == pieces
    assert len(set(whole)) == 9


def test_enumerate_budget():
    with pytest.raises(BudgetExceeded):
        list(algebra.enumerate_span(list(np.eye(5, dtype=int)), 2, budget=16))


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("KWTOPO_BUDGET", "7")
    assert algebra.default_budget() == 7
    monkeypatch.delenv("KWTOPO_BUDGET")
    assert algebra.default_budget() == 2**24


def test_matrix_is_immutable_and_reduced():
    m = ZqMatrix([[5, -1], [2, 3]], 3)
    assert m.data.tolist() == [[2, 2], [2, 0]]
    with pytest.raises(ValueError):
        m.data[0, 0] = 1
    assert m.entry(0, 1) == ZqElem(2, 3)
