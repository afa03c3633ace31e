"""Chain complexes over Z_q and builders for square and cubic lattices.

All lattice builders go through one cubical construction.  A k-cell is a
base point ``p`` plus an ordered set of axes ``S = (s_1, ..., s_k)`` and

    boundary(p, S) = sum_j (-1)^(j-1) [ (p + e_{s_j}, S - s_j) - (p, S - s_j) ].

Axes are ordered "horizontal first" (the reverse of numpy's array axes), which
makes every square face clockwise when rows are drawn top to bottom, and
edges point from the lower to the higher vertex index.  On tori the wrap
edges point from the last row/column back to index 0.  For 3-complexes the
cube boundary is negated so the front, left and bottom faces carry +1.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import algebra
from .algebra import ZqMatrix
from .errors import BoundaryConditionViolated, BudgetExceeded, InvalidHoleIndex, NotATorus, UnknownCycle

CELL_PREFIX = {0: "v", 2: "s", 3: "p"}
AXIS_NAMES = "xyz"
CYCLE_NAMES = ("h", "v", "d")


@dataclass(frozen=True, eq=False)
class ChainComplex:
    """``C_m -> ... -> C_0``; ``boundaries[i-1]`` is the matrix of ``boundary_i``."""

    q: int
    labels: tuple[tuple[str, ...], ...]
    boundaries: tuple[ZqMatrix, ...]
    kind: str = "custom"
    shape: tuple[int, ...] = ()
    # per dimension: (base point, axes) of each cell, for lattice complexes
    cells: tuple[tuple[tuple[tuple[int, ...], tuple[int, ...]], ...], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if len(self.boundaries) != max(len(self.labels) - 1, 0):
            raise ValueError("need exactly one boundary matrix per positive dimension")
        for i, b in enumerate(self.boundaries, start=1):
            if b.q != self.q:
                raise ValueError("boundary modulus differs from complex modulus")
            if b.shape != (len(self.labels[i - 1]), len(self.labels[i])):
                raise ValueError(f"boundary_{i} has shape {b.shape}, cells give {(len(self.labels[i-1]), len(self.labels[i]))}")
        for dim_labels in self.labels:
            if len(set(dim_labels)) != len(dim_labels):
                raise ValueError("cell labels must be unique within a dimension")
        index = {}
        for d, dim_labels in enumerate(self.labels):
            for i, lab in enumerate(dim_labels):
                index[lab] = (d, i)
        object.__setattr__(self, "_index", index)

    @property
    def dim(self) -> int:
        return len(self.labels) - 1

    @property
    def sizes(self) -> list[int]:
        """``|C_0|, |C_1|, ...`` in ascending dimension."""
        return [len(x) for x in self.labels]

    def cell_counts(self) -> list[int]:
        """``|C_m|, ..., |C_0|`` (descending, like the homology tables)."""
        return self.sizes[::-1]

    def boundary(self, i: int) -> ZqMatrix:
        if not 1 <= i <= self.dim:
            return ZqMatrix.zeros(len(self.labels[i - 1]) if 0 <= i - 1 <= self.dim else 0,
                                  len(self.labels[i]) if 0 <= i <= self.dim else 0, self.q)
        return self.boundaries[i - 1]

    def coboundary(self, i: int) -> ZqMatrix:
        """``d_i``, the transpose of ``boundary_i``."""
        return self.boundary(i).T

    def cell_index(self, label: str) -> tuple[int, int]:
        return self._index[label]

    def chain(self, dim: int, coeffs: Mapping[str, int]) -> np.ndarray:
        v = np.zeros(len(self.labels[dim]), dtype=np.int64)
        for lab, c in coeffs.items():
            d, i = self.cell_index(lab)
            if d != dim:
                raise ValueError(f"{lab} is a {d}-cell, not a {dim}-cell")
            v[i] += c
        return np.mod(v, self.q).astype(np.uint8)

    def describe(self, dim: int, vec) -> dict[str, int]:
        return {self.labels[dim][i]: int(c) for i, c in enumerate(vec) if int(c) % self.q}

    def edge(self, u: int, v: int) -> str:
        return f"a{u},{v}"

    def with_modulus(self, q: int) -> "ChainComplex":
        return ChainComplex(q, self.labels, tuple(ZqMatrix(_signed(b), q) for b in self.boundaries),
                            self.kind, self.shape, self.cells)


def _signed(b: ZqMatrix) -> np.ndarray:
    """Lift entries back to {-1, 0, 1} (the builders only emit incidence entries)."""
    d = b.data.astype(np.int64)
    return np.where(d == b.q - 1, -1, d)


# ------------------------------------------------------------------ builders


def _cubical(shape: Sequence[int], periodic: bool, q: int, top: int, holes: frozenset[int] = frozenset(), kind: str = "") -> ChainComplex:
    shape = tuple(shape)
    ndim = len(shape)
    orient = list(range(ndim))[::-1]  # horizontal axis first
    pos = {a: i for i, a in enumerate(orient)}

    def vid(p):
        return int(np.ravel_multi_index(tuple(c % s for c, s in zip(p, shape)), shape))

    base_points = list(np.ndindex(*shape))
    cells: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = []
    for k in range(top + 1):
        dim_cells = []
        for p in base_points:
            for axes in itertools.combinations(orient, k):
                if not periodic and any(p[a] + 1 >= shape[a] for a in axes):
                    continue
                dim_cells.append((p, axes))
        cells.append(dim_cells)
    if holes:
        faces = cells[2]
        bad = [h for h in holes if not 0 <= h < len(faces)]
        if bad:
            raise InvalidHoleIndex(f"hole indices {sorted(bad)} outside 0..{len(faces) - 1}")
    face_ids = list(range(len(cells[2]))) if top >= 2 else []
    if holes:
        keep = [i for i in face_ids if i not in holes]
        cells[2] = [cells[2][i] for i in keep]
        face_ids = keep

    labels: list[tuple[str, ...]] = [tuple(f"v{vid(p)}" for p, _ in cells[0])]
    if top >= 1:
        names = []
        for p, (a,) in cells[1]:
            tip = list(p)
            tip[a] += 1
            names.append(f"a{vid(p)},{vid(tip)}")
        if len(set(names)) != len(names):
            names = [f"{nm}/{AXIS_NAMES[pos[a]]}" for nm, (_, (a,)) in zip(names, cells[1])]
        labels.append(tuple(names))
    if top >= 2:
        labels.append(tuple(f"s{i}" for i in face_ids))
    for k in range(3, top + 1):
        labels.append(tuple(f"{CELL_PREFIX.get(k, f'c{k}_')}{i}" for i in range(len(cells[k]))))

    def key(p, axes):
        return (tuple(c % s for c, s in zip(p, shape)) if periodic else tuple(p), axes)

    boundaries = []
    for k in range(1, top + 1):
        lookup = {key(p, axes): i for i, (p, axes) in enumerate(cells[k - 1])}
        mat = np.zeros((len(cells[k - 1]), len(cells[k])), dtype=np.int64)
        for j, (p, axes) in enumerate(cells[k]):
            for t, a in enumerate(axes):
                rest = tuple(x for x in axes if x != a)
                sign = 1 if t % 2 == 0 else -1
                tip = list(p)
                tip[a] += 1
                mat[lookup[key(tuple(tip), rest)], j] += sign
                mat[lookup[key(p, rest)], j] -= sign
        if k == 3:
            mat = -mat
        boundaries.append(ZqMatrix(mat, q))
    frozen_cells = tuple(tuple(c) for c in cells)
    return ChainComplex(q, tuple(labels), tuple(boundaries), kind, shape, frozen_cells)


def graph_1complex(n_vertices: int, arcs: Sequence[tuple[int, int]], q: int) -> ChainComplex:
    """1-complex of an arbitrary directed multigraph (arc ``(u, v)`` has boundary ``v - u``)."""
    mat = np.zeros((n_vertices, len(arcs)), dtype=np.int64)
    for j, (u, v) in enumerate(arcs):
        mat[v, j] += 1
        mat[u, j] -= 1
    names = [f"a{u},{v}" for u, v in arcs]
    if len(set(names)) != len(names):
        names = [f"{nm}#{j}" for j, nm in enumerate(names)]
    labels = (tuple(f"v{i}" for i in range(n_vertices)),)
    if not arcs:
        return ChainComplex(q, labels, (), "graph")
    return ChainComplex(q, labels + (tuple(names),), (ZqMatrix(mat, q),), "graph")


def build_grid_1complex(rows: int, cols: int, q: int) -> ChainComplex:
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2 rows and 2 columns")
    return _cubical((rows, cols), False, q, 1, kind="grid1d")


def build_grid_2complex(rows: int, cols: int, q: int, holes: Sequence[int] = ()) -> ChainComplex:
    """Square grid with its inner faces; ``holes`` lists row-major face indices to leave out."""
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2 rows and 2 columns")
    return _cubical((rows, cols), False, q, 2, frozenset(int(h) for h in holes), kind="grid2d")


def build_torus_2complex(L1: int, L2: int, q: int) -> ChainComplex:
    """``L1`` rows by ``L2`` columns with opposite sides identified."""
    if L1 < 1 or L2 < 1:
        raise ValueError("torus sides must be positive")
    return _cubical((L1, L2), True, q, 2, kind="torus2d")


def build_cube_3complex(L: int, q: int) -> ChainComplex:
    """Solid ``L x L x L`` block of unit cubes on ``(L+1)^3`` vertices."""
    if L < 1:
        raise ValueError("L must be positive")
    return _cubical((L + 1,) * 3, False, q, 3, kind="cube3d")


def build_torus_3complex(L: int, q: int) -> ChainComplex:
    if L < 1:
        raise ValueError("L must be positive")
    return _cubical((L,) * 3, True, q, 3, kind="torus3d")


# ----------------------------------------------------------------- homology


def check_boundary(c: ChainComplex) -> None:
    for i in range(1, c.dim):
        if not (c.boundary(i) @ c.boundary(i + 1)).is_zero():
            raise BoundaryConditionViolated(f"boundary_{i} . boundary_{i + 1} != 0")


def _rank(m: ZqMatrix) -> int:
    return algebra.rank(m) if m.rows and m.cols else 0


def homology_dims(c: ChainComplex) -> list[int]:
    """``[dim H_m, ..., dim H_0]``."""
    algebra._require_prime(c.q)
    check_boundary(c)
    ranks = [0] + [_rank(b) for b in c.boundaries] + [0]
    return [c.sizes[i] - ranks[i] - ranks[i + 1] for i in range(c.dim, -1, -1)]


def cohomology_dims(c: ChainComplex) -> list[int]:
    """``[dim H^m, ..., dim H^0]`` computed from the transposed matrices."""
    algebra._require_prime(c.q)
    check_boundary(c)
    # d_i : C^{i-1} -> C^i
    ranks = [0] + [_rank(b.T) for b in c.boundaries] + [0]
    out = []
    for i in range(c.dim, -1, -1):
        ker_next = c.sizes[i] - ranks[i + 1]
        out.append(ker_next - ranks[i])
    return out


def reorient(c: ChainComplex, rng: np.random.Generator) -> ChainComplex:
    """Flip the orientation of a random subset of cells in every positive dimension."""
    signs = [np.ones(c.sizes[0], dtype=np.int64)]
    for k in range(1, c.dim + 1):
        signs.append(rng.choice(np.array([-1, 1]), size=c.sizes[k]))
    new = []
    for i, b in enumerate(c.boundaries, start=1):
        m = _signed(b) * signs[i - 1][:, None] * signs[i][None, :]
        new.append(ZqMatrix(m, c.q))
    return ChainComplex(c.q, c.labels, tuple(new), c.kind, c.shape, c.cells)


# ------------------------------------------------------------ torus cycles


@dataclass(frozen=True, eq=False)
class TorusCycles:
    c_h: np.ndarray
    c_v: np.ndarray
    c_d: np.ndarray | None = None

    def as_list(self) -> list[np.ndarray]:
        return [c for c in (self.c_h, self.c_v, self.c_d) if c is not None]


def _require_torus(c: ChainComplex) -> int:
    if c.kind == "torus2d":
        return 2
    if c.kind == "torus3d":
        return 3
    raise NotATorus(f"complex of kind {c.kind!r} is not a torus")


def _axis_of_cycle(c: ChainComplex, name: str) -> int:
    ndim = _require_torus(c)
    names = CYCLE_NAMES[:ndim]
    if name not in names:
        raise UnknownCycle(f"cycle {name!r} not available on a {ndim}D torus (have {names})")
    return ndim - 1 - names.index(name)  # h -> horizontal (last array axis)


def torus_cycles(c: ChainComplex) -> TorusCycles:
    """Straight loops through vertex 0 along each lattice direction."""
    ndim = _require_torus(c)
    vecs = []
    for name in CYCLE_NAMES[:ndim]:
        axis = _axis_of_cycle(c, name)
        v = np.zeros(c.sizes[1], dtype=np.uint8)
        for j, (p, (a,)) in enumerate(c.cells[1]):
            if a == axis and all(p[b] == 0 for b in range(ndim) if b != axis):
                v[j] = 1
        vecs.append(v)
    return TorusCycles(*vecs)


def dual_twist_edges(c: ChainComplex, name: str) -> list[int]:
    """Edges whose interaction is shifted by a twist along cycle ``name``.

    The shift lives on the cocycle met by the lattice-dual copy of the cycle:
    for ``h`` these are the vertical edges that wrap from the last row to row
    0, for ``v`` the horizontal edges wrapping from the last column to column
    0.  On the 3-torus ``h``, ``v``, ``d`` select the wrap edges along x, y, z.
    """
    ndim = _require_torus(c)
    axis = _axis_of_cycle(c, name)
    if ndim == 2:
        axis = 1 - axis
    out = []
    for j, (p, (a,)) in enumerate(c.cells[1]):
        if a == axis and p[a] == c.shape[a] - 1:
            out.append(j)
    return out


def coset_label(c: ChainComplex, z) -> tuple[int, ...] | None:
    """Coefficients ``alpha`` with ``z = sum alpha_k c_k + boundary_2(w)``; ``None`` if z is not a cycle."""
    cyc = torus_cycles(c).as_list()
    z = np.mod(np.asarray(z, dtype=np.int64), c.q)
    if (c.boundary(1) @ z).any():
        return None
    cols = np.column_stack([x.astype(np.int64) for x in cyc] + [c.boundary(2).data.astype(np.int64)])
    sol = algebra.solve(ZqMatrix(cols, c.q), z)
    if sol is None:
        return None
    return tuple(int(a) for a in sol[: len(cyc)])


def coset_partition(c: ChainComplex, *, budget: int | None = None) -> dict[tuple[int, ...], int]:
    """Enumerate ker boundary_1 and count how many cycles fall in each coset of im boundary_2."""
    basis = algebra.kernel_basis(c.boundary(1))
    total = c.q ** len(basis)
    cap = algebra.default_budget() if budget is None else budget
    if total > cap:
        raise BudgetExceeded(f"ker boundary_1 has {total} elements, budget is {cap}")
    k = len(torus_cycles(c).as_list())
    # the coset coefficients are linear in z, so classify through the basis images
    coeffs = np.array([coset_label(c, b) for b in basis], dtype=np.int64).reshape(len(basis), k)
    digits = algebra.span_chunk(np.eye(len(basis), dtype=np.int64), c.q, 0, total).astype(np.int64)
    keys, counts = np.unique(np.mod(digits @ coeffs, c.q), axis=0, return_counts=True)
    return {tuple(int(x) for x in kk): int(n) for kk, n in zip(keys, counts)}


# ------------------------------------------------------------------- export


def to_dict(c: ChainComplex) -> dict:
    return {
        "q": c.q,
        "kind": c.kind,
        "shape": list(c.shape),
        "cells": [list(x) for x in c.labels],
        "boundaries": [b.data.astype(int).tolist() for b in c.boundaries],
    }


def to_json(c: ChainComplex) -> str:
    return json.dumps(to_dict(c), indent=1)


def edge_endpoints(c: ChainComplex, j: int) -> tuple[int, int]:
    """(tail, head) vertex indices of edge ``j``."""
    if c.cells:
        p, (a,) = c.cells[1][j]
        tip = list(p)
        tip[a] += 1
        if c.kind.startswith("torus"):
            tip[a] %= c.shape[a]
        return int(np.ravel_multi_index(p, c.shape)), int(np.ravel_multi_index(tuple(tip), c.shape))
    col = _signed(c.boundary(1))[:, j]
    heads, tails = np.nonzero(col == 1)[0], np.nonzero(col == -1)[0]
    return int(tails[0]), int(heads[0])


def to_dot(c: ChainComplex) -> str:
    """Graphviz description of the 1-skeleton."""
    lines = ["digraph skeleton {"]
    lines += [f'  "{lab}";' for lab in c.labels[0]]
    if c.dim >= 1:
        for j, lab in enumerate(c.labels[1]):
            u, v = edge_endpoints(c, j)
            lines.append(f'  "{c.labels[0][u]}" -> "{c.labels[0][v]}" [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
