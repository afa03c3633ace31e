"""Arithmetic over Z_q, characters, and linear algebra over prime fields.

Vectors are 1-D ``numpy.uint8`` arrays holding reduced residues; matrices are
wrapped in :class:`ZqMatrix`.  Rank, kernel, image and orthogonal complements
need a field and therefore refuse composite moduli.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, CompositeModulus, ModulusMismatch

DEFAULT_BUDGET = 2**24
MAX_MODULUS = 255


def default_budget() -> int:
    """Enumeration cap, overridable through ``KWTOPO_BUDGET``."""
    raw = os.environ.get("KWTOPO_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    value = int(raw)
    if value < 1:
        raise ValueError("KWTOPO_BUDGET must be a positive integer")
    return value


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def _require_prime(q: int) -> None:
    if not is_prime(q):
        raise CompositeModulus(f"q = {q} is not prime; Z_q is not a field")


def _check_modulus(q: int) -> None:
    if not 2 <= q <= MAX_MODULUS:
        raise ValueError(f"modulus must lie in [2, {MAX_MODULUS}], got {q}")


@dataclass(frozen=True)
class ZqElem:
    value: int
    q: int

    def __post_init__(self):
        _check_modulus(self.q)
        object.__setattr__(self, "value", self.value % self.q)

    def _other(self, other) -> int:
        if isinstance(other, ZqElem):
            if other.q != self.q:
                raise ModulusMismatch(f"cannot combine Z_{self.q} with Z_{other.q}")
            return other.value
        return int(other)

    def __add__(self, other):
        return ZqElem(self.value + self._other(other), self.q)

    __radd__ = __add__

    def __sub__(self, other):
        return ZqElem(self.value - self._other(other), self.q)

    def __rsub__(self, other):
        return ZqElem(self._other(other) - self.value, self.q)

    def __mul__(self, other):
        return ZqElem(self.value * self._other(other), self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return ZqElem(-self.value, self.q)

    def __int__(self):
        return self.value

    def inverse(self) -> "ZqElem":
        return ZqElem(pow(self.value, -1, self.q), self.q)


@lru_cache(maxsize=None)
def roots_of_unity(q: int) -> np.ndarray:
    """``exp(2*pi*i*j/q)`` for ``j = 0..q-1``; index 0 is exactly 1."""
    roots = np.array([cmath.exp(2j * math.pi * j / q) for j in range(q)], dtype=complex)
    roots[0] = 1.0
    roots.setflags(write=False)
    return roots


@dataclass(frozen=True)
class Character:
    """The character ``x -> exp(2*pi*i*k*x/q)`` of Z_q."""

    q: int
    k: int

    def __post_init__(self):
        _check_modulus(self.q)
        object.__setattr__(self, "k", self.k % self.q)

    def __call__(self, x) -> complex:
        return complex(roots_of_unity(self.q)[(self.k * int(x)) % self.q])


def character_matrix(q: int) -> np.ndarray:
    """Matrix ``F[k, x] = chi_k(x)``."""
    idx = np.arange(q)
    return roots_of_unity(q)[np.outer(idx, idx) % q]


class ZqMatrix:
    """Dense matrix over Z_q with entries stored one byte each."""

    __slots__ = ("data", "q")

    def __init__(self, data, q: int):
        _check_modulus(q)
        arr = np.asarray(data, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("ZqMatrix data must be two-dimensional")
        arr = np.mod(arr, q).astype(np.uint8)
        arr.setflags(write=False)
        self.data = arr
        self.q = q

    @classmethod
    def zeros(cls, rows: int, cols: int, q: int) -> "ZqMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), q)

    @classmethod
    def identity(cls, n: int, q: int) -> "ZqMatrix":
        return cls(np.eye(n, dtype=np.int64), q)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def entry(self, i: int, j: int) -> ZqElem:
        return ZqElem(int(self.data[i, j]), self.q)

    @property
    def T(self) -> "ZqMatrix":
        return ZqMatrix(self.data.T, self.q)

    def transpose(self) -> "ZqMatrix":
        return self.T

    def __matmul__(self, other):
        if isinstance(other, ZqMatrix):
            if other.q != self.q:
                raise ModulusMismatch("moduli differ")
            return ZqMatrix(self.data.astype(np.int64) @ other.data.astype(np.int64), self.q)
        vec = np.asarray(other, dtype=np.int64)
        return np.mod(self.data.astype(np.int64) @ vec, self.q).astype(np.uint8)

    def __eq__(self, other):
        if not isinstance(other, ZqMatrix):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.q, self.data.shape, self.data.tobytes()))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __repr__(self):
        return f"ZqMatrix(q={self.q}, shape={self.shape})"


def _rref(data: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p; returns the reduced matrix and pivot columns."""
    a = np.mod(np.array(data, dtype=np.int64), p)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def _as_matrix(m) -> ZqMatrix:
    if not isinstance(m, ZqMatrix):
        raise TypeError("expected a ZqMatrix")
    return m


def rank(m: ZqMatrix) -> int:
    m = _as_matrix(m)
    _require_prime(m.q)
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(_rref(m.data, m.q)[1])


def kernel_basis(m: ZqMatrix) -> list[np.ndarray]:
    """Basis of ``{v : m v = 0}`` read off the reduced row echelon form."""
    m = _as_matrix(m)
    p = m.q
    _require_prime(p)
    if m.rows == 0:
        return [np.eye(m.cols, dtype=np.uint8)[j] for j in range(m.cols)]
    red, pivots = _rref(m.data, p)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = np.zeros(m.cols, dtype=np.int64)
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = (-red[r, f]) % p
        basis.append(v.astype(np.uint8))
    return basis


def image_basis(m: ZqMatrix) -> list[np.ndarray]:
    """Column-space basis made of the pivot columns of ``m``."""
    m = _as_matrix(m)
    _require_prime(m.q)
    if m.rows == 0 or m.cols == 0:
        return []
    _, pivots = _rref(m.data, m.q)
    return [m.data[:, c].copy() for c in pivots]


def _stack(basis: Sequence[np.ndarray], length: int | None) -> np.ndarray:
    if len(basis) == 0:
        if length is None:
            raise ValueError("length is required for an empty basis")
        return np.zeros((0, length), dtype=np.int64)
    arr = np.array([np.asarray(b, dtype=np.int64) for b in basis])
    if length is not None and arr.shape[1] != length:
        raise ValueError("basis vectors do not match the requested length")
    return arr


def orthogonal_complement(basis: Sequence[np.ndarray], q: int, length: int | None = None) -> list[np.ndarray]:
    """Basis of ``{y : x . y = 0 for all x in span(basis)}``."""
    _require_prime(q)
    rows = _stack(basis, length)
    return kernel_basis(ZqMatrix(rows, q))


def span_rank(basis: Sequence[np.ndarray], q: int, length: int | None = None) -> int:
    rows = _stack(basis, length)
    if rows.shape[0] == 0:
        return 0
    return rank(ZqMatrix(rows, q))


def same_span(a: Sequence[np.ndarray], b: Sequence[np.ndarray], q: int, length: int) -> bool:
    """Whether two families span the same subspace (mutual containment)."""
    ra = span_rank(a, q, length)
    rb = span_rank(b, q, length)
    both = list(a) + list(b)
    return ra == rb == span_rank(both, q, length)


def solve(m: ZqMatrix, b) -> np.ndarray | None:
    """One solution of ``m x = b`` over F_q, or ``None`` if inconsistent."""
    m = _as_matrix(m)
    p = m.q
    _require_prime(p)
    rhs = np.mod(np.asarray(b, dtype=np.int64), p).reshape(-1, 1)
    aug = np.hstack([m.data.astype(np.int64), rhs])
    red, pivots = _rref(aug, p)
    if m.cols in pivots:
        return None
    x = np.zeros(m.cols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = red[r, -1]
    return x.astype(np.uint8)


def span_size(k: int, q: int) -> int:
    return q**k


def span_chunk(basis_rows: np.ndarray, q: int, start: int, stop: int) -> np.ndarray:
    """Vectors with mixed-radix indices ``start..stop-1`` as rows of a uint8 array.

    Index ``i`` has base-q digits ``c_0, c_1, ...`` (``c_0`` least significant)
    and maps to ``sum_j c_j * basis[j]``.
    """
    k, length = basis_rows.shape
    idx = np.arange(start, stop, dtype=np.int64)
    if k == 0:
        return np.zeros((len(idx), length), dtype=np.uint8)
    powers = q ** np.arange(k, dtype=np.int64)
    digits = (idx[:, None] // powers[None, :]) % q
    return np.mod(digits @ basis_rows.astype(np.int64), q).astype(np.uint8)


def enumerate_span(
    basis: Sequence[np.ndarray],
    q: int,
    *,
    length: int | None = None,
    budget: int | None = None,
    start: int = 0,
    stop: int | None = None,
    chunk: int = 4096,
) -> Iterator[np.ndarray]:
    """Yield every Z_q-combination of ``basis`` in mixed-radix index order.

    ``start``/``stop`` select a contiguous slice of the index range so callers
    can split work deterministically across workers.
    """
    rows = _stack(basis, length)
    total = q ** rows.shape[0]
    cap = default_budget() if budget is None else budget
    if total > cap:
        raise BudgetExceeded(f"span has {total} elements, budget is {cap}")
    stop = total if stop is None else min(stop, total)
    for lo in range(start, stop, chunk):
        block = span_chunk(rows, q, lo, min(lo + chunk, stop))
        yield from block


def encode_vectors(vectors: np.ndarray, q: int) -> np.ndarray:
    """Injective base-q integer keys for the rows of ``vectors`` (for set algebra)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
    length = vectors.shape[1]
    if length * math.log2(q) >= 63:
        raise ValueError("vectors too long for int64 keys")
    powers = q ** np.arange(length, dtype=np.int64)
    return vectors @ powers
