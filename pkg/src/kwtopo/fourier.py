"""Fourier transforms of local functions and whole-NFG dualization.

The transform of a table over Z_q^d is

    f_hat(y) = sum_x f(x) * prod_i exp(2 pi i y_i x_i / q)

and the inverse carries a ``1/q^d`` factor with the conjugate characters.
Dualizing an NFG replaces every local function by its transform.  Indicator
nodes are swapped (equality <-> parity) and the constant dropped in doing so is
recorded in a :class:`ScaleLedger`, so that

    Z(dual) * ledger = q^|E| * Z(original).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra
from .errors import HalfEdgesPresent
from .nfg import EQUALITY, PARITY, TABLE, Attachment, Edge, LocalFunction, Nfg


def _along_axes(values: np.ndarray, mat: np.ndarray) -> np.ndarray:
    out = np.asarray(values, dtype=complex)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out


def fourier_table(values, q: int | None = None) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    q = values.shape[0] if q is None else q
    if any(s != q for s in values.shape):
        raise ValueError("table must have shape (q,)*degree")
    return _along_axes(values, algebra.character_matrix(q))


def inverse_fourier_table(values, q: int | None = None) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    q = values.shape[0] if q is None else q
    return _along_axes(values, np.conj(algebra.character_matrix(q))) / q**values.ndim


def fourier_indicator_check(kind: str, degree: int, q: int) -> tuple[str, int]:
    """Dual kind and the omitted constant: equality -> (parity, q); parity -> (equality, q^(d-1))."""
    if kind == EQUALITY:
        return PARITY, q
    if kind == PARITY:
        return EQUALITY, q ** (degree - 1)
    raise ValueError(f"{kind!r} is not an indicator kind")


@dataclass(frozen=True)
class ScaleLedger:
    """Product of the constants dropped during dualization: ``q**q_exponent * real_factor``."""

    q: int
    q_exponent: int = 0
    real_factor: float = 1.0
    entries: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.real_factor > 0:
            raise ValueError("ledger factors must be positive")

    @property
    def value(self) -> float:
        return float(self.q) ** self.q_exponent * self.real_factor

    def times(self, exponent: int, note: str, real: float = 1.0) -> "ScaleLedger":
        return ScaleLedger(self.q, self.q_exponent + exponent, self.real_factor * real, self.entries + (note,))

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "q_exponent": self.q_exponent,
            "real_factor": self.real_factor,
            "value": self.value,
            "entries": list(self.entries),
        }


def dual_local_function(f: LocalFunction, q: int) -> tuple[LocalFunction, int]:
    """Transformed local function and the exponent of q that was dropped."""
    if f.kind == TABLE:
        return LocalFunction.table(fourier_table(f.values, q)), 0
    kind, scale = fourier_indicator_check(f.kind, f.degree, q)
    exponent = 1 if f.kind == EQUALITY else f.degree - 1
    assert scale == q**exponent
    return LocalFunction(kind, f.degree), exponent


def dualize(n: Nfg) -> tuple[Nfg, ScaleLedger]:
    """Fourier dual of an NFG with full edges only.

    Each edge ``e`` is cut by a degree-two parity junction ``+|e``; the piece at
    the first attachment keeps the id ``e/0``, the other becomes ``e/1``.
    Negation marks stay on the attachment they were on.
    """
    if n.half_edges:
        raise HalfEdgesPresent("dualization needs an NFG without half-edges")
    q = n.q
    ledger = ScaleLedger(q)
    nodes: dict[str, LocalFunction] = {}
    for nid, f in n.nodes.items():
        g, exponent = dual_local_function(f, q)
        nodes[nid] = g
        ledger = ledger.times(exponent, f"{nid}: {f.kind}/{f.degree} -> {g.kind}, q^{exponent}")
    edges = []
    for e in n.edges:
        junction = f"+|{e.id}"
        nodes[junction] = LocalFunction.parity(2)
        for side, att in enumerate(e.attachments):
            neg = frozenset({0}) if side in e.negated else frozenset()
            edges.append(Edge(f"{e.id}/{side}", (att, Attachment(junction, side)), neg))
    return Nfg(q, nodes, edges), ledger


def subgroup_indicator_fourier(basis, q: int, length: int | None = None) -> tuple[list[np.ndarray], int]:
    """Transform of the indicator of ``Y = span(basis)``: ``|Y|`` times the indicator of ``Y^perp``."""
    k = algebra.span_rank(basis, q, length)
    return algebra.orthogonal_complement(basis, q, length), q**k


def subgroup_indicator_table(basis, q: int, length: int) -> np.ndarray:
    """Dense indicator table of a subspace (for direct verification on small lengths)."""
    rows = algebra._stack(basis, length)
    span = algebra.span_chunk(rows, q, 0, q ** rows.shape[0]) if rows.shape[0] else np.zeros((1, length), dtype=np.uint8)
    table = np.zeros((q,) * length, dtype=complex)
    table[tuple(span.T.astype(np.int64))] = 1.0
    return table
