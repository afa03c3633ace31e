"""Operator NFGs built from incidence matrices.

Canonical layout for a matrix ``m`` (codomain x domain):

* one equality node ``={d}`` per domain cell.  Port 0 is the input half-edge
  ``d``, followed by one internal edge per nonzero entry in codomain order;
* one parity node ``+{c}`` per codomain cell collecting the internal edges in
  domain order, with the output half-edge ``c`` last and negated, so the
  node enforces ``sum_j m[c, j] z_j - y_c = 0``;
* internal edges are ``{d}~{c}``; an entry ``-1`` negates the parity side.

Over Z_2 every sign is irrelevant and no negation marks are emitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import ZqMatrix
from .errors import InvalidNfg, UnsupportedEntry
from .nfg import EQUALITY, Attachment, Edge, LocalFunction, Nfg, close_half_edges, join_half_edges


@dataclass(frozen=True, eq=False)
class OperatorNfg:
    nfg: Nfg
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    @property
    def half_edges(self) -> tuple[str, ...]:
        return self.inputs + self.outputs


def _labels(given, count, prefix):
    labels = tuple(given) if given is not None else tuple(f"{prefix}{i}" for i in range(count))
    if len(labels) != count:
        raise ValueError(f"expected {count} labels, got {len(labels)}")
    return labels


def operator_skeleton(
    m: ZqMatrix,
    domain: Sequence[str] | None = None,
    codomain: Sequence[str] | None = None,
    *,
    inputs: bool = True,
) -> OperatorNfg:
    """Input/output NFG of ``m``; with ``inputs=False`` the domain variables stay internal."""
    q = m.q
    dom = _labels(domain, m.cols, "x")
    cod = _labels(codomain, m.rows, "y")
    if inputs and set(dom) & set(cod):
        raise ValueError("domain and codomain labels must differ")
    data = m.data.astype(np.int64)
    bad = (data != 0) & (data != 1) & (data != q - 1)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise UnsupportedEntry(f"entry {data[i, j]} at ({i}, {j}) is not 0 or +-1 mod {q}")
    signed = np.where((data == q - 1) & (q > 2), -1, data)

    nodes: dict[str, LocalFunction] = {}
    eq_ports = {d: (1 if inputs else 0) for d in dom}
    par_ports = {c: 0 for c in cod}
    internal: list[Edge] = []
    for j, d in enumerate(dom):
        for i, c in enumerate(cod):
            if signed[i, j] == 0:
                continue
            neg = frozenset({1}) if signed[i, j] < 0 else frozenset()
            ends = (Attachment(f"={d}", eq_ports[d]), Attachment(f"+{c}", par_ports[c]))
            internal.append(Edge(f"{d}~{c}", ends, neg))
            eq_ports[d] += 1
            par_ports[c] += 1
    for d in dom:
        if eq_ports[d] == 0:
            raise InvalidNfg(f"domain cell {d!r} has no incidences and no input")
        nodes[f"={d}"] = LocalFunction.equality(eq_ports[d])
    for c in cod:
        nodes[f"+{c}"] = LocalFunction.parity(par_ports[c] + 1)
    out_neg = frozenset({0}) if q > 2 else frozenset()
    edges = []
    if inputs:
        edges += [Edge(d, (Attachment(f"={d}", 0),)) for d in dom]
    edges += internal
    edges += [Edge(c, (Attachment(f"+{c}", par_ports[c]),), out_neg) for c in cod]
    return OperatorNfg(Nfg(q, nodes, edges), dom if inputs else (), cod)


def nfg_io(m: ZqMatrix, domain=None, codomain=None) -> OperatorNfg:
    return operator_skeleton(m, domain, codomain)


def nfg_kernel(m: ZqMatrix, domain=None, codomain=None) -> OperatorNfg:
    """Outputs closed by zero-forcing (degree-one parity) nodes; valid inputs form ker m."""
    op = operator_skeleton(m, domain, codomain)
    closed = close_half_edges(op.nfg, {c: LocalFunction.parity(1) for c in op.outputs}, prefix="0:")
    return OperatorNfg(closed, op.inputs, ())


def nfg_image(m: ZqMatrix, domain=None, codomain=None) -> OperatorNfg:
    """Inputs closed by all-one (degree-one equality) nodes; valid outputs form im m."""
    op = operator_skeleton(m, domain, codomain)
    closed = close_half_edges(op.nfg, {d: LocalFunction.equality(1) for d in op.inputs}, prefix="1:")
    return OperatorNfg(closed, (), op.outputs)


def _renamed(op: OperatorNfg, prefix: str) -> OperatorNfg:
    n = op.nfg
    nodes = {prefix + k: f for k, f in n.nodes.items()}
    edges = [
        Edge(prefix + e.id, tuple(Attachment(prefix + a.node, a.port) for a in e.attachments), e.negated)
        for e in n.edges
    ]
    return OperatorNfg(
        Nfg(n.q, nodes, edges),
        tuple(prefix + x for x in op.inputs),
        tuple(prefix + x for x in op.outputs),
    )


def compose(first: OperatorNfg, second: OperatorNfg) -> OperatorNfg:
    """NFG of ``second o first``: outputs of ``first`` are joined to inputs of ``second``.

    Ids are prefixed with ``1.`` and ``2.`` so both operands may reuse labels;
    each joined edge keeps the id of the output it came from.
    """
    if len(first.outputs) != len(second.inputs):
        raise ValueError("operand shapes do not chain")
    if first.nfg.q != second.nfg.q:
        raise ValueError("moduli differ")
    a = _renamed(first, "1.")
    b = _renamed(second, "2.")
    nodes = {**a.nfg.nodes, **b.nfg.nodes}
    merged = Nfg(a.nfg.q, nodes, a.nfg.edges + b.nfg.edges)
    pairs = list(zip(a.outputs, b.inputs))
    joined = join_half_edges(merged, pairs)
    return OperatorNfg(joined, a.inputs, b.outputs)


def strip_all_one_stubs(n: Nfg) -> Nfg:
    """Drop degree-one equality closures hanging off equality nodes (they multiply by 1)."""
    stubs = {}
    for e in n.edges:
        if len(e.attachments) != 2:
            continue
        for side in (0, 1):
            a, b = e.attachments[side], e.attachments[1 - side]
            fa, fb = n.nodes[a.node], n.nodes[b.node]
            if fa.kind == EQUALITY and fa.degree == 1 and fb.kind == EQUALITY and fb.degree > 1:
                stubs[e.id] = (a.node, b)
                break
    if not stubs:
        return n
    removed_ports: dict[str, list[int]] = {}
    for stub, host in stubs.values():
        removed_ports.setdefault(host.node, []).append(host.port)
    stub_nodes = {stub for stub, _ in stubs.values()}
    nodes = {}
    for k, f in n.nodes.items():
        if k in stub_nodes:
            continue
        if k in removed_ports:
            f = LocalFunction.equality(f.degree - len(removed_ports[k]))
        nodes[k] = f

    def shift(att: Attachment) -> Attachment:
        gone = removed_ports.get(att.node, [])
        return Attachment(att.node, att.port - sum(1 for p in gone if p < att.port))

    edges = [
        Edge(e.id, tuple(shift(a) for a in e.attachments), e.negated)
        for e in n.edges
        if e.id not in stubs
    ]
    return Nfg(n.q, nodes, edges)
