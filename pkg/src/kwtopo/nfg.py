"""Normal factor graphs over Z_q and their exact evaluation.

An :class:`Nfg` is a set of local functions (nodes) joined by edges.  An edge
with two attachments is a full-edge, one attachment makes it a half-edge.  A
negation mark on an attachment means the edge variable enters that local
function as ``-x``.

Evaluation paths:

* :func:`exterior_function` - brute force over configurations.  For prime q
  it walks the solution space of the indicator constraints (every other
  configuration contributes zero); ``method="naive"`` walks all of ``Z_q^E``.
* :func:`partition_sum_contracted` - sequential variable elimination.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import jsonschema
import numpy as np

from . import algebra
from .errors import (
    AssumptionViolated,
    BudgetExceeded,
    HalfEdgesPresent,
    IncompleteAssignment,
    IntermediateTableTooLarge,
    InvalidNfg,
)

EQUALITY = "equality"
PARITY = "parity"
TABLE = "table"
KINDS = (EQUALITY, PARITY, TABLE)

CHUNK = 2**15


@dataclass(frozen=True, eq=False)
class LocalFunction:
    kind: str
    degree: int
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidNfg(f"unknown local function kind {self.kind!r}")
        if self.degree < 1:
            raise InvalidNfg("local functions need degree >= 1")
        if self.kind == TABLE:
            if self.values is None:
                raise InvalidNfg("table node without values")
            vals = np.array(self.values, dtype=complex)
            if vals.ndim != self.degree or len(set(vals.shape)) != 1:
                raise InvalidNfg("table values must have shape (q,)*degree")
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)
        elif self.values is not None:
            raise InvalidNfg("indicator nodes carry no values")

    @classmethod
    def equality(cls, degree: int) -> "LocalFunction":
        return cls(EQUALITY, degree)

    @classmethod
    def parity(cls, degree: int) -> "LocalFunction":
        return cls(PARITY, degree)

    @classmethod
    def table(cls, values) -> "LocalFunction":
        vals = np.asarray(values, dtype=complex)
        return cls(TABLE, vals.ndim, vals)

    @property
    def is_indicator(self) -> bool:
        return self.kind != TABLE

    @property
    def q(self) -> int | None:
        return None if self.values is None else self.values.shape[0]

    def dense(self, q: int) -> np.ndarray:
        """The function as a complex array of shape ``(q,)*degree``."""
        if self.kind == TABLE:
            if self.values.shape[0] != q:
                raise InvalidNfg("table alphabet does not match q")
            return self.values
        grids = np.indices((q,) * self.degree)
        if self.kind == EQUALITY:
            ok = np.all(grids == grids[0], axis=0)
        else:
            ok = grids.sum(axis=0) % q == 0
        return ok.astype(complex)

    def __call__(self, args: Sequence[int], q: int) -> complex:
        args = [int(a) % q for a in args]
        if len(args) != self.degree:
            raise ValueError("wrong number of arguments")
        if self.kind == EQUALITY:
            return 1.0 + 0j if len(set(args)) == 1 else 0j
        if self.kind == PARITY:
            return 1.0 + 0j if sum(args) % q == 0 else 0j
        return complex(self.values[tuple(args)])

    def same_as(self, other: "LocalFunction") -> bool:
        if self.kind != other.kind or self.degree != other.degree:
            return False
        if self.kind == TABLE:
            return np.array_equal(self.values, other.values)
        return True


@dataclass(frozen=True)
class Attachment:
    node: str
    port: int


@dataclass(frozen=True)
class Edge:
    id: str
    attachments: tuple[Attachment, ...]
    negated: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        atts = tuple(a if isinstance(a, Attachment) else Attachment(*a) for a in self.attachments)
        object.__setattr__(self, "attachments", atts)
        object.__setattr__(self, "negated", frozenset(self.negated))
        if len(atts) not in (1, 2):
            raise InvalidNfg(f"edge {self.id!r} must have one or two attachments")
        if any(i not in range(len(atts)) for i in self.negated):
            raise InvalidNfg(f"edge {self.id!r} negates a missing attachment")

    @property
    def is_half(self) -> bool:
        return len(self.attachments) == 1


class Nfg:
    """Immutable normal factor graph with a uniform alphabet Z_q."""

    def __init__(self, q: int, nodes: Mapping[str, LocalFunction], edges: Iterable[Edge]):
        if not 2 <= q <= algebra.MAX_MODULUS:
            raise InvalidNfg(f"bad modulus {q}")
        self.q = q
        self.nodes: dict[str, LocalFunction] = dict(nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self.edge_index = {e.id: i for i, e in enumerate(self.edges)}
        if len(self.edge_index) != len(self.edges):
            raise InvalidNfg("duplicate edge ids")
        ports: dict[str, list] = {nid: [None] * f.degree for nid, f in self.nodes.items()}
        for ei, e in enumerate(self.edges):
            for ai, att in enumerate(e.attachments):
                if att.node not in ports:
                    raise InvalidNfg(f"edge {e.id!r} attaches to unknown node {att.node!r}")
                slots = ports[att.node]
                if not 0 <= att.port < len(slots):
                    raise InvalidNfg(f"node {att.node!r} has no port {att.port}")
                if slots[att.port] is not None:
                    raise InvalidNfg(f"port {att.port} of node {att.node!r} used twice")
                slots[att.port] = (ei, ai in e.negated)
        for nid, slots in ports.items():
            if any(s is None for s in slots):
                raise InvalidNfg(f"node {nid!r} has a dangling port")
            f = self.nodes[nid]
            if f.kind == TABLE and f.values.shape[0] != q:
                raise InvalidNfg(f"table {nid!r} is not over Z_{q}")
        # node id -> [(edge index, negated), ...] in port order
        self.ports: dict[str, tuple[tuple[int, bool], ...]] = {k: tuple(v) for k, v in ports.items()}

    @property
    def half_edges(self) -> list[str]:
        return [e.id for e in self.edges if e.is_half]

    @property
    def full_edges(self) -> list[str]:
        return [e.id for e in self.edges if not e.is_half]

    def __repr__(self):
        return f"Nfg(q={self.q}, nodes={len(self.nodes)}, edges={len(self.edges)}, half={len(self.half_edges)})"

    def same_as(self, other: "Nfg") -> bool:
        """Exact structural equality including node/edge ids and ordering."""
        if self.q != other.q or list(self.nodes) != list(other.nodes) or self.edges != other.edges:
            return False
        return all(f.same_as(other.nodes[k]) for k, f in self.nodes.items())


@dataclass(frozen=True, eq=False)
class ConfigTable:
    """Dense function of the listed variables, indexed in mixed-radix (C) order."""

    variables: tuple[str, ...]
    values: np.ndarray
    q: int

    @property
    def scalar(self) -> complex:
        if self.variables:
            raise ValueError("table is not a scalar")
        return complex(self.values.reshape(()))

    def __getitem__(self, assignment) -> complex:
        if not self.variables:
            return self.scalar
        return complex(self.values[tuple(int(a) for a in assignment)])

    def support(self, tol: float = 0.0) -> set[tuple[int, ...]]:
        hits = np.argwhere(np.abs(self.values) > tol)
        return {tuple(int(v) for v in h) for h in hits}


# ---------------------------------------------------------------- evaluation


def global_function_value(n: Nfg, assignment: Mapping[str, int]) -> complex:
    missing = [e.id for e in n.edges if e.id not in assignment]
    if missing:
        raise IncompleteAssignment(f"no value for edges {missing[:5]}")
    x = [int(assignment[e.id]) % n.q for e in n.edges]
    value = 1.0 + 0j
    for nid, f in n.nodes.items():
        args = [(-x[ei]) % n.q if neg else x[ei] for ei, neg in n.ports[nid]]
        value *= f(args, n.q)
        if value == 0:
            break
    return value


def _constraint_matrix(n: Nfg) -> np.ndarray:
    """Rows are the linear equations imposed by the indicator nodes."""
    rows = []
    ne = len(n.edges)
    for nid, f in n.nodes.items():
        if f.kind == TABLE:
            continue
        signed = [(ei, -1 if neg else 1) for ei, neg in n.ports[nid]]
        if f.kind == PARITY:
            r = np.zeros(ne, dtype=np.int64)
            for ei, s in signed:
                r[ei] += s
            rows.append(r)
        else:
            e0, s0 = signed[0]
            for ei, s in signed[1:]:
                r = np.zeros(ne, dtype=np.int64)
                r[e0] += s0
                r[ei] -= s
                rows.append(r)
    if not rows:
        return np.zeros((0, ne), dtype=np.int64)
    return np.mod(np.array(rows), n.q)


def valid_configuration_basis(n: Nfg) -> np.ndarray:
    """Basis (as rows) of the configurations satisfying every indicator node; prime q only."""
    m = algebra.ZqMatrix(_constraint_matrix(n), n.q)
    basis = algebra.kernel_basis(m)
    if not basis:
        return np.zeros((0, len(n.edges)), dtype=np.int64)
    return np.array(basis, dtype=np.int64)


def _plan(n: Nfg, indicators: bool) -> list[tuple[str, np.ndarray, np.ndarray, np.ndarray | None]]:
    plan = []
    for nid, f in n.nodes.items():
        if f.is_indicator and not indicators:
            continue
        cols = np.array([ei for ei, _ in n.ports[nid]], dtype=np.int64)
        neg = np.array([bool(b) for _, b in n.ports[nid]])
        flat = f.values.reshape(-1) if f.kind == TABLE else None
        plan.append((f.kind, cols, neg, flat))
    return plan


def _evaluate_block(plan, x: np.ndarray, q: int) -> np.ndarray:
    vals = np.ones(x.shape[0], dtype=complex)
    for kind, cols, neg, flat in plan:
        args = x[:, cols].astype(np.int64)
        if neg.any():
            args[:, neg] = (-args[:, neg]) % q
        if kind == EQUALITY:
            vals *= np.all(args == args[:, :1], axis=1)
        elif kind == PARITY:
            vals *= args.sum(axis=1) % q == 0
        else:
            powers = q ** np.arange(len(cols) - 1, -1, -1, dtype=np.int64)
            vals *= flat[args @ powers]
    return vals


def _block_partial(task):
    basis, plan, q, half_cols, size, start, stop = task
    x = algebra.span_chunk(basis, q, start, stop)
    vals = _evaluate_block(plan, x, q)
    if size == 1:
        return np.array([vals.sum()])
    powers = q ** np.arange(len(half_cols) - 1, -1, -1, dtype=np.int64)
    idx = x[:, half_cols].astype(np.int64) @ powers
    re = np.bincount(idx, weights=vals.real, minlength=size)
    im = np.bincount(idx, weights=vals.imag, minlength=size)
    return re + 1j * im


def _reduce(partials: list[np.ndarray]) -> np.ndarray:
    """Order-independent-of-workers reduction: exact-rounded fsum per entry."""
    if len(partials) == 1:
        return partials[0]
    stack = np.array(partials)
    return np.array([complex(math.fsum(c.real), math.fsum(c.imag)) for c in stack.T])


def run_chunks(worker, tasks: list, workers: int = 1) -> list:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, tasks))
    return [worker(t) for t in tasks]


def exterior_function(
    n: Nfg,
    *,
    method: str = "auto",
    budget: int | None = None,
    workers: int = 1,
) -> ConfigTable:
    """Brute-force exterior function; a scalar table when there are no half-edges.

    ``method`` is ``"valid"`` (enumerate the indicator solution space, prime q),
    ``"naive"`` (all of Z_q^E) or ``"auto"`` (valid when q is prime).
    """
    q = n.q
    cap = algebra.default_budget() if budget is None else budget
    if method == "auto":
        method = "valid" if algebra.is_prime(q) else "naive"
    if method == "valid":
        basis = valid_configuration_basis(n)
        plan = _plan(n, indicators=False)
    elif method == "naive":
        basis = np.eye(len(n.edges), dtype=np.int64)
        plan = _plan(n, indicators=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    total = q ** basis.shape[0]
    if total > cap:
        raise BudgetExceeded(f"{method} enumeration needs {total} states, budget is {cap}")
    half = n.half_edges
    size = q ** len(half)
    if size > cap:
        raise BudgetExceeded(f"exterior table has {size} entries, budget is {cap}")
    half_cols = np.array([n.edge_index[h] for h in half], dtype=np.int64)
    tasks = [
        (basis, plan, q, half_cols, size, lo, min(lo + CHUNK, total))
        for lo in range(0, total, CHUNK)
    ]
    values = _reduce(run_chunks(_block_partial, tasks, workers))
    return ConfigTable(tuple(half), values.reshape((q,) * len(half)), q)


def partition_sum_brute(n: Nfg, **kwargs) -> complex:
    if n.half_edges:
        raise HalfEdgesPresent("partition sum needs an NFG without half-edges")
    return exterior_function(n, **kwargs).scalar


# --------------------------------------------------------------- contraction


def min_degree_order(n: Nfg) -> list[str]:
    """Greedy minimum-degree elimination order on the edge-adjacency structure."""
    adj: dict[int, set[int]] = {i: set() for i in range(len(n.edges))}
    for slots in n.ports.values():
        eids = {ei for ei, _ in slots}
        for a in eids:
            adj[a] |= eids - {a}
    order = []
    while adj:
        v = min(adj, key=lambda k: (len(adj[k]), k))
        nbrs = adj.pop(v)
        for a in nbrs:
            adj[a] |= nbrs - {a}
            adj[a].discard(v)
        order.append(n.edges[v].id)
    return order


def node_factor(n: Nfg, nid: str) -> tuple[tuple[int, ...], np.ndarray]:
    """Dense factor of a node over its edge indices with negation marks applied."""
    f = n.nodes[nid]
    table = f.dense(n.q)
    flip = (-np.arange(n.q)) % n.q
    for axis, (_, neg) in enumerate(n.ports[nid]):
        if neg:
            table = np.take(table, flip, axis=axis)
    return tuple(ei for ei, _ in n.ports[nid]), table


def partition_sum_contracted(
    n: Nfg,
    order: Sequence[str] | None = None,
    *,
    max_arity: int = 20,
) -> complex:
    """Partition sum by variable elimination; exact up to floating-point rounding."""
    if n.half_edges:
        raise HalfEdgesPresent("contraction needs an NFG without half-edges")
    if order is None:
        order = min_degree_order(n)
    if sorted(order) != sorted(e.id for e in n.edges):
        raise ValueError("order must be a permutation of the edge ids")
    for nid, f in n.nodes.items():
        if f.degree > max_arity:
            raise IntermediateTableTooLarge(f"node {nid!r} has degree {f.degree} > {max_arity}")
    factors = [node_factor(n, nid) for nid in n.nodes]
    for eid in order:
        v = n.edge_index[eid]
        touching = [fa for fa in factors if v in fa[0]]
        factors = [fa for fa in factors if v not in fa[0]]
        out = sorted({u for vs, _ in touching for u in vs} - {v})
        if len(out) > max_arity:
            raise IntermediateTableTooLarge(f"eliminating {eid!r} creates arity {len(out)}")
        local = {u: i for i, u in enumerate(out + [v])}
        operands = []
        for vs, table in touching:
            operands += [table, [local[u] for u in vs]]
        result = np.einsum(*operands, [local[u] for u in out])
        factors.append((tuple(out), result))
    value = 1.0 + 0j
    for vs, table in factors:
        value *= complex(table)
    return value


# ----------------------------------------------------------- support / sets


def tables_are_leaves(n: Nfg) -> bool:
    kinds_ok = all(f.is_indicator or f.degree == 1 for f in n.nodes.values())
    if not kinds_ok:
        return False
    if n.half_edges and not all(f.is_indicator for f in n.nodes.values()):
        return False
    return True


def support_nfg(n: Nfg) -> Nfg:
    """Cut out every interaction function; its edge becomes a half-edge with the same id."""
    if not tables_are_leaves(n):
        raise AssumptionViolated("support NFG needs every local function to be an indicator or of degree one")
    drop = {nid for nid, f in n.nodes.items() if not f.is_indicator}
    edges = []
    for e in n.edges:
        keep = [(i, a) for i, a in enumerate(e.attachments) if a.node not in drop]
        if not keep:
            raise AssumptionViolated(f"edge {e.id!r} joins two interaction functions")
        negated = {j for j, (i, _) in enumerate(keep) if i in e.negated}
        edges.append(Edge(e.id, tuple(a for _, a in keep), frozenset(negated)))
    nodes = {k: f for k, f in n.nodes.items() if k not in drop}
    return Nfg(n.q, nodes, edges)


def valid_configurations(n: Nfg, *, budget: int | None = None) -> np.ndarray:
    """All configurations satisfying every indicator node, as rows (edge order)."""
    cap = algebra.default_budget() if budget is None else budget
    q = n.q
    if algebra.is_prime(q):
        basis = valid_configuration_basis(n)
        total = q ** basis.shape[0]
        if total > cap:
            raise BudgetExceeded(f"{total} valid configurations exceed budget {cap}")
        return algebra.span_chunk(basis, q, 0, total)
    total = q ** len(n.edges)
    if total > cap:
        raise BudgetExceeded(f"{total} configurations exceed budget {cap}")
    x = algebra.span_chunk(np.eye(len(n.edges), dtype=np.int64), q, 0, total)
    keep = _evaluate_block(_plan(support_nfg(n) if tables_are_leaves(n) else n, indicators=True), x, q) != 0
    return x[keep]


def projected_valid_configs(n: Nfg, *, budget: int | None = None) -> frozenset[tuple[int, ...]]:
    """Projection of the valid configurations onto the support NFG's half-edges."""
    sup = support_nfg(n)
    x = valid_configurations(sup, budget=budget)
    cols = [sup.edge_index[h] for h in sup.half_edges]
    if x.shape[0] == 0:
        return frozenset()
    proj = np.unique(x[:, cols], axis=0)
    return frozenset(tuple(int(v) for v in row) for row in proj)


# ------------------------------------------------------------ graph surgery


def close_half_edges(n: Nfg, closures: Mapping[str, LocalFunction], prefix: str = "close:") -> Nfg:
    """Attach a degree-one node to each listed half-edge, turning it into a full edge."""
    nodes = dict(n.nodes)
    edges = []
    for e in n.edges:
        if e.id in closures:
            if not e.is_half:
                raise InvalidNfg(f"edge {e.id!r} is not a half-edge")
            f = closures[e.id]
            if f.degree != 1:
                raise InvalidNfg("closures must have degree one")
            nid = prefix + e.id
            nodes[nid] = f
            e = Edge(e.id, e.attachments + (Attachment(nid, 0),), e.negated)
        edges.append(e)
    return Nfg(n.q, nodes, edges)


def join_half_edges(n: Nfg, pairs: Sequence[tuple[str, str]], names: Sequence[str] | None = None) -> Nfg:
    """Fuse pairs of half-edges into full edges (the second id is dropped unless renamed)."""
    names = list(names) if names is not None else [a for a, _ in pairs]
    partner = {}
    for (a, b), name in zip(pairs, names):
        partner[a] = (b, name)
    consumed = {b for _, b in pairs}
    by_id = {e.id: e for e in n.edges}
    edges = []
    for e in n.edges:
        if e.id in consumed:
            continue
        if e.id in partner:
            b, name = partner[e.id]
            other = by_id[b]
            if not (e.is_half and other.is_half):
                raise InvalidNfg("only half-edges can be joined")
            neg = set(e.negated) | ({1} if 0 in other.negated else set())
            e = Edge(name, e.attachments + other.attachments, frozenset(neg))
        edges.append(e)
    return Nfg(n.q, n.nodes, edges)


def flip_negation(n: Nfg, edge_id: str, attachment: int) -> Nfg:
    edges = []
    for e in n.edges:
        if e.id == edge_id:
            e = Edge(e.id, e.attachments, e.negated ^ {attachment})
        edges.append(e)
    return Nfg(n.q, n.nodes, edges)


def insert_equality(n: Nfg, edge_id: str) -> Nfg:
    """Split an edge through a new degree-two equality node."""
    nodes = dict(n.nodes)
    mid = f"=dup:{edge_id}"
    nodes[mid] = LocalFunction.equality(2)
    edges = []
    for e in n.edges:
        if e.id == edge_id:
            first = Edge(e.id, (e.attachments[0], Attachment(mid, 0)), frozenset(e.negated & {0}))
            edges.append(first)
            if len(e.attachments) == 2:
                second_neg = frozenset({0}) if 1 in e.negated else frozenset()
                edges.append(Edge(e.id + "'", (e.attachments[1], Attachment(mid, 1)), second_neg))
            else:
                raise InvalidNfg("insert_equality expects a full edge")
        else:
            edges.append(e)
    return Nfg(n.q, nodes, edges)


def replace_node(n: Nfg, nid: str, f: LocalFunction) -> Nfg:
    if n.nodes[nid].degree != f.degree:
        raise InvalidNfg("replacement must keep the degree")
    nodes = dict(n.nodes)
    nodes[nid] = f
    return Nfg(n.q, nodes, n.edges)


# ---------------------------------------------------------------------- JSON

NFG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["q", "nodes", "edges"],
    "properties": {
        "q": {"type": "integer", "minimum": 2},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "kind"],
                "properties": {
                    "id": {"type": "string"},
                    "kind": {"enum": list(KINDS)},
                    "degree": {"type": "integer", "minimum": 1},
                    "values": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    },
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "attachments"],
                "properties": {
                    "id": {"type": "string"},
                    "attachments": {
                        "type": "array",
                        "minItems": 1,
                        "maxItems": 2,
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["node", "port"],
                            "properties": {"node": {"type": "string"}, "port": {"type": "integer", "minimum": 0}},
                        },
                    },
                    "negated": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 1}},
                },
            },
        },
    },
}


def to_dict(n: Nfg) -> dict:
    nodes = []
    for nid, f in n.nodes.items():
        entry = {"id": nid, "kind": f.kind, "degree": f.degree}
        if f.kind == TABLE:
            entry["values"] = [[float(v.real), float(v.imag)] for v in f.values.reshape(-1)]
        nodes.append(entry)
    edges = [
        {
            "id": e.id,
            "attachments": [{"node": a.node, "port": a.port} for a in e.attachments],
            "negated": sorted(e.negated),
        }
        for e in n.edges
    ]
    return {"q": n.q, "nodes": nodes, "edges": edges}


def from_dict(data: dict) -> Nfg:
    try:
        jsonschema.validate(data, NFG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidNfg(f"NFG JSON rejected: {exc.message}") from exc
    q = data["q"]
    degree_seen: dict[str, int] = {}
    for e in data["edges"]:
        for a in e["attachments"]:
            degree_seen[a["node"]] = degree_seen.get(a["node"], 0) + 1
    nodes = {}
    for entry in data["nodes"]:
        nid = entry["id"]
        if nid in nodes:
            raise InvalidNfg(f"duplicate node id {nid!r}")
        if entry["kind"] == TABLE:
            if "values" not in entry:
                raise InvalidNfg(f"table {nid!r} has no values")
            flat = np.array([complex(re, im) for re, im in entry["values"]])
            degree = entry.get("degree", round(math.log(len(flat), q)) if len(flat) > 1 else 1)
            if q**degree != len(flat):
                raise InvalidNfg(f"table {nid!r} has {len(flat)} values, expected q^degree")
            nodes[nid] = LocalFunction.table(flat.reshape((q,) * degree))
        else:
            if "values" in entry:
                raise InvalidNfg(f"indicator {nid!r} must not carry values")
            degree = entry.get("degree", degree_seen.get(nid, 0))
            nodes[nid] = LocalFunction(entry["kind"], degree)
    edges = [
        Edge(e["id"], tuple(Attachment(a["node"], a["port"]) for a in e["attachments"]), frozenset(e.get("negated", [])))
        for e in data["edges"]
    ]
    return Nfg(q, nodes, edges)


def dumps(n: Nfg) -> str:
    return json.dumps(to_dict(n), indent=1)


def loads(text: str) -> Nfg:
    return from_dict(json.loads(text))


def to_dot(n: Nfg) -> str:
    """Graphviz drawing: boxes for local functions, points for half-edge ends."""
    shapes = {EQUALITY: "box", PARITY: "box", TABLE: "ellipse"}
    marks = {EQUALITY: "=", PARITY: "+", TABLE: ""}
    lines = ["graph nfg {"]
    for nid, f in n.nodes.items():
        label = f"{marks[f.kind]} {nid}".strip()
        lines.append(f'  "{nid}" [shape={shapes[f.kind]}, label="{label}"];')
    for e in n.edges:
        ends = [a.node for a in e.attachments]
        if e.is_half:
            stub = f"half:{e.id}"
            lines.append(f'  "{stub}" [shape=point];')
            ends.append(stub)
        neg = " (neg)" if e.negated else ""
        lines.append(f'  "{ends[0]}" -- "{ends[1]}" [label="{e.id}{neg}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
