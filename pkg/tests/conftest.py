import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from kwtopo.nfg import Attachment, Edge, LocalFunction, Nfg

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ORACLES = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


def oracle(group: str, key: str) -> float:
    return float(ORACLES[group][key])


def random_nfg(rng: np.random.Generator, q: int, *, max_edges: int = 6, max_nodes: int = 5, max_degree: int = 4, tables_only_degree_one: bool = False) -> Nfg:
    """Random closed NFG mixing indicator and table nodes, with random negation marks."""
    while True:
        n_nodes = int(rng.integers(1, max_nodes + 1))
        n_edges = int(rng.integers(1, max_edges + 1))
        ends = [(int(rng.integers(n_nodes)), int(rng.integers(n_nodes))) for _ in range(n_edges)]
        degree = [0] * n_nodes
        for a, b in ends:
            degree[a] += 1
            degree[b] += 1
        if all(degree) and max(degree) <= max_degree:
            break
    nodes = {}
    for i, d in enumerate(degree):
        kind = ["equality", "parity", "table"][int(rng.integers(3))]
        if tables_only_degree_one and d > 1 and kind == "table":
            kind = "equality"
        if kind == "table":
            vals = rng.normal(size=(q,) * d) + 1j * rng.normal(size=(q,) * d)
            nodes[f"f{i}"] = LocalFunction.table(vals)
        else:
            nodes[f"f{i}"] = LocalFunction(kind, d)
    used = [0] * n_nodes
    edges = []
    for j, (a, b) in enumerate(ends):
        atts = []
        for node in (a, b):
            atts.append(Attachment(f"f{node}", used[node]))
            used[node] += 1
        neg = frozenset(k for k in (0, 1) if rng.random() < 0.3)
        edges.append(Edge(f"e{j}", tuple(atts), neg))
    return Nfg(q, nodes, edges)


def rel(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)
