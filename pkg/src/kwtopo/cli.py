"""Command-line front end.

Exit codes: 0 success, 1 identity violated, 2 invalid configuration,
3 composite modulus where a field is needed, 4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import algebra, bridge, complexes, fourier, models, nfg
from .errors import BudgetExceeded, CompositeModulus, KwTopoError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATION, EXIT_INVALID, EXIT_COMPOSITE, EXIT_BUDGET = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    tol: float
    budget: int
    workers: int

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.budget < 1:
            raise ConfigError("--budget must be at least 1")
        if self.workers < 1:
            raise ConfigError("--workers must be at least 1")


def _emit(obj: dict, path: str | None = None) -> None:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=1, sort_keys=False) + "\n"
    if path and path != "-":
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _complex_from_args(a) -> complexes.ChainComplex:
    kind = a.lattice
    if kind == "grid1d":
        return complexes.build_grid_1complex(a.rows, a.cols, a.q)
    if kind == "grid2d":
        return complexes.build_grid_2complex(a.rows, a.cols, a.q, a.hole or ())
    if kind == "torus2d":
        return complexes.build_torus_2complex(a.l1, a.l2, a.q)
    if kind == "cube3d":
        return complexes.build_cube_3complex(a.l, a.q)
    if kind == "torus3d":
        return complexes.build_torus_3complex(a.l, a.q)
    raise ConfigError(f"unknown lattice {kind!r}")


def _add_lattice_args(p) -> None:
    p.add_argument("--lattice", required=True, choices=["grid1d", "grid2d", "torus2d", "cube3d", "torus3d"])
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--l1", type=int, default=2)
    p.add_argument("--l2", type=int, default=2)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--hole", type=int, action="append", help="row-major face index to remove (repeatable)")
    p.add_argument("--q", type=int, default=2)


def cmd_homology(a, cfg: RunConfig) -> int:
    c = _complex_from_args(a)
    h = complexes.homology_dims(c)
    report = {
        "command": "homology",
        "lattice": a.lattice,
        "q": c.q,
        "C": c.cell_counts(),
        "H": h,
        "cohomology": complexes.cohomology_dims(c),
    }
    if a.complex_json:
        Path(a.complex_json).write_text(complexes.to_json(c))
    if a.dot:
        Path(a.dot).write_text(complexes.to_dot(c))
    _emit(report, a.json)
    return EXIT_OK


def _model_from_args(a) -> models.LatticeModel:
    kinds = {"ising2d": ("ising", 2), "ising3d": ("ising", 3), "potts2d": ("potts", 2), "vector2d": ("vector", 2)}
    kind, dim = kinds[a.model]
    q = 2 if kind == "ising" else a.q
    return models.torus_model(a.l, a.beta, q=q, kind=kind, dim=dim)


def _close_half_edges(n: nfg.Nfg, how: str | None) -> nfg.Nfg:
    if not n.half_edges:
        return n
    if how is None:
        raise ConfigError("NFG has half-edges; pass --close all-one or --close zero")
    f = nfg.LocalFunction.equality(1) if how == "all-one" else nfg.LocalFunction.parity(1)
    return nfg.close_half_edges(n, {h: f for h in n.half_edges}, prefix="close:")


def cmd_partition(a, cfg: RunConfig) -> int:
    if (a.nfg is None) == (a.model is None):
        raise ConfigError("give exactly one of --nfg or --model")
    if a.nfg:
        graph = nfg.loads(Path(a.nfg).read_text())
        source = a.nfg
    else:
        graph = _model_from_args(a).nfg()
        source = a.model
    graph = _close_half_edges(graph, a.close)
    values = {}
    if a.method == "brute" or a.check:
        values["brute"] = nfg.exterior_function(graph, budget=cfg.budget, workers=cfg.workers).scalar
    if a.method == "contract" or a.check:
        values["contract"] = nfg.partition_sum_contracted(graph)
    method = a.method
    z = values[method]
    report = {"command": "partition", "source": source, "method": method, "Z": z.real, "Z_imag": z.imag}
    code = EXIT_OK
    if a.check:
        zb, zc = values["brute"], values["contract"]
        err = abs(zb - zc) / max(abs(zb), 1e-300)
        report["check"] = {"brute": zb.real, "contract": zc.real, "rel_err": err, "agree": err <= cfg.tol}
        if err > cfg.tol:
            code = EXIT_VIOLATION
    _emit(report, a.json)
    return code


def _kw_table(r: models.KwReport, tol: float) -> str:
    rows = [("Z(beta)", r.Z_primal)]
    rows += [(f"Z{'_' + k if k else ''}(beta_dual)", v) for k, v in r.twisted.items()]
    rows += [(f"coset[{k or '0'}]", v) for k, v in r.coset_sums.items()]
    rows += [("rhs", r.rhs)]
    lines = [
        f"dim={r.dim} L={r.L} n={r.n} q={r.q} kind={r.kind}",
        f"beta={r.beta!r} beta_dual={r.beta_dual!r} c_beta={r.c_beta!r}",
    ]
    lines += [f"{label:<20}{value!r}" for label, value in rows]
    lines.append(f"{'rel_err':<20}{r.rel_err:.3e}")
    if r.coset_rel_err is not None:
        lines.append(f"{'coset_rel_err':<20}{r.coset_rel_err:.3e}")
    lines.append("PASS" if r.passed(tol) else "FAIL")
    return "\n".join(lines) + "\n"


def cmd_kw(a, cfg: RunConfig) -> int:
    if a.dim == 2:
        report = models.kw_verify_2d(a.l, a.beta, q=a.q, kind=a.kind, workers=cfg.workers, proof=a.proof, budget=cfg.budget)
    elif a.dim == 3:
        report = models.kw_verify_3d(a.l, a.beta, workers=cfg.workers, proof=a.proof, budget=cfg.budget)
    else:
        raise ConfigError("--dim must be 2 or 3")
    passed = report.passed(cfg.tol)
    if a.json:
        _emit({"command": "kw", "tol": cfg.tol, "passed": passed, **report.to_dict(timing=a.timing)}, a.json)
    if a.json != "-":
        sys.stdout.write(_kw_table(report, cfg.tol))
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_dualize(a, cfg: RunConfig) -> int:
    graph = _close_half_edges(nfg.loads(Path(a.nfg).read_text()), a.close)
    dual, ledger = fourier.dualize(graph)
    Path(a.out).write_text(nfg.dumps(dual) + "\n")
    ledger_path = a.ledger or f"{a.out}.ledger.json"
    doc = {"schema_version": SCHEMA_VERSION, "edges": len(graph.edges), **ledger.to_dict()}
    Path(ledger_path).write_text(json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def cmd_build_nfg(a, cfg: RunConfig) -> int:
    form, _, mat = a.op.partition("-")
    if form not in ("io", "ker", "im") or len(mat) != 2 or mat[0] not in "bd" or not mat[1].isdigit():
        raise ConfigError(f"--op must look like ker-d1, im-b2 or io-b1, got {a.op!r}")
    c = _complex_from_args(a)
    i = int(mat[1])
    if not 1 <= i <= c.dim:
        raise ConfigError(f"{a.lattice} has no map of index {i}")
    if mat[0] == "b":
        m, dom, cod = c.boundary(i), c.labels[i], c.labels[i - 1]
    else:
        m, dom, cod = c.coboundary(i), c.labels[i - 1], c.labels[i]
    builder = {"io": bridge.nfg_io, "ker": bridge.nfg_kernel, "im": bridge.nfg_image}[form]
    op = builder(m, dom, cod)
    text = nfg.dumps(op.nfg) + "\n"
    if a.out and a.out != "-":
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    if a.dot:
        Path(a.dot).write_text(nfg.to_dot(op.nfg))
    return EXIT_OK


def _betas(a) -> list[float]:
    if a.betas:
        return [float(x) for x in a.betas.split(",") if x.strip()]
    if a.count < 1:
        raise ConfigError("--count must be positive")
    if a.count == 1:
        return [a.beta_min]
    return [float(x) for x in np.linspace(a.beta_min, a.beta_max, a.count)]


def cmd_sweep(a, cfg: RunConfig) -> int:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=models.SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    worst = 0.0
    for beta in _betas(a):
        r = models.kw_verify_2d(a.l, beta, workers=cfg.workers, cosets=False, budget=cfg.budget)
        worst = max(worst, r.rel_err)
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in models.sweep_row(r, timing=a.timing).items()})
    if a.out and a.out != "-":
        Path(a.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK if worst <= cfg.tol else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kwtopo", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--budget", type=int, default=None, help="enumeration cap (default: $KWTOPO_BUDGET or 2^24)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--json", default=None, help="write the JSON report here ('-' for stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("homology", parents=[common], help="cell counts and homology dimensions")
    _add_lattice_args(h)
    h.add_argument("--dot", help="write the 1-skeleton as Graphviz DOT")
    h.add_argument("--complex-json", help="write cells and boundary matrices as JSON")
    h.set_defaults(func=cmd_homology, json_default="-")

    pa = sub.add_parser("partition", parents=[common], help="partition sum of an NFG")
    pa.add_argument("--nfg", help="NFG JSON file")
    pa.add_argument("--model", choices=["ising2d", "ising3d", "potts2d", "vector2d"])
    pa.add_argument("--l", type=int, default=2)
    pa.add_argument("--beta", type=float, default=0.0)
    pa.add_argument("--q", type=int, default=2)
    pa.add_argument("--method", choices=["brute", "contract"], default="brute")
    pa.add_argument("--check", action="store_true", help="evaluate both ways and compare")
    pa.add_argument("--close", choices=["all-one", "zero"], help="terminate half-edges before summing")
    pa.set_defaults(func=cmd_partition, json_default="-")

    k = sub.add_parser("kw", parents=[common], help="verify the Kramers-Wannier identity")
    k.add_argument("--dim", type=int, default=2)
    k.add_argument("--l", type=int, required=True)
    k.add_argument("--beta", type=float, required=True)
    k.add_argument("--q", type=int, default=2)
    k.add_argument("--kind", choices=["ising", "potts", "vector"], default="ising")
    k.add_argument("--proof", action="store_true", help="also recover the dualization constants")
    k.add_argument("--timing", action="store_true", help="include wall time in the JSON report")
    k.set_defaults(func=cmd_kw, json_default=None)

    d = sub.add_parser("dualize", parents=[common], help="Fourier dual of an NFG plus scale ledger")
    d.add_argument("--nfg", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--ledger", help="ledger path (default: <out>.ledger.json)")
    d.add_argument("--close", choices=["all-one", "zero"], help="terminate half-edges before dualizing")
    d.set_defaults(func=cmd_dualize, json_default=None)

    b = sub.add_parser("build-nfg", parents=[common], help="emit an operator NFG as JSON")
    b.add_argument("--op", required=True, help="{io,ker,im}-{b,d}<i>, e.g. ker-d1")
    _add_lattice_args(b)
    b.add_argument("--out", help="output path (default stdout)")
    b.add_argument("--dot", help="write the NFG as Graphviz DOT")
    b.set_defaults(func=cmd_build_nfg, json_default=None)

    s = sub.add_parser("sweep", parents=[common], help="CSV sweep of the 2D Ising identity over beta")
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--betas", help="comma-separated list")
    s.add_argument("--beta-min", type=float, default=0.1)
    s.add_argument("--beta-max", type=float, default=1.5)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.add_argument("--timing", action="store_true", help="fill the seconds column")
    s.set_defaults(func=cmd_sweep, json_default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    if a.json is None:
        a.json = a.json_default
    try:
        budget = a.budget if a.budget is not None else algebra.default_budget()
        cfg = RunConfig(a.command, a.tol, budget, a.workers)
        return a.func(a, cfg)
    except CompositeModulus as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPOSITE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (KwTopoError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
