"""Command line entry point: ``permprime <group> <command> ...``.

Every command prints one flat report on stdout and exits with
0 (pass), 1 (fail), 2 (usage or input error) or 3 (resource cap hit).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from . import algebra as alg
from . import chain
from . import digraph as dg
from . import power
from .config import CAP_ENV_VAR, DEFAULT_MATERIALIZATION_CAP, Config, closure_cap, materialization_cap
from .errors import ConsistencyError, InputError, ResourceError
from .formats import read_algebra, read_digraph, serialize_digraph
from .iso import are_isomorphic

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


@dataclass
class Report:
    command: str
    verdict: str = "pass"
    fields: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    def __setitem__(self, key, value):
        self.fields[key] = value

    @property
    def exit_code(self) -> int:
        if self.verdict == "pass":
            return EXIT_PASS
        if self.verdict == "fail":
            return EXIT_FAIL
        return EXIT_RESOURCE if self.fields.get("error_kind") == "resource" else EXIT_USAGE

    def items(self) -> list[tuple[str, Any]]:
        return [("command", self.command), ("verdict", self.verdict), *self.fields.items(),
                ("elapsed_seconds", round(self.elapsed, 6))]

    def render(self, fmt: str) -> str:
        if fmt == "structured":
            return json.dumps({k: _plain(v) for k, v in self.items()}, indent=1) + "\n"
        return "".join(f"{k}: {_text(v)}\n" for k, v in self.items())


def _plain(value):
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return _text(value)


def _text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return " ".join(_text(v) for v in value) if all(not isinstance(v, (list, tuple)) for v in value) \
            else "; ".join(_text(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def _digraph_field(D: dg.Digraph) -> str:
    return "; ".join(serialize_digraph(D).strip().splitlines())


def _emit_digraph(report: Report, D: dg.Digraph, out: str | None) -> None:
    report["result_vertices"] = D.n
    report["result_edges"] = D.edge_count
    if out:
        with open(out, "w") as fh:
            fh.write(serialize_digraph(D))
        report["result_file"] = out
    else:
        report["result"] = _digraph_field(D)


# ---------------------------------------------------------------- dg


def cmd_dg_classify(args, cfg, report):
    D = read_digraph(args.file)
    flags = dg.classify(D)
    report["vertices"] = D.n
    report["edges"] = D.edge_count
    for name in ("reflexive", "symmetric", "transitive", "complete"):
        report[name] = getattr(flags, name)


def cmd_dg_complement(args, cfg, report):
    _emit_digraph(report, dg.complement(read_digraph(args.file)), args.out)


def cmd_dg_product(args, cfg, report):
    Ds = [read_digraph(f) for f in args.files]
    size = math.prod(D.n for D in Ds)
    if size > cfg.materialization_cap:
        raise ResourceError(f"product has {size} vertices, cap is {cfg.materialization_cap}",
                            required=size, cap=cfg.materialization_cap)
    P = dg.product(Ds)
    _emit_digraph(report, P.without_labels(), args.out)


def cmd_dg_exp(args, cfg, report):
    G, H = read_digraph(args.base), read_digraph(args.exponent)
    _emit_digraph(report, dg.exponential(G, H, cap=cfg.materialization_cap).without_labels(), args.out)


def cmd_dg_components(args, cfg, report):
    part = dg.components(read_digraph(args.file))
    report["components"] = len(part.blocks)
    report["sizes"] = [len(b) for b in part.blocks]
    report["blocks"] = [list(b) for b in part.blocks]


def cmd_dg_universal(args, cfg, report):
    us = dg.universal_vertices(read_digraph(args.file))
    report["universal_count"] = len(us)
    report["universal"] = us


def cmd_dg_iso(args, cfg, report):
    D1, D2 = read_digraph(args.first), read_digraph(args.second)
    w = are_isomorphic(D1, D2)
    report["vertices"] = [D1.n, D2.n]
    report["isomorphic"] = w is not None
    report["mapping"] = list(w.mapping) if w is not None else None
    report.verdict = "pass" if w is not None else "fail"


# ---------------------------------------------------------------- alg


def cmd_alg_compat(args, cfg, report):
    A, D = read_algebra(args.algebra), read_digraph(args.digraph)
    res = alg.is_compatible(A, D)
    report["compatible"] = res.ok
    report["violating_op"] = res.op
    report["violating_edges"] = [list(e) for e in res.edges] if res.edges is not None else None
    report["missing_image"] = list(res.image) if res.image is not None else None
    report.verdict = "pass" if res.ok else "fail"


def cmd_alg_free2(args, cfg, report):
    A = read_algebra(args.algebra)
    F = alg.free_algebra_on_two(A, cap=cfg.closure_cap)
    report["closure_size"] = len(F)
    report["elements"] = [str(F.term(i)) for i in range(len(F))]


def cmd_alg_maltsev(args, cfg, report):
    A = read_algebra(args.algebra)
    term = alg.find_maltsev_term(A, cap=cfg.closure_cap)
    report["found"] = term is not None
    report["term"] = str(term) if term is not None else None
    report["identities_verified"] = term is not None and alg.is_maltsev_term(A, term)
    report.verdict = "pass" if term is not None else "fail"


def cmd_alg_cp(args, cfg, report):
    A = read_algebra(args.algebra)
    v = alg.is_congruence_permutable(A, cap=cfg.closure_cap)
    report["permutable"] = v.permutable
    report["closure_size"] = v.free_size
    report["digraph_edges"] = v.digraph_edges
    report["term"] = str(v.maltsev_term) if v.maltsev_term is not None else None
    if v.obstruction_digraph is not None:
        D = v.obstruction_digraph
        asym = next((e for e in D.edges() if not D.adj[e[1], e[0]]), None)
        report["asymmetric_edge"] = [D.labels[asym[0]], D.labels[asym[1]]] if asym else None
        report["obstruction_digraph"] = _digraph_field(D)
    report.verdict = "pass" if v.permutable else "fail"


# ---------------------------------------------------------------- verify


def _context(args) -> power.PowerContext:
    G1, G2 = read_digraph(args.g1), read_digraph(args.g2)
    return power.PowerContext.auto(G1, G2, args.k, u1=args.u1, u2=args.u2)


def cmd_verify_claim1(args, cfg, report):
    ctx = _context(args)
    r = power.verify_claim1(ctx, cap=cfg.materialization_cap)
    report["u1"] = ctx.u1
    report["u2"] = ctx.u2
    report["k"] = ctx.k
    report["vertices"] = r.vertices
    report["pairs_checked"] = r.pairs_checked
    report["disagreements"] = r.disagreements
    report["first_disagreement"] = list(r.first_disagreement) if r.first_disagreement else None
    report.verdict = "pass" if r.passed else "fail"


def cmd_verify_swap(args, cfg, report):
    ctx = _context(args)
    r = power.verify_power_swap(ctx.G1, ctx.u1, ctx.G2, ctx.u2, ctx.k,
                                check_blocks=args.blocks, cap=cfg.materialization_cap)
    report["u1"] = ctx.u1
    report["u2"] = ctx.u2
    report["k"] = ctx.k
    report["quotient_vertices"] = r.vertices
    report["swapped_quotient_vertices"] = r.swapped_vertices
    report["pairs_checked"] = r.pairs_checked
    report["mismatches"] = r.mismatches
    if r.block_check is not None:
        report["block_quotient_blocks"] = r.block_check.blocks
        report["block_quotient_well_defined"] = r.block_check.well_defined
        report["block_quotient_matches_subsets"] = r.block_check.matches_subsets
        report["block_quotient_isomorphic"] = r.block_check.isomorphic
    report.verdict = "pass" if r.passed else "fail"


# ---------------------------------------------------------------- chain


def cmd_chain_g1(args, cfg, report):
    G1 = chain.construct_g1(read_digraph(args.file))
    part = dg.components(G1)
    univ = chain.component_universals(G1)
    report["vertices"] = G1.n
    report["components"] = len(part.blocks)
    report["sizes"] = [len(b) for b in part.blocks]
    report["universal_per_component"] = [len(u) for u in univ]
    report["noncomplete_components"] = chain.noncomplete_components(G1)
    report["labels"] = ["".join(map(str, lab)) for lab in G1.labels]
    if args.out:
        _emit_digraph(report, G1, args.out)
    report.verdict = "pass" if all(univ) else "fail"


def cmd_chain_g2(args, cfg, report):
    G1 = chain.construct_g1(read_digraph(args.file))
    nonc = chain.noncomplete_components(G1)
    if not nonc:
        raise InputError("G1 has no non-complete component (is G0 symmetric?)")
    R = nonc[0]
    report["r_index"] = R
    report["r_size"] = len(dg.components(G1).blocks[R])
    report["vertices_required"] = chain.g2_size(G1, R)
    G2 = chain.construct_g2(G1, R, cap=cfg.materialization_cap)
    part = dg.components(G2)
    univ = chain.component_universals(G2)
    kinds = [dg.is_complete(dg.induced(G2, b)) for b in part.blocks]
    report["vertices"] = G2.n
    report["components"] = len(part.blocks)
    report["complete_components"] = sum(kinds)
    report["noncomplete_components"] = len(kinds) - sum(kinds)
    report["universal_in_every_component"] = all(univ)
    if args.out:
        _emit_digraph(report, G2.without_labels(), args.out)
    report.verdict = "pass" if all(univ) and any(kinds) and not all(kinds) else "fail"


def cmd_chain_verify(args, cfg, report):
    G0, X = read_digraph(args.file), read_digraph(args.x)
    r = chain.verify_chain(G0, X, n=args.n, cap=cfg.materialization_cap, threads=cfg.threads)
    for k, v in r.counters.items():
        report[k] = v
    for k, v in r.checks.items():
        report[f"check_{k}"] = v
    report["witness"] = list(r.witness) if r.witness else None
    report["failure"] = r.failure
    report.verdict = "pass" if r.passed else "fail"


def cmd_chain_obstruction(args, cfg, report):
    D = read_digraph(args.file)
    w = chain.find_obstruction(D)
    report["found"] = w is not None
    report["witness"] = [w.v, w.u, w.w] if w else None
    report.verdict = "pass" if w is not None else "fail"


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--cap", type=int, default=argparse.SUPPRESS,
                        help="materialization cap in vertices (default $PERMPRIME_CAP or 200000)")
    common.add_argument("--closure-cap", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="permprime", parents=[common],
                                     description="Finite digraph calculus and Maltsev-condition checks.")
    groups = parser.add_subparsers(dest="group", required=True)

    def add(group, name, func: Callable, *arguments):
        p = group.add_parser(name, parents=[common])
        for args, kwargs in arguments:
            p.add_argument(*args, **kwargs)
        p.set_defaults(func=func, command=name)
        return p

    out = (("--out",), {"default": None, "help": "write the resulting digraph here"})
    g = groups.add_parser("dg", parents=[common]).add_subparsers(dest="command", required=True)
    add(g, "classify", cmd_dg_classify, (("file",), {}))
    add(g, "complement", cmd_dg_complement, (("file",), {}), out)
    add(g, "product", cmd_dg_product, (("files",), {"nargs": "+"}), out)
    add(g, "exp", cmd_dg_exp, (("base",), {}), (("exponent",), {}), out)
    add(g, "components", cmd_dg_components, (("file",), {}))
    add(g, "universal", cmd_dg_universal, (("file",), {}))
    add(g, "iso", cmd_dg_iso, (("first",), {}), (("second",), {}))

    a = groups.add_parser("alg", parents=[common]).add_subparsers(dest="command", required=True)
    add(a, "compat", cmd_alg_compat, (("algebra",), {}), (("digraph",), {}))
    add(a, "free2", cmd_alg_free2, (("algebra",), {}))
    add(a, "maltsev", cmd_alg_maltsev, (("algebra",), {}))
    add(a, "cp", cmd_alg_cp, (("algebra",), {}))

    v = groups.add_parser("verify", parents=[common]).add_subparsers(dest="command", required=True)
    ctx_args = (
        (("--g1",), {"required": True}), (("--g2",), {"required": True}),
        (("--k",), {"type": int, "required": True}),
        (("--u1",), {"type": int, "default": None}), (("--u2",), {"type": int, "default": None}),
    )
    add(v, "claim1", cmd_verify_claim1, *ctx_args)
    add(v, "swap", cmd_verify_swap, *ctx_args,
        (("--blocks",), {"action": "store_true",
                         "help": "also compare with the quotient of the materialized powers"}))

    c = groups.add_parser("chain", parents=[common]).add_subparsers(dest="command", required=True)
    add(c, "g1", cmd_chain_g1, (("file",), {}), out)
    add(c, "g2", cmd_chain_g2, (("file",), {}), out)
    add(c, "verify", cmd_chain_verify, (("file",), {}), (("--x",), {"required": True}),
        (("--n",), {"type": int, "default": 2}))
    add(c, "obstruction", cmd_chain_obstruction, (("file",), {}))
    return parser


def _apply_options(args, cfg: Config) -> None:
    if hasattr(args, "threads"):
        if args.threads < 1:
            raise InputError("--threads must be positive")
        cfg.threads = args.threads
    if hasattr(args, "cap"):
        cfg.materialization_cap = materialization_cap(args.cap)
    elif os.environ.get(CAP_ENV_VAR):
        cfg.materialization_cap = materialization_cap()
    if hasattr(args, "closure_cap"):
        cfg.closure_cap = closure_cap(args.closure_cap)


def dispatch(argv: list[str], config: Config | None = None) -> tuple[Report, int]:
    """Parse ``argv``, run the command and return its report and exit code."""
    args = build_parser().parse_args(argv)
    cfg = config if config is not None else Config(materialization_cap=DEFAULT_MATERIALIZATION_CAP)
    if hasattr(args, "format"):
        cfg.report_format = args.format
    report = Report(f"{args.group} {args.command}")
    start = time.perf_counter()
    try:
        _apply_options(args, cfg)
        args.func(args, cfg, report)
    except ResourceError as exc:
        report.verdict = "error"
        report["error_kind"] = "resource"
        report["error"] = str(exc)
        if exc.required is not None:
            report["required"] = exc.required
    except (InputError, OSError) as exc:
        report.verdict = "error"
        report["error_kind"] = "input"
        report["error"] = str(exc)
    except ConsistencyError as exc:
        report.verdict = "error"
        report["error_kind"] = "consistency"
        report["error"] = str(exc)
    report.elapsed = time.perf_counter() - start
    if report.verdict == "error":
        print(f"permprime: {report.fields['error']}", file=sys.stderr)
    return report, report.exit_code if report.fields.get("error_kind") != "consistency" else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    cfg = Config(materialization_cap=DEFAULT_MATERIALIZATION_CAP)
    try:
        report, code = dispatch(argv, cfg)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    sys.stdout.write(report.render(cfg.report_format))
    return code


if __name__ == "__main__":
    sys.exit(main())
