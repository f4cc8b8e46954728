"""Command line front end.

Exit codes: 0 success, 2 invalid input, 3 certified not a homotopy
equivalence, 4 incompatible gluing data, 5 oracle disagreement.
Failures print one machine-readable JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .boundary import DecoratedBoundary, compute_boundary
from .coupling import (CouplingConfig, CouplingMap, FreeByCyclicPresentation,
                       ThetaComplex, canonical_h, couple,
                       present_free_by_cyclic)
from .errors import (CutoffTooSmall, EpcoupleError, IncompatibleDecoration,
                     NotBoundaryCollapsed, NotHomotopyEquivalence,
                     TruncationTooShallow)
from .folding import (FoldSequence, HomotopyEquivalenceCertificate,
                      certify_homotopy_equivalence,
                      fold_decompose_end_periodic)
from .graph import FiniteGraph, parse_path, step_name
from .homotopy import (boundary_collapse, build_end_invariant_tree,
                       homotopy_inverse)
from .maps import GraphMap
from .oracle import first_return_oracle
from .presentation import JOINING, EndPeriodicPresentation
from .unrolling import unroll

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_EQUIVALENCE = 3
EXIT_INCOMPATIBLE = 4
EXIT_ORACLE = 5

_INCOMPATIBLE = (IncompatibleDecoration, NotBoundaryCollapsed,
                 CutoffTooSmall, TruncationTooShallow)


def _load(path: str | Path) -> EndPeriodicPresentation:
    return EndPeriodicPresentation.from_json(Path(path).read_text())


def _seed_rng() -> random.Random | None:
    seed = os.environ.get("EPCOUPLE_SEED")
    return random.Random(int(seed)) if seed else None


def _plural(n: int, noun: str) -> str:
    return f"{n} {noun}" + ("" if n == 1 else "s")


# ----- command bodies -----

def _cmd_validate(args) -> int:
    pres = _load(args.file)
    report = pres.validate()
    print(f"ok: period {report.period}; "
          f"{_plural(len(pres.ends), 'end')} in "
          f"{_plural(len(report.orbits), 'orbit')}; "
          f"core {len(pres.core.vertices)}V/{len(pres.core.edges)}E")
    return EXIT_OK


def _cmd_unroll(args) -> int:
    t = unroll(_load(args.file), args.n)
    print(f"levels -{args.n}..{args.n}: "
          f"{len(t.graph.vertices)} vertices, {len(t.graph.edges)} edges")
    if args.dot:
        Path(args.dot).write_text(t.graph.to_dot(name="truncation") + "\n")
        print(f"wrote {args.dot}")
    return EXIT_OK


def _boundary_summary(b: DecoratedBoundary) -> str:
    joins = [(comp, e) for comp in b.components for e in comp.joining_edges()]
    counts = ", ".join(str(comp.subdivision_count[e]) for comp, e in joins)
    label = "subdivision" if len(joins) == 1 else "subdivisions"
    lines = [f"{_plural(len(b.components), 'component')}; "
             f"{_plural(len(joins), 'joining edge')}; {label} {counts}"]
    for comp in b.components:
        subgraph = [e for e in comp.graph.edges
                    if comp.edge_class[e] != JOINING]
        lines.append(f"  {comp.end}: chi {comp.euler_characteristic()}; "
                     f"joining {' '.join(comp.joining_edges()) or '-'}; "
                     f"subgraph {' '.join(subgraph) or '-'}")
    return "\n".join(lines)


def _cmd_boundary(args) -> int:
    b = compute_boundary(_load(args.file), 1 if args.sign == "+" else -1)
    print(_boundary_summary(b))
    if args.dot:
        Path(args.dot).write_text(b.to_dot() + "\n")
        print(f"wrote {args.dot}")
    return EXIT_OK


def _load_graph_map(path: str) -> GraphMap:
    data = json.loads(Path(path).read_text())
    m = GraphMap(
        domain=FiniteGraph.from_data(data["domain"]),
        codomain=FiniteGraph.from_data(data["codomain"]),
        vertex_images=dict(data["vertices"]),
        edge_images={e: parse_path(steps)
                     for e, steps in data["edges"].items()},
    )
    m.validate()
    return m


def _fold_log(seq: FoldSequence, cert: HomotopyEquivalenceCertificate) -> str:
    lines = []
    for i, st in enumerate(seq.steps, start=1):
        a, b = st.pair
        lines.append(f"step {i}: {st.kind} {step_name(a)} ~ {step_name(b)}")
    lines.append(f"terminal: {seq.terminal_kind}")
    lines.append("verdict: HE" if cert.verdict
                 else f"verdict: NOT-HE ({cert.failure})")
    return "\n".join(lines)


def _fold_data(seq: FoldSequence,
               cert: HomotopyEquivalenceCertificate) -> dict:
    return {
        "steps": [{"kind": st.kind, "pair": [list(st.pair[0]),
                                             list(st.pair[1])]}
                  for st in seq.steps],
        "terminal_kind": seq.terminal_kind,
        "verdict": cert.verdict,
        "failure": cert.failure,
    }


def _cmd_fold(args) -> int:
    if args.finite:
        cert = certify_homotopy_equivalence(_load_graph_map(args.finite),
                                            rng=_seed_rng())
        seq = cert.witness
    else:
        seq, cert = fold_decompose_end_periodic(_load(args.file),
                                                rng=_seed_rng())
    if args.json:
        print(json.dumps(_fold_data(seq, cert), indent=2, sort_keys=True))
    else:
        print(_fold_log(seq, cert))
    return EXIT_OK if cert.verdict else EXIT_NOT_EQUIVALENCE


def _cmd_invert(args) -> int:
    inv = homotopy_inverse(_load(args.file))
    Path(args.out).write_text(inv.presentation.to_json())
    moved = " (moved)" if inv.basepoint_move else ""
    print(f"ok: wrote {args.out}; basepoint {inv.basepoint}{moved}")
    return EXIT_OK


def _cmd_collapse(args) -> int:
    rep = boundary_collapse(_load(args.file))
    Path(args.out).write_text(rep.presentation.to_json())
    core = rep.presentation.core
    print(f"ok: wrote {args.out}; core {len(core.vertices)}V/{len(core.edges)}E")
    return EXIT_OK


def _cmd_couple(args) -> int:
    left = _load(args.left)
    right = _load(args.right)
    if args.canonical:
        h = canonical_h(left, right)
    else:
        h = CouplingMap.from_json(Path(args.h).read_text())
    config = CouplingConfig(args.m) if args.m is not None else None
    theta = couple(left, right, h, config)
    Path(args.out).write_text(theta.to_json())
    print(f"ok: wrote {args.out}; cutoff {theta.cutoff}; "
          f"{len(theta.graph.vertices)} vertices, "
          f"{len(theta.graph.edges)} edges; "
          f"crossings +{len(theta.crossings_plus)}/"
          f"-{len(theta.crossings_minus)}")
    return EXIT_OK


def _presentation_exit(pres: FreeByCyclicPresentation) -> int:
    if pres.certified():
        return EXIT_OK
    if not pres.oracle_report.agreed():
        return EXIT_ORACLE
    return EXIT_NOT_EQUIVALENCE


def _cmd_present(args) -> int:
    theta = ThetaComplex.from_json(Path(args.file).read_text())
    pres = present_free_by_cyclic(theta, k_max=args.k_max)
    print(pres.describe(), end="")
    return _presentation_exit(pres)


def _cmd_oracle_check(args) -> int:
    theta = ThetaComplex.from_json(Path(args.file).read_text())
    report = first_return_oracle(theta, depth=args.depth)
    print(report.describe(), end="")
    return EXIT_OK if report.agreed() else EXIT_ORACLE


def _certificate_data(pres: FreeByCyclicPresentation) -> dict:
    return {
        "rank": pres.rank,
        "monodromy": [list(word) for word in pres.monodromy],
        "constituents": [c.verdict for c in pres.constituent_certificates],
        "first_return": pres.return_certificate.verdict,
        "boundary": {f"{rep.sign:+d}:{rep.end}": rep.injective()
                     for rep in pres.boundary_reports},
        "k_max": pres.k_max,
        "oracle": pres.oracle_report.agreed(),
    }


def _cmd_embed(args) -> int:
    path = Path(args.file)
    collapsed = boundary_collapse(_load(path)).presentation
    inv = homotopy_inverse(collapsed)
    theta = couple(collapsed, inv.presentation, canonical_h(collapsed, inv))
    pres = present_free_by_cyclic(theta, k_max=args.k_max)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    theta_path = outdir / f"{path.stem}.theta.json"
    text_path = outdir / f"{path.stem}.presentation.txt"
    cert_path = outdir / f"{path.stem}.certificates.json"
    theta_path.write_text(theta.to_json())
    text_path.write_text(pres.describe())
    cert_path.write_text(json.dumps(_certificate_data(pres), indent=2,
                                    sort_keys=True) + "\n")

    print(pres.describe(), end="")
    print(f"wrote {theta_path} {text_path} {cert_path}")
    return _presentation_exit(pres)


def _cmd_inspect(args) -> int:
    pres = _load(args.file)
    if args.what == "blocks":
        t = unroll(pres, args.n)
        for level in range(-args.n, args.n + 1):
            cells = t.cells_at(level)
            nv = sum(1 for c in cells if t.graph.has_vertex(c))
            ne = sum(1 for c in cells if t.graph.has_edge(c))
            name = "B0 (core)" if level == 0 else f"B{level:+d}"
            print(f"{name}: {nv} vertices, {ne} edges")
        return EXIT_OK
    if args.what == "boundary":
        b = compute_boundary(pres, 1 if args.sign == "+" else -1)
        print(_boundary_summary(b))
        if args.dot:
            Path(args.dot).write_text(b.to_dot() + "\n")
        return EXIT_OK
    if args.what == "tree":
        tree = build_end_invariant_tree(pres)
        print("tree edges:", " ".join(sorted(tree.tree_edges)) or "-")
        print("core edges:", " ".join(sorted(tree.t0_edges)) or "-")
        for end in sorted(tree.critical_pos):
            print(f"critical +{end}: {tree.critical_pos[end]}")
        for end in sorted(tree.critical_neg):
            print(f"critical -{end}: {tree.critical_neg[end]}")
        print("shift invariant:", "yes" if tree.shift_invariant else "no")
        return EXIT_OK
    seq, cert = fold_decompose_end_periodic(pres, rng=_seed_rng())
    print(_fold_log(seq, cert))
    return EXIT_OK if cert.verdict else EXIT_NOT_EQUIVALENCE


# ----- wiring -----

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epcouple",
        description="end-periodic graph maps: validate, invert, couple, present")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a presentation file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("unroll", help="truncate the infinite graph to levels -n..n")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--dot", help="write the truncation graph as DOT")
    p.set_defaults(func=_cmd_unroll)

    p = sub.add_parser("boundary", help="decorated boundary of one sign")
    p.add_argument("file")
    p.add_argument("--sign", choices=["+", "-"], required=True)
    p.add_argument("--dot", help="write the decorated boundary as DOT")
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("fold", help="fold decomposition and equivalence verdict")
    p.add_argument("file", nargs="?")
    p.add_argument("--finite", help="fold a plain finite graph map file instead")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_fold)

    p = sub.add_parser("invert", help="compute a homotopy inverse presentation")
    p.add_argument("file")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("collapse", help="collapse block components to points")
    p.add_argument("file")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_collapse)

    p = sub.add_parser("couple", help="glue two presentations along their ends")
    p.add_argument("left")
    p.add_argument("right")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--h", help="gluing data file")
    which.add_argument("--canonical", action="store_true",
                       help="derive the gluing when right inverts left")
    p.add_argument("-m", type=int, help="cutoff depth (default: smallest legal)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("present", help="free-by-cyclic presentation of a coupling")
    p.add_argument("file")
    p.add_argument("--k-max", type=int, default=8)
    p.set_defaults(func=_cmd_present)

    p = sub.add_parser("oracle-check",
                       help="recompute the first return from the semiflow")
    p.add_argument("file")
    p.add_argument("--depth", type=int)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("embed", help="full pipeline: collapse, invert, couple, present")
    p.add_argument("file")
    p.add_argument("-o", "--out", default=".")
    p.add_argument("--k-max", type=int, default=8)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("inspect", help="render a derived object")
    p.add_argument("file")
    p.add_argument("what", choices=["blocks", "boundary", "tree", "folds"])
    p.add_argument("--sign", choices=["+", "-"], default="+")
    p.add_argument("-n", type=int, default=2)
    p.add_argument("--dot")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "fold" and not args.finite and not args.file:
        build_parser().error("fold needs a presentation file or --finite")
    try:
        return args.func(args)
    except _INCOMPATIBLE as exc:
        return _diagnostic(exc, EXIT_INCOMPATIBLE)
    except NotHomotopyEquivalence as exc:
        return _diagnostic(exc, EXIT_NOT_EQUIVALENCE)
    except (EpcoupleError, OSError, json.JSONDecodeError, KeyError) as exc:
        return _diagnostic(exc, EXIT_INVALID)


def _diagnostic(exc: BaseException, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "detail": str(exc),
                      "exit": code}, sort_keys=True), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
