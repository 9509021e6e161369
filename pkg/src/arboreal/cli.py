"""Command-line entry point ``arboreal``.

Exit codes: 0 on success, 2 when a result is flagged as not converged,
1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exact import (ChainMatrix, arborescence_log_weight, arborescence_weight,
                    count_spanning_trees, count_spanning_trees_bruteforce, exact_log)
from .generators import parse_family
from .graph import MultiGraph
from .harness import run_convergence, run_stability, run_unbounded_degree, seed_quantiles
from .io import format_number, read_chain, read_edge_list, write_edge_list
from .models import parse_model, tree_entropy
from .series import series_log_arborescence, series_log_tau

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2


class _Flagged(Exception):
    pass


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _unweighted(g: MultiGraph) -> MultiGraph:
    return MultiGraph(g.vertex_count, tuple((u, v, 1) for u, v, _ in g.edges), True)


def cmd_count(args) -> int:
    g = read_edge_list(args.graph)
    if not args.weighted:
        g = _unweighted(g)
    count = count_spanning_trees(g)
    result = {"count": format_number(count)}
    if args.log:
        result["log"] = exact_log(count) if count else float("-inf")
    if args.brute_check:
        brute = count_spanning_trees_bruteforce(g)
        result["brute_force"] = format_number(brute)
        result["agree"] = brute == count
    if args.json:
        _emit(_dump(result))
    else:
        lines = [result["count"]]
        if "log" in result:
            lines.append(repr(result["log"]))
        if "brute_force" in result:
            lines.append(f"brute-force {result['brute_force']} "
                         f"({'agrees' if result['agree'] else 'DISAGREES'})")
        _emit("\n".join(lines))
    if args.brute_check and not result["agree"]:
        raise RuntimeError("brute-force count disagrees with the determinant")
    return EXIT_OK


def cmd_series(args) -> int:
    g = read_edge_list(args.graph)
    r = series_log_tau(g, tol=args.tol, alpha=args.alpha, K_max=args.k_max)
    d = r.as_dict()
    if args.json:
        _emit(_dump(d))
    else:
        _emit(f"log tau = {r.value!r}  in [{r.lo!r}, {r.hi!r}]  (K = {r.K_used})")
    if not r.converged:
        raise _Flagged(f"tail bound did not reach tolerance {args.tol} by K = {r.K_used}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    model = parse_model(args.model)
    est = tree_entropy(model, tol=args.tol, N=args.N)
    if args.json:
        _emit(_dump(est.as_dict()))
    else:
        _emit(f"h = {est.value!r}  in [{est.lo!r}, {est.hi!r}]  ({est.method})")
    if not est.converged:
        raise _Flagged("entropy estimate did not reach the tolerance")
    return EXIT_OK


def cmd_gen(args) -> int:
    name, params, build = parse_family(args.family)
    g = build(args.seed)
    header = f"{args.family} seed={args.seed}"
    text = write_edge_list(g, args.out, header=header)
    if args.out is None:
        sys.stdout.write(text)
    elif args.json:
        _emit(_dump({"family": name, "params": list(params), "n_vertices": g.vertex_count,
                           "n_edges": g.n_edges, "path": str(args.out)}))
    return EXIT_OK


def _sizes(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def _report_out(args, report) -> int:
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if args.gnuplot:
        Path(args.gnuplot).write_text(report.gnuplot_script(args.csv or "report.csv"))
    if args.json:
        payload = json.loads(report.to_json())
        if getattr(args, "seeds", 1) > 1:
            payload["quantiles"] = seed_quantiles(report)
        _emit(_dump(payload))
    elif not args.csv:
        sys.stdout.write(report.to_csv())
    if report.flagged:
        raise _Flagged("some series rows did not converge")
    return EXIT_OK


def cmd_converge(args) -> int:
    sizes = _sizes(args.sizes)
    if args.family in ("complete", "er") or args.family.startswith("unbounded"):
        fam = "er" if args.family.endswith("er") else "complete"
        report = run_unbounded_degree(sizes, family=fam, seed=args.seed, threads=args.threads)
    else:
        if args.reference is None:
            raise ValueError("--reference is required")
        report = run_convergence(args.family, sizes, args.reference, mode=args.mode,
                                 seed=args.seed, seeds=args.seeds, cutover=args.cutover,
                                 tol=args.tol, threads=args.threads)
    return _report_out(args, report)


def cmd_stability(args) -> int:
    report = run_stability(args.family, args.perturbation, _sizes(args.sizes), args.reference,
                           other=args.other, other_reference=args.other_reference,
                           fraction=args.fraction, bridges=args.bridges, seed=args.seed,
                           mode=args.mode, cutover=args.cutover, tol=args.tol,
                           threads=args.threads)
    return _report_out(args, report)


def cmd_arborescence(args) -> int:
    chain = ChainMatrix.from_rows(read_chain(args.chain))
    w = arborescence_weight(chain)
    result = {"weight": format_number(w), "log_weight": arborescence_log_weight(chain)}
    if args.series:
        result["series_log_weight"] = series_log_arborescence(chain)
    if args.json:
        _emit(_dump(result))
    else:
        lines = [result["weight"], repr(result["log_weight"])]
        if args.series:
            lines.append(f"series {result['series_log_weight']!r}")
        _emit("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; SUPPRESS keeps
    # the subparser copy from overwriting a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    common.add_argument("--csv", metavar="PATH", default=argparse.SUPPRESS,
                        help="write report CSV to PATH")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (speed only)")

    parser = argparse.ArgumentParser(prog="arboreal", parents=[common],
                                     description="Spanning trees, return-probability series and tree entropy.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="count spanning trees of an edge-list file")
    p.add_argument("graph")
    p.add_argument("--weighted", action="store_true", help="use the weight column")
    p.add_argument("--brute-check", action="store_true", help="confirm by enumeration (small graphs)")
    p.add_argument("--log", action="store_true", help="also print the natural log")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("series", parents=[common], help="certified log tau from return probabilities")
    p.add_argument("graph")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--alpha", type=float, default=0.5, help="laziness of the walk")
    p.add_argument("--k-max", type=int, default=1_000_000)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("entropy", parents=[common], help="tree entropy of a limit model")
    p.add_argument("--model", required=True,
                   help="regular-tree:D | free-product:S1,S2,.. | hypercubic:D")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--N", type=int, default=None, help="grid size for lattices")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("gen", parents=[common], help="write a generated graph as an edge list")
    p.add_argument("family", help="e.g. torus:2,16 or random-regular:1000,3")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("converge", parents=[common], help="normalized log tau along a family")
    p.add_argument("family", help="torus:D, box:D, random-regular:D, er-giant:C, tree-ball, complete, er")
    p.add_argument("--sizes", required=True, help="comma-separated sizes")
    p.add_argument("--reference", help="number or model spec, e.g. hypercubic:2")
    p.add_argument("--mode", choices=("auto", "exact", "series"), default="auto")
    p.add_argument("--seeds", type=int, default=1, help="seeds per size for random families")
    p.add_argument("--cutover", type=int, default=400, help="auto mode: series above this |V|")
    p.add_argument("--tol", type=float, default=1e-4, help="series width per vertex")
    p.add_argument("--gnuplot", metavar="PATH", help="write a gnuplot script")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("stability", parents=[common], help="perturbed families against predicted limits")
    p.add_argument("family")
    p.add_argument("--perturbation", choices=("thin", "hybrid"), required=True)
    p.add_argument("--sizes", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--other", help="second family for hybrid")
    p.add_argument("--other-reference")
    p.add_argument("--fraction", type=float, default=0.05, help="thin: edges removed per vertex")
    p.add_argument("--bridges", type=int, default=1, help="hybrid: joining edges")
    p.add_argument("--mode", choices=("auto", "exact", "series"), default="exact")
    p.add_argument("--cutover", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--gnuplot", metavar="PATH")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("arborescence", parents=[common], help="arborescence weight of a chain file")
    p.add_argument("chain")
    p.add_argument("--series", action="store_true", help="also evaluate the truncated trace series")
    p.set_defaults(func=cmd_arborescence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", 0), ("json", False), ("csv", None), ("threads", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except _Flagged as exc:
        print(f"arboreal: not converged: {exc}", file=sys.stderr)
        return EXIT_FLAGGED
    except (ValueError, RuntimeError, OSError, ArithmeticError) as exc:
        print(f"arboreal: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
