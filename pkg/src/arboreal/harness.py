"""Convergence experiments: normalized log-complexity against a limit entropy.

Each row records ``log tau(G)`` for one generated graph, ``log tau / |V|``
and its gap to a reference tree entropy.  Rows are computed in parallel
(threads) but always assembled in sorted order, and timing is kept out of
the CSV, so reports are byte-identical for equal inputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .exact import log_count_spanning_trees
from .generators import (box, complete_graph, er_giant, hybrid_join, random_regular,
                         thin_subgraph, torus, tree_ball_sequence)
from .graph import MultiGraph
from .models import parse_model, tree_entropy
from .series import series_log_tau

__all__ = [
    "CSV_HEADER",
    "ReportRow",
    "ConvergenceReport",
    "family_builder",
    "reference_value",
    "run_convergence",
    "run_stability",
    "run_unbounded_degree",
    "seed_quantiles",
]

CSV_HEADER = ("family,params,n_vertices,n_edges,log_tau,normalized,reference,gap,"
              "certified_lo,certified_hi,seed")
DEFAULT_CUTOVER = 400
# beyond this size the dense trace propagation is too slow; auto mode
# falls back to a determinant
SERIES_VERTEX_LIMIT = 2000
MAX_REGENERATE = 100


@dataclass(frozen=True)
class ReportRow:
    """One graph of a convergence table.

    ``certified_lo``/``certified_hi`` bound ``log_tau`` (equal to it for
    determinant rows).  ``flagged`` marks a series row whose interval did
    not reach the tolerance.
    """

    family: str
    params: str
    n_vertices: int
    n_edges: int
    log_tau: float
    normalized: float
    reference: float
    gap: float
    certified_lo: float
    certified_hi: float
    seed: int | None
    method: str = "exact"
    flagged: bool = False

    def csv_fields(self) -> list[str]:
        return [self.family, self.params, str(self.n_vertices), str(self.n_edges),
                _fmt(self.log_tau), _fmt(self.normalized), _fmt(self.reference),
                _fmt(self.gap), _fmt(self.certified_lo), _fmt(self.certified_hi),
                "" if self.seed is None else str(self.seed)]


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class ConvergenceReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(r.flagged for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in self.rows:
            writer.writerow(r.csv_fields())
        return buf.getvalue()

    def to_json(self, include_timing: bool = False) -> str:
        meta = dict(self.metadata)
        if not include_timing:
            meta.pop("wall_time", None)
        return json.dumps({"metadata": meta, "rows": [asdict(r) for r in self.rows]},
                          indent=2, sort_keys=True)

    def gnuplot_script(self, csv_path: str = "report.csv") -> str:
        """Gnuplot commands plotting ``normalized`` against ``n_vertices``."""
        ref = self.rows[0].reference if self.rows else 0.0
        return "\n".join([
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set logscale x",
            "set xlabel '|V|'",
            "set ylabel 'log tau / |V|'",
            f"plot '{csv_path}' using 3:6 with linespoints title 'normalized', \\",
            f"     {ref!r} with lines title 'reference'",
            "",
        ])

    def gaps(self) -> list[float]:
        return [r.gap for r in self.rows]


def reference_value(ref) -> float:
    """A float, or a model spec like ``hypercubic:2`` evaluated by its best method."""
    if isinstance(ref, (int, float)):
        return float(ref)
    text = str(ref).strip()
    try:
        return float(text)
    except ValueError:
        pass
    if text.lower() in ("zero", "none"):
        return 0.0
    return tree_entropy(parse_model(text), tol=1e-9).value


def family_builder(family: str) -> tuple[str, Callable[[int, int], MultiGraph], bool]:
    """``(name, build(size, seed), is_random)`` for a family spec.

    Sizes mean: side length for ``torus:d``/``box:d``, vertex count for
    ``random-regular:d``, ``er-giant:c`` and ``complete``, radius for
    ``tree-ball``.
    """
    name, _, rest = family.partition(":")
    name = name.strip().lower()
    args = [a.strip() for a in rest.split(",") if a.strip()]
    if name in ("torus", "box"):
        d = int(args[0]) if args else 2
        fn = torus if name == "torus" else box
        return f"{name}:{d}", (lambda size, seed: fn(d, size)), False
    if name == "random-regular":
        d = int(args[0]) if args else 3
        return f"{name}:{d}", (lambda size, seed: random_regular(size, d, seed)), True
    if name == "er-giant":
        c = float(args[0]) if args else 4.0
        return f"{name}:{args[0] if args else 4}", (lambda size, seed: er_giant(size, c, seed)), True
    if name == "tree-ball":
        return name, (lambda size, seed: tree_ball_sequence(size)), False
    if name == "complete":
        return name, (lambda size, seed: complete_graph(size)), False
    raise ValueError(f"unknown family {family!r}")


def _log_tau_row(g: MultiGraph, mode: str, cutover: int, tol: float):
    n = g.vertex_count
    if mode == "auto":
        mode = "series" if cutover < n <= SERIES_VERTEX_LIMIT else "exact"
    if mode == "exact" or n < 2:
        v = log_count_spanning_trees(g)
        return v, v, v, "exact", False
    if mode != "series":
        raise ValueError(f"unknown mode {mode!r}")
    r = series_log_tau(g, tol=tol * n, with_exact=False)
    return r.value, r.lo, r.hi, "series", not r.converged


def _generate_connected(build, size, seed, is_random):
    if not is_random:
        g = build(size, seed)
        if not g.is_connected:
            raise ValueError(f"deterministic family produced a disconnected graph at size {size}")
        return g, seed
    for attempt in range(MAX_REGENERATE):
        g = build(size, seed + attempt)
        if g.is_connected:
            return g, seed + attempt
    raise RuntimeError(f"no connected graph after {MAX_REGENERATE} seeds")


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _sort_rows(rows):
    return sorted(rows, key=lambda r: (r.n_vertices, r.family, r.params,
                                       -1 if r.seed is None else r.seed))


def run_convergence(family: str, sizes: Sequence[int], reference, mode: str = "auto",
                    seed: int = 0, seeds: int = 1, cutover: int = DEFAULT_CUTOVER,
                    tol: float = 1e-4, threads: int = 1) -> ConvergenceReport:
    """Normalized ``log tau`` along a family against a reference entropy.

    Parameters
    ----------
    family : str
        Family spec, see :func:`family_builder`.
    sizes : sequence of int
        Size parameters.
    reference : float or str
        Reference entropy or model spec.
    mode : {"auto", "exact", "series"}
        ``exact`` uses a determinant; ``series`` the certified series with
        interval width ``tol * |V|``; ``auto`` uses the series for
        ``cutover < |V| <= 2000``.
    seed, seeds : int
        Random families use seeds ``seed .. seed + seeds - 1`` (a
        disconnected draw moves on to the next seed).
    threads : int
        Worker threads; affects speed only.
    """
    start = time.perf_counter()
    name, build, is_random = family_builder(family)
    ref = reference_value(reference)
    jobs = [(size, seed + i) for size in sizes for i in range(seeds if is_random else 1)]

    def work(job):
        size, s = job
        g, used = _generate_connected(build, size, s, is_random)
        log_tau, lo, hi, method, flagged = _log_tau_row(g, mode, cutover, tol)
        n = g.vertex_count
        normalized = log_tau / n
        return ReportRow(name, str(size), n, g.n_edges, log_tau, normalized, ref,
                         normalized - ref, lo, hi, used if is_random else None,
                         method, flagged)

    rows = _sort_rows(_map(work, jobs, threads))
    meta = {"family": family, "reference": str(reference), "mode": mode, "seed": seed,
            "seeds": seeds, "tolerance": tol, "cutover": cutover,
            "wall_time": time.perf_counter() - start}
    return ConvergenceReport(rows, meta)


def run_stability(family: str, perturbation: str, sizes: Sequence[int], reference,
                  other: str | None = None, other_reference=None, fraction: float = 0.05,
                  bridges: int = 1, seed: int = 0, mode: str = "exact",
                  cutover: int = DEFAULT_CUTOVER, tol: float = 1e-4,
                  threads: int = 1) -> ConvergenceReport:
    """Base family next to a perturbed version with the predicted limit.

    ``perturbation="thin"`` deletes up to ``fraction * |V|`` edges keeping
    connectivity; the limit is unchanged.  ``perturbation="hybrid"`` joins
    each base graph to a graph of family ``other`` of the same size with
    ``bridges`` edges; the limit is ``a h + (1 - a) h'`` with ``a`` the
    base share of the vertices.
    """
    start = time.perf_counter()
    name, build, is_random = family_builder(family)
    ref = reference_value(reference)
    if perturbation == "hybrid":
        if other is None or other_reference is None:
            raise ValueError("hybrid needs other and other_reference")
        oname, obuild, orandom = family_builder(other)
        oref = reference_value(other_reference)
    elif perturbation != "thin":
        raise ValueError("perturbation must be 'thin' or 'hybrid'")

    def work(size):
        g, used = _generate_connected(build, size, seed, is_random)
        out = []
        log_tau, lo, hi, method, flagged = _log_tau_row(g, mode, cutover, tol)
        n = g.vertex_count
        out.append(ReportRow(name, str(size), n, g.n_edges, log_tau, log_tau / n, ref,
                             log_tau / n - ref, lo, hi, used if is_random else None,
                             method, flagged))
        if perturbation == "thin":
            h = thin_subgraph(g, fraction, seed)
            fam, pref = f"thin({name};{fraction!r})", ref
        else:
            # random families are sized by vertex count: match the base graph
            other_size = n if orandom else size
            g2, _ = _generate_connected(obuild, other_size, seed, orandom)
            h = hybrid_join(g, g2, bridges, seed)
            share = n / h.vertex_count
            fam, pref = f"hybrid({name};{oname})", share * ref + (1 - share) * oref
        log_tau, lo, hi, method, flagged = _log_tau_row(h, mode, cutover, tol)
        m = h.vertex_count
        out.append(ReportRow(fam, str(size), m, h.n_edges, log_tau, log_tau / m, pref,
                             log_tau / m - pref, lo, hi, seed, method, flagged))
        return out

    rows = _sort_rows([r for rs in _map(work, list(sizes), threads) for r in rs])
    meta = {"family": family, "perturbation": perturbation, "reference": str(reference),
            "other": other, "fraction": fraction, "bridges": bridges, "seed": seed,
            "mode": mode, "tolerance": tol, "wall_time": time.perf_counter() - start}
    return ConvergenceReport(rows, meta)


def run_unbounded_degree(sizes: Sequence[int], family: str = "complete", seed: int = 0,
                         threads: int = 1) -> ConvergenceReport:
    """``n^{-1} log tau - log(mean degree scale)`` for dense families.

    ``complete``: ``K_n`` against ``log(n - 1)``; exactly
    ``(n - 2) log n / n - log(n - 1)`` by Cayley's formula.
    ``er``: giant component of ``G(n, p)`` with ``p = 2 log n / n`` against
    ``log(p n)``.  The ``reference`` column holds the subtracted term and
    ``gap`` the difference, which tends to 0.
    """
    start = time.perf_counter()
    if family not in ("complete", "er"):
        raise ValueError("family must be 'complete' or 'er'")

    def work(n):
        if family == "complete":
            g = complete_graph(n)
            scale = math.log(n - 1)
            used = None
        else:
            p = 2 * math.log(n) / n
            g = er_giant(n, p * n, seed)
            scale = math.log(p * n)
            used = seed
        v = log_count_spanning_trees(g)
        m = g.vertex_count
        return ReportRow(family, str(n), m, g.n_edges, v, v / m, scale, v / m - scale,
                         v, v, used)

    rows = _sort_rows(_map(work, list(sizes), threads))
    return ConvergenceReport(rows, {"family": family, "seed": seed,
                                    "wall_time": time.perf_counter() - start})


def seed_quantiles(report: ConvergenceReport, q=(0.1, 0.5, 0.9)) -> dict:
    """Per size, empirical quantiles of ``normalized`` over seeds."""
    by_size: dict[str, list[float]] = {}
    for r in report.rows:
        by_size.setdefault(r.params, []).append(r.normalized)
    out = {}
    for size, vals in by_size.items():
        vals = sorted(vals)
        if len(vals) == 1:
            out[size] = {str(x): vals[0] for x in q}
            continue
        cuts = statistics.quantiles(vals, n=100, method="inclusive")
        out[size] = {str(x): (statistics.median(vals) if x == 0.5 else cuts[int(round(100 * x)) - 1])
                     for x in q}
    return out
