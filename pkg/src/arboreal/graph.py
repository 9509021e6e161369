"""Finite multigraphs with loops and positive weights.

A :class:`MultiGraph` is immutable.  It carries its number mode: *exact*
graphs hold ``int``/``Fraction`` weights and every derived matrix is an
object array of exact numbers; *float* graphs hold ``float`` weights and
derived matrices are ``float64``.

Loop convention: a loop of weight ``w`` at ``x`` adds ``w`` (once) to
``deg(x)`` and gives the walk a holding probability ``w / deg(x)``.  Loops
never enter the Laplacian.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Real
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ._validation import as_exact, check_laziness, is_exact_number

__all__ = [
    "MultiGraph",
    "WalkOperator",
    "build_graph",
    "laplacian",
    "connected_components",
]


@dataclass(frozen=True)
class MultiGraph:
    """Undirected multigraph on vertices ``0 .. vertex_count - 1``.

    Parameters
    ----------
    vertex_count : int
        Number of vertices; isolated vertices are allowed.
    edges : tuple of (u, v, weight)
        Edge multiset.  ``u == v`` is a loop.  Parallel edges are kept.
    exact : bool
        Number mode, see module docstring.

    Use :func:`build_graph` rather than the constructor; it validates input.
    """

    vertex_count: int
    edges: tuple
    exact: bool = True

    # ---- sizes -----------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return self.vertex_count

    @property
    def n_edges(self) -> int:
        """Number of edges, loops and parallel copies included."""
        return len(self.edges)

    @cached_property
    def non_loop_edges(self) -> tuple:
        return tuple(e for e in self.edges if e[0] != e[1])

    @cached_property
    def loop_edges(self) -> tuple:
        return tuple(e for e in self.edges if e[0] == e[1])

    @cached_property
    def is_weighted(self) -> bool:
        return any(w != 1 for _, _, w in self.edges)

    def _zero(self):
        return 0 if self.exact else 0.0

    # ---- degrees ---------------------------------------------------------
    @cached_property
    def degrees(self) -> tuple:
        """Vertex weights ``deg(x)`` (loops counted once)."""
        deg = [self._zero()] * self.vertex_count
        for u, v, w in self.edges:
            deg[u] += w
            if u != v:
                deg[v] += w
        return tuple(deg)

    def degree(self, x: int):
        return self.degrees[x]

    @cached_property
    def total_degree(self):
        """``sum_x deg(x)``; equals ``2|E|`` for loopless unweighted graphs."""
        return sum(self.degrees, self._zero())

    @cached_property
    def min_edge_weight(self):
        ws = [w for _, _, w in self.non_loop_edges]
        return min(ws) if ws else None

    # ---- matrices --------------------------------------------------------
    def _dense(self):
        dtype = object if self.exact else float
        m = np.zeros((self.vertex_count, self.vertex_count), dtype=dtype)
        if self.exact:
            m[...] = 0
        return m

    def adjacency(self) -> np.ndarray:
        """Dense adjacency matrix; a loop of weight ``w`` sits on the diagonal once."""
        a = self._dense()
        for u, v, w in self.edges:
            a[u, v] += w
            if u != v:
                a[v, u] += w
        return a

    def degree_matrix(self) -> np.ndarray:
        d = self._dense()
        for x, dx in enumerate(self.degrees):
            d[x, x] = dx
        return d

    def laplacian(self, sparse: bool = False):
        """Graph Laplacian; see :func:`laplacian`."""
        if sparse:
            if self.exact and self.is_weighted and any(
                isinstance(w, Fraction) for _, _, w in self.edges
            ):
                raise ValueError("sparse Laplacian is float-only; use sparse=False")
            rows, cols, vals = [], [], []
            for u, v, w in self.non_loop_edges:
                w = float(w)
                rows += [u, v, u, v]
                cols += [v, u, u, v]
                vals += [-w, -w, w, w]
            n = self.vertex_count
            return sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)
        lap = self._dense()
        for u, v, w in self.non_loop_edges:
            lap[u, v] -= w
            lap[v, u] -= w
            lap[u, u] += w
            lap[v, v] += w
        return lap

    # ---- structure -------------------------------------------------------
    @cached_property
    def neighbors(self) -> tuple:
        """Per-vertex tuple of ``(neighbor, weight)``; loops appear once."""
        nb = [[] for _ in range(self.vertex_count)]
        for u, v, w in self.edges:
            nb[u].append((v, w))
            if u != v:
                nb[v].append((u, w))
        return tuple(tuple(x) for x in nb)

    @cached_property
    def components(self) -> tuple:
        return tuple(tuple(c) for c in connected_components(self))

    @property
    def is_connected(self) -> bool:
        return self.vertex_count >= 1 and len(self.components) == 1

    # ---- functional updates ----------------------------------------------
    def with_edges(self, extra: Iterable[Sequence]) -> "MultiGraph":
        """Return a new graph with ``extra`` edges appended."""
        return build_graph(
            list(self.edges) + [tuple(e) for e in extra],
            vertex_count=self.vertex_count,
            exact=self.exact,
        )

    def with_loops(self, weights=None) -> "MultiGraph":
        """Return a copy with one loop per vertex.

        ``weights=None`` puts a loop of weight ``deg(x)`` at each vertex of
        positive degree, which doubles every degree (the lazy version of the
        walk with holding probability 1/2).
        """
        if weights is None:
            weights = self.degrees
        loops = [(x, x, w) for x, w in enumerate(weights) if w]
        return self.with_edges(loops)

    def without_loops(self) -> "MultiGraph":
        return MultiGraph(self.vertex_count, self.non_loop_edges, self.exact)

    def to_float(self) -> "MultiGraph":
        if not self.exact:
            return self
        edges = tuple((u, v, float(w)) for u, v, w in self.edges)
        return MultiGraph(self.vertex_count, edges, False)

    def relabel(self, order: Sequence[int]) -> "MultiGraph":
        """Induced graph on the vertices ``order`` renumbered ``0..len-1``."""
        index = {x: i for i, x in enumerate(order)}
        edges = tuple(
            (index[u], index[v], w)
            for u, v, w in self.edges
            if u in index and v in index
        )
        return MultiGraph(len(order), edges, self.exact)

    def __repr__(self) -> str:
        mode = "exact" if self.exact else "float"
        return f"MultiGraph(n={self.vertex_count}, m={self.n_edges}, {mode})"


def _normalize_weight(w, exact):
    if isinstance(w, bool) or not isinstance(w, Real):
        raise TypeError(f"edge weight must be a real number, got {w!r}")
    if not w > 0:
        raise ValueError(f"edge weights must be positive, got {w}")
    if exact:
        if isinstance(w, float):
            if not np.isfinite(w):
                raise ValueError(f"edge weight must be finite, got {w}")
            return as_exact(Fraction(w))
        return as_exact(w)
    w = float(w)
    if not np.isfinite(w):
        raise ValueError(f"edge weight must be finite, got {w}")
    return w


def build_graph(edge_list: Iterable[Sequence], vertex_count: int | None = None,
                exact: bool | None = None) -> MultiGraph:
    """Build a :class:`MultiGraph` from ``(u, v[, weight])`` tuples.

    Parameters
    ----------
    edge_list : iterable
        Edges; the weight defaults to 1.  Parallel edges are preserved.
    vertex_count : int, optional
        Defaults to ``1 + max vertex id`` (0 for an empty list).
    exact : bool, optional
        Number mode.  By default a graph is exact iff every weight is an
        ``int`` or ``Fraction``.

    Raises
    ------
    ValueError
        On a negative or out-of-range vertex id or a non-positive weight.

    Examples
    --------
    >>> g = build_graph([(0, 1), (0, 1)])
    >>> g.degrees
    (2, 2)
    """
    raw = []
    for e in edge_list:
        if len(e) == 2:
            u, v, w = e[0], e[1], 1
        elif len(e) == 3:
            u, v, w = e
        else:
            raise ValueError(f"edge must be (u, v) or (u, v, weight), got {e!r}")
        for x in (u, v):
            if isinstance(x, bool) or not isinstance(x, Integral):
                raise TypeError(f"vertex ids must be integers, got {x!r}")
            if x < 0:
                raise ValueError(f"vertex ids must be non-negative, got {x}")
        raw.append((int(u), int(v), w))

    if exact is None:
        exact = all(is_exact_number(w) for _, _, w in raw)
    edges = tuple((u, v, _normalize_weight(w, exact)) for u, v, w in raw)

    top = 1 + max((max(u, v) for u, v, _ in edges), default=-1)
    if vertex_count is None:
        vertex_count = top
    elif vertex_count < top:
        raise ValueError(f"vertex_count={vertex_count} but edges use id {top - 1}")
    return MultiGraph(int(vertex_count), edges, bool(exact))


def laplacian(g: MultiGraph, sparse: bool = False):
    """Laplacian ``Delta = D - A`` with loops dropped.

    ``Delta(x, x)`` is the total weight of non-loop edges at ``x`` and
    ``Delta(x, y) = -`` (total weight between ``x`` and ``y``).
    """
    return g.laplacian(sparse=sparse)


def connected_components(g: MultiGraph) -> list[list[int]]:
    """Vertex partition into connected components, each sorted, ordered by min id."""
    seen = [False] * g.vertex_count
    out = []
    nbrs = g.neighbors
    for s in range(g.vertex_count):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y, _ in nbrs[x]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    queue.append(y)
        out.append(sorted(comp))
    return out


class WalkOperator:
    """Random walk on a :class:`MultiGraph` with optional laziness.

    ``P(x, y) = w(x, y) / deg(x)`` (loops included on the diagonal) and
    ``Q = alpha I + (1 - alpha) P``.  ``Q`` is reversible for
    ``pi(x) = deg(x) / sum deg``.

    Parameters
    ----------
    graph : MultiGraph
        Every vertex must have positive degree.
    alpha : real in [0, 1)
        Laziness.
    """

    def __init__(self, graph: MultiGraph, alpha=0):
        check_laziness(alpha)
        if any(d == 0 for d in graph.degrees):
            raise ValueError("random walk needs every vertex to have positive degree")
        self.graph = graph
        self.alpha = as_exact(Fraction(alpha)) if graph.exact else float(alpha)

    @cached_property
    def transition_matrix(self) -> np.ndarray:
        g = self.graph
        p = g.adjacency()
        for x, dx in enumerate(g.degrees):
            if g.exact:
                p[x, :] = [as_exact(Fraction(v) / dx) for v in p[x, :]]
            else:
                p[x, :] /= dx
        return p

    @cached_property
    def lazy_matrix(self) -> np.ndarray:
        p = self.transition_matrix
        if self.alpha == 0:
            return p
        q = (1 - self.alpha) * p
        for x in range(q.shape[0]):
            q[x, x] += self.alpha
        return q

    @cached_property
    def stationary(self) -> tuple:
        """Normalized reversing measure ``pi``."""
        g = self.graph
        tot = g.total_degree
        if g.exact:
            return tuple(as_exact(Fraction(d) / tot) for d in g.degrees)
        return tuple(d / tot for d in g.degrees)

    @cached_property
    def a(self):
        """``inf_x Q(x, x)``."""
        q = self.lazy_matrix
        return min(q[x, x] for x in range(q.shape[0]))

    @cached_property
    def c(self):
        """``inf pi(x) Q(x, y)`` over transitions ``x != y`` (``None`` without any)."""
        g = self.graph
        if not g.non_loop_edges:
            return None
        tot = g.total_degree
        scale = (1 - self.alpha)
        # pi(x) Q(x, y) = (1 - alpha) w(x, y) / sum deg; parallel edges add up
        pair = {}
        for u, v, w in g.non_loop_edges:
            key = (min(u, v), max(u, v))
            pair[key] = pair.get(key, 0) + w
        wmin = min(pair.values())
        if g.exact:
            return as_exact(Fraction(scale) * Fraction(wmin) / tot)
        return scale * wmin / tot

    def symmetrized(self, sparse: bool = False):
        """Float matrix ``D^{1/2} Q D^{-1/2}``: symmetric with the spectrum of ``Q``."""
        g = self.graph
        n = g.vertex_count
        deg = np.array([float(d) for d in g.degrees])
        root = np.sqrt(deg)
        alpha = float(self.alpha)
        rows, cols, vals = [], [], []
        for u, v, w in g.edges:
            s = (1 - alpha) * float(w) / (root[u] * root[v])
            rows.append(u)
            cols.append(v)
            vals.append(s)
            if u != v:
                rows.append(v)
                cols.append(u)
                vals.append(s)
        rows += list(range(n))
        cols += list(range(n))
        vals += [alpha] * n
        m = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)
        if sparse:
            return m
        return m.toarray()
