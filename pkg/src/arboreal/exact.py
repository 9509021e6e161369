"""Exact spanning-tree counts and their determinant forms.

These are the ground-truth oracles for everything approximate in the
package: a fraction-free (Bareiss) determinant of a Laplacian first minor,
an independent subset-enumeration count, the ``det'`` eigenvalue form, and
the spanning-arborescence weight of an irreducible Markov chain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral
from typing import Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from ._validation import as_exact, is_exact_number
from .graph import MultiGraph

__all__ = [
    "TreeCount",
    "bareiss_determinant",
    "cofactor",
    "count_spanning_trees",
    "count_spanning_trees_bruteforce",
    "log_count_spanning_trees",
    "log_det_prime_laplacian",
    "ChainMatrix",
    "arborescence_weight",
    "arborescence_log_weight",
    "arborescence_weight_bruteforce",
    "exact_log",
]

# int for unweighted graphs, Fraction for rational weights, float otherwise
TreeCount = Union[int, Fraction, float]

BRUTEFORCE_EDGE_LIMIT = 24
# above this many vertices exact-mode log counts switch to a float factorization
EXACT_VERTEX_LIMIT = 120
# above this many vertices the float path uses a sparse LU instead of dense Cholesky
DENSE_VERTEX_LIMIT = 3000


def exact_log(x) -> float:
    """Natural log of a positive int/Fraction of any size."""
    if isinstance(x, Fraction):
        return exact_log(x.numerator) - exact_log(x.denominator)
    if isinstance(x, Integral):
        if x <= 0:
            raise ValueError("log of non-positive number")
        return math.log(x)
    return math.log(x)


def bareiss_determinant(matrix) -> int | Fraction:
    """Determinant by fraction-free elimination.

    Integer input stays in integers (every division is exact); rational
    input is handled with ``Fraction`` arithmetic along the same recurrence.

    >>> bareiss_determinant([[2, -1], [-1, 2]])
    3
    """
    a = [[as_exact(x) for x in row] for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    if n == 0:
        return 1
    integral = all(isinstance(x, int) for row in a for x in row)
    if not integral:
        # int / int would silently produce floats
        a = [[Fraction(x) for x in row] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            aik = row_i[k]
            if integral:
                for j in range(k + 1, n):
                    row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
            else:
                for j in range(k + 1, n):
                    row_i[j] = (row_i[j] * pivot - aik * row_k[j]) / prev
            row_i[k] = 0
        prev = pivot
    return as_exact(sign * a[n - 1][n - 1])


def _minor(matrix, i, j):
    m = np.asarray(matrix, dtype=object)
    m = np.delete(np.delete(m, i, axis=0), j, axis=1)
    return m.tolist()


def cofactor(matrix, i: int, j: int):
    """Signed cofactor ``(-1)^(i+j) det(matrix without row i, column j)``."""
    d = bareiss_determinant(_minor(matrix, i, j))
    return d if (i + j) % 2 == 0 else -d


def count_spanning_trees(g: MultiGraph) -> TreeCount:
    """Number (or total weight) of spanning trees of ``g``.

    Exact graphs are counted with :func:`bareiss_determinant` on the
    Laplacian with its last row and column deleted; the result is an ``int``
    for integer weights and a ``Fraction`` for rational ones.  Float graphs
    return ``float`` (possibly ``inf`` when the count overflows; use
    :func:`log_count_spanning_trees` for large graphs).  Loops are ignored and
    a disconnected graph gives 0.

    Examples
    --------
    >>> from arboreal.graph import build_graph
    >>> count_spanning_trees(build_graph([(0, 1), (1, 2), (2, 0)]))
    3
    """
    n = g.vertex_count
    if n < 1:
        raise ValueError("graph must have at least one vertex")
    if not g.is_connected:
        return 0 if g.exact else 0.0
    if n == 1:
        return 1 if g.exact else 1.0
    if g.exact:
        lap = g.laplacian()
        return bareiss_determinant(lap[:-1, :-1].tolist())
    return math.exp(_float_log_count(g))


def _float_log_count(g: MultiGraph) -> float:
    n = g.vertex_count
    if n > DENSE_VERTEX_LIMIT:
        lap = g.laplacian(sparse=True)[:-1, :-1].tocsc()
        lu = spla.splu(lap)
        return float(np.sum(np.log(np.abs(lu.U.diagonal()))))
    lap = g.laplacian() if not g.exact else g.to_float().laplacian()
    reduced = np.asarray(lap, dtype=float)[:-1, :-1]
    chol = sla.cholesky(reduced, lower=True, check_finite=False)
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def log_count_spanning_trees(g: MultiGraph, method: str = "auto") -> float:
    """Natural log of :func:`count_spanning_trees`; ``-inf`` if disconnected.

    ``method`` is ``"exact"`` (Bareiss, exact graphs only), ``"float"``
    (Cholesky of the reduced Laplacian, sparse LU beyond
    ``DENSE_VERTEX_LIMIT`` vertices) or ``"auto"`` (exact up to
    ``EXACT_VERTEX_LIMIT`` vertices).
    """
    if method not in ("auto", "exact", "float"):
        raise ValueError(f"unknown method {method!r}")
    if not g.is_connected:
        return -math.inf
    if g.vertex_count == 1:
        return 0.0
    use_exact = g.exact and (
        method == "exact" or (method == "auto" and g.vertex_count <= EXACT_VERTEX_LIMIT)
    )
    if method == "exact" and not g.exact:
        raise ValueError("exact method needs an exact graph")
    if use_exact:
        return exact_log(count_spanning_trees(g))
    return _float_log_count(g)


def count_spanning_trees_bruteforce(g: MultiGraph, max_edges: int = BRUTEFORCE_EDGE_LIMIT):
    """Count spanning trees by enumerating edge subsets of size ``n - 1``.

    Subsets are enumerated edge by edge, abandoning a branch as soon as the
    chosen edges contain a cycle or too few edges remain.  Weighted graphs
    sum the product of edge weights over trees.  Independent of any
    determinant code; intended as a test oracle.

    Raises
    ------
    ValueError
        If ``g`` has more than ``max_edges`` non-loop edges.
    """
    edges = g.non_loop_edges
    m = len(edges)
    if m > max_edges:
        raise ValueError(f"brute force limited to {max_edges} edges, graph has {m}")
    n = g.vertex_count
    one = 1 if g.exact else 1.0
    if n == 1:
        return one
    need = n - 1
    parent = list(range(n))
    size = [1] * n
    total = 0 if g.exact else 0.0

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(i, chosen, weight):
        nonlocal total
        if chosen == need:
            total += weight
            return
        if m - i < need - chosen:
            return
        u, v, w = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
            rec(i + 1, chosen + 1, weight * w)
            size[ru] -= size[rv]
            parent[rv] = rv
        rec(i + 1, chosen, weight)

    rec(0, 0, one)
    return as_exact(total) if g.exact else total


def _deflated_laplacian(lap: np.ndarray) -> np.ndarray:
    # Householder reflector swapping e_1 and the unit constant vector; the
    # reflected Laplacian has a zero first row/column, leaving the rest.
    n = lap.shape[0]
    u = np.full(n, 1.0 / math.sqrt(n))
    w = u.copy()
    w[0] -= 1.0
    s = w @ w
    if s == 0.0:
        return lap[1:, 1:]
    lw = lap @ w
    wlw = w @ lw
    h = (lap - (2.0 / s) * np.outer(w, lw) - (2.0 / s) * np.outer(lw, w)
         + (4.0 * wlw / s**2) * np.outer(w, w))
    return h[1:, 1:]


def log_det_prime_laplacian(g: MultiGraph) -> float:
    """``log det' Delta``: sum of logs of the non-zero Laplacian eigenvalues.

    The constant vector is projected out before the symmetric eigensolve, so
    the zero eigenvalue is removed exactly rather than by thresholding.  For
    connected ``g`` this equals ``log tau(g) + log n``.
    """
    if not g.is_connected:
        raise ValueError("log det' requires a connected graph")
    if g.vertex_count == 1:
        return 0.0
    lap = np.asarray(g.laplacian() if not g.exact else g.to_float().laplacian(), dtype=float)
    eig = np.linalg.eigvalsh(_deflated_laplacian(lap))
    if eig[0] <= 0:
        raise ArithmeticError("non-positive eigenvalue after deflation")
    return float(np.sum(np.log(eig)))


@dataclass(frozen=True)
class ChainMatrix:
    """Row-stochastic, irreducible transition matrix.

    Built with :meth:`from_rows`, which checks stochasticity (exactly for
    rational entries, to ``1e-12`` for floats) and irreducibility (strong
    connectivity of the support digraph).
    """

    rows: tuple
    exact: bool

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def from_rows(cls, rows) -> "ChainMatrix":
        rows = [list(r) for r in np.asarray(rows, dtype=object).tolist()]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("chain matrix must be square and non-empty")
        exact = all(is_exact_number(x) for r in rows for x in r)
        if exact:
            rows = [[as_exact(x) for x in r] for r in rows]
        else:
            rows = [[float(x) for x in r] for r in rows]
        for i, r in enumerate(rows):
            if any(x < 0 for x in r):
                raise ValueError(f"row {i} has a negative entry")
            s = sum(r)
            if (exact and s != 1) or (not exact and abs(s - 1.0) > 1e-12):
                raise ValueError(f"row {i} sums to {s}, not 1")
        chain = cls(tuple(tuple(r) for r in rows), exact)
        if not chain.is_irreducible():
            raise ValueError("chain is reducible")
        return chain

    def is_irreducible(self) -> bool:
        n = self.n
        succ = [[j for j in range(n) if self.rows[i][j] > 0 and j != i] for i in range(n)]
        pred = [[] for _ in range(n)]
        for i, js in enumerate(succ):
            for j in js:
                pred[j].append(i)
        return _reaches_all(succ, n) and _reaches_all(pred, n)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=object if self.exact else float)


def _reaches_all(adj, n):
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def _as_chain(chain) -> ChainMatrix:
    return chain if isinstance(chain, ChainMatrix) else ChainMatrix.from_rows(chain)


def arborescence_weight(chain):
    """Total weight ``tau'(P)`` of spanning arborescences, all roots.

    By the directed Matrix-Tree theorem the arborescences oriented towards
    root ``r`` have total weight equal to the principal minor of ``I - P``
    with row and column ``r`` deleted.  Exact for rational chains.
    """
    chain = _as_chain(chain)
    n = chain.n
    if n == 1:
        return 1 if chain.exact else 1.0
    if chain.exact:
        lap = [[(1 if i == j else 0) - chain.rows[i][j] for j in range(n)] for i in range(n)]
        total = sum(bareiss_determinant(_minor(lap, r, r)) for r in range(n))
        return as_exact(total)
    lap = np.eye(n) - np.array(chain.rows, dtype=float)
    return float(sum(np.linalg.det(np.delete(np.delete(lap, r, 0), r, 1)) for r in range(n)))


def arborescence_log_weight(chain) -> float:
    """``log tau'(P)``; see :func:`arborescence_weight`."""
    w = arborescence_weight(chain)
    return exact_log(w) if isinstance(w, (int, Fraction)) else math.log(w)


def arborescence_weight_bruteforce(chain, max_states: int = 7):
    """Sum over every rooted spanning arborescence of the product of ``P(e)``.

    Enumerates, for each root, every choice of one outgoing transition per
    non-root state and keeps the acyclic ones.  Test oracle only.
    """
    chain = _as_chain(chain)
    n = chain.n
    if n > max_states:
        raise ValueError(f"brute force limited to {max_states} states")
    rows = chain.rows
    total = 0 if chain.exact else 0.0
    for root in range(n):
        others = [x for x in range(n) if x != root]
        choices = [[y for y in range(n) if y != x and rows[x][y] > 0] for x in others]
        for parents in itertools.product(*choices):
            par = dict(zip(others, parents))
            if not _all_reach(par, root):
                continue
            w = 1 if chain.exact else 1.0
            for x, y in par.items():
                w *= rows[x][y]
            total += w
    return as_exact(total) if chain.exact else total


def _all_reach(par, root):
    for start in par:
        x, steps = start, 0
        while x != root:
            x = par[x]
            steps += 1
            if steps > len(par):
                return False
    return True
