"""Deterministic and seeded graph families.

Random generators draw from ``numpy.random.Generator(PCG64(seed))`` and
consume the stream in a fixed order, so a ``(parameters, seed)`` pair gives
the same graph on every platform with the same numpy major version.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from ._validation import check_positive_int
from .graph import MultiGraph, build_graph

__all__ = [
    "rng_for",
    "torus",
    "box",
    "complete_graph",
    "cycle",
    "path",
    "random_regular",
    "er_giant",
    "giant_fraction",
    "tree_ball_sequence",
    "hybrid_join",
    "thin_subgraph",
    "random_connected_graph",
    "parse_family",
]


def rng_for(seed) -> np.random.Generator:
    """The package's random stream: PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def _index(coords, n):
    idx = 0
    for c in coords:
        idx = idx * n + c
    return idx


def torus(d: int, n: int) -> MultiGraph:
    """Nearest-neighbour torus ``(Z/nZ)^d``.

    Every vertex gets one edge to ``x + e_i`` per axis, so ``n = 2`` yields
    doubled edges (``x + e_i = x - e_i``), kept as parallel edges.

    Examples
    --------
    >>> torus(2, 2).n_edges
    8
    """
    check_positive_int(d, "d")
    check_positive_int(n, "n", minimum=2)
    edges = []
    for coords in itertools.product(range(n), repeat=d):
        u = _index(coords, n)
        for i in range(d):
            nb = list(coords)
            nb[i] = (nb[i] + 1) % n
            edges.append((u, _index(nb, n)))
    return build_graph(edges, vertex_count=n**d)


def box(d: int, n: int) -> MultiGraph:
    """Grid ``{0..n-1}^d`` with nearest-neighbour edges."""
    check_positive_int(d, "d")
    check_positive_int(n, "n")
    edges = []
    for coords in itertools.product(range(n), repeat=d):
        u = _index(coords, n)
        for i in range(d):
            if coords[i] + 1 < n:
                nb = list(coords)
                nb[i] += 1
                edges.append((u, _index(nb, n)))
    return build_graph(edges, vertex_count=n**d)


def complete_graph(n: int) -> MultiGraph:
    check_positive_int(n, "n")
    return build_graph(itertools.combinations(range(n), 2), vertex_count=n)


def cycle(n: int) -> MultiGraph:
    check_positive_int(n, "n", minimum=3)
    return build_graph([(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> MultiGraph:
    check_positive_int(n, "n")
    return build_graph([(i, i + 1) for i in range(n - 1)], vertex_count=n)


def random_regular(n: int, d: int, seed, max_tries: int = 100_000) -> MultiGraph:
    """Uniform simple ``d``-regular graph by configuration-model rejection.

    Half-edges are shuffled and paired consecutively; pairings with a loop
    or a repeated pair are rejected and redrawn from the same stream.

    Raises
    ------
    ValueError
        If ``n * d`` is odd or ``d >= n`` (no simple graph exists).
    RuntimeError
        If ``max_tries`` pairings are all rejected.
    """
    check_positive_int(n, "n")
    check_positive_int(d, "d", minimum=0)
    if (n * d) % 2:
        raise ValueError(f"n * d must be even, got n={n}, d={d}")
    if d >= n:
        raise ValueError(f"no simple {d}-regular graph on {n} vertices")
    rng = rng_for(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        u, v = pairs.min(axis=1), pairs.max(axis=1)
        if (u == v).any():
            continue
        keys = u.astype(np.int64) * n + v
        if np.unique(keys).size != keys.size:
            continue
        order = np.argsort(keys)
        return build_graph(zip(u[order].tolist(), v[order].tolist()), vertex_count=n)
    raise RuntimeError(f"no simple pairing in {max_tries} tries")


def _pair_from_index(idx: np.ndarray, n: int):
    # pairs (i, j), i < j, enumerated row by row
    i = (n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    j = idx + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2
    return i, j


def er_giant(n: int, c: float, seed) -> MultiGraph:
    """Largest connected component of ``G(n, c/n)``, relabelled ``0..m-1``.

    The number of edges is drawn as ``Binomial(n(n-1)/2, p)`` and the edge
    set uniformly without replacement.  Among equally large components the
    one containing the smallest vertex id wins.
    """
    check_positive_int(n, "n")
    if c < 0:
        raise ValueError("c must be non-negative")
    p = min(1.0, c / n)
    rng = rng_for(seed)
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p)) if total else 0
    if m:
        idx = np.sort(rng.choice(total, size=m, replace=False))
        u, v = _pair_from_index(idx, n)
    else:
        u = v = np.zeros(0, dtype=np.int64)
    adj = coo_matrix((np.ones(m), (u, v)), shape=(n, n))
    ncomp, labels = _cc(adj, directed=False)
    sizes = np.bincount(labels)
    first = np.full(ncomp, n)
    np.minimum.at(first, labels, np.arange(n))
    largest = np.flatnonzero(sizes == sizes.max())
    best = int(largest[np.argmin(first[largest])])
    keep = np.flatnonzero(labels == best)
    index = np.full(n, -1, dtype=np.int64)
    index[keep] = np.arange(keep.size)
    mask = labels[u] == best
    edges = zip(index[u[mask]].tolist(), index[v[mask]].tolist())
    return build_graph(edges, vertex_count=int(keep.size))


def giant_fraction(c: float, iterations: int = 200) -> float:
    """Survival probability ``theta`` solving ``theta = 1 - exp(-c theta)`` (0 for ``c <= 1``)."""
    if c <= 1:
        return 0.0
    theta = 1.0
    for _ in range(iterations):
        theta = 1.0 - math.exp(-c * theta)
    return theta


def tree_ball_sequence(m: int) -> MultiGraph:
    """Ball of radius ``m`` in the 3-regular tree (``3 * 2^m - 2`` vertices).

    Vertex 0 is the centre; the ball is a tree so it has one spanning tree.
    """
    check_positive_int(m, "m", minimum=0)
    edges = []
    frontier = [0]
    nxt_id = 1
    for depth in range(m):
        new = []
        for x in frontier:
            for _ in range(3 if depth == 0 else 2):
                edges.append((x, nxt_id))
                new.append(nxt_id)
                nxt_id += 1
        frontier = new
    return build_graph(edges, vertex_count=nxt_id)


def hybrid_join(g1: MultiGraph, g2: MultiGraph, k: int = 1, seed=0) -> MultiGraph:
    """Disjoint union of ``g1`` and ``g2`` plus ``k`` random bridging edges.

    Vertices of ``g2`` are shifted by ``g1.vertex_count``.  Endpoints are
    drawn uniformly (with replacement) on each side.
    """
    check_positive_int(k, "k", minimum=0)
    if k == 0:
        raise ValueError("k = 0 leaves the union disconnected")
    if g1.exact != g2.exact:
        g1, g2 = g1.to_float(), g2.to_float()
    rng = rng_for(seed)
    n1 = g1.vertex_count
    a = rng.integers(0, n1, size=k)
    b = rng.integers(0, g2.vertex_count, size=k)
    edges = list(g1.edges) + [(u + n1, v + n1, w) for u, v, w in g2.edges]
    edges += [(int(x), int(y) + n1) for x, y in zip(a, b)]
    return build_graph(edges, vertex_count=n1 + g2.vertex_count, exact=g1.exact)


def _is_connected_without(n, edges, skip):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for i, (u, v, _) in enumerate(edges):
        if i in skip:
            continue
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps == 1


def thin_subgraph(g: MultiGraph, fraction: float, seed=0) -> MultiGraph:
    """Connected spanning subgraph with at most ``fraction * |V|`` edges removed.

    Non-loop edges are visited in a seeded random order and deleted when the
    remainder stays connected.  The deleted set is therefore ``o(|V|)``
    whenever ``fraction -> 0``, which is all a sequence of subgraphs needs
    to keep the limit.
    """
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    if not g.is_connected:
        raise ValueError("graph must be connected")
    budget = int(math.floor(fraction * g.vertex_count))
    if budget == 0:
        return g
    rng = rng_for(seed)
    edges = list(g.edges)
    candidates = [i for i, (u, v, _) in enumerate(edges) if u != v]
    order = rng.permutation(len(candidates))
    removed: set[int] = set()
    for pos in order:
        if len(removed) >= budget:
            break
        i = candidates[int(pos)]
        if _is_connected_without(g.vertex_count, edges, removed | {i}):
            removed.add(i)
    kept = [e for i, e in enumerate(edges) if i not in removed]
    return build_graph(kept, vertex_count=g.vertex_count, exact=g.exact)


def random_connected_graph(n: int, extra: int, seed, multigraph: bool = True,
                           loops: bool = False) -> MultiGraph:
    """Random spanning tree on ``n`` vertices plus ``extra`` random edges.

    The tree attaches vertex ``i`` to a uniform earlier vertex after a
    random relabelling.  Extra edges may repeat existing ones when
    ``multigraph`` and may be loops when ``loops``.
    """
    check_positive_int(n, "n")
    rng = rng_for(seed)
    perm = rng.permutation(n)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((int(perm[i]), int(perm[j])))
    present = {tuple(sorted(e)) for e in edges}
    tries = 0
    while extra > 0 and tries < 100 * (extra + 1):
        tries += 1
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u == v and not loops:
            continue
        key = (min(u, v), max(u, v))
        if not multigraph and key in present:
            continue
        present.add(key)
        edges.append((u, v))
        extra -= 1
    return build_graph(edges, vertex_count=n)


def parse_family(text: str):
    """Parse a generator spec such as ``torus:2,16`` into a graph factory.

    Returns ``(name, params, build)`` where ``build(seed)`` makes the graph.
    Accepted: ``torus:d,n``, ``box:d,n``, ``complete:n``, ``cycle:n``,
    ``path:n``, ``random-regular:n,d``, ``er-giant:n,c``, ``tree-ball:m``.
    """
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    raw = [p.strip() for p in rest.split(",") if p.strip()]

    def ints(k):
        if len(raw) != k:
            raise ValueError(f"{name} takes {k} integer parameter(s), got {rest!r}")
        return [int(x) for x in raw]

    if name == "torus":
        d, n = ints(2)
        return name, (d, n), lambda seed: torus(d, n)
    if name == "box":
        d, n = ints(2)
        return name, (d, n), lambda seed: box(d, n)
    if name == "complete":
        (n,) = ints(1)
        return name, (n,), lambda seed: complete_graph(n)
    if name == "cycle":
        (n,) = ints(1)
        return name, (n,), lambda seed: cycle(n)
    if name == "path":
        (n,) = ints(1)
        return name, (n,), lambda seed: path(n)
    if name == "random-regular":
        n, d = ints(2)
        return name, (n, d), lambda seed: random_regular(n, d, seed)
    if name == "er-giant":
        if len(raw) != 2:
            raise ValueError("er-giant takes n,c")
        n, c = int(raw[0]), float(raw[1])
        return name, (n, c), lambda seed: er_giant(n, c, seed)
    if name == "tree-ball":
        (m,) = ints(1)
        return name, (m,), lambda seed: tree_ball_sequence(m)
    raise ValueError(f"unknown family {text!r}")
