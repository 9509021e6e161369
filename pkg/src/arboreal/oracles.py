"""Rooted graphs given by a neighbor function.

A :class:`LocalGraphOracle` describes a (usually infinite) rooted graph
lazily.  States may be single vertices or classes of an *equitable*
partition: every vertex of a class has the same total edge weight into each
other class.  The root class must be the root alone.  Return probabilities
at the root are then exactly those of the walk on classes, which keeps
balls small (a regular tree lumps to a half-line).

``neighbors(s)`` lists ``(t, w)`` where ``w`` is the total weight of edges
from one vertex of class ``s`` into class ``t``; loops appear as ``(s, w)``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from ._validation import check_positive_int
from .graph import MultiGraph

__all__ = [
    "LocalGraphOracle",
    "RegularTreeOracle",
    "LatticeOracle",
    "FiniteGraphOracle",
    "CanopyTreeOracle",
    "TruncatedRegularTreeOracle",
    "LoopedOracle",
    "Mixture",
    "free_free_mixture",
]


class LocalGraphOracle(ABC):
    """Abstract rooted graph.

    Subclasses provide :attr:`root`, :meth:`neighbors` and :meth:`degree`;
    :attr:`min_weight` (smallest single edge weight between distinct
    vertices), :attr:`holding` (``inf_x P(x, x)`` from loops) and
    :attr:`infinite` default to the unweighted, loopless, infinite case.
    """

    min_weight = 1
    holding = 0
    infinite = True

    @property
    @abstractmethod
    def root(self): ...

    @abstractmethod
    def neighbors(self, state) -> list: ...

    def degree(self, state):
        return sum(w for _, w in self.neighbors(state))

    @property
    def root_degree(self):
        return self.degree(self.root)


@dataclass(frozen=True)
class RegularTreeOracle(LocalGraphOracle):
    """``d``-regular tree lumped by distance from the root (``d = 2`` is Z)."""

    d: int

    def __post_init__(self):
        check_positive_int(self.d, "d", minimum=2)

    @property
    def root(self):
        return 0

    def neighbors(self, r):
        if r == 0:
            return [(1, self.d)]
        return [(r - 1, 1), (r + 1, self.d - 1)]

    def degree(self, r):
        return self.d


@dataclass(frozen=True)
class LatticeOracle(LocalGraphOracle):
    """``Z^d`` lumped by the sorted absolute coordinates (hyperoctahedral symmetry)."""

    d: int

    def __post_init__(self):
        check_positive_int(self.d, "d")

    @property
    def root(self):
        return (0,) * self.d

    def neighbors(self, state):
        out = defaultdict(int)
        for i, v in enumerate(state):
            moves = ((v + 1, 2),) if v == 0 else ((v + 1, 1), (v - 1, 1))
            for nv, w in moves:
                new = tuple(sorted(state[:i] + (nv,) + state[i + 1:]))
                out[new] += w
        return sorted(out.items())

    def degree(self, state):
        return 2 * self.d


class FiniteGraphOracle(LocalGraphOracle):
    """A finite :class:`MultiGraph` seen from ``root`` (no lumping)."""

    infinite = False

    def __init__(self, graph: MultiGraph, root: int = 0):
        if not 0 <= root < graph.vertex_count:
            raise ValueError("root out of range")
        if any(d == 0 for d in graph.degrees):
            raise ValueError("every vertex needs positive degree")
        self.graph = graph
        self._root = root
        self.min_weight = graph.min_edge_weight if graph.non_loop_edges else 1
        loops = [0] * graph.vertex_count
        for x, _, w in graph.loop_edges:
            loops[x] += w
        self.holding = min(Fraction(l) / Fraction(d) for l, d in zip(loops, graph.degrees))

    @property
    def root(self):
        return self._root

    def neighbors(self, x):
        return list(self.graph.neighbors[x])

    def degree(self, x):
        return self.graph.degrees[x]


@dataclass(frozen=True)
class CanopyTreeOracle(LocalGraphOracle):
    """One-ended tree with all leaves at height 0, rooted at the height-``m`` spine vertex.

    Vertices at height ``h >= 1`` have two children and a parent (degree 3),
    leaves have degree 1.  The spine ``x_0, x_1, ...`` climbs from a leaf;
    the root is ``x_m``.  State ``(u, e)``: the vertex lies ``e`` levels below
    ``x_{m+u}`` and, for ``u >= 1, e >= 1``, off the spine.  Its height is
    ``m + u - e``.
    """

    m: int

    def __post_init__(self):
        check_positive_int(self.m, "m", minimum=0)

    @property
    def root(self):
        return (0, 0)

    def _height(self, state):
        u, e = state
        return self.m + u - e

    def neighbors(self, state):
        u, e = state
        leaf = self._height(state) == 0
        if e == 0:
            up = [((u + 1, 0), 1)]
            if leaf:
                return up
            if u == 0:
                return up + [((0, 1), 2)]
            return up + [((u - 1, 0), 1), ((u, 1), 1)]
        parent = (u, e - 1)
        down = [] if leaf else [((u, e + 1), 2)]
        return [(parent, 1)] + down

    def degree(self, state):
        return 1 if self._height(state) == 0 else 3


@dataclass(frozen=True)
class TruncatedRegularTreeOracle(LocalGraphOracle):
    """``d``-regular tree up to distance ``depth``, continued by disjoint rays.

    Within distance ``depth`` of the root every vertex has degree ``d``;
    beyond it every vertex has one parent and one child.  As ``depth`` grows
    the rooted graphs converge locally to the ``d``-regular tree.
    """

    d: int
    depth: int

    def __post_init__(self):
        check_positive_int(self.d, "d", minimum=2)
        check_positive_int(self.depth, "depth", minimum=0)

    @property
    def root(self):
        return 0

    def neighbors(self, r):
        branching = self.d - 1 if r < self.depth else 1
        if r == 0:
            return [(1, self.d if self.depth > 0 else 2)]
        return [(r - 1, 1), (r + 1, branching)]

    def degree(self, r):
        if r == 0:
            return self.d if self.depth > 0 else 2
        return self.d if r < self.depth else 2


class LoopedOracle(LocalGraphOracle):
    """``base`` with a loop of weight ``deg(x)`` at every vertex (degrees doubled)."""

    def __init__(self, base: LocalGraphOracle):
        self.base = base
        self.min_weight = base.min_weight
        self.infinite = base.infinite
        self.holding = Fraction(1, 2) + Fraction(base.holding) / 2

    @property
    def root(self):
        return self.base.root

    def neighbors(self, state):
        return list(self.base.neighbors(state)) + [(state, self.base.degree(state))]

    def degree(self, state):
        return 2 * self.base.degree(state)


class Mixture:
    """Finite probability mixture of rooted graphs.

    Parameters
    ----------
    components : sequence of (LocalGraphOracle, weight)
        Positive weights; they are renormalized to sum to 1.
    """

    def __init__(self, components):
        comps = [(o, float(w)) for o, w in components]
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(not w > 0 for _, w in comps):
            raise ValueError("mixture weights must be positive")
        total = sum(w for _, w in comps)
        self.raw_total = total
        self.components = tuple((o, w / total) for o, w in comps)

    @classmethod
    def of(cls, item) -> "Mixture":
        return item if isinstance(item, Mixture) else cls([(item, 1.0)])

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.components)

    def expected_degree(self) -> float:
        return sum(w * float(o.root_degree) for o, w in self.components)

    def __len__(self):
        return len(self.components)


def free_free_mixture(m_max: int = 40) -> Mixture:
    """Roots ``x_0 .. x_{m_max}`` of the canopy tree with weights ``2^(-m-1)``, renormalized."""
    check_positive_int(m_max, "m_max", minimum=0)
    return Mixture([(CanopyTreeOracle(m), 2.0 ** (-m - 1)) for m in range(m_max + 1)])
