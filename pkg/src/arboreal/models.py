"""Tree entropy of infinite limit models.

Closed form for regular trees, the fixed-point/integral pipeline for free
products of complete graphs, Fourier-symbol quadrature for periodic
lattices, and certified truncated series for arbitrary rooted oracles or
finite mixtures of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

from ._validation import check_positive_int, check_tolerance
from .oracles import LocalGraphOracle, Mixture
from .series import BallTooLarge, K_MAX, local_return_series

__all__ = [
    "TransitiveModel",
    "EntropyEstimate",
    "GeneratingData",
    "RegularTree",
    "FreeProductCompletes",
    "Hypercubic",
    "PeriodicLattice",
    "entropy_regular_tree",
    "free_product_phi",
    "free_product_generating_data",
    "entropy_free_product",
    "entropy_periodic_lattice",
    "entropy_series",
    "mixture_return_sum",
    "entropy_continuity_probe",
    "tree_entropy",
    "parse_model",
]


@dataclass(frozen=True)
class EntropyEstimate:
    """Tree entropy with bounds ``lo <= value <= hi``.

    ``method`` is ``"closed-form"``, ``"fixed-point-quadrature"``,
    ``"symbol-quadrature"`` or ``"series"``.  Closed forms have
    ``lo == hi == value``.  Quadrature bounds are error estimates;
    series bounds are certified.
    """

    value: float
    lo: float
    hi: float
    method: str
    converged: bool = True
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("value", "lo", "hi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "converged", bool(self.converged))
        if not (self.lo <= self.value <= self.hi):
            raise ValueError(f"inconsistent bounds {self.lo} <= {self.value} <= {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def as_dict(self) -> dict:
        return {"value": self.value, "lo": self.lo, "hi": self.hi,
                "method": self.method, "converged": self.converged}


# ---------------------------------------------------------------------------
# model descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegularTree:
    d: int

    def __post_init__(self):
        check_positive_int(self.d, "d", minimum=2)

    @property
    def degree(self) -> int:
        return self.d


@dataclass(frozen=True)
class FreeProductCompletes:
    """Cayley graph of the free product of cyclic groups of orders ``s``
    with every non-identity factor element as generator: a tree of cliques
    ``K_{s_j}``, each vertex in one clique of every size."""

    s: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.s)
        if len(s) < 2 or any(x < 2 for x in s):
            raise ValueError("need at least two factors, each of size >= 2")
        if sum(s) < 5:
            raise ValueError("need sum(s) >= 5 (s = (2, 2) is the line, excluded)")
        object.__setattr__(self, "s", s)

    @property
    def degree(self) -> int:
        return sum(x - 1 for x in self.s)


@dataclass(frozen=True)
class PeriodicLattice:
    """Graph on ``Z^d x K`` with Laplacian blocks ``L^x`` (``|K| x |K|``).

    ``Delta((x, u), (y, v)) = L^(y - x)(u, v)``; ``blocks`` maps offset
    tuples to matrices.  The symbol ``M(s) = sum_x L^x exp(2 pi i x.s)``
    must be Hermitian, so ``L^(-x) = (L^x)^T``, and ``M(0)`` has zero row
    sums.
    """

    d: int
    blocks: dict

    def __post_init__(self):
        check_positive_int(self.d, "d")
        blocks = {tuple(int(t) for t in x): np.atleast_2d(np.asarray(m, dtype=float))
                  for x, m in self.blocks.items()}
        sizes = {m.shape for m in blocks.values()}
        if len(sizes) != 1 or any(len(x) != self.d for x in blocks):
            raise ValueError("blocks must share one square shape and have d-dimensional offsets")
        (shape,) = sizes
        if shape[0] != shape[1]:
            raise ValueError("blocks must be square")
        for x, m in blocks.items():
            neg = tuple(-t for t in x)
            if neg not in blocks or not np.allclose(blocks[neg], m.T, atol=1e-12):
                raise ValueError(f"symbol not Hermitian: L^{neg} != (L^{x})^T")
        total = sum(blocks.values())
        if not np.allclose(total.sum(axis=1), 0.0, atol=1e-12):
            raise ValueError("M(0) must have zero row sums")
        object.__setattr__(self, "blocks", blocks)

    @property
    def cell_size(self) -> int:
        return next(iter(self.blocks.values())).shape[0]

    @property
    def degree(self) -> float:
        zero = self.blocks.get((0,) * self.d)
        return float(np.mean(np.diag(zero))) if zero is not None else 0.0


@dataclass(frozen=True)
class Hypercubic:
    """Nearest-neighbour ``Z^d``; symbol ``2d - 2 sum cos(2 pi s_i)``."""

    d: int

    def __post_init__(self):
        check_positive_int(self.d, "d")

    @property
    def degree(self) -> int:
        return 2 * self.d

    def as_periodic(self) -> PeriodicLattice:
        blocks = {(0,) * self.d: [[2.0 * self.d]]}
        for i in range(self.d):
            for sign in (1, -1):
                x = [0] * self.d
                x[i] = sign
                blocks[tuple(x)] = [[-1.0]]
        return PeriodicLattice(self.d, blocks)


# any model tree_entropy dispatches on by closed form or quadrature
TransitiveModel = Union[RegularTree, FreeProductCompletes, Hypercubic, PeriodicLattice]


# ---------------------------------------------------------------------------
# regular trees
# ---------------------------------------------------------------------------

def entropy_regular_tree(d: int) -> EntropyEstimate:
    """``log[(d-1)^(d-1) / (d(d-2))^(d/2-1)]``; ``d = 2`` (the line) gives 0.

    Examples
    --------
    >>> round(entropy_regular_tree(4).value, 12) == round(3 * math.log(1.5), 12)
    True
    """
    check_positive_int(d, "d", minimum=2)
    if d == 2:
        h = 0.0
    else:
        h = (d - 1) * math.log(d - 1) - (d / 2 - 1) * math.log(d * (d - 2))
    return EntropyEstimate(h, h, h, "closed-form", details={"degree": d})


# ---------------------------------------------------------------------------
# free products of complete graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratingData:
    """Fixed point ``G1 = Phi(G1)`` of the return generating function at 1.

    ``bracket`` holds the final bisection interval, which contains the
    exact fixed point.
    """

    G1: float
    phi: Callable
    bracket: tuple
    degree: int

    @property
    def residual(self) -> float:
        return abs(self.G1 - float(self.phi(self.G1)))


def free_product_phi(s: Sequence[int]) -> Callable:
    """``Phi`` of the looped free product (``n`` loops per vertex, degree ``d = sum s``).

    ``Phi(z) = 1 + (z - n)/2 + 1/2 sum_j sqrt((1 - s_j z/d)^2 + 4 z/d)``.
    Each square root is of a positive definite quadratic, so ``Phi`` is
    convex with ``Phi(0) = 1``.
    """
    s = np.asarray(FreeProductCompletes(tuple(s)).s, dtype=float)
    n = len(s)
    d = float(s.sum())

    def phi(z):
        z = np.asarray(z, dtype=float)
        zz = z[..., None]
        roots = np.sqrt((1.0 - s * zz / d) ** 2 + 4.0 * zz / d)
        out = 1.0 + (z - n) / 2.0 + 0.5 * roots.sum(axis=-1)
        return out if out.ndim else float(out)

    return phi


def free_product_generating_data(s: Sequence[int], iterations: int = 200) -> GeneratingData:
    """Solve ``t = Phi(t)`` by bisection on ``[1, T]``, doubling ``T`` until ``Phi(T) < T``.

    Examples
    --------
    >>> round(free_product_generating_data((2, 3)).G1, 9)
    6.0
    """
    model = FreeProductCompletes(tuple(s))
    phi = free_product_phi(model.s)
    lo, hi = 1.0, 2.0
    if not phi(lo) > lo:
        raise ArithmeticError("Phi(1) <= 1: no fixed point above 1")
    while not phi(hi) < hi:
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            raise ArithmeticError("no sign change for Phi(t) - t")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if phi(mid) > mid:
            lo = mid
        else:
            hi = mid
    g1 = 0.5 * (lo + hi)
    return GeneratingData(g1, phi, (lo, hi), sum(model.s))


def _phi_integrand(phi, s):
    n = len(s)
    d = float(sum(s))
    # limit at 0 is Phi'(0) = 1/2 + sum_j (2 - s_j) / (2 d)
    slope0 = 0.5 + sum((2.0 - x) / (2.0 * d) for x in s)

    def g(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (phi(t) - 1.0) / t
        return np.where(t == 0, slope0, out)

    return g


def entropy_free_product(s: Sequence[int], tol: float = 1e-9) -> EntropyEstimate:
    """Tree entropy of the free product ``K_{s_1} * ... * K_{s_n}``.

    ``h = log d - int_0^G1 (Phi(t) - 1)/t dt + G1 - 1 - log G1`` with
    ``d = sum s`` (degree of the looped graph, whose entropy is the same).
    The integral uses adaptive Gauss-Kronrod quadrature and the reported
    bounds are its error estimate plus the effect of the bisection bracket
    on ``G1``.  As a guard, the value must also lie inside a coarse
    monotone Riemann bracket (``(Phi(t) - 1)/t`` is non-decreasing because
    ``Phi`` is convex), otherwise ``ArithmeticError`` is raised.

    Examples
    --------
    >>> h = entropy_free_product((3, 3, 3))
    >>> abs(h.value - math.log(16 / 3)) < 1e-9
    True
    """
    check_tolerance(tol)
    model = FreeProductCompletes(tuple(s))
    data = free_product_generating_data(model.s)
    g = _phi_integrand(data.phi, model.s)
    d = data.degree

    def h_of(upper):
        integral, err = integrate.quad(lambda t: float(g(t)), 0.0, upper,
                                       epsabs=tol / 8, epsrel=0.0, limit=200)
        return math.log(d) - integral + upper - 1.0 - math.log(upper), err

    value, quad_err = h_of(data.G1)
    spread = max(abs(h_of(b)[0] - value) for b in data.bracket)
    err = quad_err + spread + 8 * np.finfo(float).eps * (abs(value) + math.log(d) + data.G1)

    cells = 1 << 14
    grid = np.linspace(0.0, data.G1, cells + 1)
    vals = g(grid)
    step = data.G1 / cells
    base = math.log(d) + data.G1 - 1.0 - math.log(data.G1)
    bracket = (base - math.fsum((vals[1:] * step).tolist()),
               base - math.fsum((vals[:-1] * step).tolist()))
    if not bracket[0] - err <= value <= bracket[1] + err:
        raise ArithmeticError(f"quadrature value {value} outside monotone bracket {bracket}")
    return EntropyEstimate(value, value - err, value + err, "fixed-point-quadrature",
                           converged=2 * err <= tol,
                           details={"G1": data.G1, "degree": d, "residual": data.residual,
                                    "quad_error": quad_err, "riemann_bracket": bracket})


# ---------------------------------------------------------------------------
# periodic lattices
# ---------------------------------------------------------------------------

GRID_BUDGET = 1 << 28


def _midpoints(N):
    return (np.arange(N) + 0.5) / N


def _hypercubic_mean_log(d: int, N: int) -> float:
    c = 2.0 * np.cos(2.0 * np.pi * _midpoints(N))
    if d == 1:
        vals = np.log(2.0 - c)
        return math.fsum(vals.tolist()) / N
    base = 2.0 * d - c
    # sum over the remaining d-1 axes, chunked along the first of them
    rest = np.zeros((1,))
    for _ in range(d - 2):
        rest = (rest[:, None] + c[None, :]).ravel()
    total = 0.0
    chunk = max(1, (1 << 22) // (N * max(1, rest.size)))
    for start in range(0, N, chunk):
        block = base[start:start + chunk, None, None] - c[None, :, None] - rest[None, None, :]
        if (block <= 0).any():
            raise ArithmeticError("non-positive symbol at a quadrature node")
        total += float(np.log(block).sum())
    return total / N**d


def _symbol_mean_log(model: PeriodicLattice, N: int) -> float:
    d = model.d
    k = model.cell_size
    offsets = list(model.blocks)
    mats = np.stack([model.blocks[x] for x in offsets]).astype(complex)
    xs = np.array(offsets, dtype=float)
    axes = [_midpoints(N)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    total = 0.0
    step = max(1, (1 << 20) // (k * k * len(offsets)))
    for start in range(0, grid.shape[0], step):
        pts = grid[start:start + step]
        phase = np.exp(2j * np.pi * pts @ xs.T)
        symbol = np.einsum("pm,muv->puv", phase, mats)
        symbol = 0.5 * (symbol + np.conj(np.swapaxes(symbol, 1, 2)))
        sign, logdet = np.linalg.slogdet(symbol)
        if np.any(np.abs(sign - 1) > 1e-9):
            raise ArithmeticError("symbol determinant not positive at a quadrature node")
        total += float(logdet.real.sum())
    return total / (N**d * k)


def entropy_periodic_lattice(model, N: int = 256) -> EntropyEstimate:
    """``|K|^{-1} int_{[0,1]^d} log det M(s) ds`` by the midpoint rule.

    The half-cell-offset grid never hits ``s = 0`` where the symbol
    vanishes.  The midpoint error here behaves like ``N^{-d}``, so the
    reported value is the Richardson combination of grids ``N`` and
    ``N/2``; ``4 |value - I_N|`` is the reported error.

    Parameters
    ----------
    model : Hypercubic or PeriodicLattice
    N : int
        Even number of cells per axis; ``N^d`` is capped at ``2^28``.
    """
    check_positive_int(N, "N", minimum=2)
    if N % 2:
        raise ValueError("N must be even")
    if isinstance(model, Hypercubic):
        d = model.d

        def mean_log(n):
            return _hypercubic_mean_log(d, n)
    elif isinstance(model, PeriodicLattice):
        d = model.d

        def mean_log(n):
            return _symbol_mean_log(model, n)
    else:
        raise TypeError("model must be Hypercubic or PeriodicLattice")
    if float(N) ** d > GRID_BUDGET:
        raise ValueError(f"N^d = {N}^{d} exceeds the grid budget 2^28")
    fine = mean_log(N)
    coarse = mean_log(N // 2)
    factor = 2.0**d
    value = (factor * fine - coarse) / (factor - 1.0)
    err = 4.0 * abs(value - fine) + 64 * np.finfo(float).eps * (abs(fine) + 1)
    return EntropyEstimate(value, value - err, value + err, "symbol-quadrature",
                           details={"N": N, "raw": fine, "coarse": coarse})


# ---------------------------------------------------------------------------
# truncated series on rooted oracles
# ---------------------------------------------------------------------------

ALPHA = 0.5


class _RootState:
    """Adaptive series state for one root."""

    def __init__(self, oracle: LocalGraphOracle, weight: float, K: int, max_states: int):
        if not oracle.infinite:
            raise ValueError("series entropy needs an infinite rooted graph "
                             "(return probabilities of a finite graph do not vanish)")
        deg = float(oracle.root_degree)
        if not deg > 0:
            raise ValueError("root has degree 0")
        self.oracle = oracle
        self.weight = weight
        self.degree = deg
        self.K = K
        self.radius = min(32, (K + 1) // 2)
        self.max_states = max_states
        self.series = None
        self.lo = self.hi = None

    def evaluate(self, width_target: float) -> None:
        # grow the ball until the killed-walk error is a small part of the target
        s = local_return_series(self.oracle, self.K, ALPHA, self.radius, self.max_states)
        while self.radius < (self.K + 1) // 2 and s.partial_error > width_target / 8:
            radius = min(2 * self.radius, (self.K + 1) // 2)
            try:
                s = local_return_series(self.oracle, self.K, ALPHA, radius, self.max_states)
            except BallTooLarge:
                break
            self.radius = radius
        self.series = s
        tail = s.tail(target=width_target / 4)
        # sum_k q_k / k over all k lies in [partial - err, partial + err + tail]
        self.sum_lo = s.partial_sum - s.partial_error
        self.sum_hi = s.partial_sum + s.partial_error + tail
        self.tail = tail

    @property
    def width(self) -> float:
        return self.sum_hi - self.sum_lo


def mixture_return_sum(target, tol: float = 1e-3, K_max: int = K_MAX,
                       max_states: int = 2_000_000, alpha_shift: bool = True):
    """Certified bounds on ``sum_x w_x sum_{k>=1} p_k(x) / k`` for a mixture.

    Each root uses the lazy walk ``(I + P)/2`` with the ``log 2`` shift back
    to the simple walk.  Roots are refined greedily (doubling ``K`` of the
    root with the largest weighted width) until the mixture width is below
    ``tol`` or every root has reached ``K_max``.

    Returns
    -------
    (lo, hi, details) : tuple
        ``details`` lists ``K`` and ball radius per root.
    """
    check_tolerance(tol)
    mix = Mixture.of(target)
    roots = [_RootState(o, w, 256, max_states) for o, w in mix.components]
    for r in roots:
        r.evaluate(tol)
    while True:
        width = math.fsum(r.weight * r.width for r in roots)
        if width <= tol:
            break
        open_roots = [r for r in roots if r.K < K_max]
        if not open_roots:
            break
        worst = max(open_roots, key=lambda r: r.weight * r.width)
        worst.K = min(2 * worst.K, K_max)
        share = tol * worst.width / max(width, 1e-300)
        worst.evaluate(max(share, tol / len(roots)))
    shift = math.log(1 - ALPHA) if alpha_shift else 0.0
    lo = math.fsum(r.weight * (r.sum_lo + shift) for r in roots)
    hi = math.fsum(r.weight * (r.sum_hi + shift) for r in roots)
    details = {"K": [r.K for r in roots], "radius": [r.radius for r in roots],
               "converged": width <= tol}
    return lo, hi, details


def entropy_series(target, tol: float = 1e-3, K_max: int = K_MAX,
                   max_states: int = 2_000_000) -> EntropyEstimate:
    """``int (log deg(x) - sum_k p_k(x)/k) d rho`` with certified bounds.

    Parameters
    ----------
    target : LocalGraphOracle or Mixture
        A rooted infinite graph or a finite mixture of them.
    tol : float
        Target width of the certified interval.
    K_max : int
        Cap on the number of steps per root; reaching it without meeting
        ``tol`` returns the wider interval with ``converged=False``.

    Examples
    --------
    >>> from arboreal.oracles import RegularTreeOracle
    >>> h = entropy_series(RegularTreeOracle(4), tol=1e-3)
    >>> h.contains(3 * math.log(1.5))
    True
    """
    mix = Mixture.of(target)
    lo_sum, hi_sum, details = mixture_return_sum(mix, tol, K_max, max_states)
    mean_log_deg = math.fsum(w * math.log(float(o.root_degree)) for o, w in mix.components)
    slack = 8 * np.finfo(float).eps * (abs(mean_log_deg) + abs(hi_sum) + 1)
    lo = mean_log_deg - hi_sum - slack
    hi = mean_log_deg - lo_sum + slack
    return EntropyEstimate(0.5 * (lo + hi), lo, hi, "series",
                           converged=details["converged"], details=details)


def entropy_continuity_probe(models: Sequence, tol: float = 1e-2, limit: float | None = None,
                             K_max: int = K_MAX) -> list[dict]:
    """Series entropies along a sequence of rooted graphs or mixtures.

    Returns one row per model with the certified interval and, when
    ``limit`` is given, its distance to the interval (0 if contained).
    """
    rows = []
    for i, m in enumerate(models):
        est = entropy_series(m, tol=tol, K_max=K_max)
        row = {"index": i, "value": est.value, "lo": est.lo, "hi": est.hi,
               "converged": est.converged}
        if limit is not None:
            row["distance"] = max(0.0, est.lo - limit, limit - est.hi)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def tree_entropy(model, tol: float = 1e-6, N: int | None = None) -> EntropyEstimate:
    """Entropy of any model by its preferred method."""
    if isinstance(model, RegularTree):
        return entropy_regular_tree(model.d)
    if isinstance(model, FreeProductCompletes):
        return entropy_free_product(model.s, tol=min(tol, 1e-6))
    if isinstance(model, (Hypercubic, PeriodicLattice)):
        if N is None:
            N = {1: 4096, 2: 2048}.get(model.d, 256 if model.d == 3 else 32)
        return entropy_periodic_lattice(model, N)
    if isinstance(model, (LocalGraphOracle, Mixture)):
        return entropy_series(model, tol=tol)
    raise TypeError(f"unsupported model {model!r}")


def parse_model(text: str):
    """Parse ``regular-tree:4``, ``free-product:2,3`` or ``hypercubic:2``."""
    kind, _, params = text.partition(":")
    try:
        values = [int(p) for p in params.split(",") if p.strip()]
    except ValueError as exc:
        raise ValueError(f"bad model parameters in {text!r}") from exc
    kind = kind.strip().lower()
    if kind == "regular-tree" and len(values) == 1:
        return RegularTree(values[0])
    if kind == "free-product" and len(values) >= 2:
        return FreeProductCompletes(tuple(values))
    if kind == "hypercubic" and len(values) == 1:
        return Hypercubic(values[0])
    raise ValueError(f"unknown model {text!r}; expected regular-tree:d, "
                     "free-product:s1,s2,... or hypercubic:d")
