"""Return-probability series for ``log tau`` and their certified tails.

For a finite connected graph with lazy walk ``Q = alpha I + (1 - alpha) P``

    log tau = -log sum(deg) + sum log deg - (n - 1) log(1 - alpha)
              - sum_{k >= 1} (tr Q^k - 1) / k .

The tail of the last sum is bounded rigorously.  For ``alpha >= 1/2`` the
spectrum of ``Q`` lies in ``[0, 1]``, so ``m_k = tr Q^k - 1`` are the
moments of a positive measure ``mu`` (the non-trivial eigenvalues) and

    sum_{k > K} m_k / k = int_0^1 lambda^K / (1 - lambda) mu[lambda, 1) d lambda .

The survival function ``mu[lambda, 1)`` is at most ``m_j / lambda^j`` for
every computed moment (Markov's inequality) and at most the decay-lemma
bound ``b_k / lambda^k``; the integral of that envelope is evaluated as an
upper Riemann sum.  The same machinery handles the return probabilities
``q_k(root)`` of an infinite graph, whose spectral measure has mass 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from ._validation import as_exact, check_laziness, check_positive_int, check_tolerance
from .graph import MultiGraph, WalkOperator

__all__ = [
    "ReturnSeries",
    "SeriesLogTau",
    "BallTooLarge",
    "decay_bound",
    "decay_tail_bound",
    "moment_tail_bound",
    "return_probabilities_finite",
    "return_probabilities_local",
    "local_return_series",
    "lazify_series",
    "series_log_tau",
    "second_eigenvalue",
    "series_log_arborescence",
]

EPS = np.finfo(float).eps
K_START = 64
K_MAX = 10**6
EXACT_VERTEX_LIMIT = 12
MAX_SERIES_VERTICES = 5000


class BallTooLarge(RuntimeError):
    """Raised when a local ball exceeds the configured state budget."""


# ---------------------------------------------------------------------------
# decay bounds
# ---------------------------------------------------------------------------

def decay_bound(k: int, c, a=None, finite: bool = True) -> float:
    """Bound on ``|Q^k(x, x) / pi(x) - 1|`` (finite) or ``Q^k(x, x) / pi(x)`` (infinite).

    Parameters
    ----------
    k : int
        Number of steps, ``k >= 0``.
    c : float
        ``inf pi(x) Q(x, y)`` over transitions ``x != y``.
    a : float, optional
        ``inf_x Q(x, x)``.  Required for finite chains.  An infinite chain
        without it uses ``4 / (c sqrt(k + 1))``, valid with no holding.
    finite : bool
        Whether ``pi`` is a probability measure (finite chain).

    Examples
    --------
    >>> decay_bound(3, c=0.5, a=0.5)
    2.0
    >>> decay_bound(99, c=0.5, finite=False)
    0.8
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    root = math.sqrt(k + 1)
    if finite:
        if a is None or not a > 0:
            raise ValueError("finite chains need a > 0")
        return min(1.0 / (a * c * root), 1.0 / (2 * a * a * c * c * (k + 1)))
    if a is None:
        return 4.0 / (c * root)
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    return min(1.0 / (a * c * root), 4.0 / (c * root))


@dataclass(frozen=True)
class _Envelope:
    """``S(lambda) <= sqrt_coef / (sqrt(k+1) lambda^k)`` and, if set,
    ``S(lambda) <= lin_coef / ((k+1) lambda^k)`` for every ``k >= 0``."""

    sqrt_coef: float
    lin_coef: float | None = None


def _finite_envelope(a, c) -> _Envelope:
    a, c = float(a), float(c)
    return _Envelope(1.0 / (a * c), 1.0 / (2 * a * a * c * c))


def _infinite_envelope(a, c, degree) -> _Envelope:
    a, c = float(a), float(c)
    coef = 1.0 / (a * c) if a > 0 else 4.0 / c
    return _Envelope(float(degree) * coef, None)


def decay_tail_bound(K: int, env: _Envelope) -> float:
    """``sum_{k > K} b_k / k`` for the decay envelope, in closed form."""
    bound = 2.0 * env.sqrt_coef / math.sqrt(K)
    if env.lin_coef is not None:
        bound = min(bound, env.lin_coef / (K + 1))
    return bound


def _decay_log_survival(log_lam: np.ndarray, env: _Envelope) -> np.ndarray:
    # minimize over integer k near the continuous optimum of each envelope
    ell = -log_lam
    with np.errstate(divide="ignore"):
        best = np.full_like(ell, math.log(env.sqrt_coef))
        kstar = np.where(ell > 0, 1.0 / (2.0 * np.maximum(ell, 1e-300)) - 1.0, 0.0)
        for kk in (np.floor(kstar), np.ceil(kstar)):
            kk = np.clip(kk, 0, 1e300)
            val = math.log(env.sqrt_coef) - 0.5 * np.log1p(kk) + kk * ell
            best = np.minimum(best, val)
        if env.lin_coef is not None:
            kstar = np.where(ell > 0, 1.0 / np.maximum(ell, 1e-300) - 1.0, 0.0)
            for kk in (np.floor(kstar), np.ceil(kstar)):
                kk = np.clip(kk, 0, 1e300)
                val = math.log(env.lin_coef) - np.log1p(kk) + kk * ell
                best = np.minimum(best, val)
    return best


def _moment_indices(K: int, limit: int = 3000) -> np.ndarray:
    if K + 1 <= limit:
        return np.arange(K + 1)
    geo = np.unique(np.round(np.geomspace(1, K, limit // 2)).astype(int))
    lin = np.linspace(0, K, limit // 2).round().astype(int)
    return np.unique(np.concatenate([[0], geo, lin, [K]]))


def moment_tail_bound(moments_hi, env: _Envelope, target: float | None = None,
                      ratio: float = 1.02) -> float:
    """Certified bound on ``sum_{k > K} m_k / k`` with ``K = len(moments_hi) - 1``.

    ``moments_hi[j]`` must upper-bound ``m_j = int lambda^j d mu`` for a
    positive measure ``mu`` on ``[0, 1)``; ``moments_hi[0]`` is its mass.
    ``env`` bounds the survival function of ``mu`` near 1.  The result is
    the smaller of this bound and :func:`decay_tail_bound`.
    """
    m = np.maximum(np.asarray(moments_hi, dtype=float), 0.0)
    K = len(m) - 1
    if K < 1:
        raise ValueError("need at least the moments m_0 and m_1")
    decay_only = decay_tail_bound(K, env)
    if target is None:
        target = 1e-3 * decay_only
    target = max(float(target), 1e-300)

    # first cell delta in (0, delta1]: int S(1-delta)/delta d delta
    # the first cell gets an eighth of the target
    if env.lin_coef is not None:
        delta1 = max(target / (32.0 * env.lin_coef), (target / (64.0 * env.sqrt_coef)) ** 2)
    else:
        delta1 = (target / (64.0 * env.sqrt_coef)) ** 2
    delta1 = min(max(delta1, 1e-300), 0.25)
    first = 8.0 * env.sqrt_coef * math.sqrt(delta1)
    if env.lin_coef is not None:
        first = min(first, 4.0 * env.lin_coef * delta1)

    count = int(math.ceil(math.log(1.0 / delta1) / math.log(ratio)))
    deltas = np.unique(np.minimum(delta1 * ratio ** np.arange(count + 1), 1.0))
    deltas[-1] = 1.0
    lo, hi = deltas[:-1], deltas[1:]

    if (m[1:] <= 0).any():
        # a vanishing moment forces mu onto {0}: every later moment is 0
        return 0.0
    # survival bound at the cell's smaller lambda = 1 - hi; the last cell
    # reaches lambda = 0 where only the total mass bounds it
    inner = hi < 1.0
    log_lam = np.log1p(-hi[inner])
    idx = _moment_indices(K)
    j = idx.astype(float)
    log_m = np.log(m[idx])
    log_s = np.full(hi.shape, math.log(m[0]))
    inner_s = np.empty(log_lam.shape)
    step = 512
    for start in range(0, len(log_lam), step):
        ll = log_lam[start:start + step]
        inner_s[start:start + step] = (log_m[None, :] - np.outer(ll, j)).min(axis=1)
    inner_s = np.minimum(inner_s, _decay_log_survival(log_lam, env))
    log_s[inner] = np.minimum(log_s[inner], inner_s)
    log_w = K * np.log1p(-lo) + np.log(np.log(hi / lo))
    cells = np.exp(log_s + log_w)
    total = first + math.fsum(cells.tolist())
    return float(min(total * (1 + 1e-12), decay_only))


# ---------------------------------------------------------------------------
# return series containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReturnSeries:
    """Return probabilities ``p_0 .. p_K`` of one walk.

    Attributes
    ----------
    per_k : tuple
        Finite graphs: ``(1/n) tr Q^k``.  Rooted infinite graphs:
        ``Q^k(root, root)``.  Exact ``Fraction`` values in rational mode.
    alpha : number
        Laziness of ``Q``.
    n_vertices : int or None
        ``None`` for a rooted (infinite) series.
    errors : tuple
        Absolute uncertainty of each ``per_k`` entry (all zero when exact).
    a0, c0 : float
        Holding and conductance constants of the non-lazy walk, used for
        the decay envelope.  For rooted series ``c0`` is relative to the
        unnormalized measure ``pi = deg``.
    root_degree : float or None
        Degree of the root for rooted series.
    """

    per_k: tuple
    alpha: object
    n_vertices: int | None
    errors: tuple
    a0: float
    c0: float
    root_degree: float | None = None
    exact: bool = False
    certifiable: bool = True

    @property
    def K(self) -> int:
        return len(self.per_k) - 1

    @property
    def finite(self) -> bool:
        return self.n_vertices is not None

    @cached_property
    def terms(self) -> tuple:
        """``term_k``: ``n p_k - 1`` (finite) or ``p_k`` (rooted)."""
        if self.finite:
            n = self.n_vertices
            return tuple(n * p - 1 for p in self.per_k)
        return tuple(self.per_k)

    @cached_property
    def partial_sum(self) -> float:
        """``sum_{k=1..K} term_k / k`` with compensated summation."""
        if self.exact:
            s = sum((Fraction(t) / k for k, t in enumerate(self.terms) if k), Fraction(0))
            return float(s)
        return math.fsum(float(t) / k for k, t in enumerate(self.terms) if k)

    @cached_property
    def partial_error(self) -> float:
        """Bound on the floating error of :attr:`partial_sum`."""
        scale = self.n_vertices if self.finite else 1
        raw = math.fsum(scale * e / k for k, e in enumerate(self.errors) if k)
        return raw + 4 * EPS * (abs(self.partial_sum) + 1) + 1e-300

    @property
    def a(self) -> float:
        alpha = float(self.alpha)
        return alpha + (1 - alpha) * self.a0

    @property
    def c(self) -> float:
        return (1 - float(self.alpha)) * self.c0

    def envelope(self) -> _Envelope:
        if self.finite:
            return _finite_envelope(self.a, self.c)
        return _infinite_envelope(self.a, self.c, self.root_degree)

    def moments_hi(self) -> np.ndarray:
        p = np.array([float(x) for x in self.per_k])
        e = np.array(self.errors, dtype=float)
        if self.finite:
            n = self.n_vertices
            m = n * (p + e) - 1.0
            m[0] = n - 1
        else:
            m = p + e
            m[0] = 1.0
        return np.maximum(m, 0.0)

    def tail(self, target: float | None = None) -> float | None:
        """Certified bound on the omitted ``sum_{k > K} term_k / k``.

        ``None`` for a non-lazy walk or a rooted finite graph (whose
        spectral measure has an atom at 1); the envelope argument needs
        ``alpha >= 1/2`` (non-negative spectrum), otherwise only the decay
        lemma is used.
        """
        if float(self.alpha) <= 0 or self.K < 1 or not self.certifiable:
            return None
        env = self.envelope()
        if float(self.alpha) < 0.5:
            return decay_tail_bound(self.K, env)
        return moment_tail_bound(self.moments_hi(), env, target)

    @cached_property
    def tail_bound(self) -> float | None:
        return self.tail()


@dataclass(frozen=True)
class SeriesLogTau:
    """Series evaluation of ``log tau`` with a certified interval."""

    value: float
    lo: float
    hi: float
    K_used: int
    converged: bool
    tail_bound: float
    rounding_error: float
    assumed_gap: float | None = None
    exact_log_tau: float | None = None

    def __post_init__(self):
        for name in ("value", "lo", "hi", "tail_bound", "rounding_error"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "converged", bool(self.converged))

    @property
    def certified_interval(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def as_dict(self) -> dict:
        d = {
            "value": self.value,
            "lo": self.lo,
            "hi": self.hi,
            "K_used": self.K_used,
            "converged": self.converged,
            "tail_bound": self.tail_bound,
        }
        if self.assumed_gap is not None:
            d["assumed_gap"] = self.assumed_gap
        if self.exact_log_tau is not None:
            d["exact_log_tau_if_small"] = self.exact_log_tau
        return d


# ---------------------------------------------------------------------------
# finite graphs
# ---------------------------------------------------------------------------

def _walk_constants(g: MultiGraph) -> tuple[float, float]:
    walk = WalkOperator(g, 0)
    a0 = float(walk.a)
    c0 = walk.c
    if c0 is None:
        raise ValueError("graph has no transitions between distinct vertices")
    return a0, float(c0)


class _TraceStream:
    """Resumable ``tr Q^k`` via ``A_j = S^j``: ``t_2j = |A_j|_F^2``,
    ``t_{2j-1} = <A_{j-1}, A_j>_F``, for symmetrized ``S`` (non-negative)."""

    def __init__(self, walk: WalkOperator):
        n = walk.graph.vertex_count
        if n > MAX_SERIES_VERTICES:
            raise ValueError(f"series evaluation limited to {MAX_SERIES_VERTICES} vertices")
        s = walk.symmetrized(sparse=True).tocsr()
        self.n = n
        self.row_nnz = int(np.diff(s.indptr).max())
        self.dense = s.nnz > n * n / 8
        self.s = s.toarray() if self.dense else s
        self.prev = None
        self.cur = np.eye(n)
        self.traces = [float(n)]

    def extend(self, K: int) -> None:
        while len(self.traces) <= K:
            nxt = self.s @ self.cur
            if not self.dense:
                nxt = np.asarray(nxt)
            self.traces.append(float(np.vdot(self.cur, nxt)))
            self.traces.append(float(np.vdot(nxt, nxt)))
            self.prev, self.cur = self.cur, nxt

    def errors(self, K: int) -> np.ndarray:
        # Non-negative data: each product step costs at most (row_nnz + 3) eps
        # relative error per entry, the inner product a further n^2 eps.
        k = np.arange(K + 1, dtype=float)
        t = np.array(self.traces[:K + 1])
        rel = (k * (self.row_nnz + 3) + self.n * self.n + 2) * EPS * 1.01
        return t * rel / self.n


def _exact_traces(walk: WalkOperator, K: int) -> list:
    q = walk.lazy_matrix
    n = q.shape[0]
    power = np.identity(n, dtype=object)
    power[...] = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    out = [Fraction(n)]
    for _ in range(K):
        power = power.dot(q)
        out.append(sum((power[i, i] for i in range(n)), Fraction(0)))
    return [as_exact(t) for t in out]


def return_probabilities_finite(g: MultiGraph, alpha=0, K: int = 64,
                                exact: bool = False) -> ReturnSeries:
    """Average return probabilities ``(1/n) tr Q^k`` for ``k = 0 .. K``.

    Parameters
    ----------
    g : MultiGraph
        Connected graph.
    alpha : real in [0, 1)
        Laziness.
    K : int
        Largest power.
    exact : bool
        Rational arithmetic (graphs with at most 12 vertices and exact
        weights).

    Examples
    --------
    >>> from arboreal.graph import build_graph
    >>> s = return_probabilities_finite(build_graph([(0, 1)]), 0, 3, exact=True)
    >>> [str(p) for p in s.per_k]
    ['1', '0', '1', '0']
    """
    check_laziness(alpha)
    check_positive_int(K, "K", minimum=0)
    if not g.is_connected:
        raise ValueError("graph must be connected")
    a0, c0 = _walk_constants(g)
    n = g.vertex_count
    if exact:
        if n > EXACT_VERTEX_LIMIT or not g.exact:
            raise ValueError(f"exact mode needs an exact graph with <= {EXACT_VERTEX_LIMIT} vertices")
        walk = WalkOperator(g, as_exact(Fraction(alpha)))
        traces = _exact_traces(walk, K)
        per_k = tuple(as_exact(Fraction(t) / n) for t in traces)
        return ReturnSeries(per_k, walk.alpha, n, (0.0,) * (K + 1), a0, c0, exact=True)
    walk = WalkOperator(g.to_float(), float(alpha))
    stream = _TraceStream(walk)
    stream.extend(K)
    per_k = tuple(t / n for t in stream.traces[:K + 1])
    return ReturnSeries(per_k, float(alpha), n, tuple(stream.errors(K)), a0, c0)


def lazify_series(p: ReturnSeries, alpha) -> ReturnSeries:
    """Return probabilities of ``alpha I + (1 - alpha) P`` from those of ``P``.

    ``q_k = sum_j C(k, j) alpha^(k-j) (1 - alpha)^j p_j``; rational input
    with rational ``alpha`` stays exact.
    """
    check_laziness(alpha, allow_zero=False)
    if float(p.alpha) != 0:
        raise ValueError("input series must be non-lazy (alpha = 0)")
    K = p.K
    if p.exact and not isinstance(alpha, float):
        al = as_exact(Fraction(alpha))
        be = 1 - al
        q = []
        for k in range(K + 1):
            s = Fraction(0)
            for j in range(k + 1):
                s += math.comb(k, j) * al ** (k - j) * be ** j * p.per_k[j]
            q.append(as_exact(s))
        return ReturnSeries(tuple(q), al, p.n_vertices, p.errors, p.a0, p.c0,
                            p.root_degree, exact=True)
    al = float(alpha)
    pk = np.array([float(x) for x in p.per_k])
    err = np.array(p.errors, dtype=float)
    q = np.empty(K + 1)
    qe = np.empty(K + 1)
    for k in range(K + 1):
        j = np.arange(k + 1)
        logw = (gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1)
                + (k - j) * _log0(al) + j * _log0(1 - al))
        w = np.exp(logw)
        q[k] = math.fsum((w * pk[: k + 1]).tolist())
        qe[k] = float(w @ err[: k + 1]) + (k + 2) * 8 * EPS * max(q[k], 1e-300)
    return ReturnSeries(tuple(q.tolist()), al, p.n_vertices, tuple(qe.tolist()),
                        p.a0, p.c0, p.root_degree)


def _log0(x):
    return math.log(x) if x > 0 else -math.inf


def second_eigenvalue(g: MultiGraph) -> float:
    """Largest eigenvalue of ``P`` below the trivial eigenvalue 1 (float)."""
    walk = WalkOperator(g.to_float(), 0.0)
    s = walk.symmetrized()
    root = np.sqrt(np.array(g.to_float().degrees))
    u = root / np.linalg.norm(root)
    s = s - np.outer(u, u)  # remove the top eigenpair
    eig = np.linalg.eigvalsh(s)
    return float(eig[-1])


def _base_terms(g: MultiGraph, alpha: float) -> tuple[float, float]:
    degs = [float(d) for d in g.degrees]
    n = g.vertex_count
    logs = [math.log(d) for d in degs]
    base = (-math.log(math.fsum(degs)) + math.fsum(logs)
            - (n - 1) * math.log1p(-alpha))
    err = 4 * EPS * (sum(abs(x) for x in logs) + n + abs(base))
    return base, err


def series_log_tau(g: MultiGraph, tol: float = 1e-6, alpha: float = 0.5,
                   K_max: int = K_MAX, assumed_gap: float | None = None,
                   with_exact: bool = True, progress: Callable | None = None) -> SeriesLogTau:
    """``log tau(g)`` from return probabilities of the lazy walk.

    ``K`` starts at 64 and doubles until the certified interval is narrower
    than ``tol`` or ``K_max`` is reached (then ``converged`` is False).

    Parameters
    ----------
    g : MultiGraph
        Connected, at least two vertices.
    tol : float
        Target width of the certified interval.
    alpha : float
        Laziness in ``[1/2, 1)``.
    assumed_gap : float, optional
        A caller-asserted upper bound ``lambda_2`` on the non-trivial
        eigenvalues of ``P``.  Not verified; it tightens the tail with
        ``((1 + lambda_2) / 2)^k``-type decay and is recorded in the result.
    with_exact : bool
        Attach ``log tau`` from exact enumeration for graphs of at most 12
        vertices.

    Examples
    --------
    >>> from arboreal.graph import build_graph
    >>> r = series_log_tau(build_graph([(0, 1), (1, 2), (2, 0)]), tol=1e-6)
    >>> r.lo <= math.log(3) <= r.hi
    True
    """
    check_tolerance(tol)
    check_laziness(alpha, allow_zero=False)
    if alpha < 0.5:
        raise ValueError("series_log_tau needs alpha >= 1/2 for certified tails")
    if not g.is_connected:
        raise ValueError("graph must be connected")
    if g.vertex_count < 2:
        raise ValueError("graph must have at least two vertices")
    a0, c0 = _walk_constants(g)
    n = g.vertex_count
    base, base_err = _base_terms(g, alpha)
    walk = WalkOperator(g.to_float(), float(alpha))
    stream = _TraceStream(walk)
    K = min(K_START, K_max)
    while True:
        stream.extend(K)
        per_k = tuple(t / n for t in stream.traces[:K + 1])
        series = ReturnSeries(per_k, float(alpha), n, tuple(stream.errors(K)), a0, c0)
        rounding = series.partial_error + base_err
        tail = series.tail(target=tol / 4)
        if assumed_gap is not None:
            tail = min(tail, _gap_tail(n, alpha, assumed_gap, K))
        width = tail + 2 * rounding
        if progress is not None:
            progress(K, width)
        if width <= tol or K >= K_max:
            break
        K = min(2 * K, K_max)
    hi = base - series.partial_sum + rounding
    lo = base - series.partial_sum - rounding - tail
    exact_log = None
    if with_exact and n <= EXACT_VERTEX_LIMIT:
        from .exact import log_count_spanning_trees
        exact_log = log_count_spanning_trees(g)
    return SeriesLogTau(0.5 * (lo + hi), lo, hi, K, width <= tol, tail, rounding,
                        assumed_gap, exact_log)


def _gap_tail(n: int, alpha: float, lam2: float, K: int) -> float:
    top = alpha + (1 - alpha) * lam2
    if not top < 1:
        return math.inf
    # every non-trivial eigenvalue of Q lies in [0, top]
    return (n - 1) * top ** (K + 1) / ((K + 1) * (1 - top))


# ---------------------------------------------------------------------------
# rooted (local) graphs
# ---------------------------------------------------------------------------

def _grow_ball(oracle, radius: int, max_states: int):
    index = {oracle.root: 0}
    states = [oracle.root]
    frontier = [oracle.root]
    rows, cols, vals = [], [], []
    degrees = [float(oracle.degree(oracle.root))]
    leaking = np.zeros(0)
    leak = []
    depth = 0
    boundary = []
    while True:
        nxt = []
        for s in frontier:
            i = index[s]
            deg = float(oracle.degree(s))
            out = 0.0
            for t, w in oracle.neighbors(s):
                j = index.get(t)
                if j is None:
                    if depth >= radius:
                        out += float(w)
                        continue
                    j = len(states)
                    index[t] = j
                    states.append(t)
                    degrees.append(float(oracle.degree(t)))
                    nxt.append(t)
                    if len(states) > max_states:
                        raise BallTooLarge(f"ball of radius {radius} exceeds {max_states} states")
                rows.append(i)
                cols.append(j)
                vals.append(float(w) / deg)
            leak.append((i, out / deg))
        if depth >= radius or not nxt:
            break
        frontier = nxt
        depth += 1
    n = len(states)
    p = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    leaking = np.zeros(n)
    for i, v in leak:
        leaking[i] = v
    return states, p, leaking


def local_return_series(oracle, K: int, alpha=0.5, radius: int | None = None,
                        max_states: int = 2_000_000) -> ReturnSeries:
    """Return probabilities at the oracle root from a ball of given radius.

    With ``radius >= ceil(K / 2)`` the values are exact up to rounding.
    With a smaller radius the walk is killed on leaving the ball; the
    missed return probability at step ``k`` is at most the mass killed by
    step ``k - radius - 1``, which is folded into ``errors``.
    """
    check_laziness(alpha)
    check_positive_int(K, "K", minimum=0)
    full = (K + 1) // 2
    radius = full if radius is None else min(radius, full)
    states, p, leaking = _grow_ball(oracle, radius, max_states)
    al = float(alpha)
    q = (al * sp.identity(p.shape[0], format="csr") + (1 - al) * p).T.tocsr()
    leak = (1 - al) * leaking
    row_nnz = int(np.diff(p.indptr).max()) + 2 if p.nnz else 2
    v = np.zeros(p.shape[0])
    v[0] = 1.0
    ret = np.empty(K + 1)
    killed = np.empty(K + 1)
    ret[0] = 1.0
    killed[0] = 0.0
    acc = 0.0
    for k in range(1, K + 1):
        acc += float(leak @ v)
        v = q @ v
        ret[k] = v[0]
        killed[k] = acc
    steps = np.arange(K + 1, dtype=float)
    err = ret * steps * row_nnz * EPS * 1.01
    lag = np.arange(K + 1) - radius - 1
    trunc = np.where(lag >= 0, killed[np.maximum(lag, 0)] * (1 + 1e-12), 0.0)
    err = err + trunc
    deg = float(oracle.degree(oracle.root))
    a0 = float(oracle.holding)
    return ReturnSeries(tuple(ret.tolist()), al, None, tuple(err.tolist()),
                        a0, float(oracle.min_weight), root_degree=deg,
                        certifiable=bool(oracle.infinite))


def _exact_local(oracle, K: int, alpha) -> tuple:
    alpha = as_exact(Fraction(alpha))
    dist = {oracle.root: Fraction(1)}
    out = [Fraction(1)]
    for _ in range(K):
        new = {}
        for s, mass in dist.items():
            deg = Fraction(oracle.degree(s))
            if alpha:
                new[s] = new.get(s, 0) + alpha * mass
            for t, w in oracle.neighbors(s):
                new[t] = new.get(t, 0) + (1 - alpha) * mass * Fraction(w) / deg
        dist = new
        out.append(dist.get(oracle.root, Fraction(0)))
    return tuple(as_exact(x) for x in out)


def return_probabilities_local(oracle, K: int, alpha=0, exact: bool = False,
                               max_states: int = 2_000_000) -> ReturnSeries:
    """Exact ``p_k(root)`` for ``k <= K`` on the ball of radius ``ceil(K/2)``.

    Parameters
    ----------
    oracle : LocalGraphOracle
        Rooted graph given by a neighbor function.
    K : int
        Largest step count.
    alpha : real in [0, 1)
        Laziness.
    exact : bool
        Rational propagation (dictionary of states), for small ``K``.
    max_states : int
        Budget on the ball size; :class:`BallTooLarge` beyond it.

    Examples
    --------
    >>> from arboreal.oracles import RegularTreeOracle
    >>> s = return_probabilities_local(RegularTreeOracle(3), 2, exact=True)
    >>> str(s.per_k[2])
    '1/3'
    """
    if exact:
        check_laziness(alpha)
        per_k = _exact_local(oracle, K, alpha)
        return ReturnSeries(per_k, as_exact(Fraction(alpha)), None, (0.0,) * (K + 1),
                            float(oracle.holding), float(oracle.min_weight),
                            root_degree=float(oracle.degree(oracle.root)), exact=True,
                            certifiable=bool(oracle.infinite))
    return local_return_series(oracle, K, alpha, None, max_states)


# ---------------------------------------------------------------------------
# directed chains
# ---------------------------------------------------------------------------

def series_log_arborescence(chain, K: int = 2000, alpha: float = 0.5) -> float:
    """Truncated ``-sum_k (tr P^k - 1) / k`` for an irreducible chain.

    Computed on the lazy chain ``Q`` with the ``-(n - 1) log(1 - alpha)``
    correction.  No certified tail: the chain need not be reversible.  Use
    :func:`arboreal.exact.arborescence_log_weight` for exact values.
    """
    from .exact import ChainMatrix

    chain = chain if isinstance(chain, ChainMatrix) else ChainMatrix.from_rows(chain)
    n = chain.n
    q = alpha * np.eye(n) + (1 - alpha) * np.array(chain.rows, dtype=float)
    power = np.eye(n)
    terms = []
    for k in range(1, K + 1):
        power = power @ q
        terms.append((np.trace(power) - 1.0) / k)
    return -math.fsum(terms) - (n - 1) * math.log1p(-alpha)
