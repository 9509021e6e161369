"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the status lines are
written past pytest's capture so they appear in the log either way.
"""

import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from arboreal.exact import (ChainMatrix, arborescence_log_weight, arborescence_weight,
                            arborescence_weight_bruteforce, count_spanning_trees,
                            count_spanning_trees_bruteforce, exact_log,
                            log_count_spanning_trees, log_det_prime_laplacian)
from arboreal.generators import box, complete_graph, random_connected_graph, random_regular, torus
from arboreal.graph import WalkOperator, build_graph, laplacian
from arboreal.models import (Hypercubic, entropy_free_product, entropy_periodic_lattice,
                             entropy_regular_tree, entropy_series, free_product_generating_data,
                             mixture_return_sum)
from arboreal.oracles import RegularTreeOracle, free_free_mixture
from arboreal.series import (decay_bound, lazify_series, return_probabilities_finite,
                             series_log_tau)

CATALAN = 0.915965594177219015054603514932


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail, elapsed=None):
        timing = "" if elapsed is None else f" [{elapsed:.1f}s]"
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'} {detail}{timing}")
        assert ok, detail
    return _report


def _torus_log_tau_eigen(n):
    # closed-form spectrum of the n x n torus Laplacian
    t = 2 - 2 * np.cos(2 * np.pi * np.arange(n) / n)
    lam = (t[:, None] + t[None, :]).ravel()[1:]
    return float(np.sum(np.log(lam)) - math.log(n * n))


def test_acc01_exact_count_oracles(report):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    mismatches = 0
    for i in range(500):
        n = int(rng.integers(2, 11))
        extra = int(rng.integers(0, 21 - (n - 1)))
        g = random_connected_graph(n, extra, seed=1000 + i, multigraph=True, loops=bool(i % 5 == 0))
        assert g.n_edges <= 20
        if count_spanning_trees(g) != count_spanning_trees_bruteforce(g):
            mismatches += 1
    cayley = all(count_spanning_trees(complete_graph(n)) == n ** (n - 2) for n in range(3, 10))
    elapsed = time.perf_counter() - start
    report(1, mismatches == 0 and cayley and elapsed < 30,
           f"500 multigraphs: {mismatches} mismatches; Cayley n=3..9 {'ok' if cayley else 'wrong'}",
           elapsed)


def test_acc02_series_identity(report):
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    misses = []
    for i in range(200):
        n = int(rng.integers(2, 201))
        extra = int(rng.integers(0, n + 1))
        g = random_connected_graph(n, extra, seed=2000 + i)
        if n <= 40:
            truth = exact_log(count_spanning_trees(g))
        else:
            # det' of the Laplacian equals n * tau
            truth = log_det_prime_laplacian(g) - math.log(n)
        r = series_log_tau(g, tol=1e-4, with_exact=False)
        slack = 1e-9 * max(1.0, abs(truth))
        if not (r.converged and r.lo - slack <= truth <= r.hi + slack):
            misses.append((i, n, r.lo, truth, r.hi))
    elapsed = time.perf_counter() - start
    report(2, not misses and elapsed < 120,
           f"200 graphs n<=200: {len(misses)} intervals miss the oracle {misses[:3]}", elapsed)


def test_acc03_regular_tree_entropy(report):
    start = time.perf_counter()
    h4, h3 = entropy_regular_tree(4), entropy_regular_tree(3)
    closed = (abs(h4.value - 3 * math.log(1.5)) <= 1e-12
              and abs(h3.value - math.log(4 / math.sqrt(3))) <= 1e-12)
    s4 = entropy_series(RegularTreeOracle(4), tol=5e-3)
    s3 = entropy_series(RegularTreeOracle(3), tol=5e-3)
    series_ok = (s4.contains(3 * math.log(1.5)) and s3.contains(math.log(4 / math.sqrt(3)))
                 and s4.width <= 5e-3 and s3.width <= 5e-3)
    report(3, closed and series_ok,
           f"closed forms {'ok' if closed else 'wrong'}; series d=4 [{s4.lo:.6f}, {s4.hi:.6f}], "
           f"d=3 [{s3.lo:.6f}, {s3.hi:.6f}]", time.perf_counter() - start)


def test_acc04_catalan(report):
    start = time.perf_counter()
    h2 = entropy_periodic_lattice(Hypercubic(2), N=2048)
    h1 = entropy_periodic_lattice(Hypercubic(1), N=4096)
    target = 4 * CATALAN / math.pi
    elapsed = time.perf_counter() - start
    ok = abs(h2.value - target) <= 1e-4 and abs(h1.value) <= 1e-6 and elapsed < 20
    report(4, ok, f"h(Z^2) = {h2.value!r} vs 4G/pi = {target!r}; h(Z) = {h1.value:.2e}", elapsed)


def _free_product_223_closed_form():
    mpmath.mp.dps = 40
    r57 = mpmath.sqrt(57)
    return float(mpmath.log(61 + 9 * r57) + mpmath.log(317 - 33 * r57) / 6
                 - mpmath.mpf(7) / 2 * mpmath.log(2) - mpmath.log(7))


def test_acc05_free_products(report):
    start = time.perf_counter()
    h23 = entropy_free_product((2, 3)).value
    h333 = entropy_free_product((3, 3, 3)).value
    h223 = entropy_free_product((2, 2, 3)).value
    ref23 = math.log(2 ** (2 / 3) * 5 ** (1 / 6))
    ref223 = _free_product_223_closed_form()
    g_ok = all(abs(free_product_generating_data((s1, s2)).G1 - s1 * s2 / (s1 * s2 - s1 - s2)) <= 1e-12
               for s1, s2 in [(2, 3), (3, 3), (2, 5), (4, 7)])
    ok = (abs(h23 - ref23) <= 1e-6 and abs(h333 - math.log(16 / 3)) <= 1e-6
          and 1.190 <= h223 <= 1.191 and abs(h223 - ref223) <= 1e-6 and g_ok)
    report(5, ok, f"(2,3) {h23!r}; (3,3,3) {h333!r}; (2,2,3) {h223!r} vs {ref223!r}; "
                  f"G(1) for n=2 {'ok' if g_ok else 'wrong'}", time.perf_counter() - start)


def test_acc06_torus_convergence(report):
    start = time.perf_counter()
    target = 4 * CATALAN / math.pi
    gaps, agree = [], True
    for n in (4, 8, 16, 32):
        log_tau = log_count_spanning_trees(torus(2, n))
        agree &= abs(log_tau - _torus_log_tau_eigen(n)) <= 1e-9 * log_tau
        gaps.append(abs(log_tau / n ** 2 - target))
    elapsed = time.perf_counter() - start
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = agree and decreasing and gaps[-1] < 0.05 and elapsed < 60
    report(6, ok, f"|gap| {[f'{g:.5f}' for g in gaps]}; determinant vs spectrum "
                  f"{'agree' if agree else 'DISAGREE'}", elapsed)


def test_acc07_box_torus_stability(report):
    start = time.perf_counter()
    target = 4 * CATALAN / math.pi
    rows = []
    for n in (8, 16, 32):
        b = log_count_spanning_trees(box(2, n)) / n ** 2
        t = log_count_spanning_trees(torus(2, n)) / n ** 2
        rows.append((n, b, t))
    n, b, t = rows[-1]
    box_gaps = [abs(r[1] - target) for r in rows]
    torus_gaps = [abs(r[2] - target) for r in rows]
    converging = (all(y < x for x, y in zip(box_gaps, box_gaps[1:]))
                  and all(y < x for x, y in zip(torus_gaps, torus_gaps[1:])))
    ok = abs(b - t) < 0.1 and converging
    report(7, ok, f"n=32 box {b:.5f} torus {t:.5f} diff {abs(b - t):.5f}; box gaps "
                  f"{[f'{g:.4f}' for g in box_gaps]}", time.perf_counter() - start)


def test_acc08_random_regular(report):
    start = time.perf_counter()
    values = [log_count_spanning_trees(random_regular(2000, 3, seed=s)) / 2000 for s in range(20)]
    med = float(np.median(values))
    target = math.log(4 / math.sqrt(3))
    elapsed = time.perf_counter() - start
    report(8, abs(med - target) < 0.05 and elapsed < 120,
           f"median {med:.5f} vs log(4/sqrt 3) = {target:.5f}", elapsed)


def _random_chain(rng, n):
    while True:
        rows = []
        for _ in range(n):
            raw = [int(x) if rng.random() < 0.7 else 0 for x in rng.integers(1, 6, size=n)]
            if sum(raw) == 0:
                raw[int(rng.integers(0, n))] = 1
            total = sum(raw)
            rows.append([Fraction(x, total) for x in raw])
        try:
            return ChainMatrix.from_rows(rows)
        except ValueError:
            continue


def test_acc09_arborescence_identity(report):
    start = time.perf_counter()
    rng = np.random.default_rng(909)
    bad = 0
    for _ in range(100):
        chain = _random_chain(rng, int(rng.integers(2, 7)))
        w = arborescence_weight(chain)
        if not isinstance(w, (int, Fraction)) or w != arborescence_weight_bruteforce(chain):
            bad += 1
    swap = arborescence_log_weight(ChainMatrix.from_rows([[0, 1], [1, 0]]))
    ok = bad == 0 and swap == math.log(2)
    report(9, ok, f"100 rational chains: {bad} mismatches; swap chain log weight {swap!r}",
           time.perf_counter() - start)


def test_acc10_free_free_identity(report):
    start = time.perf_counter()
    mix = free_free_mixture(40)
    lo, hi, details = mixture_return_sum(mix, tol=5e-3)
    # mixture weights were renormalized; restore sum_{m<=40} 2^(-m-1)
    lo, hi = lo * mix.raw_total, hi * mix.raw_total
    # roots m > 40 carry mass 2^-41; each has sum_k p_k / k <= sum_k min(1, b_k) / k
    # with b_k = deg * decay bound of the lazy walk (the lazy shift log 1/2 only lowers it)
    k0 = 2000
    b = [min(1.0, 3 * decay_bound(k, c=0.5, a=0.5, finite=False)) for k in range(1, k0 + 1)]
    per_root = math.fsum(bk / k for k, bk in enumerate(b, start=1))
    per_root += 2 * 3 * decay_bound(k0, c=0.5, a=0.5, finite=False) * math.sqrt(k0 + 1) / math.sqrt(k0)
    hi += 2.0 ** -41 * per_root
    target = math.log(math.sqrt(3))
    ok = lo <= target <= hi and hi - lo <= 5e-3 + 1e-9
    # equivalently the entropy interval of the normalized mixture contains 0
    report(10, ok, f"sum in [{lo:.6f}, {hi:.6f}] vs log sqrt 3 = {target:.6f}; "
                   f"K per root up to {max(details['K'])}", time.perf_counter() - start)


def _check_decay(rng):
    n = int(rng.integers(2, 9))
    g = random_connected_graph(n, int(rng.integers(0, 2 * n)), seed=int(rng.integers(1 << 30)),
                               loops=True)
    alpha = float(rng.choice([0.5, 0.6, 0.75, 0.9]))
    walk = WalkOperator(g.to_float(), alpha)
    s = walk.symmetrized()
    s = s.toarray() if hasattr(s, "toarray") else np.asarray(s)
    evals, evecs = np.linalg.eigh(s)
    pi = np.asarray(walk.stationary, dtype=float)
    a = float(walk.a)
    c = float(walk.c)
    ks = np.arange(0, 1001)
    worst = 0.0
    for x in range(n):
        # Q^k(x, x) = sum_i v_i(x)^2 lam_i^k for the symmetrized matrix
        qkxx = (evecs[x] ** 2) @ (evals[:, None] ** ks[None, :])
        dev = np.abs(qkxx / pi[x] - 1)
        bound = np.array([decay_bound(int(k), c, a) for k in ks])
        worst = max(worst, float(np.max(dev - bound * (1 + 1e-9) - 1e-12)))
    return worst


def test_acc11_property_suites(report):
    start = time.perf_counter()
    rng = np.random.default_rng(1111)
    decay_violations = sum(_check_decay(rng) > 0 for _ in range(1000))

    mono_failures = 0
    for i in range(1000):
        n = int(rng.integers(2, 10))
        g = random_connected_graph(n, int(rng.integers(0, n)), seed=50000 + i)
        u, v = rng.choice(n, size=2, replace=False)
        if not count_spanning_trees(g.with_edges([(int(u), int(v), 1)])) > count_spanning_trees(g):
            mono_failures += 1

    loop_failures = 0
    for i in range(200):
        n = int(rng.integers(1, 10))
        g = random_connected_graph(n, int(rng.integers(0, n)), seed=60000 + i)
        looped = g.with_loops()
        if count_spanning_trees(looped) != count_spanning_trees(g):
            loop_failures += 1
        if laplacian(looped).tolist() != laplacian(g).tolist():
            loop_failures += 1

    lazy_failures = 0
    for i in range(60):
        n = int(rng.integers(2, 9))
        g = random_connected_graph(n, int(rng.integers(0, n)), seed=70000 + i)
        p = return_probabilities_finite(g, 0, 24, exact=True)
        q = return_probabilities_finite(g, Fraction(1, 3), 24, exact=True)
        if lazify_series(p, Fraction(1, 3)).per_k != q.per_k:
            lazy_failures += 1
        truth = exact_log(count_spanning_trees(g)) if n > 1 else 0.0
        for alpha in (0.5, 0.75, 0.9):
            r = series_log_tau(g, tol=1e-5, alpha=alpha, with_exact=False)
            if not r.lo - 1e-12 <= truth <= r.hi + 1e-12:
                lazy_failures += 1
    ok = decay_violations == 0 and mono_failures == 0 and loop_failures == 0 and lazy_failures == 0
    report(11, ok, f"decay violations {decay_violations}/1000; monotonicity failures "
                   f"{mono_failures}/1000; loop failures {loop_failures}; lazification "
                   f"failures {lazy_failures}", time.perf_counter() - start)
