import math

import numpy as np
import pytest

from arboreal.models import (EntropyEstimate, FreeProductCompletes, Hypercubic, PeriodicLattice,
                             RegularTree, entropy_continuity_probe, entropy_free_product,
                             entropy_periodic_lattice, entropy_regular_tree, entropy_series,
                             free_product_generating_data, free_product_phi, mixture_return_sum,
                             parse_model, tree_entropy)
from arboreal.oracles import (CanopyTreeOracle, FiniteGraphOracle, LatticeOracle, LoopedOracle,
                              Mixture, RegularTreeOracle, TruncatedRegularTreeOracle)
from arboreal.generators import cycle


def _two_factor_closed_form(s1, s2):
    q = s1 * s2 - s1 - s2
    return ((1 - 1 / s1) * math.log(s1 - 1) + (1 - 1 / s2) * math.log(s2 - 1)
            + (1 - 1 / s1 - 1 / s2) * math.log((s1 + s2) / q))


@pytest.mark.parametrize("d, expected", [
    (2, 0.0),
    (3, math.log(4 / math.sqrt(3))),
    (4, 3 * math.log(1.5)),
    (6, 5 * math.log(5) - 2 * math.log(24)),
])
def test_regular_tree_closed_form(d, expected):
    h = entropy_regular_tree(d)
    assert h.value == pytest.approx(expected, abs=1e-13)
    assert h.lo == h.value == h.hi


@pytest.mark.parametrize("s", [(2, 3), (3, 3), (2, 5), (3, 4), (4, 6), (2, 7)])
def test_free_product_two_factors(s):
    h = entropy_free_product(s)
    assert h.value == pytest.approx(_two_factor_closed_form(*s), abs=1e-8)
    assert h.contains(_two_factor_closed_form(*s), slack=1e-12)


def test_free_product_generating_function():
    s = (2, 3, 4)
    data = free_product_generating_data(s)
    phi = free_product_phi(s)
    # fixed point G(1) = Phi(G(1))
    assert phi(data.G1) == pytest.approx(data.G1, rel=1e-12)
    assert data.residual < 1e-10
    # degree of the looped graph: one loop per factor at every vertex
    assert data.degree == 9
    assert FreeProductCompletes(s).degree == 6


def test_free_product_two_copies_of_k2_is_rejected():
    with pytest.raises(ValueError):
        FreeProductCompletes((2, 2))
    with pytest.raises(ValueError):
        FreeProductCompletes((1, 4))


def test_free_product_with_two_factors_equals_tree():
    # K_2 * K_2 * K_2 is the 3-regular tree
    assert entropy_free_product((2, 2, 2)).value == pytest.approx(
        entropy_regular_tree(3).value, abs=1e-9)


def test_ladder_entropy():
    # Z x K_2: the symbol splits into 2 - 2 cos and 4 - 2 cos
    ladder = PeriodicLattice(1, {(0,): [[3, -1], [-1, 3]], (1,): [[-1, 0], [0, -1]],
                                 (-1,): [[-1, 0], [0, -1]]})
    h = entropy_periodic_lattice(ladder, N=4096)
    assert h.value == pytest.approx(0.5 * math.log(2 + math.sqrt(3)), abs=1e-9)


def test_square_lattice_two_routes():
    fast = entropy_periodic_lattice(Hypercubic(2), N=512)
    generic = entropy_periodic_lattice(Hypercubic(2).as_periodic(), N=512)
    assert fast.value == pytest.approx(generic.value, abs=1e-12)
    # a 2-vertex cell (columns paired) describes the same graph
    pair = PeriodicLattice(2, {
        (0, 0): [[4, -1], [-1, 4]],
        (1, 0): [[0, 0], [-1, 0]], (-1, 0): [[0, -1], [0, 0]],
        (0, 1): [[-1, 0], [0, -1]], (0, -1): [[-1, 0], [0, -1]],
    })
    assert entropy_periodic_lattice(pair, N=512).value == pytest.approx(fast.value, abs=1e-7)


def test_cubic_lattice():
    h = entropy_periodic_lattice(Hypercubic(3), N=128)
    assert h.value == pytest.approx(1.67338930, abs=1e-5)
    assert h.width < 1e-4


def test_lattice_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        PeriodicLattice(1, {(0,): [[2]], (1,): [[-1]]})
    with pytest.raises(ValueError, match="row sums"):
        PeriodicLattice(1, {(0,): [[3]], (1,): [[-1]], (-1,): [[-1]]})
    with pytest.raises(ValueError, match="even"):
        entropy_periodic_lattice(Hypercubic(2), N=33)
    with pytest.raises(ValueError, match="budget"):
        entropy_periodic_lattice(Hypercubic(3), N=1024)


@pytest.mark.parametrize("oracle, expected", [
    (RegularTreeOracle(3), math.log(4 / math.sqrt(3))),
    (RegularTreeOracle(5), 4 * math.log(4) - 1.5 * math.log(15)),
    (LatticeOracle(2), 4 * 0.915965594177219 / math.pi),
])
def test_series_entropy_brackets(oracle, expected):
    h = entropy_series(oracle, tol=2e-2)
    assert h.converged
    assert h.contains(expected)
    assert h.width <= 2e-2


def test_loop_invariance_of_entropy():
    plain = entropy_series(RegularTreeOracle(4), tol=5e-3)
    looped = entropy_series(LoopedOracle(RegularTreeOracle(4)), tol=5e-3)
    truth = 3 * math.log(1.5)
    assert plain.contains(truth) and looped.contains(truth)


def test_recurrent_line_brackets_zero():
    h = entropy_series(LatticeOracle(1), tol=5e-2)
    assert h.contains(0.0)


def test_free_free_mixture_brackets_zero():
    from arboreal.oracles import free_free_mixture
    h = entropy_series(free_free_mixture(12), tol=2e-2)
    # the 12-root truncation has mass 1 - 2^-13; its entropy is near 0
    assert h.lo - 1e-3 <= 0.0 <= h.hi + 1e-3


def test_mixture_sum_matches_components():
    a, b = RegularTreeOracle(3), RegularTreeOracle(4)
    lo, hi, details = mixture_return_sum(Mixture([(a, 1), (b, 3)]), tol=1e-2)
    ha, hb = entropy_regular_tree(3).value, entropy_regular_tree(4).value
    # sum_k p_k / k = log deg - h for each root
    expected = 0.25 * (math.log(3) - ha) + 0.75 * (math.log(4) - hb)
    assert lo <= expected <= hi
    assert len(details["K"]) == 2


def test_series_needs_infinite_graph():
    with pytest.raises(ValueError, match="infinite"):
        entropy_series(FiniteGraphOracle(cycle(5)))


def test_continuity_probe_distances_shrink():
    limit = entropy_regular_tree(3).value
    rows = entropy_continuity_probe([TruncatedRegularTreeOracle(3, d) for d in (2, 4, 8)],
                                    tol=2e-2, limit=limit)
    distances = [r["distance"] for r in rows]
    assert distances[0] > distances[1] >= distances[2]
    assert distances[2] < 1e-2


def test_canopy_oracle_degrees():
    o = CanopyTreeOracle(2)
    assert o.root_degree == 3
    assert CanopyTreeOracle(0).root_degree == 1
    # the root x_2 sees its parent x_3 and two children
    assert sorted(w for _, w in o.neighbors(o.root)) == [1, 2]


@pytest.mark.parametrize("text, model", [
    ("regular-tree:4", RegularTree(4)),
    ("free-product:2,3", FreeProductCompletes((2, 3))),
    ("hypercubic:2", Hypercubic(2)),
])
def test_parse_model(text, model):
    assert parse_model(text) == model


@pytest.mark.parametrize("text", ["regular-tree", "torus:2", "free-product:x"])
def test_parse_model_errors(text):
    with pytest.raises(ValueError):
        parse_model(text)


@pytest.mark.parametrize("model", [RegularTree(3), FreeProductCompletes((3, 3, 3)), Hypercubic(1),
                                   Hypercubic(2)])
def test_entropy_nonnegative(model):
    h = tree_entropy(model)
    assert h.hi >= 0
    assert h.value >= -1e-9


def test_estimate_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        EntropyEstimate(1.0, 1.5, 2.0, "closed-form")
    e = EntropyEstimate(np.float64(1.0), 0.5, 1.5, "series", converged=np.bool_(True))
    assert type(e.value) is float and type(e.converged) is bool
