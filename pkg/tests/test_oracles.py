from fractions import Fraction

import pytest

from arboreal.oracles import (CanopyTreeOracle, LatticeOracle, LoopedOracle, Mixture,
                              RegularTreeOracle, TruncatedRegularTreeOracle, free_free_mixture)
from arboreal.series import return_probabilities_local


def _ball(oracle, radius):
    seen, frontier = {oracle.root}, [oracle.root]
    for _ in range(radius):
        nxt = []
        for s in frontier:
            for t, _ in oracle.neighbors(s):
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return seen


@pytest.mark.parametrize("oracle", [RegularTreeOracle(3), LatticeOracle(3), CanopyTreeOracle(3),
                                    TruncatedRegularTreeOracle(4, 2),
                                    LoopedOracle(LatticeOracle(2))])
def test_weights_sum_to_degree(oracle):
    for s in _ball(oracle, 6):
        assert sum(w for _, w in oracle.neighbors(s)) == oracle.degree(s)


@pytest.mark.parametrize("oracle, expected", [
    # Z: central binomial coefficients over 2^k
    (RegularTreeOracle(2), [1, 0, Fraction(1, 2), 0, Fraction(3, 8)]),
    # Z^2: (C(k, k/2) / 2^k)^2
    (LatticeOracle(2), [1, 0, Fraction(1, 4), 0, Fraction(9, 64)]),
])
def test_lumped_return_probabilities(oracle, expected):
    got = return_probabilities_local(oracle, len(expected) - 1, exact=True).per_k
    assert list(got) == expected


def test_lattice_lumping_four_steps_z3():
    # count closed 4-step walks on Z^3 directly
    moves = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    closed = sum(1 for a in moves for b in moves for c in moves for d in moves
                 if all(x + y + z + w == 0 for x, y, z, w in zip(a, b, c, d)))
    got = return_probabilities_local(LatticeOracle(3), 4, exact=True).per_k[4]
    assert got == Fraction(closed, 6**4)


def test_canopy_leaf_root():
    o = CanopyTreeOracle(0)
    # a leaf must step to its parent and can only come back from it
    p = return_probabilities_local(o, 2, exact=True).per_k
    assert p[1] == 0 and p[2] == Fraction(1, 3)


def test_looped_oracle_holding():
    o = LoopedOracle(RegularTreeOracle(3))
    assert o.holding == Fraction(1, 2)
    assert o.degree(0) == 6


def test_mixture_normalizes():
    m = Mixture([(RegularTreeOracle(3), 2), (RegularTreeOracle(4), 6)])
    assert m.weights == (0.25, 0.75)
    assert m.expected_degree() == pytest.approx(3.75)
    with pytest.raises(ValueError):
        Mixture([(RegularTreeOracle(3), 0)])


def test_free_free_mixture_weights():
    m = free_free_mixture(3)
    assert m.raw_total == pytest.approx(1 - 2.0**-4)
    assert len(m) == 4
