import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tourndecomp.digraph import Digraph, gen_regular_tournament, path_edges, random_digraph, \
    transitive_tournament, validate_cycle_decomposition
from tourndecomp.expander import (Budget, InfeasibleError, RobustParams, SearchTimeout, expansion_failure,
                                  find_disjoint_paths, hamilton_cycle, hamilton_decomposition, hamilton_path,
                                  is_robust_outexpander, iter_hamilton_paths, join_into_spanning,
                                  meets_three_eighths, parse_rational, robust_outexpander_grid,
                                  robust_outneighbourhood, sampled_robustness)

from conftest import digraphs

C3 = Digraph.cycle(3)


def test_parse_rational():
    assert parse_rational('1/3') == Fraction(1, 3)
    assert parse_rational(2) == 2
    with pytest.raises(ValueError):
        parse_rational('one third')


def test_params_validated():
    with pytest.raises(ValueError):
        RobustParams('0', '1/3')
    with pytest.raises(ValueError):
        RobustParams('1/3', '1')


def test_robust_outneighbourhood():
    assert robust_outneighbourhood(C3, {0}, '1/3') == {1}
    assert robust_outneighbourhood(Digraph.complete(3), {0}, '1/3') == {1, 2}
    assert robust_outneighbourhood(Digraph.complete(3), {0, 1}, '2') == frozenset()


def test_expander_examples():
    assert expansion_failure(C3, RobustParams('1/3', '1/3')) == {0}
    assert is_robust_outexpander(Digraph.complete(4), RobustParams('1/4', '1/4'))
    # tau so large that no S is medium sized
    assert is_robust_outexpander(transitive_tournament(5), RobustParams('1/5', '3/5'))
    with pytest.raises(ValueError):
        is_robust_outexpander(Digraph.empty(20), RobustParams('1/4', '1/4'))


def test_grid_matches_single_checks():
    rng = random.Random(5)
    grid = [RobustParams(Fraction(a, 8), Fraction(b, 8)) for a in (1, 2) for b in (1, 2, 3)]
    for _ in range(10):
        D = random_digraph(rng.randint(3, 9), rng, p=0.6)
        assert robust_outexpander_grid(D, grid) == [is_robust_outexpander(D, p) for p in grid]


def test_three_eighths_and_sampling():
    K = Digraph.complete(8)
    assert meets_three_eighths(K, '1/8')
    assert not meets_three_eighths(transitive_tournament(8), 0)
    assert sampled_robustness(K, RobustParams('1/6', '1/6'), 6, 5, seed=1) == 1


@settings(max_examples=60, deadline=None)
@given(digraphs(max_n=7), st.data())
def test_robust_neighbourhood_is_monotone(D, data):
    S = data.draw(st.sets(st.integers(0, D.n - 1)))
    T = S | data.draw(st.sets(st.integers(0, D.n - 1)))
    nu = data.draw(st.fractions(Fraction(1, 20), 1))
    assert robust_outneighbourhood(D, S, nu) <= robust_outneighbourhood(D, T, nu)
    # larger nu only shrinks it
    assert robust_outneighbourhood(D, S, nu) <= robust_outneighbourhood(D, S, nu / 2)


@settings(max_examples=40, deadline=None)
@given(digraphs(max_n=7))
def test_expansion_is_monotone_in_parameters(D):
    p = RobustParams('1/4', '1/4')
    if is_robust_outexpander(D, p):
        assert is_robust_outexpander(D, RobustParams('1/5', '1/4'))
        assert is_robust_outexpander(D, RobustParams('1/4', '1/3'))


def test_hamilton_paths():
    assert hamilton_path(C3, 0, 2) == (0, 1, 2)
    T = transitive_tournament(6)
    assert hamilton_path(T, 0, 5) == tuple(range(6))
    assert hamilton_path(transitive_tournament(3), 2, 0) is None
    assert len(list(iter_hamilton_paths(Digraph.complete(4), 0, 3))) == 2


def test_hamilton_cycle_and_timeout():
    K = Digraph.complete(5)
    cyc = hamilton_cycle(K, first_edge=(0, 1))
    assert cyc[:2] == (0, 1) and sorted(cyc) == list(range(5))
    with pytest.raises(SearchTimeout):
        hamilton_cycle(Digraph.empty(12).with_edges([(i, j) for i in range(12) for j in range(12)
                                                      if i != j and (j - i) % 12 != 1]), budget=Budget(3))


def test_find_disjoint_paths():
    K = Digraph.complete(6)
    assert find_disjoint_paths(K, [(0, 1), (2, 3)]) == [(0, 1), (2, 3)]
    assert find_disjoint_paths(C3, [(0, 2)], max_len=2) == [(0, 1, 2)]
    with pytest.raises(InfeasibleError):
        find_disjoint_paths(C3, [(0, 2)], forbidden={1}, max_len=2)


def test_join_into_spanning():
    K = Digraph.complete(5)
    cyc = join_into_spanning(K, [(0, 1)], 'cycle')
    assert len(cyc) == 5 and (0, 1) in path_edges(list(cyc) + [cyc[0]])
    P = (0, 1, 2, 3, 4)
    assert join_into_spanning(transitive_tournament(5), [P], ('path', 0, 4)) == P
    assert join_into_spanning(C3, [(0, 1)], ('path', 0, 2)) == (0, 1, 2)


@pytest.mark.parametrize('D, k', [(C3, 1), (Digraph.complete(3), 2), (gen_regular_tournament(5), 2),
                                  (gen_regular_tournament(7), 3)])
def test_hamilton_decomposition(D, k):
    cycles = hamilton_decomposition(D)
    assert len(cycles) == k
    assert validate_cycle_decomposition(D, cycles).ok
    assert all(len(c) == D.n for c in cycles)


def test_no_hamilton_decomposition():
    two_triangles = Digraph.cycle(3).disjoint_union(Digraph.cycle(3))
    assert hamilton_decomposition(two_triangles) is None
    with pytest.raises(ValueError):
        hamilton_decomposition(transitive_tournament(4))
