import random

import pytest
from hypothesis import given, settings, strategies as st

from tourndecomp.digraph import Digraph, gen_apex, gen_regular_tournament, path_edges, random_tournament, \
    transitive_tournament, validate_decomposition
from tourndecomp.excess import excess_profile, texc
from tourndecomp.expander import InfeasibleError
from tourndecomp.pipeline import (AbsorbingSet, HeuristicFailure, Layout, PatternError, PipelineConfig,
                                  apply_paths, auxiliary_excess, build_layouts, check_partial, choose_endpoint_multiset,
                                  cleaning_lite, complete_decomposition, contract_layout, decompose, initial_state,
                                  random_nice_instance, realize_configuration, select_absorbing_sets, select_U_star)
from tourndecomp.solver import pn_exact

C3 = Digraph.cycle(3)


def test_select_u_star():
    assert select_U_star(C3) == {0}
    assert select_U_star(transitive_tournament(4)) == frozenset()
    assert len(select_U_star(gen_regular_tournament(5))) == 2
    with pytest.raises(ValueError):
        select_U_star(Digraph.complete(3))


def test_u_star_avoids_saturated_vertices():
    T = gen_apex(7)
    prof = excess_profile(T)
    for v in select_U_star(T, avoid_saturated=True):
        assert T.out_degree(v) < prof.texc


def test_absorbing_sets():
    T = transitive_tournament(8)
    assert select_absorbing_sets(T, 1, 0) == (frozenset(), AbsorbingSet())
    A9 = gen_apex(9)
    W_A, A = select_absorbing_sets(A9, 2, 100)
    assert 7 in W_A                      # v_plus of gen_apex(9)
    assert len(A.a_plus) == 2 and all(a == 7 for a, _ in A.a_plus)
    with pytest.raises(InfeasibleError):
        select_absorbing_sets(gen_regular_tournament(7), 1, 100)
    with pytest.raises(ValueError):
        select_absorbing_sets(T, 0, 1)


def test_absorbing_set_check():
    T = transitive_tournament(5)
    AbsorbingSet({(0, 1), (0, 2)}).check(T, {0}, {1, 2, 3, 4})
    with pytest.raises(ValueError):
        AbsorbingSet({(1, 0)}).check(T, {0}, {1, 2, 3, 4})
    with pytest.raises(ValueError):
        AbsorbingSet({(0, 1)}).check(T, {0}, {2, 3, 4})


def test_auxiliary_excess():
    T = transitive_tournament(6)   # excesses 5, 3, 1, -1, -3, -5
    A = AbsorbingSet({(0, 3), (0, 4)})
    s = initial_state(T, 2, frozenset({0}), A)
    assert auxiliary_excess(s, 0) == (3, 0)
    assert auxiliary_excess(s, 4) == (0, 3)
    s2 = initial_state(C3, 1)
    assert auxiliary_excess(s2, 0) == (1, 1)     # the reserved zero-excess endpoint
    assert auxiliary_excess(s2, 1) == (0, 0)


def test_check_partial_examples():
    s = initial_state(C3, 1, u_star=frozenset({0}))
    full = check_partial(s, [(0, 1, 2), (2, 0)])
    # two balanced endpoints (0 and 2) while texc - exc = 1
    assert not full.valid and not full.good
    empty = check_partial(s, [])
    assert empty.valid and empty.good and empty.consistent
    T = transitive_tournament(6)
    s = initial_state(T, 1, frozenset({0}), AbsorbingSet({(0, 3)}))
    assert not check_partial(s, [(0, 3, 5)]).consistent
    with pytest.raises(ValueError):
        check_partial(s, [(5, 0)])


def test_apply_paths():
    T = transitive_tournament(6)
    s = initial_state(T, 1)
    assert apply_paths(s, []) is s
    before = sum(sum(auxiliary_excess(s, v)) for v in range(6))
    reports = []
    s2 = apply_paths(s, [(0, 1, 5), (2, 4)], reports)
    after = sum(sum(auxiliary_excess(s2, v)) for v in range(6))
    assert before - after == 4
    assert reports and reports[0].ok()
    assert texc(s2.remaining) == texc(T) - 2
    with pytest.raises(ValueError):
        apply_paths(s2, [(1, 2), (1, 3), (1, 4)])   # vertex 1 starts more paths than its excess


def test_cleaning_identity_without_w():
    s = initial_state(transitive_tournament(5), 1)
    assert cleaning_lite(s) is s


def test_cleaning_covers_edges_inside_w():
    rng = random.Random(11)
    done = 0
    for _ in range(20):
        T = random_tournament(11, rng)
        if excess_profile(T).exc_total < 4:
            continue
        prof = excess_profile(T)
        top = sorted(range(11), key=lambda v: -abs(prof.exc[v]))[:2]
        s = initial_state(T, 1, W_star=frozenset(top), u_star=select_U_star(T, True) - set(top))
        try:
            s2 = cleaning_lite(s)
        except HeuristicFailure:
            continue
        a, b = top
        assert not s2.remaining.has_edge(a, b) and not s2.remaining.has_edge(b, a)
        assert validate_decomposition(T.without_edges(s2.remaining.edges), s2.accumulated).ok
        done += 1
    assert done >= 5


def test_endpoint_multiset():
    assert sorted(choose_endpoint_multiset({0: 2}, {1: 2})) == [(0, 1), (0, 1)]
    pairs = choose_endpoint_multiset({0: 1, 2: 1}, {1: 1, 2: 1})
    assert all(a != b for a, b in pairs)
    assert sorted(a for a, _ in pairs) == [0, 2] and sorted(b for _, b in pairs) == [1, 2]
    with pytest.raises(ValueError):
        choose_endpoint_multiset({2: 1}, {2: 1})
    with pytest.raises(ValueError):
        choose_endpoint_multiset({0: 2}, {1: 1})


@given(st.integers(0, 2 ** 20))
def test_endpoint_multiset_random(seed):
    rng = random.Random(seed)
    plus = {v: 1 for v in rng.sample(range(8), 4)}
    minus = {v: 1 for v in rng.sample(range(8), 4)}
    pairs = choose_endpoint_multiset(plus, minus, seed=seed)
    assert all(a != b for a, b in pairs)
    assert sorted(a for a, _ in pairs) == sorted(plus) and sorted(b for _, b in pairs) == sorted(minus)


def test_layout_validation():
    with pytest.raises(ValueError):
        Layout([(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        Layout([(0, 1)], fixed={(0, 1)})
    L = Layout([(0, 1, 2), (3,)], fixed={(0, 1)})
    assert L.isolated == {3} and L.out_degree(1) == 1
    assert L.is_w_exceptional({0}) and not L.is_w_exceptional({2})


def test_build_layouts():
    Ls = build_layouts(6, [(0, 1), (2, 3), (4, 5)], {5: 2, 0: 1})
    assert len(Ls) == 3
    assert sum(5 in L.isolated for L in Ls) == 2
    assert sum(0 in L.isolated for L in Ls) == 1
    for L, pair in zip(Ls, [(0, 1), (2, 3), (4, 5)]):
        assert L.paths[0] == pair
    with pytest.raises(HeuristicFailure):
        build_layouts(4, [(0, 1)], {0: 1})


def test_contract_layout():
    L = Layout([(1, 0, 2), (4, 3)], fixed={(1, 0), (0, 2)})
    C = contract_layout(L, {0})
    assert (1, 2) in C.fixed and (1, 2) in C.edges
    C2 = contract_layout(Layout([(0, 2, 3), (1,)], fixed={(0, 2)}), {0, 1})
    assert C2.paths == ((2, 3),) and not C2.fixed
    with pytest.raises(ValueError):
        contract_layout(Layout([(0, 1)]), {0})


def test_realize_configuration():
    K = Digraph.complete(5)
    conf = realize_configuration(K, Layout([(0, 4)]))
    (p,) = conf.paths
    assert p[0] == 0 and p[-1] == 4 and sorted(p) == list(range(5))
    conf = realize_configuration(K, Layout([(0, 4), (2,)]))
    assert all(2 not in e for e in conf.edges)
    T = transitive_tournament(7)
    conf = realize_configuration(T, Layout([(0, 1, 6)], fixed={(0, 1)}))
    assert (0, 1) in conf.edges
    assert realize_configuration(transitive_tournament(4), Layout([(3, 0)])) is None


def test_completion_on_complete_digraph():
    K = Digraph.complete(4)
    V = frozenset(range(4))
    with pytest.raises(PatternError):
        complete_decomposition(K, (), AbsorbingSet(), (), (), V, (), 3)
    paths = complete_decomposition(K, (), AbsorbingSet(), (), (), V, (), 4)
    assert len(paths) == 4 and validate_decomposition(K, paths).ok
    assert all(len(p) == 4 for p in paths)


def test_completion_pattern_error():
    with pytest.raises(PatternError):
        complete_decomposition(transitive_tournament(4), (), AbsorbingSet(), {0}, {3}, (), {1, 2}, 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 20), st.integers(3, 10), st.integers(1, 4))
def test_completion_random(seed, n, r):
    if 2 * r > n + 1:
        r = (n + 1) // 2
    D, W1, A, Xp, Xm, Xs, X0 = random_nice_instance(n, r, random.Random(seed))
    paths = complete_decomposition(D, W1, A, Xp, Xm, Xs, X0, r)
    assert len(paths) == r and validate_decomposition(D, paths).ok
    starts = [p[0] for p in paths]
    ends = [p[-1] for p in paths]
    assert len(set(starts)) == r and set(starts) <= set(Xp) | set(Xs)
    assert len(set(ends)) == r and set(ends) <= set(Xm) | set(Xs)
    assert all(len(p) == n for p in paths)


def test_completion_with_absorbing_edges():
    rng = random.Random(2)
    D, W1, A, Xp, Xm, Xs, X0 = random_nice_instance(8, 3, rng, absorbing=1)
    paths = complete_decomposition(D, W1, A, Xp, Xm, Xs, X0, 3)
    assert len(paths) == 3 and validate_decomposition(D, paths).ok
    (w,) = W1
    assert sum(p[0] == w for p in paths) == 1


def test_decompose_examples():
    T6 = transitive_tournament(6)
    res = decompose(T6)
    # a transitive tournament has one Hamilton path, so the layout stage hands over to the solver
    assert res.size == 9 and validate_decomposition(T6, res.paths).ok
    res = decompose(gen_apex(7))
    assert res.fallback_stage == 'exceptional' and res.size == 6 and res.optimal
    with pytest.raises(ValueError):
        decompose(C3.disjoint_union(C3).with_edges([(0, 3)]))


def test_decompose_n11_matches_solver():
    T = random_tournament(11, random.Random(4))
    res = decompose(T)
    assert validate_decomposition(T, res.paths).ok
    assert res.fallback_stage is None and res.size == texc(T)
    assert pn_exact(T).pn == res.size


def test_decompose_without_fallback_reports_stage():
    res = decompose(gen_regular_tournament(9), PipelineConfig(fallback=False))
    assert res.paths == [] and res.fallback_stage == 'exceptional'


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 20), st.integers(5, 12))
def test_pipeline_identities(seed, n):
    T = random_tournament(n, random.Random(seed))
    res = decompose(T)
    assert validate_decomposition(T, res.paths).ok
    assert res.size >= texc(T)
    assert all(rep.ok() for rep in res.identities)
    if res.fallback_stage is None:
        assert res.size == texc(T)
    for p in res.paths:
        assert len(path_edges(p)) == len(p) - 1
