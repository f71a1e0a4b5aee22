"""
Acceptance suite.  Every criterion prints one PASS/FAIL line and then
asserts; the tolerances below are fixed and must not be loosened.
"""

import random
import time
from fractions import Fraction

import pytest

from tourndecomp.digraph import (enumerate_tournaments, gen_apex, gen_chain_counterexample,
                                 gen_regular_tournament, random_digraph, random_tournament, tournament_from_code,
                                 transitive_tournament, validate_decomposition)
from tourndecomp.excess import excess_profile, total_excess
from tourndecomp.exceptional import APEX, GENERIC, apex_characterization, classify
from tourndecomp.expander import RobustParams, robust_outexpander_grid, robust_outneighbourhood
from tourndecomp.matching import BipartiteGraph, hall_conditions, matching_cover, max_degree, vizing_matchings
from tourndecomp.pipeline import PipelineConfig, complete_decomposition, decompose, random_nice_instance
from tourndecomp.solver import pn_exact, pn_oracle

ORACLE_RANDOM_DIGRAPHS = 500
ORACLE_MAX_EDGES = 18
ORACLE_SECONDS = 5 * 60
EVEN_SECONDS = 30 * 60
TRANSITIVE_SECONDS = 60
EXPANDER_DIGRAPHS = 200
EXPANDER_MAX_N = 12
HALL_INSTANCES = 1000
VIZING_GRAPHS = 500
VIZING_MAX_N = 40
PIPELINE_RUNS = 200
COMPLETION_INSTANCES = 100
E2E_TOURNAMENTS = 50
E2E_DIRECT_RATE = 0.6


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f'\n{"PASS" if ok else "FAIL"} criterion {number:2d} {title}: {detail}')
        assert ok, detail
    return emit


@pytest.fixture(scope='module')
def oracle_runs():
    """(digraph, pn_exact result, oracle value) for the instances of criterion 1, plus the time taken."""
    t0 = time.perf_counter()
    rng = random.Random(20240601)
    instances = list(enumerate_tournaments(5))
    while len(instances) < 1024 + ORACLE_RANDOM_DIGRAPHS:
        n = rng.randint(2, 8)
        D = random_digraph(n, rng, p=rng.uniform(0.2, 0.9), max_edges=rng.randint(8, ORACLE_MAX_EDGES))
        if D.num_edges:
            instances.append(D)
    runs = [(D, pn_exact(D), pn_oracle(D)) for D in instances]
    return runs, time.perf_counter() - t0


def test_criterion_01_oracle_equivalence(report, oracle_runs):
    runs, seconds = oracle_runs
    bad = [D for D, res, orc in runs if not res.optimal or res.pn != orc]
    assert all(D.num_edges <= ORACLE_MAX_EDGES for D, _, _ in runs)
    ok = not bad and seconds < ORACLE_SECONDS
    report(1, 'oracle equivalence', ok,
           f'{len(runs)} instances, {len(bad)} disagreements, {seconds:.1f}s (limit {ORACLE_SECONDS}s)')


def test_criterion_02_lower_bounds(report, oracle_runs):
    runs, _ = oracle_runs
    violations = 0
    regular = apex = 0
    for D, res, _ in runs:
        t = excess_profile(D).texc
        need = t
        if D.is_regular:
            regular += 1
            need = t + 1
        elif D.is_tournament and D.n >= 3 and classify(D).kind == APEX:
            apex += 1
            need = t + 1
        violations += res.pn < need
    report(2, 'unconditional lower bounds', violations == 0 and regular > 0 and apex > 0,
           f'{len(runs)} instances ({regular} regular, {apex} apex), {violations} violations')


def test_criterion_03_even_order(report):
    t0 = time.perf_counter()
    counts = {}
    bad = 0
    for n in (2, 4, 6):
        counts[n] = 0
        for T in enumerate_tournaments(n):
            res = pn_exact(T)
            counts[n] += 1
            bad += not res.optimal or res.pn != total_excess(T)
    seconds = time.perf_counter() - t0
    # exhaustive means all 2^(n choose 2) labelled tournaments: 2, 64 and 32768
    complete = all(counts[n] == 1 << (n * (n - 1) // 2) for n in counts)
    ok = bad == 0 and complete and seconds < EVEN_SECONDS
    report(3, 'even-order consistency', ok,
           f'counts {counts}, {bad} with pn != exc, {seconds:.1f}s (limit {EVEN_SECONDS}s)')


def test_criterion_04_exceptional_values(report):
    got = {}
    for n in (5, 7):
        got[f'apex{n}'] = (pn_exact(gen_apex(n)).pn, n - 1)
    for n in (3, 5, 7):
        got[f'regular{n}'] = (pn_exact(gen_regular_tournament(n)).pn, (n + 1) // 2)
    bad = {k: v for k, v in got.items() if v[0] != v[1]}
    report(4, 'exceptional values', not bad, ', '.join(f'{k} pn={a} want {b}' for k, (a, b) in got.items()))


def test_criterion_05_transitive(report):
    t0 = time.perf_counter()
    got = {n: pn_exact(transitive_tournament(n)).pn for n in range(3, 9)}
    seconds = time.perf_counter() - t0
    bad = [n for n, pn in got.items() if pn != n * n // 4]
    report(5, 'transitive tournaments', not bad and seconds < TRANSITIVE_SECONDS,
           f'pn {got}, {len(bad)} mismatches, {seconds:.1f}s (limit {TRANSITIVE_SECONDS}s)')


def test_criterion_06_characterization(report):
    checked = {}
    bad = 0
    apex = 0
    for n in (5, 7):
        total = 1 << (n * (n - 1) // 2)
        for code in range(total):
            T = tournament_from_code(n, code)
            structural = classify(T).kind == APEX
            apex += structural
            bad += structural != apex_characterization(T)
        checked[n] = total
    report(6, 'apex characterization', bad == 0,
           f'{checked} tournaments, {apex} apex, {bad} disagreements')


def test_criterion_07_expander_monotonicity(report):
    rng = random.Random(7)
    nus = [Fraction(1, 12), Fraction(1, 8), Fraction(1, 6), Fraction(1, 4)]
    taus = [Fraction(1, 8), Fraction(1, 6), Fraction(1, 4), Fraction(1, 3)]
    grid = [RobustParams(nu, tau) for nu in nus for tau in taus]
    violations = 0
    positives = 0
    rn_checks = 0
    for _ in range(EXPANDER_DIGRAPHS):
        n = rng.randint(3, EXPANDER_MAX_N)
        D = random_digraph(n, rng, p=rng.uniform(0.3, 0.95))
        ok = dict(zip([(p.nu, p.tau) for p in grid], robust_outexpander_grid(D, grid)))
        positives += sum(ok.values())
        for (nu, tau), yes in ok.items():
            if yes:
                violations += sum(1 for (nu2, tau2), yes2 in ok.items() if nu2 <= nu and tau2 >= tau and not yes2)
        for _ in range(5):
            S = {v for v in range(n) if rng.random() < 0.4}
            S2 = S | {v for v in range(n) if rng.random() < 0.3}
            nu = rng.choice(nus)
            rn_checks += 1
            violations += not robust_outneighbourhood(D, S, nu) <= robust_outneighbourhood(D, S2, nu)
    report(7, 'expander monotonicity', violations == 0 and positives > 0,
           f'{EXPANDER_DIGRAPHS} digraphs x {len(grid)} parameters ({positives} expanding), '
           f'{rn_checks} neighbourhood checks, {violations} violations')


def _hall_instance(rng):
    na = rng.randint(1, 12)
    nb = na + rng.randint(0, 8)
    A = [('a', i) for i in range(na)]
    B = [('b', j) for j in range(nb)]
    edges = set()
    for a in A:
        edges |= {(a, b) for b in rng.sample(B, rng.randint((nb + 1) // 2, nb))}
    for b in B:
        have = [a for a in A if (a, b) in edges]
        while 2 * len(have) < 2 * na - nb:
            a = rng.choice([a for a in A if a not in have])
            edges.add((a, b))
            have.append(a)
    return BipartiteGraph(A, B, edges)


def test_criterion_08_matchings(report):
    rng = random.Random(8)
    hall_bad = 0
    for _ in range(HALL_INSTANCES):
        G = _hall_instance(rng)
        assert hall_conditions(G)
        m = matching_cover(G)
        hall_bad += m is None or len(set(m.values())) != len(G.A) or any((a, b) not in G.edges
                                                                          for a, b in m.items())
    viz_bad = 0
    for _ in range(VIZING_GRAPHS):
        n = rng.randint(1, VIZING_MAX_N)
        p = rng.random()
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        ms = vizing_matchings(n, edges)
        proper = all(len({v for e in m for v in e}) == 2 * len(m) for m in ms)
        partition = sorted(e for m in ms for e in m) == sorted(edges)
        viz_bad += not (proper and partition and len(ms) <= max_degree(n, edges) + 1)
    report(8, 'matchings', hall_bad == 0 and viz_bad == 0,
           f'{HALL_INSTANCES} Hall instances ({hall_bad} uncovered), '
           f'{VIZING_GRAPHS} Vizing graphs ({viz_bad} violations)')


def test_criterion_09_bookkeeping(report):
    rng = random.Random(9)
    applications = 0
    good = 0
    violations = 0
    for k in range(PIPELINE_RUNS):
        n = rng.randint(7, 13)
        T = random_tournament(n, rng)
        # every other run also moves high-excess vertices into W so that cleaning applies paths
        cutoff = n // 4 if k % 2 else None
        try:
            res = decompose(T, PipelineConfig(excess_cutoff=cutoff, fallback=False, seed=rng.randrange(1000)))
        except AssertionError:
            violations += 1
            continue
        applications += len(res.identities)
        for rep in res.identities:
            good += rep.size_u_star is not None
            violations += not rep.ok()
    report(9, 'bookkeeping identities', violations == 0 and good > 0,
           f'{PIPELINE_RUNS} runs, {applications} partial applications ({good} good), {violations} violations')


def test_criterion_10_completion(report):
    rng = random.Random(10)
    failures = 0
    for _ in range(COMPLETION_INSTANCES):
        n = rng.randint(3, 10)
        r = rng.randint(1, min(4, (n + 1) // 2))
        D, W1, A, Xp, Xm, Xs, X0 = random_nice_instance(n, r, rng)
        try:
            paths = complete_decomposition(D, W1, A, Xp, Xm, Xs, X0, r)
        except Exception:
            failures += 1
            continue
        starts = [p[0] for p in paths]
        ends = [p[-1] for p in paths]
        ok = (len(paths) == r and validate_decomposition(D, paths).ok
              and all(sorted(p) == list(range(n)) for p in paths)
              and len(set(starts)) == r and set(starts) <= Xp | Xs
              and len(set(ends)) == r and set(ends) <= Xm | Xs)
        failures += not ok
    report(10, 'completion', failures == 0, f'{COMPLETION_INSTANCES} instances, {failures} failures')


def test_criterion_11_pipeline(report):
    rng = random.Random(11)
    invalid = 0
    generic = direct = 0
    fallback_runs = fallback_bad = 0
    unfinished = 0
    for _ in range(E2E_TOURNAMENTS):
        T = random_tournament(rng.randint(9, 13), rng)
        res = decompose(T)
        invalid += not validate_decomposition(T, res.paths).ok
        exact = pn_exact(T)
        if not exact.optimal:
            unfinished += 1
            continue
        if res.fallback_stage is None:
            direct_ok = res.size == res.texc
        else:
            direct_ok = False
            fallback_runs += 1
            fallback_bad += res.size != exact.pn
        if classify(T).kind == GENERIC:
            generic += 1
            direct += direct_ok
    rate = direct / generic if generic else 0.0
    ok = invalid == 0 and fallback_bad == 0 and rate >= E2E_DIRECT_RATE
    report(11, 'pipeline end to end', ok,
           f'{E2E_TOURNAMENTS} tournaments, {invalid} invalid, size == texc without fallback on '
           f'{direct}/{generic} generic ({rate:.0%}, target {E2E_DIRECT_RATE:.0%}), '
           f'{fallback_runs} fallbacks ({fallback_bad} != pn_exact), {unfinished} exact runs unfinished')


def test_criterion_12_counterexample(report):
    D = gen_chain_counterexample(2, 3)
    res = pn_exact(D)
    t = excess_profile(D).texc
    report(12, 'oriented counterexample', res.optimal and res.pn > t + 1,
           f'n={D.n}, texc={t}, pn_exact={res.pn} (optimal={res.optimal})')
