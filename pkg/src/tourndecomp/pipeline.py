"""
Constructive decomposition of a tournament into texc(T) paths, at desk scale.

The stages follow the asymptotic construction but every step is an explicit
search on the actual digraph:

1. absorbing edges A and the exceptional set W
2. the endpoint reserve U* (zero-excess vertices used as extra endpoints)
3. cleaning: cover every edge inside W by short paths
4. reserve the completion structure: r edge-disjoint Hamilton paths of
   D[V'] with prescribed endpoint sets X^+, X^-, X^*
5. pair up the remaining endpoints and realize one layout per pair, each a
   path through a prescribed number of vertices (backtracking search)
6. complete: the reserved structure plus A is decomposed into r paths by the
   auxiliary-vertex Hamilton decomposition, absorbing the edges of A

Every partial decomposition is checked with ``check_partial`` and applied
with ``apply_paths``, which asserts the excess bookkeeping identities.  Any
heuristic failure falls back to the exact solver.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .digraph import Digraph, Edge, Path, bits, path_edges, popcount, validate_decomposition
from .exceptional import classify, GENERIC
from .excess import excess_profile, texc, total_excess
from .expander import Budget, InfeasibleError, SearchTimeout, find_disjoint_paths, hamilton_cycle, \
    hamilton_decomposition, iter_hamilton_paths, DECOMPOSITION_CAP
from .matching import vizing_matchings
from . import solver

__all__ = [
    'AbsorbingSet', 'DecompositionState', 'Layout', 'PartialCheck', 'Configuration',
    'PipelineConfig', 'PipelineResult', 'HeuristicFailure', 'PatternError',
    'select_U_star', 'select_absorbing_sets', 'initial_state', 'auxiliary_excess',
    'check_partial', 'apply_paths', 'cleaning_lite', 'choose_endpoint_multiset',
    'build_layouts', 'contract_layout', 'realize_configuration', 'complete_decomposition',
    'decompose', 'random_nice_instance',
]


class HeuristicFailure(Exception):
    """A desk heuristic gave up; ``stage`` names where."""

    def __init__(self, stage: str, detail: str = ''):
        super().__init__(f'{stage}: {detail}' if detail else stage)
        self.stage = stage
        self.detail = detail


class PatternError(ValueError):
    """Degree/excess pattern required by the completion step does not hold."""


def _exc(D: Digraph, v: int) -> int:
    return popcount(D.out[v]) - popcount(D.inn[v])


def _mask(vs: Iterable[int]) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


# absorbing sets

@dataclass(frozen=True)
class AbsorbingSet:
    a_plus: frozenset = frozenset()
    a_minus: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'a_plus', frozenset(self.a_plus))
        object.__setattr__(self, 'a_minus', frozenset(self.a_minus))

    @property
    def edges(self) -> frozenset:
        return self.a_plus | self.a_minus

    def d_plus(self, v: int) -> int:
        """Out-degree of v in A."""
        return sum(1 for a, _ in self.edges if a == v)

    def d_minus(self, v: int) -> int:
        return sum(1 for _, b in self.edges if b == v)

    def heads_plus(self) -> frozenset:
        return frozenset(b for _, b in self.a_plus)

    def tails_minus(self) -> frozenset:
        return frozenset(a for a, _ in self.a_minus)

    def check(self, D: Digraph, W: Iterable[int], V_prime: Iterable[int]) -> None:
        W, Vp = set(W), set(V_prime)
        for edges, inside, outside, sign in ((self.a_plus, 0, 1, 1), (self.a_minus, 1, 0, -1)):
            per_w = Counter()
            per_v = Counter()
            for e in edges:
                if not D.has_edge(*e):
                    raise ValueError(f'absorbing edge {e} is not an edge')
                w, v = e[inside], e[outside]
                if w not in W or v not in Vp:
                    raise ValueError(f'absorbing edge {e} does not join W and V\'')
                per_w[w] += 1
                per_v[v] += 1
            for w, k in per_w.items():
                if k > max(0, sign * _exc(D, w)):
                    raise ValueError(f'too many absorbing edges at {w}')
            if any(k > 1 for k in per_v.values()):
                raise ValueError('two absorbing edges of one kind share a V\' vertex')

    def to_dict(self) -> dict:
        return {'a_plus': sorted(self.a_plus), 'a_minus': sorted(self.a_minus)}


def select_U_star(D: Digraph, avoid_saturated: bool = False) -> frozenset[int]:
    """
    texc - exc zero-excess vertices, by ascending id.  With
    ``avoid_saturated`` vertices of out-degree texc go last: such a vertex can
    never be an endpoint in a decomposition of size texc.
    """
    if not D.is_oriented:
        raise ValueError('endpoint reserve needs an oriented digraph')
    prof = excess_profile(D)
    need = prof.texc - prof.exc_total
    zero = sorted(prof.u_zero)
    if avoid_saturated:
        zero.sort(key=lambda v: (D.out_degree(v) >= prof.texc, v))
    assert len(zero) >= need, 'fewer zero-excess vertices than texc - exc'
    return frozenset(zero[:need])


def select_absorbing_sets(T: Digraph, r: int, threshold: int) -> tuple[frozenset, AbsorbingSet]:
    """
    For each sign with N^sign(T) < threshold pick the fewest high-excess
    vertices W_A^sign with total excess >= r and r absorbing edges at them.
    """
    if r < 1:
        raise ValueError('r must be positive')
    prof = excess_profile(T)
    chosen: dict[int, list[int]] = {1: [], -1: []}
    for sign, n_sign, u_set in ((1, prof.n_plus, prof.u_plus), (-1, prof.n_minus, prof.u_minus)):
        if n_sign >= threshold:
            continue
        ranked = sorted(u_set, key=lambda v: (-abs(prof.exc[v]), v))
        total, pick = 0, []
        for v in ranked:
            if total >= r:
                break
            pick.append(v)
            total += abs(prof.exc[v])
        if total < r:
            raise InfeasibleError(f'excess on side {sign:+d} is below r={r}')
        chosen[sign] = pick
    W_A = frozenset(chosen[1]) | frozenset(chosen[-1])
    rest = [v for v in range(T.n) if v not in W_A]
    a_plus, a_minus = [], []
    heads = set()
    for w in chosen[1]:
        cap = prof.exc_plus[w]
        for v in rest:
            if len(a_plus) == r or cap == 0:
                break
            if T.has_edge(w, v) and v not in heads:
                a_plus.append((w, v))
                heads.add(v)
                cap -= 1
    tails = set()
    for w in chosen[-1]:
        cap = prof.exc_minus[w]
        # prefer tails that are not already heads of starting edges
        for v in sorted(rest, key=lambda x: (x in heads, x)):
            if len(a_minus) == r or cap == 0:
                break
            if T.has_edge(v, w) and v not in tails:
                a_minus.append((v, w))
                tails.add(v)
                cap -= 1
    if chosen[1] and len(a_plus) < r or chosen[-1] and len(a_minus) < r:
        raise InfeasibleError('not enough distinct absorbing edges')
    A = AbsorbingSet(frozenset(a_plus), frozenset(a_minus))
    A.check(T, W_A, rest)
    return W_A, A


# state and bookkeeping

@dataclass(frozen=True)
class DecompositionState:
    original: Digraph
    remaining: Digraph
    W: frozenset
    W_star: frozenset
    W_zero: frozenset
    W_A: frozenset
    A: AbsorbingSet
    u_star: frozenset
    r: int
    accumulated: tuple = ()
    used_plus: tuple = ()
    used_minus: tuple = ()

    @property
    def V_prime(self) -> frozenset:
        return frozenset(range(self.original.n)) - self.W


def initial_state(T: Digraph, r: int, W_A: frozenset = frozenset(), A: AbsorbingSet = AbsorbingSet(),
                  W_star: frozenset = frozenset(), u_star: Optional[frozenset] = None) -> DecompositionState:
    W = frozenset(W_A) | frozenset(W_star)
    if u_star is None:
        u_star = select_U_star(T)
    zeros = (0,) * T.n
    return DecompositionState(T, T, W, frozenset(W_star), W - W_star - W_A, frozenset(W_A), A,
                              frozenset(u_star), r, (), zeros, zeros)


def auxiliary_excess(state: DecompositionState, v: int) -> tuple[int, int]:
    if v in state.u_star:
        return 1, 1
    e = _exc(state.remaining, v)
    plus, minus = max(0, e), max(0, -e)
    if v in state.W:
        plus -= state.A.d_plus(v)
        minus -= state.A.d_minus(v)
    return plus, minus


def _aux_vectors(state: DecompositionState) -> tuple[list[int], list[int]]:
    pairs = [auxiliary_excess(state, v) for v in range(state.original.n)]
    return [p for p, _ in pairs], [m for _, m in pairs]


def _n_plus_minus(D: Digraph) -> tuple[int, int]:
    prof = excess_profile(D)
    return prof.n_plus, prof.n_minus


@dataclass(frozen=True)
class PartialCheck:
    valid: bool
    good: bool
    consistent: bool
    special: bool
    detail: str = ''

    def to_dict(self) -> dict:
        return {'valid': self.valid, 'good': self.good, 'consistent': self.consistent,
                'special': self.special, 'detail': self.detail}


def _endpoint_counts(n: int, P: Sequence[Sequence[int]]) -> tuple[list[int], list[int]]:
    starts, ends = [0] * n, [0] * n
    for p in P:
        starts[p[0]] += 1
        ends[p[-1]] += 1
    return starts, ends


def check_partial(state: DecompositionState, P: Sequence[Sequence[int]]) -> PartialCheck:
    """
    Diagnostic flags for a set P of edge-disjoint paths of state.remaining:
    valid (per-vertex excess caps, zero-excess vertices used at most once
    each way and by at most texc - exc of them), consistent (avoids A and
    respects the caps at W), special (within the auxiliary excess, so that
    the bookkeeping identities apply) and good (texc drops by exactly |P|).
    """
    D = state.remaining
    n = D.n
    used = set()
    for p in P:
        if len(p) < 2:
            raise ValueError('partial decompositions use non-trivial paths only')
        for e in path_edges(p):
            if not D.has_edge(*e) or e in used:
                raise ValueError(f'edge {e} is not available in the remaining digraph')
            used.add(e)
        if len(set(p)) != len(p):
            raise ValueError(f'{p} repeats a vertex')
    starts, ends = _endpoint_counts(n, P)
    prof = excess_profile(D)
    problems = []
    for v in range(n):
        if v in prof.u_zero:
            if starts[v] > 1 or ends[v] > 1:
                problems.append(f'zero-excess vertex {v} used twice')
        elif starts[v] > prof.exc_plus[v] or ends[v] > prof.exc_minus[v]:
            problems.append(f'vertex {v} exceeds its excess')
    zero_used = [v for v in prof.u_zero if starts[v] or ends[v]]
    if len(zero_used) > prof.texc - prof.exc_total:
        problems.append(f'{len(zero_used)} zero-excess endpoints exceed texc - exc')
    valid = not problems
    consistent = not (used & state.A.edges)
    for w in state.W:
        if starts[w] > max(0, _exc(D, w)) - state.A.d_plus(w) or \
                ends[w] > max(0, -_exc(D, w)) - state.A.d_minus(w):
            consistent = False
    aux_p, aux_m = _aux_vectors(state)
    special = consistent and all(starts[v] <= aux_p[v] and ends[v] <= aux_m[v] for v in range(n))
    after = D.without_edges(used)
    good = texc(after) == prof.texc - len(P)
    detail = '; '.join(problems)
    if not consistent:
        detail = (detail + '; ' if detail else '') + 'touches A or overuses W'
    return PartialCheck(valid, good, consistent, special, detail)


@dataclass(frozen=True)
class IdentityReport:
    exc_drop: bool
    texcv: bool
    special_sum: bool
    size_u_star: Optional[bool]
    texc_a: Optional[bool]
    n_texc: Optional[bool]

    def ok(self) -> bool:
        return all(x is not False for x in (self.exc_drop, self.texcv, self.special_sum,
                                            self.size_u_star, self.texc_a, self.n_texc))


def bookkeeping_report(state: DecompositionState, P: Sequence[Sequence[int]],
                       new: DecompositionState, good: bool) -> IdentityReport:
    D, D2 = state.remaining, new.remaining
    n = D.n
    starts, ends = _endpoint_counts(n, P)
    prof = excess_profile(D)
    prof2 = excess_profile(D2)
    zero_ends = sum(1 for v in prof.u_zero if starts[v] or ends[v])
    exc_drop = prof2.exc_total == prof.exc_total - len(P) + zero_ends
    aux_p, aux_m = _aux_vectors(state)
    aux2_p, aux2_m = _aux_vectors(new)
    texcv = all(aux2_p[v] == aux_p[v] - starts[v] and aux2_m[v] == aux_m[v] - ends[v]
                for v in range(n))
    special_sum = sum(aux2_p) == sum(aux_p) - len(P) and sum(aux2_m) == sum(aux_m) - len(P)
    size_u = texc_a = n_texc = None
    if good:
        size_u = len(new.u_star) == prof2.texc - prof2.exc_total and new.u_star <= prof2.u_zero
        texc_a = sum(aux2_p) == prof2.texc - len(new.A.a_plus) and \
            sum(aux2_m) == prof2.texc - len(new.A.a_minus)
        x_plus = sum(1 for v in range(n) if aux_p[v] > 0 and starts[v] == aux_p[v])
        x_minus = sum(1 for v in range(n) if aux_m[v] > 0 and ends[v] == aux_m[v])
        n_texc = prof.n_plus - prof2.n_plus <= x_plus and prof.n_minus - prof2.n_minus <= x_minus
    return IdentityReport(exc_drop, texcv, special_sum, size_u, texc_a, n_texc)


def apply_paths(state: DecompositionState, P: Sequence[Sequence[int]],
                reports: Optional[list] = None) -> DecompositionState:
    """Remove P from the remaining digraph; asserts the bookkeeping identities."""
    if not P:
        return state
    chk = check_partial(state, P)
    if not (chk.valid and chk.consistent and chk.special):
        raise ValueError(f'not an admissible partial decomposition: {chk.detail or "exceeds auxiliary excess"}')
    n = state.original.n
    starts, ends = _endpoint_counts(n, P)
    used = [e for p in P for e in path_edges(p)]
    endpoints = {p[0] for p in P} | {p[-1] for p in P}
    new = replace(state,
                  remaining=state.remaining.without_edges(used),
                  u_star=state.u_star - endpoints,
                  accumulated=state.accumulated + tuple(tuple(p) for p in P),
                  used_plus=tuple(a + b for a, b in zip(state.used_plus, starts)),
                  used_minus=tuple(a + b for a, b in zip(state.used_minus, ends)))
    rep = bookkeeping_report(state, P, new, chk.good)
    if reports is not None:
        reports.append(rep)
    assert rep.ok(), f'bookkeeping identity failed: {rep}'
    return new


# cleaning

def _edges_inside(D: Digraph, S: frozenset, skip: frozenset = frozenset()) -> list[Edge]:
    m = _mask(S)
    return [(u, v) for u in sorted(S) for v in bits(D.out[u] & m) if (u, v) not in skip]


def _short_cover(state: DecompositionState, e: Edge, budget: Budget) -> Optional[Path]:
    """A short path through edge e whose ends have positive auxiliary excess."""
    D = state.remaining.without_edges(state.A.edges)
    aux_p, aux_m = _aux_vectors(state)
    a, b = e
    starts = sorted((v for v in range(D.n) if aux_p[v] > 0), key=lambda v: (v != a, v))
    ends = sorted((v for v in range(D.n) if aux_m[v] > 0), key=lambda v: (v != b, v))
    for s in starts:
        for t in ends:
            budget.spend()
            if s == t:
                continue
            try:
                head = [(s,)] if s == a else find_disjoint_paths(D.without_edges([e]), [(s, a)],
                                                                forbidden=[b, t] if t != b else [b],
                                                                max_len=3)
                if s != a and (t in head[0] or b in head[0]):
                    continue
                block = set(head[0])
                if t == b:
                    tail = [(b,)]
                else:
                    tail = find_disjoint_paths(D.without_edges([e]), [(b, t)],
                                               forbidden=[v for v in block if v != t], max_len=3)
            except (InfeasibleError, ValueError):
                continue
            path = tuple(head[0]) + tuple(tail[0])
            if len(set(path)) != len(path):
                continue
            chk = check_partial(state, [path])
            if chk.special and chk.good:
                return path
    return None


def cleaning_lite(state: DecompositionState, budget: Optional[Budget] = None,
                  w_cap: Optional[int] = None) -> DecompositionState:
    """
    Remove every edge inside W with good partial paths.  Edges inside W_0 are
    first grouped into matchings (Vizing) and each matching is threaded into
    one long path; whatever is left is covered edge by edge with short paths.
    """
    budget = budget or Budget(10 ** 5)
    n = state.original.n
    if w_cap is None:
        w_cap = max(2, n // 8)
    if not state.W:
        return state
    if len(state.W) > w_cap:
        raise HeuristicFailure('cleaning', f'|W|={len(state.W)} exceeds the cap {w_cap}')
    if state.W_zero:
        inner = _edges_inside(state.remaining, state.W_zero, state.A.edges)
        for M in vizing_matchings(n, inner) if inner else []:
            halves = [M[0::2], M[1::2]]
            for half in halves:
                if not half:
                    continue
                path = _thread_matching(state, half, budget)
                if path is not None:
                    state = apply_paths(state, [path])
    for e in _edges_inside(state.remaining, state.W, state.A.edges):
        if not state.remaining.has_edge(*e):
            continue
        path = _short_cover(state, e, budget)
        if path is None:
            raise HeuristicFailure('cleaning', f'no good short path through {e}')
        state = apply_paths(state, [path])
    if _edges_inside(state.remaining, state.W, state.A.edges):
        raise HeuristicFailure('cleaning', 'edges inside W remain')
    return state


def _thread_matching(state: DecompositionState, M: Sequence[Edge], budget: Budget) -> Optional[Path]:
    """One path containing all edges of M, from a positive to a negative auxiliary-excess vertex."""
    from .expander import join_into_spanning
    D = state.remaining.without_edges(state.A.edges)
    aux_p, aux_m = _aux_vectors(state)
    touched = {v for e in M for v in e}
    for s in (v for v in range(D.n) if aux_p[v] > 0 and v not in touched):
        for t in (v for v in range(D.n) if aux_m[v] > 0 and v not in touched and v != s):
            avoid = [v for v in range(D.n) if v not in touched and v not in (s, t)]
            try:
                path = join_into_spanning(D, [list(e) for e in M], ('path', s, t), avoid=avoid,
                                          budget=budget)
            except SearchTimeout:
                return None
            if path is not None:
                chk = check_partial(state, [path])
                if chk.special and chk.good:
                    return path
    return None


# endpoints and layouts

def choose_endpoint_multiset(plus: Mapping[int, int], minus: Mapping[int, int],
                             seed: Optional[int] = None) -> list[tuple[int, int]]:
    """
    Pair starting points with ending points: v is a first coordinate
    plus[v] times and a second coordinate minus[v] times, and no pair is a
    loop.  A vertex appearing on both sides at most once each can always be
    swapped out of a loop once there are two pairs.
    """
    S = sorted(v for v, k in plus.items() for _ in range(k))
    E = sorted(v for v, k in minus.items() for _ in range(k))
    if len(S) != len(E):
        raise ValueError(f'{len(S)} starting points but {len(E)} ending points')
    if len(S) == 1:
        raise ValueError('a single endpoint pair is not supported')
    if seed is not None:
        rng = random.Random(seed)
        rng.shuffle(S)
        rng.shuffle(E)
    pairs = [list(p) for p in zip(S, E)]
    for i, (a, b) in enumerate(pairs):
        if a != b:
            continue
        for j, (c, d) in enumerate(pairs):
            if j != i and c != b and a != d:
                pairs[i][1], pairs[j][1] = d, b
                break
        else:
            raise ValueError(f'cannot avoid the loop at {a}')
    return [tuple(p) for p in pairs]


@dataclass(frozen=True)
class Layout:
    """Paths (vertex tuples, possibly single vertices) on V plus a set of fixed edges."""
    paths: tuple
    fixed: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'paths', tuple(tuple(p) for p in self.paths))
        object.__setattr__(self, 'fixed', frozenset(self.fixed))
        seen = set()
        for p in self.paths:
            if not p or len(set(p)) != len(p):
                raise ValueError(f'bad layout path {p}')
            if seen & set(p):
                raise ValueError('layout paths must be vertex-disjoint')
            seen |= set(p)
        if not self.fixed <= set(self.edges):
            raise ValueError('fixed edges must be layout edges')
        if not set(self.edges) - self.fixed:
            raise ValueError('a layout needs an unfixed edge')

    @property
    def edges(self) -> list[Edge]:
        return [e for p in self.paths for e in path_edges(p)]

    @property
    def vertices(self) -> frozenset:
        return frozenset(v for p in self.paths for v in p)

    @property
    def isolated(self) -> frozenset:
        return frozenset(p[0] for p in self.paths if len(p) == 1)

    def out_degree(self, v: int) -> int:
        return sum(1 for a, _ in self.edges if a == v)

    def in_degree(self, v: int) -> int:
        return sum(1 for _, b in self.edges if b == v)

    def is_w_exceptional(self, W: Iterable[int]) -> bool:
        W = set(W)
        return all(e in self.fixed for e in self.edges if e[0] in W or e[1] in W)

    def to_dict(self) -> dict:
        return {'paths': [list(p) for p in self.paths], 'fixed': sorted(self.fixed)}


def build_layouts(n: int, pairs: Sequence[tuple[int, int]], isolated_quota: Mapping[int, int]) -> list[Layout]:
    """
    One layout per endpoint pair: the single edge v+ v- plus isolated
    vertices.  Vertex v is isolated in exactly isolated_quota[v] layouts,
    spread so that the layouts stay about the same size.
    """
    ell = len(pairs)
    iso_sets: list[set] = [set() for _ in range(ell)]
    for v in sorted(range(n), key=lambda x: (-isolated_quota.get(x, 0), x)):
        k = isolated_quota.get(v, 0)
        if k == 0:
            continue
        slots = [j for j in range(ell) if v not in pairs[j]]
        if len(slots) < k:
            raise HeuristicFailure('layouts', f'vertex {v} cannot be isolated {k} times')
        slots.sort(key=lambda j: (len(iso_sets[j]), j))
        for j in slots[:k]:
            iso_sets[j].add(v)
    return [Layout([pairs[j]] + [(v,) for v in sorted(iso_sets[j])]) for j in range(ell)]


def contract_layout(L: Layout, W: Iterable[int]) -> Layout:
    """
    Contract a W-exceptional layout onto V - W: maximal runs through W
    between two outside vertices become a fixed edge, runs reaching the end
    of a path inside W are dropped, W vertices disappear.
    """
    W = set(W)
    if not L.is_w_exceptional(W):
        raise ValueError('layout is not W-exceptional')
    paths = []
    fixed = set()
    for p in L.paths:
        pieces: list[list[int]] = [[]]
        fixed_marks: list[list[bool]] = [[]]
        i = 0
        while i < len(p):
            v = p[i]
            if v in W:
                i += 1
                continue
            cur = pieces[-1]
            if cur and i > 0:
                prev = p[i - 1]
                if prev in W:
                    # the run through W started right after cur[-1] only if it did not hit the path start
                    j = i - 1
                    while j >= 0 and p[j] in W:
                        j -= 1
                    if j >= 0 and p[j] == cur[-1]:
                        cur.append(v)
                        fixed_marks[-1].append(True)
                    else:
                        pieces.append([v])
                        fixed_marks.append([])
                else:
                    cur.append(v)
                    fixed_marks[-1].append((prev, v) in L.fixed)
            elif cur:
                pieces.append([v])
                fixed_marks.append([])
            else:
                cur.append(v)
            i += 1
        for piece, marks in zip(pieces, fixed_marks):
            if not piece:
                continue
            paths.append(tuple(piece))
            for e, f in zip(path_edges(piece), marks):
                if f:
                    fixed.add(e)
    return _loose_layout(paths, fixed)


def _loose_layout(paths, fixed) -> Layout:
    # a contracted layout may have every edge fixed; skip the (L3) check there
    obj = object.__new__(Layout)
    object.__setattr__(obj, 'paths', tuple(tuple(p) for p in paths))
    object.__setattr__(obj, 'fixed', frozenset(fixed))
    return obj


@dataclass(frozen=True)
class Configuration:
    edges: tuple
    paths: tuple


def realize_configuration(D: Digraph, layout: Layout, budget: Optional[Budget] = None,
                          avoid: Iterable[int] = ()) -> Optional[Configuration]:
    """
    Spanning configuration of shape (L, F) in D - avoid: fixed edges are kept,
    every unfixed edge but one becomes a short path through new vertices, and
    the remaining unfixed edge yz becomes a (y,z)-path through all leftover
    vertices, found as a Hamilton cycle through the merge of y and z.
    """
    budget = budget or Budget()
    avoid = set(avoid)
    for e in layout.fixed:
        if not D.has_edge(*e):
            raise ValueError(f'fixed edge {e} is not in D')
    VL = layout.vertices
    pool = [v for v in range(D.n) if v not in VL and v not in avoid]
    unfixed = sorted(set(layout.edges) - layout.fixed)
    y, z = unfixed[0]
    others = [e for e in layout.edges if e not in layout.fixed and e != (y, z)]
    H = D.without_edges(layout.fixed)
    try:
        short = find_disjoint_paths(H, others, forbidden=[v for v in range(D.n) if v not in pool
                                                           and not any(v in e for e in others)],
                                    max_len=3) if others else []
    except InfeasibleError:
        return None
    replaced = dict(zip(others, short))
    used_inner = {v for p in short for v in p[1:-1]}
    used_edges = {e for p in short for e in path_edges(p)}
    left = [v for v in pool if v not in used_inner]
    H = H.without_edges(used_edges)
    if not left:
        if not H.has_edge(y, z):
            return None
        long = (y, z)
    else:
        idx = {v: i for i, v in enumerate(left)}
        m = len(left)
        edges = [(idx[a], idx[b]) for a, b in H.edges if a in idx and b in idx]
        edges += [(m, idx[b]) for b in bits(H.out[y]) if b in idx]
        edges += [(idx[a], m) for a in bits(H.inn[z]) if a in idx]
        M = Digraph.from_edges(m + 1, edges)
        cyc = hamilton_cycle(M, budget=budget, first_edge=None)
        if cyc is None:
            return None
        k = cyc.index(m)
        order = cyc[k + 1:] + cyc[:k]
        long = (y,) + tuple(left[i] for i in order) + (z,)
    replaced[(y, z)] = long
    paths = []
    for p in layout.paths:
        if len(p) == 1:
            paths.append(p)
            continue
        seq = [p[0]]
        for e in path_edges(p):
            seq.extend(replaced.get(e, e)[1:])
        paths.append(tuple(seq))
    conf_edges = tuple(e for p in paths for e in path_edges(p))
    _check_layout_degrees(D.n, layout, conf_edges, avoid)
    return Configuration(conf_edges, tuple(paths))


def _check_layout_degrees(n: int, layout: Layout, conf_edges: Sequence[Edge], avoid: set) -> None:
    out, inn = Counter(a for a, _ in conf_edges), Counter(b for _, b in conf_edges)
    VL = layout.vertices
    for v in range(n):
        if v in avoid:
            continue
        extra = 0 if v in VL else 1
        assert out[v] == layout.out_degree(v) + extra and inn[v] == layout.in_degree(v) + extra, \
            f'configuration degree mismatch at {v}'


# completion

def _y_sets(A: AbsorbingSet, Xp, Xm, Xs, X0):
    vap = A.heads_plus()
    vam = A.tails_minus()
    Yp = (set(Xp) | (vap & set(X0))) - vam
    Ym = (set(Xm) | (vam & set(X0))) - vap
    Ys = set(Xs) | (vap & vam) | (set(Xp) & vam) | (set(Xm) & vap)
    Y0 = set(X0) - vap - vam
    return Yp, Ym, Ys, Y0


def _check_pattern(D: Digraph, W1, A: AbsorbingSet, Xp, Xm, Xs, X0, r: int) -> None:
    parts = [set(W1), set(Xp), set(Xm), set(Xs), set(X0)]
    allv = set().union(*parts)
    if sum(len(p) for p in parts) != len(allv) or allv != set(range(D.n)):
        raise PatternError('W1, X+, X-, X*, X0 must partition the vertex set')
    Vp = allv - set(W1)
    try:
        A.check(D, W1, Vp)
    except ValueError as exc:
        raise PatternError(str(exc)) from exc
    if len(set(Xp) | set(Xs)) + len(A.a_plus) != r or len(set(Xm) | set(Xs)) + len(A.a_minus) != r:
        raise PatternError('|X^+- u X*| + |A^+-| must equal r')
    if not (A.heads_plus() & Vp) <= set(Xm) | set(X0) or not (A.tails_minus() & Vp) <= set(Xp) | set(X0):
        raise PatternError('absorbing edges meet V\' outside X^-+ u X^0')
    for v in range(D.n):
        e, d = _exc(D, v), D.degree(v)
        if v in W1:
            want = (A.d_plus(v) - A.d_minus(v), A.d_plus(v) + A.d_minus(v))
        elif v in Xp:
            want = (1, 2 * r - 1)
        elif v in Xm:
            want = (-1, 2 * r - 1)
        elif v in Xs:
            want = (0, 2 * r - 2)
        else:
            want = (0, 2 * r)
        if (e, d) != want:
            raise PatternError(f'vertex {v} has (exc, degree)={(e, d)}, expected {want}')


def complete_decomposition(D: Digraph, W1: Iterable[int], A: AbsorbingSet, X_plus: Iterable[int],
                           X_minus: Iterable[int], X_star: Iterable[int], X_zero: Iterable[int], r: int,
                           budget: Optional[Budget] = None) -> list[Path]:
    """
    Decompose D into r paths when D[V'] has the near-regular pattern and all
    edges at W1 are absorbing edges: add an auxiliary vertex joined to the
    spare endpoints, split the resulting r-regular digraph into Hamilton
    cycles, cut them at the auxiliary vertex and extend by the edges of A.
    """
    W1, Xp, Xm, Xs, X0 = (frozenset(x) for x in (W1, X_plus, X_minus, X_star, X_zero))
    _check_pattern(D, W1, A, Xp, Xm, Xs, X0, r)
    Yp, Ym, Ys, _ = _y_sets(A, Xp, Xm, Xs, X0)
    Vp = sorted(Xp | Xm | Xs | X0)
    idx = {v: i for i, v in enumerate(Vp)}
    m = len(Vp)
    edges = [(idx[a], idx[b]) for a, b in D.edges if a in idx and b in idx]
    edges += [(m, idx[v]) for v in sorted(Yp | Ys)]
    edges += [(idx[v], m) for v in sorted(Ym | Ys)]
    aux = Digraph.from_edges(m + 1, edges)
    if aux.regularity != r:
        raise PatternError('auxiliary digraph is not r-regular')
    try:
        cycles = hamilton_decomposition(aux, budget=budget, cap=max(DECOMPOSITION_CAP, m + 1))
    except SearchTimeout as exc:
        raise HeuristicFailure('completion', 'Hamilton decomposition budget exhausted') from exc
    if cycles is None:
        raise HeuristicFailure('completion', 'no Hamilton decomposition')
    absorb_in = {b: a for a, b in A.a_plus}
    absorb_out = {a: b for a, b in A.a_minus}
    paths = []
    for cyc in cycles:
        k = cyc.index(m)
        seq = [Vp[i] for i in cyc[k + 1:] + cyc[:k]]
        if seq[0] in absorb_in:
            seq.insert(0, absorb_in[seq[0]])
        if seq[-1] in absorb_out:
            seq.append(absorb_out[seq[-1]])
        paths.append(tuple(seq))
    report = validate_decomposition(D, paths)
    assert report.ok, report.detail
    return paths


def random_nice_instance(n: int, r: int, rng: random.Random, absorbing: int = 0):
    """
    A digraph with the completion pattern: r edge-disjoint Hamilton cycles on
    n + 1 vertices with the last vertex z deleted.  With ``absorbing`` > 0 a
    new vertex w gets that many starting edges into X^+ (which then act as
    absorbing edges, turning their heads into X^0 vertices).
    Returns (D, W1, A, X+, X-, X*, X0).
    """
    if r < 1 or n < 2 or 2 * r > n + 1:
        raise ValueError('need 1 <= r <= (n + 1)/2')
    m = n + 1
    for _ in range(100):
        used: set = set()
        for _ in range(r):
            perm = list(range(m))
            rng.shuffle(perm)
            K = Digraph.from_edges(m, [(perm[a], perm[b]) for a in range(m) for b in range(m)
                                       if a != b and (a, b) not in used])
            cyc = hamilton_cycle(K, budget=Budget(10 ** 5))
            if cyc is None:
                break
            back = [perm.index(v) for v in cyc]
            used |= set(zip(back, back[1:] + back[:1]))
        else:
            break
    else:
        raise ValueError('could not find disjoint Hamilton cycles')
    z = n
    D = Digraph.from_edges(n, [(a, b) for a, b in used if z not in (a, b)])
    Np = {b for a, b in used if a == z}
    Nm = {a for a, b in used if b == z}
    Xp, Xm, Xs = Np - Nm, Nm - Np, Np & Nm
    X0 = set(range(n)) - Np - Nm
    if not absorbing:
        return D, frozenset(), AbsorbingSet(), Xp, Xm, Xs, X0
    k = min(absorbing, len(Xp))
    heads = sorted(Xp)[:k]
    w = n
    D2 = Digraph.from_edges(n + 1, list(D.edges) + [(w, v) for v in heads])
    A = AbsorbingSet(frozenset((w, v) for v in heads))
    return D2, frozenset({w}), A, Xp - set(heads), Xm, Xs, X0 | set(heads)


# realization search

def _layout_paths(out: list[int], inn: list[int], y: int, z: int, may: int, must: int, prefer: list[float],
                  budget: Budget) -> Iterator[list[int]]:
    """Simple (y,z)-paths with interior inside ``may`` and containing ``must``."""
    zb = 1 << z
    path = [y]

    def rec(u: int, avail: int, need: int) -> Iterator[list[int]]:
        budget.spend()
        reach = avail | (1 << u)
        if not inn[z] & reach:
            return
        for m in bits(need):
            mb = 1 << m
            if not inn[m] & reach & ~mb or not out[m] & ((avail & ~mb) | zb):
                return
        cand = [w for w in bits(out[u] & avail)]
        cand.sort(key=lambda w: (not need >> w & 1, -prefer[w], w))
        stop_here = not need and out[u] & zb
        yielded_stop = False
        for w in cand:
            if stop_here and not yielded_stop and not need >> w & 1 and prefer[w] < 0.5:
                yielded_stop = True
                yield path + [z]
            path.append(w)
            yield from rec(w, avail & ~(1 << w), need & ~(1 << w))
            path.pop()
        if stop_here and not yielded_stop:
            yield path + [z]

    yield from rec(y, may & ~(1 << y) & ~zb, must)


def _realize_layouts(R: Digraph, pairs: list[tuple[int, int]], free: list[int], iso: list[int],
                     budget: Budget) -> Optional[list[Path]]:
    n = R.n
    out, inn = list(R.out), list(R.inn)
    free, iso = list(free), list(iso)
    ell = len(pairs)
    result: list[Path] = []

    def rec(j: int) -> bool:
        if j == ell:
            return not any(out)
        y, z = pairs[j]
        may = must = 0
        prefer = [0.0] * n
        for v in range(n):
            if v == y or v == z:
                continue
            k = free[v] + iso[v]
            if free[v]:
                may |= 1 << v
                prefer[v] = free[v] / k
                if not iso[v]:
                    must |= 1 << v
        for p in _layout_paths(out, inn, y, z, may, must, prefer, budget):
            inner = _mask(p[1:-1])
            es = path_edges(p)
            for a, b in es:
                out[a] &= ~(1 << b)
                inn[b] &= ~(1 << a)
            for v in range(n):
                if v != y and v != z:
                    if inner >> v & 1:
                        free[v] -= 1
                    else:
                        iso[v] -= 1
            result.append(tuple(p))
            if rec(j + 1):
                return True
            result.pop()
            for v in range(n):
                if v != y and v != z:
                    if inner >> v & 1:
                        free[v] += 1
                    else:
                        iso[v] += 1
            for a, b in es:
                out[a] |= 1 << b
                inn[b] |= 1 << a
        return False

    return result if rec(0) else None


# orchestration

@dataclass
class PipelineConfig:
    r: Optional[int] = None
    threshold: Optional[int] = None
    excess_cutoff: Optional[int] = None
    w_cap: Optional[int] = None
    budget: int = 200_000
    attempts: int = 12
    seed: int = 0
    fallback: bool = True
    fallback_budget: int = solver.DEFAULT_BUDGET

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PipelineResult:
    paths: list
    texc: int
    fallback_stage: Optional[str]
    optimal: Optional[bool]
    trace: list = field(default_factory=list)
    identities: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.paths)

    def to_dict(self) -> dict:
        return {'size': self.size, 'texc': self.texc, 'fallback_stage': self.fallback_stage,
                'optimal': self.optimal, 'paths': [list(p) for p in self.paths], 'trace': self.trace}


def _completion_choices(state: DecompositionState, rng: random.Random, limit: int):
    """Candidate (X+, X-) of size r - |A^+-| among spare endpoints in V'."""
    r = state.r
    aux_p, aux_m = _aux_vectors(state)
    Vp = state.V_prime
    ap, am = state.A.heads_plus(), state.A.tails_minus()
    kp, km = r - len(state.A.a_plus), r - len(state.A.a_minus)
    cand_p = [v for v in sorted(Vp) if aux_p[v] > 0 and v not in ap]
    cand_m = [v for v in sorted(Vp) if aux_m[v] > 0 and v not in am]
    D = state.remaining
    # vertices without in-edges must start a reserved path; likewise sinks must end one
    cand_p.sort(key=lambda v: (popcount(D.inn[v] & _mask(Vp)) > 0, -aux_p[v], v))
    cand_m.sort(key=lambda v: (popcount(D.out[v] & _mask(Vp)) > 0, -aux_m[v], v))
    seen = set()
    for attempt in range(limit * 4):
        if attempt == 0:
            Xp, Xm = cand_p[:kp], [v for v in cand_m if v not in cand_p[:kp]][:km]
        else:
            Xp = rng.sample(cand_p, min(kp, len(cand_p)))
            rest = [v for v in cand_m if v not in Xp]
            Xm = rng.sample(rest, min(km, len(rest)))
        key = (tuple(sorted(Xp)), tuple(sorted(Xm)))
        if key in seen or len(Xp) != kp or len(Xm) != km:
            continue
        seen.add(key)
        yield frozenset(Xp), frozenset(Xm)
        if len(seen) >= limit:
            return


def _reserve_paths(D: Digraph, Vp: frozenset, starts: list[int], ends: list[int],
                   budget: Budget, rng: random.Random) -> Iterator[list[Path]]:
    """Edge-disjoint Hamilton paths of D[Vp] joining starts[i] to ends[i]."""
    out_edges: list[Path] = []

    def rec(i: int, H: Digraph) -> Iterator[list[Path]]:
        if i == len(starts):
            yield list(out_edges)
            return
        count = 0
        for p in iter_hamilton_paths(H, starts[i], ends[i], vertices=Vp, budget=budget):
            out_edges.append(p)
            yield from rec(i + 1, H.without_edges(path_edges(p)))
            out_edges.pop()
            count += 1
            if count >= 3:
                return

    yield from rec(0, D)


def _attempt(state: DecompositionState, Xp: frozenset, Xm: frozenset, budget: Budget,
             rng: random.Random, seed: int, trace: list, reports: list) -> Optional[list[Path]]:
    n = state.original.n
    r = state.r
    A = state.A
    Vp = state.V_prime
    X0 = Vp - Xp - Xm
    Yp, Ym, Ys, _ = _y_sets(A, Xp, Xm, frozenset(), X0)
    starts = sorted(Yp | Ys)
    ends = sorted(Ym | Ys)
    if len(starts) != r or len(ends) != r:
        return None
    # pair reserved starts and ends without loops
    if r > 1:
        ends = ends[1:] + ends[:1] if any(a == b for a, b in zip(starts, ends)) else ends
    if any(a == b for a, b in zip(starts, ends)):
        return None
    D1 = state.remaining
    base = D1.without_edges(A.edges)
    aux_p, aux_m = _aux_vectors(state)
    ell = sum(aux_p) - r + len(A.a_plus)
    for reserved in _reserve_paths(base, Vp, starts, ends, budget, rng):
        R = base.without_edges(e for p in reserved for e in path_edges(p))
        s = [aux_p[v] - (v in Xp) for v in range(n)]
        e = [aux_m[v] - (v in Xm) for v in range(n)]
        free = [popcount(R.out[v]) - s[v] for v in range(n)]
        if any(x < 0 for x in s + e + free):
            continue
        if any(popcount(R.inn[v]) - e[v] != free[v] for v in range(n)):
            continue
        iso = [ell - s[v] - e[v] - free[v] for v in range(n)]
        if any(x < 0 for x in iso):
            continue
        if sum(s) != ell or sum(e) != ell:
            continue
        if ell == 0:
            layouts_paths = []
            pairs = []
        else:
            try:
                pairs = choose_endpoint_multiset(dict(enumerate(s)), dict(enumerate(e)),
                                                 seed=None if seed == 0 else seed)
            except ValueError:
                return None
            layouts = build_layouts(n, pairs, dict(enumerate(iso)))
            pairs = [L.paths[0] for L in layouts]
            layouts_paths = _realize_layouts(R, list(pairs), free, iso, budget)
            if layouts_paths is None:
                trace.append({'stage': 'layouts', 'ok': False, 'pairs': len(pairs)})
                continue
        chk = check_partial(state, layouts_paths)
        trace.append({'stage': 'layouts', 'ok': True, 'paths': len(layouts_paths), **chk.to_dict()})
        if layouts_paths:
            if not chk.good:
                continue
            after = apply_paths(state, layouts_paths, reports)
        else:
            after = state
        W1 = state.W
        finals = complete_decomposition(after.remaining, W1, A, Xp, Xm, frozenset(), X0, r,
                                         budget=budget)
        trace.append({'stage': 'completion', 'ok': True, 'paths': len(finals)})
        return list(after.accumulated) + finals
    return None


def decompose(T: Digraph, config: Optional[PipelineConfig] = None) -> PipelineResult:
    """
    Path decomposition of a tournament of size texc(T) via the desk
    pipeline; exceptional tournaments and heuristic failures go to the exact
    solver and the failing stage is reported.
    """
    config = config or PipelineConfig()
    if not T.is_tournament:
        raise ValueError('decompose expects a tournament')
    n = T.n
    target = texc(T)
    trace: list = []
    reports: list = []
    stage = 'setup'
    try:
        if n < 3:
            raise HeuristicFailure('setup', 'fewer than 3 vertices')
        if classify(T).kind != GENERIC:
            raise HeuristicFailure('exceptional', classify(T).kind)
        r = config.r if config.r is not None else max(1, n // 8)
        threshold = config.threshold if config.threshold is not None else r
        stage = 'absorbing'
        try:
            W_A, A = select_absorbing_sets(T, r, threshold)
        except InfeasibleError as exc:
            raise HeuristicFailure('absorbing', str(exc)) from exc
        prof = excess_profile(T)
        W_star = frozenset()
        if config.excess_cutoff is not None:
            W_star = frozenset(v for v in range(n) if abs(prof.exc[v]) > config.excess_cutoff) - W_A
        u_star = select_U_star(T, avoid_saturated=True)
        state = initial_state(T, r, W_A, A, W_star, u_star - W_star - W_A)
        if len(state.u_star) != len(u_star):
            raise HeuristicFailure('setup', 'endpoint reserve meets W')
        trace.append({'stage': 'setup', 'n': n, 'texc': target, 'r': r, 'W_A': sorted(W_A),
                      'W_star': sorted(W_star), 'A': A.to_dict(), 'u_star': sorted(u_star)})
        budget = Budget(config.budget)
        stage = 'cleaning'
        try:
            state = cleaning_lite(state, budget, config.w_cap)
        except SearchTimeout as exc:
            raise HeuristicFailure('cleaning', 'budget') from exc
        trace.append({'stage': 'cleaning', 'paths': len(state.accumulated)})
        rng = random.Random(config.seed)
        stage = 'layouts'
        result = None
        for k, (Xp, Xm) in enumerate(_completion_choices(state, rng, config.attempts)):
            sub = Budget(min(budget.remaining or config.budget, max(1, config.budget // config.attempts)))
            try:
                result = _attempt(state, Xp, Xm, sub, rng, config.seed + k, trace, reports)
            except SearchTimeout:
                trace.append({'stage': 'layouts', 'ok': False, 'reason': 'budget', 'X': [sorted(Xp), sorted(Xm)]})
                result = None
            except HeuristicFailure as exc:
                trace.append({'stage': exc.stage, 'ok': False, 'reason': exc.detail})
                result = None
            budget.spend(sub.used)
            if result is not None:
                break
        if result is None:
            raise HeuristicFailure('layouts', 'no realizable layouts within budget')
        report = validate_decomposition(T, result)
        if not report.ok:
            raise AssertionError(f'pipeline produced an invalid decomposition: {report.detail}')
        if len(result) != target:
            raise HeuristicFailure('completion', f'size {len(result)} != texc {target}')
        return PipelineResult(result, target, None, True, trace, reports)
    except (HeuristicFailure, SearchTimeout) as exc:
        failed = exc.stage if isinstance(exc, HeuristicFailure) else stage
        trace.append({'stage': 'fallback', 'reason': failed, 'detail': str(exc)})
        if not config.fallback:
            return PipelineResult([], target, failed, None, trace, reports)
        res = solver.pn_exact(T, budget=config.fallback_budget)
        return PipelineResult(list(res.certificate), target, failed, res.optimal, trace, reports)
