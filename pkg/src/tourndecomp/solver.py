"""
Exact path numbers.

``pn_exact`` is a branch-and-bound search.  It asks, for t = lower bound,
lower bound + 1, ..., whether the digraph splits into at most t paths.  Each
of these decision searches builds paths one at a time:

* if some vertex has positive excess, every decomposition has a path
  starting there, so the search branches over all paths starting at the
  vertex of largest excess;
* otherwise it branches over all paths through a fixed edge.

Residual digraphs are split into weakly connected components, which are
solved independently, and every node is pruned with the texc bound (plus one
for regular components).

``pn_oracle`` is a separate dynamic program over edge subsets used to
cross-check the search on small inputs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from .digraph import Digraph, Path, bits, popcount, validate_decomposition
from .exceptional import _apex_witness
from .excess import texc, total_excess

__all__ = ['PnResult', 'BudgetExhausted', 'lower_bound', 'pn_exact', 'pn_oracle',
           'greedy_decomposition', 'certificate_to_json', 'certificate_from_json',
           'DEFAULT_BUDGET', 'ORACLE_EDGE_CAP']

DEFAULT_BUDGET = 10 ** 8
ORACLE_EDGE_CAP = 21


class BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class PnResult:
    pn: int
    certificate: tuple[Path, ...]
    lower_bound_used: int
    nodes_explored: int
    optimal: bool = True

    def to_dict(self) -> dict:
        return {'pn': self.pn, 'certificate': [list(p) for p in self.certificate],
                'lower_bound_used': self.lower_bound_used, 'nodes_explored': self.nodes_explored,
                'optimal': self.optimal}


def certificate_to_json(paths: Sequence[Sequence[int]]) -> str:
    return json.dumps([list(p) for p in paths])


def certificate_from_json(text: str) -> list[Path]:
    return [tuple(p) for p in json.loads(text)]


def lower_bound(D: Digraph) -> int:
    """texc(D), plus one for non-empty regular digraphs and for apex tournaments."""
    lb = texc(D)
    if D.num_edges == 0:
        return 0
    if D.is_regular:
        return lb + 1
    if D.is_tournament and _apex_witness(D.n, D.out, D.inn) is not None:
        return lb + 1
    return lb


# helpers on raw masks

def _components(n: int, out: Sequence[int], inn: Sequence[int]) -> list[int]:
    """Vertex masks of the weakly connected components that contain edges."""
    und = [out[v] | inn[v] for v in range(n)]
    left = 0
    for v in range(n):
        if und[v]:
            left |= 1 << v
    comps = []
    while left:
        start = left & -left
        comp = start
        frontier = start
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = und[v] & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        left &= ~comp
    return comps


def _texc_masks(vs: Sequence[int], out: Sequence[int], inn: Sequence[int]) -> tuple[int, bool]:
    """(texc, regular) of the digraph induced by the listed vertices."""
    total = 0
    d0 = 0
    regular = True
    r = None
    for v in vs:
        o = popcount(out[v])
        i = popcount(inn[v])
        if o > i:
            total += o - i
        if o > d0:
            d0 = o
        if i > d0:
            d0 = i
        if regular:
            if o != i or (r is not None and o != r):
                regular = False
            r = o
    return max(total, d0), regular


def _component_lb(comp: int, out: Sequence[int], inn: Sequence[int]) -> int:
    t, reg = _texc_masks(list(bits(comp)), out, inn)
    return t + 1 if reg and t > 0 else t


class _Search:
    def __init__(self, n: int, budget: int, memo: bool):
        self.n = n
        self.budget = budget
        self.nodes = 0
        self.memo: Optional[dict] = {} if memo else None

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExhausted

    # decision search: some decomposition with fewer than `bound` paths, or None

    def decide(self, out: list[int], inn: list[int], bound: int,
               sticky: Optional[tuple[int, int]] = None) -> Optional[list[Path]]:
        self.tick()
        n = self.n
        comps = _components(n, out, inn)
        if not comps:
            return []
        if bound <= 0:
            return None
        if len(comps) > 1:
            lbs = [_component_lb(c, out, inn) for c in comps]
            if sum(lbs) >= bound:
                return None
            order = sorted(range(len(comps)), key=lambda i: (popcount(comps[i]), comps[i]))
            result: list[Path] = []
            rest_lb = sum(lbs)
            for i in order:
                c = comps[i]
                rest_lb -= lbs[i]
                cap = bound - len(result) - rest_lb
                cout = [out[v] if c >> v & 1 else 0 for v in range(n)]
                cinn = [inn[v] if c >> v & 1 else 0 for v in range(n)]
                sol = self.optimum(cout, cinn, lbs[i], cap)
                if sol is None:
                    return None
                result.extend(sol)
            return result
        return self.decide_connected(out, inn, bound, sticky)

    def optimum(self, out: list[int], inn: list[int], lb: int, cap: int) -> Optional[list[Path]]:
        """A minimum decomposition of a connected residual if its size is below cap."""
        key = None
        if self.memo is not None:
            key = tuple(out)
            if key in self.memo:
                sol = self.memo[key]
                return list(sol) if len(sol) < cap else None
        for t in range(lb, cap):
            sol = self.decide_connected(list(out), list(inn), t + 1, None)
            if sol is not None:
                if key is not None:
                    self.memo[key] = tuple(sol)
                return sol
        return None

    def decide_connected(self, out: list[int], inn: list[int], bound: int,
                         sticky: Optional[tuple[int, int]]) -> Optional[list[Path]]:
        n = self.n
        vs = [v for v in range(n) if out[v] | inn[v]]
        t, reg = _texc_masks(vs, out, inn)
        lb = t + 1 if reg else t
        if lb >= bound:
            return None
        outdeg = [popcount(out[v]) for v in range(n)]
        exc = [outdeg[v] - popcount(inn[v]) for v in range(n)]
        if sticky is not None and exc[sticky[0]] > 0:
            v, min_target = sticky
            return self.paths_from(out, inn, [v], 1 << v, bound, min_target)
        best_v = -1
        for v in vs:
            if exc[v] > 0 and (best_v < 0 or (exc[v], outdeg[v]) > (exc[best_v], outdeg[best_v])):
                best_v = v
        if best_v >= 0:
            return self.paths_from(out, inn, [best_v], 1 << best_v, bound, -1)
        # balanced residual: branch over the paths through one edge at a vertex of largest degree
        v = max(vs, key=lambda u: (outdeg[u], -u))
        w = max(bits(out[v]), key=lambda u: (outdeg[u], -u))
        out[v] &= ~(1 << w)
        inn[w] &= ~(1 << v)
        res = self.paths_through(out, inn, [v], [w], (1 << v) | (1 << w), bound)
        out[v] |= 1 << w
        inn[w] |= 1 << v
        return res

    def _order(self, cand: int, out: list[int]) -> list[int]:
        return sorted(bits(cand), key=lambda w: (-popcount(out[w]), w))

    def paths_from(self, out: list[int], inn: list[int], path: list[int], visited: int,
                   bound: int, min_target: int) -> Optional[list[Path]]:
        u = path[-1]
        cand = out[u] & ~visited
        if len(path) == 1 and min_target >= 0:
            cand &= ~((1 << (min_target + 1)) - 1)
        for w in self._order(cand, out):
            self.tick()
            out[u] &= ~(1 << w)
            inn[w] &= ~(1 << u)
            path.append(w)
            res = self.paths_from(out, inn, path, visited | (1 << w), bound, min_target)
            path.pop()
            out[u] |= 1 << w
            inn[w] |= 1 << u
            if res is not None:
                return res
        if len(path) >= 2:
            return self.finish(out, inn, path, bound, (path[0], path[1]))
        return None

    def paths_through(self, out: list[int], inn: list[int], back: list[int], fwd: list[int],
                      visited: int, bound: int) -> Optional[list[Path]]:
        """Extend backwards from back[-1] first (in reverse), then forwards from fwd[-1]."""
        a = back[-1]
        cand = inn[a] & ~visited
        for x in sorted(bits(cand), key=lambda w: (-popcount(inn[w]), w)):
            self.tick()
            out[x] &= ~(1 << a)
            inn[a] &= ~(1 << x)
            back.append(x)
            res = self.paths_through(out, inn, back, fwd, visited | (1 << x), bound)
            back.pop()
            out[x] |= 1 << a
            inn[a] |= 1 << x
            if res is not None:
                return res
        return self.forward_only(out, inn, back, fwd, visited, bound)

    def forward_only(self, out: list[int], inn: list[int], back: list[int], fwd: list[int],
                     visited: int, bound: int) -> Optional[list[Path]]:
        u = fwd[-1]
        for w in self._order(out[u] & ~visited, out):
            self.tick()
            out[u] &= ~(1 << w)
            inn[w] &= ~(1 << u)
            fwd.append(w)
            res = self.forward_only(out, inn, back, fwd, visited | (1 << w), bound)
            fwd.pop()
            out[u] |= 1 << w
            inn[w] |= 1 << u
            if res is not None:
                return res
        path = back[::-1] + fwd
        return self.finish(out, inn, path, bound, None)

    def finish(self, out: list[int], inn: list[int], path: list[int], bound: int,
               first_edge: Optional[tuple[int, int]]) -> Optional[list[Path]]:
        self.tick()
        vs = [v for v in range(self.n) if out[v] | inn[v]]
        if vs:
            t, reg = _texc_masks(vs, out, inn)
            if 1 + t + (1 if reg else 0) >= bound:
                return None
        sticky = first_edge
        sub = self.decide(list(out), list(inn), bound - 1, sticky)
        if sub is None:
            return None
        return [tuple(path)] + sub


def greedy_decomposition(D: Digraph) -> list[Path]:
    """A quick decomposition: repeatedly walk from a vertex of largest excess along busy vertices."""
    n = D.n
    out = list(D.out)
    inn = list(D.inn)
    paths: list[Path] = []
    while any(out):
        outdeg = [popcount(out[v]) for v in range(n)]
        exc = [outdeg[v] - popcount(inn[v]) for v in range(n)]
        v = max((u for u in range(n) if out[u]), key=lambda u: (exc[u], outdeg[u], -u))
        path = [v]
        visited = 1 << v
        while True:
            u = path[-1]
            cand = out[u] & ~visited
            if not cand:
                break
            w = max(bits(cand), key=lambda x: (popcount(out[x] & ~visited), -x))
            out[u] &= ~(1 << w)
            inn[w] &= ~(1 << u)
            path.append(w)
            visited |= 1 << w
        paths.append(tuple(path))
    return paths


def pn_exact(D: Digraph, budget: int = DEFAULT_BUDGET, edge_cap: Optional[int] = None,
             memo: bool = False, transition_slack: int = 1) -> PnResult:
    """
    Minimum path decomposition of D.  If the node budget runs out the best
    decomposition found is returned with ``optimal=False``; ``lower_bound_used``
    is then the largest size proven impossible to beat.

    Decision levels t with t - exc(D) <= ``transition_slack`` use the
    transition-system search, the others the path-extension search.
    """
    if budget <= 0:
        raise ValueError('budget must be positive')
    if edge_cap is not None and D.num_edges > edge_cap:
        raise ValueError(f'{D.num_edges} edges exceed the cap {edge_cap}')
    lb = lower_bound(D)
    exc = total_excess(D)
    best = greedy_decomposition(D)
    search = _Search(D.n, budget, memo)
    counter = [0]
    t = lb
    optimal = True
    try:
        while t < len(best):
            if t - exc <= transition_slack:
                counter[0] = search.nodes
                sol = _transition_decide(D, t - exc, counter, budget)
                search.nodes = counter[0]
            else:
                sol = search.decide(list(D.out), list(D.inn), t + 1)
            if sol is not None:
                best = sol
                break
            t += 1
    except BudgetExhausted:
        optimal = False
    search.nodes = max(search.nodes, counter[0])
    report = validate_decomposition(D, best)
    if not report.ok:
        raise AssertionError(f'solver produced an invalid certificate: {report.detail}')
    return PnResult(len(best), tuple(best), lb if optimal else max(lb, t), search.nodes, optimal)


# oracle

def pn_oracle(D: Digraph) -> int:
    """Minimum number of paths by dynamic programming over edge subsets (|E| <= 21)."""
    edges = list(D.edges)
    m = len(edges)
    if m > ORACLE_EDGE_CAP:
        raise ValueError(f'oracle is capped at {ORACLE_EDGE_CAP} edges, got {m}')
    index = {e: k for k, e in enumerate(edges)}
    out_edges: dict[int, list[tuple[int, int]]] = {v: [] for v in range(D.n)}
    in_edges: dict[int, list[tuple[int, int]]] = {v: [] for v in range(D.n)}
    for (u, v), k in index.items():
        out_edges[u].append((v, k))
        in_edges[v].append((u, k))

    def paths_containing(mask: int, k0: int) -> list[int]:
        a, b = edges[k0]
        found = []

        def back(x: int, used_v: set, emask: int):
            fwd(b, used_v, emask)
            for y, k in in_edges[x]:
                if mask >> k & 1 and y not in used_v:
                    used_v.add(y)
                    back(y, used_v, emask | (1 << k))
                    used_v.discard(y)

        def fwd(x: int, used_v: set, emask: int):
            found.append(emask)
            for y, k in out_edges[x]:
                if mask >> k & 1 and y not in used_v:
                    used_v.add(y)
                    fwd(y, used_v, emask | (1 << k))
                    used_v.discard(y)

        back(a, {a, b}, 1 << k0)
        return found

    @lru_cache(maxsize=None)
    def best(mask: int) -> int:
        if not mask:
            return 0
        k0 = (mask & -mask).bit_length() - 1
        return 1 + min(best(mask & ~p) for p in paths_containing(mask, k0))

    return best((1 << m) - 1)


class _TransitionSearch:
    """
    Decision search over transition systems.

    A path decomposition is the same thing as choosing, at every vertex v, a
    partial pairing of in-edges with out-edges: an in-edge paired with an
    out-edge means the path continues, an unpaired in-edge ends a path at v and
    an unpaired out-edge starts one.  The number of paths is exc(D) plus the
    number of "surplus" path ends, i.e. ends at v beyond exc^-(v).  Trails are
    kept as chains of edges with a vertex mask so that no chain repeats a
    vertex or closes into a cycle.
    """

    def __init__(self, D: Digraph, budget: int, counter: list[int], seed: int = 0):
        self.D = D
        self.budget = budget
        self.counter = counter
        self.edges = list(D.edges)
        m = len(self.edges)
        # tie-breaking priorities; seed 0 keeps the natural edge order
        self.prio = list(range(m))
        if seed:
            random.Random(seed).shuffle(self.prio)
        n = D.n
        self.in_e: list[list[int]] = [[] for _ in range(n)]
        self.out_e: list[list[int]] = [[] for _ in range(n)]
        for k, (u, v) in enumerate(self.edges):
            self.out_e[u].append(k)
            self.in_e[v].append(k)
        self.exc_minus = [max(0, D.in_degree(v) - D.out_degree(v)) for v in range(n)]
        self.exc_plus = [max(0, D.out_degree(v) - D.in_degree(v)) for v in range(n)]
        self.succ = [-1] * m
        self.pred = [-1] * m
        self.first_of_last = list(range(m))
        self.last_of_first = list(range(m))
        self.cmask = [(1 << u) | (1 << v) for u, v in self.edges]
        self.und_in = [len(self.in_e[v]) for v in range(n)]
        self.free_out = [len(self.out_e[v]) for v in range(n)]
        self.ends = [0] * n

    def tick(self) -> None:
        self.counter[0] += 1
        if self.counter[0] > self.budget:
            raise BudgetExhausted

    def run(self, slack: int) -> Optional[list[Path]]:
        if slack < 0:
            return None
        self.slack = slack
        self.solution: Optional[list[Path]] = None
        if self._search():
            return self.solution
        return None

    def _paths(self) -> list[Path]:
        paths = []
        for f, (u, v) in enumerate(self.edges):
            if self.pred[f] == -1:
                path = [u, v]
                e = f
                while self.succ[e] >= 0:
                    e = self.succ[e]
                    path.append(self.edges[e][1])
                paths.append(tuple(path))
        return paths

    @staticmethod
    def _matching_size(opts: list[list[int]]) -> int:
        match: dict[int, int] = {}

        def augment(i: int, seen: set) -> bool:
            for f in opts[i]:
                if f in seen:
                    continue
                seen.add(f)
                if f not in match or augment(match[f], seen):
                    match[f] = i
                    return True
            return False

        return sum(1 for i in range(len(opts)) if augment(i, set()))

    def _search(self) -> bool:
        self.tick()
        used = 0
        need = 0
        best = None
        best_count = 1 << 30
        for v in range(self.D.n):
            ins = [e for e in self.in_e[v] if self.succ[e] == -1]
            outs = [f for f in self.out_e[v] if self.pred[f] == -1]
            if not ins and not outs:
                continue
            surplus = self.ends[v] - self.exc_minus[v]
            if surplus > 0:
                used += surplus
            bv = 1 << v
            opts = []
            for e in ins:
                me = self.cmask[self.first_of_last[e]]
                opts.append([f for f in outs if me & self.cmask[f] == bv])
            mm = self._matching_size(opts) if ins and outs else 0
            low = max(0, self.ends[v] + len(ins) - mm - self.exc_minus[v],
                      len(outs) - mm - self.exc_plus[v])
            need += low
            for e, o in zip(ins, opts):
                key = (len(o) << 16) + self.prio[e]
                if key < best_count:
                    best_count = key
                    best = (e, v, o)
        if need > self.slack:
            return False
        if best is None:
            self.solution = self._paths()
            return True
        e, v, opts = best
        end_ok = self.ends[v] < self.exc_minus[v] or used < self.slack
        free_end = self.ends[v] < self.exc_minus[v]
        if end_ok and free_end:
            if self._try_end(e, v):
                return True
        for f in sorted(opts, key=lambda f: (popcount(self.cmask[f]), self.prio[f])):
            if self._try_link(e, f, v):
                return True
        if end_ok and not free_end:
            if self._try_end(e, v):
                return True
        return False

    def _try_end(self, e: int, v: int) -> bool:
        self.succ[e] = -2
        self.und_in[v] -= 1
        self.ends[v] += 1
        ok = self._search()
        self.ends[v] -= 1
        self.und_in[v] += 1
        self.succ[e] = -1
        return ok

    def _try_link(self, e: int, f: int, v: int) -> bool:
        a0 = self.first_of_last[e]
        b1 = self.last_of_first[f]
        saved = (self.first_of_last[b1], self.last_of_first[a0], self.cmask[a0])
        self.first_of_last[b1] = a0
        self.last_of_first[a0] = b1
        self.cmask[a0] = saved[2] | self.cmask[f]
        self.succ[e] = f
        self.pred[f] = e
        self.und_in[v] -= 1
        self.free_out[v] -= 1
        ok = self._search()
        self.free_out[v] += 1
        self.und_in[v] += 1
        self.pred[f] = -1
        self.succ[e] = -1
        self.first_of_last[b1], self.last_of_first[a0], self.cmask[a0] = saved
        return ok


def _transition_decide(D: Digraph, slack: int, counter: list[int], budget: int,
                       first_limit: int = 2000) -> Optional[list[Path]]:
    """
    Complete decision search with restarts: each restart is a full search
    with a different tie-breaking order and a doubled node limit.  A restart
    that finishes within its limit gives a definitive answer.
    """
    limit = first_limit
    seed = 0
    while True:
        cap = min(counter[0] + limit, budget)
        search = _TransitionSearch(D, cap, counter, seed)
        try:
            return search.run(slack)
        except BudgetExhausted:
            if counter[0] >= budget:
                raise
        limit *= 2
        seed += 1
