"""
Robust outexpansion and exact Hamilton searches.

The robust checks are brute force over vertex subsets.  All thresholds are
compared with exact rational arithmetic: for S of size s, the vertex v lies
in the nu-robust outneighbourhood iff |N^-(v) & S| >= nu*n, and D is a
robust (nu, tau)-outexpander iff |RN(S)| >= |S| + nu*n whenever
tau*n <= |S| <= (1 - tau)*n.

The Hamilton path, spanning structure and Hamilton decomposition searches
are backtracking searches on bitmasks.  They share a node ``Budget``; running
out of budget raises ``SearchTimeout``, which is distinct from a search that
finishes and proves that nothing exists (the functions then return None).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .digraph import Digraph, Edge, Path, bits, popcount

__all__ = [
    'RobustParams', 'parse_rational', 'Budget', 'SearchTimeout', 'InfeasibleError',
    'robust_outneighbourhood', 'is_robust_outexpander', 'expansion_failure',
    'meets_three_eighths', 'sampled_robustness',
    'iter_hamilton_paths', 'hamilton_path', 'hamilton_cycle',
    'find_disjoint_paths', 'iter_spanning', 'join_into_spanning',
    'hamilton_decomposition', 'DEFAULT_NODE_BUDGET',
]

DEFAULT_NODE_BUDGET = 10 ** 7
EXPANDER_CAP = 16
DECOMPOSITION_CAP = 12


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse "p/q" (or an integer) into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f'not a rational number: {text!r}') from exc


@dataclass(frozen=True)
class RobustParams:
    nu: Fraction
    tau: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'nu', parse_rational(self.nu))
        object.__setattr__(self, 'tau', parse_rational(self.tau))
        if not 0 < self.nu <= 1:
            raise ValueError('nu must lie in (0, 1]')
        if not 0 < self.tau < 1:
            raise ValueError('tau must lie in (0, 1)')


class SearchTimeout(Exception):
    """The node budget ran out before the search finished."""


class InfeasibleError(Exception):
    """A heuristic construction found nothing within its strategy."""


class Budget:
    """Node counter shared by several searches."""

    def __init__(self, limit: Optional[int] = DEFAULT_NODE_BUDGET):
        self.limit = limit
        self.used = 0

    def spend(self, k: int = 1) -> None:
        self.used += k
        if self.limit is not None and self.used > self.limit:
            raise SearchTimeout(f'node budget {self.limit} exhausted')

    @property
    def remaining(self) -> Optional[int]:
        return None if self.limit is None else max(0, self.limit - self.used)


def _ceil_times(q: Fraction, n: int) -> int:
    return -((-q.numerator * n) // q.denominator)


def _as_mask(S: Iterable[int]) -> int:
    mask = 0
    for v in S:
        mask |= 1 << v
    return mask


def robust_outneighbourhood(D: Digraph, S: Iterable[int], nu: Union[Fraction, str]) -> frozenset[int]:
    nu = parse_rational(nu)
    k = _ceil_times(nu, D.n)
    smask = _as_mask(S)
    return frozenset(v for v in range(D.n) if popcount(D.inn[v] & smask) >= k)


def _subset_matrix(n: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.int16)


def _in_counts(D: Digraph) -> tuple[np.ndarray, np.ndarray]:
    """For every subset S (row, indexed by its bitmask) the counts |N^-(v) & S|, and |S|."""
    n = D.n
    subsets = _subset_matrix(n)
    incidence = np.array([[D.out[u] >> v & 1 for v in range(n)] for u in range(n)], dtype=np.int16)
    counts = subsets @ incidence if n else np.zeros((1, 0), dtype=np.int16)
    return counts, subsets.sum(axis=1)


def _failure_mask(counts: np.ndarray, sizes: np.ndarray, n: int, p: RobustParams) -> np.ndarray:
    k = _ceil_times(p.nu, n)
    rn = (counts >= k).sum(axis=1) if n else np.zeros(1, dtype=np.int64)
    nu, tau = p.nu, p.tau
    in_range = (sizes * tau.denominator >= tau.numerator * n) & \
               (sizes * tau.denominator <= (tau.denominator - tau.numerator) * n)
    enough = (rn - sizes) * nu.denominator >= nu.numerator * n
    return in_range & ~enough


def expansion_failure(D: Digraph, p: RobustParams, cap: int = EXPANDER_CAP) -> Optional[frozenset[int]]:
    """The first (by bitmask) medium-sized S violating robust expansion, or None."""
    if D.n > cap:
        raise ValueError(f'n={D.n} exceeds the exhaustive cap {cap}')
    counts, sizes = _in_counts(D)
    bad = np.flatnonzero(_failure_mask(counts, sizes, D.n, p))
    if bad.size == 0:
        return None
    return frozenset(bits(int(bad[0])))


def is_robust_outexpander(D: Digraph, p: RobustParams, cap: int = EXPANDER_CAP) -> bool:
    return expansion_failure(D, p, cap) is None


def robust_outexpander_grid(D: Digraph, grid: Sequence[RobustParams],
                            cap: int = EXPANDER_CAP) -> list[bool]:
    """is_robust_outexpander for several parameter pairs, sharing the subset scan."""
    if D.n > cap:
        raise ValueError(f'n={D.n} exceeds the exhaustive cap {cap}')
    counts, sizes = _in_counts(D)
    return [not _failure_mask(counts, sizes, D.n, p).any() for p in grid]


def meets_three_eighths(D: Digraph, eps: Union[Fraction, str]) -> bool:
    """Minimum semidegree at least (3/8 + eps) n."""
    bound = Fraction(3, 8) + parse_rational(eps)
    if D.n == 0:
        return True
    delta = min(min(D.out_degree(v), D.in_degree(v)) for v in range(D.n))
    return delta >= bound * D.n


def _induced(D: Digraph, vertices: Sequence[int]) -> Digraph:
    index = {v: i for i, v in enumerate(vertices)}
    edges = [(index[u], index[v]) for u, v in D.edges if u in index and v in index]
    return Digraph.from_edges(len(vertices), edges)


def sampled_robustness(D: Digraph, p: RobustParams, k: int, trials: int, seed: int) -> Fraction:
    """Fraction of random k-vertex induced subdigraphs that are robust (nu, tau)-outexpanders."""
    if not 0 < k <= D.n:
        raise ValueError('need 0 < k <= n')
    rng = random.Random(seed)
    passed = 0
    for _ in range(trials):
        sub = sorted(rng.sample(range(D.n), k))
        passed += is_robust_outexpander(_induced(D, sub), p)
    return Fraction(passed, trials)


# Hamilton searches

def _ham_paths(out: Sequence[int], inn: Sequence[int], x: int, y: int, allowed: int,
               budget: Budget) -> Iterator[list[int]]:
    """All paths from x to y whose vertex set is exactly ``allowed``."""
    if not (allowed >> x & 1 and allowed >> y & 1):
        return
    if x == y:
        if allowed == 1 << x:
            yield [x]
        return
    path = [x]
    ybit = 1 << y

    def rec(u: int, unvisited: int) -> Iterator[list[int]]:
        budget.spend()
        if unvisited == ybit:
            if out[u] & ybit:
                yield path + [y]
            return
        rest = unvisited & ~ybit
        if not inn[y] & rest:
            return
        forced = -1
        reach = rest | (1 << u)
        for w in bits(rest):
            wb = 1 << w
            if not out[w] & ((rest & ~wb) | ybit):
                return
            preds = inn[w] & reach & ~wb
            if preds == 1 << u:
                if forced >= 0:
                    return
                forced = w
            elif not preds:
                return
        cand = out[u] & rest
        if forced >= 0:
            cand &= 1 << forced
        order = sorted(bits(cand), key=lambda w: (popcount(out[w] & (rest | ybit)), w))
        for w in order:
            path.append(w)
            yield from rec(w, unvisited & ~(1 << w))
            path.pop()

    yield from rec(x, allowed & ~(1 << x))


def _vertex_mask(D: Digraph, vertices: Optional[Iterable[int]]) -> int:
    return (1 << D.n) - 1 if vertices is None else _as_mask(vertices)


def iter_hamilton_paths(D: Digraph, x: int, y: int, vertices: Optional[Iterable[int]] = None,
                        budget: Optional[Budget] = None) -> Iterator[Path]:
    """Hamilton (x,y)-paths of D (or of D restricted to ``vertices``), lazily."""
    budget = budget or Budget()
    for p in _ham_paths(D.out, D.inn, x, y, _vertex_mask(D, vertices), budget):
        yield tuple(p)


def hamilton_path(D: Digraph, x: int, y: int, vertices: Optional[Iterable[int]] = None,
                  budget: Optional[Budget] = None, cap: int = EXPANDER_CAP) -> Optional[Path]:
    if x == y:
        raise ValueError('endpoints must differ')
    if budget is None and D.n > cap:
        raise ValueError(f'n={D.n} exceeds the cap {cap}; pass an explicit budget')
    return next(iter_hamilton_paths(D, x, y, vertices, budget), None)


def hamilton_cycle(D: Digraph, vertices: Optional[Iterable[int]] = None,
                   budget: Optional[Budget] = None, first_edge: Optional[Edge] = None) -> Optional[Path]:
    """A Hamilton cycle (as a vertex sequence starting at its smallest vertex or at first_edge[0])."""
    budget = budget or Budget()
    allowed = _vertex_mask(D, vertices)
    if not allowed:
        return None
    if first_edge is not None:
        s, t = first_edge
        starts = [t] if D.has_edge(s, t) else []
    else:
        s = (allowed & -allowed).bit_length() - 1
        starts = list(bits(D.out[s] & allowed))
    if allowed == 1 << s:
        return None
    for t in starts:
        for p in _ham_paths(D.out, D.inn, t, s, allowed, budget):
            return tuple([s] + p[:-1])
    return None


def find_disjoint_paths(D: Digraph, pairs: Sequence[tuple[int, int]], forbidden: Iterable[int] = (),
                        max_len: Optional[int] = None) -> list[Path]:
    """
    Internally vertex-disjoint (x_i, y_i)-paths found one after another by
    breadth-first search.  Interiors avoid ``forbidden`` and every endpoint;
    a direct edge is used at most once.
    """
    forbidden = set(forbidden)
    endpoints = {v for pair in pairs for v in pair}
    if endpoints & forbidden:
        raise ValueError('endpoints may not be forbidden')
    blocked = forbidden | endpoints
    used_edges: set[Edge] = set()
    result = []
    for x, y in pairs:
        if x == y:
            raise ValueError('path endpoints must differ')
        prev = {x: None}
        queue = deque([(x, 0)])
        found = False
        while queue and not found:
            u, dist = queue.popleft()
            if max_len is not None and dist >= max_len:
                continue
            for w in bits(D.out[u]):
                if w == y and (u, w) not in used_edges:
                    prev[y] = u
                    found = True
                    break
                if w in prev or w in blocked:
                    continue
                prev[w] = u
                queue.append((w, dist + 1))
        if not found:
            raise InfeasibleError(f'no short ({x},{y})-path avoiding the blocked vertices')
        path = [y]
        while path[-1] != x:
            path.append(prev[path[-1]])
        path.reverse()
        for v in path[1:-1]:
            blocked.add(v)
        for e in zip(path, path[1:]):
            used_edges.add(e)
        result.append(tuple(path))
    return result


def iter_spanning(D: Digraph, fragments: Sequence[Sequence[int]], mode: Union[str, tuple],
                  avoid: Iterable[int] = (), budget: Optional[Budget] = None) -> Iterator[Path]:
    """
    Spanning paths or cycles of D - avoid containing each fragment as a
    subpath.  ``mode`` is ``'cycle'`` or ``('path', x, y)``.  Fragments are
    contracted to single units (entered at their first vertex, left at their
    last) and a Hamilton search runs on the units.
    """
    budget = budget or Budget()
    avoid = set(avoid)
    used = set()
    for f in fragments:
        if not f:
            raise ValueError('empty fragment')
        if set(f) & used or set(f) & avoid or len(set(f)) != len(f):
            raise ValueError('fragments must be vertex-disjoint simple paths avoiding `avoid`')
        for a, b in zip(f, f[1:]):
            if not D.has_edge(a, b):
                raise ValueError(f'fragment edge {(a, b)} is not an edge of D')
        used |= set(f)
    units: list[tuple[int, ...]] = [tuple(f) for f in fragments]
    units += [(v,) for v in range(D.n) if v not in used and v not in avoid]
    k = len(units)
    out = [0] * k
    inn = [0] * k
    for i, a in enumerate(units):
        for j, b in enumerate(units):
            if i != j and D.has_edge(a[-1], b[0]):
                out[i] |= 1 << j
                inn[j] |= 1 << i
    allowed = (1 << k) - 1

    def expand(seq: Sequence[int]) -> Path:
        return tuple(v for i in seq for v in units[i])

    if mode == 'cycle':
        if k == 1:
            u = units[0]
            if len(u) >= 2 and D.has_edge(u[-1], u[0]):
                yield u
            return
        for t in bits(out[0]):
            for p in _ham_paths(out, inn, t, 0, allowed, budget):
                yield expand([0] + p[:-1])
        return
    if not (isinstance(mode, tuple) and len(mode) == 3 and mode[0] == 'path'):
        raise ValueError("mode must be 'cycle' or ('path', x, y)")
    _, x, y = mode
    ux = next((i for i, u in enumerate(units) if u[0] == x), None)
    uy = next((i for i, u in enumerate(units) if u[-1] == y), None)
    if ux is None or uy is None:
        return
    if ux == uy:
        if k == 1:
            yield units[0]
        return
    for p in _ham_paths(out, inn, ux, uy, allowed, budget):
        yield expand(p)


def join_into_spanning(D: Digraph, fragments: Sequence[Sequence[int]], mode: Union[str, tuple],
                       avoid: Iterable[int] = (), budget: Optional[Budget] = None) -> Optional[Path]:
    return next(iter_spanning(D, fragments, mode, avoid, budget), None)


def _strongly_connected(out: Sequence[int], inn: Sequence[int], vmask: int) -> bool:
    if not vmask:
        return True
    start = vmask & -vmask
    for adj in (out, inn):
        seen = start
        frontier = start
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = adj[v] & vmask & ~seen
            seen |= new
            frontier |= new
        if seen != vmask:
            return False
    return True


def hamilton_decomposition(D: Digraph, budget: Optional[Budget] = None,
                           cap: int = DECOMPOSITION_CAP) -> Optional[list[Path]]:
    """
    Split an r-regular digraph into r edge-disjoint Hamilton cycles.

    Every Hamilton cycle uses exactly one out-edge of vertex 0, so the search
    only branches over cycles through the smallest remaining out-edge of 0.
    """
    r = D.regularity
    if r is None:
        raise ValueError('digraph is not regular')
    if D.n > cap:
        raise ValueError(f'n={D.n} exceeds the cap {cap}')
    budget = budget or Budget()
    n = D.n
    if r == 0:
        return []
    if n < 2:
        return None
    full = (1 << n) - 1
    out = list(D.out)
    inn = list(D.inn)
    cycles: list[Path] = []

    def rec(left: int) -> bool:
        budget.spend()
        if left == 0:
            return True
        if not _strongly_connected(out, inn, full):
            return False
        w = (out[0] & -out[0]).bit_length() - 1
        for p in _ham_paths(out, inn, w, 0, full, budget):
            cyc = [0] + p[:-1]
            es = list(zip(cyc, cyc[1:] + cyc[:1]))
            for a, b in es:
                out[a] &= ~(1 << b)
                inn[b] &= ~(1 << a)
            cycles.append(tuple(cyc))
            if rec(left - 1):
                return True
            cycles.pop()
            for a, b in es:
                out[a] |= 1 << b
                inn[b] |= 1 << a
        return False

    return cycles if rec(r) else None
