"""
Bipartite matchings and proper edge colourings.

``matching_cover`` is Hopcroft-Karp.  ``vizing_matchings`` is the
Misra-Gries constructive form of Vizing's theorem: fans plus alternating
path inversion, never more than max degree + 1 colours.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence, Union

__all__ = ['BipartiteGraph', 'PreconditionError', 'maximum_matching', 'matching_cover',
           'hall_conditions', 'near_perfect_matching', 'vizing_matchings', 'max_degree']


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    A: tuple
    B: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, 'A', tuple(self.A))
        object.__setattr__(self, 'B', tuple(self.B))
        object.__setattr__(self, 'edges', frozenset(self.edges))
        sa, sb = set(self.A), set(self.B)
        if len(sa) != len(self.A) or len(sb) != len(self.B):
            raise ValueError('repeated vertex in a class')
        if sa & sb:
            raise ValueError('classes must be disjoint')
        for a, b in self.edges:
            if a not in sa or b not in sb:
                raise ValueError(f'edge {(a, b)} does not cross from A to B')

    def neighbours(self) -> dict:
        adj = {a: [] for a in self.A}
        for a, b in sorted(self.edges, key=repr):
            adj[a].append(b)
        return adj

    def degree(self, x: Hashable) -> int:
        return sum(1 for a, b in self.edges if x == a or x == b)


def maximum_matching(G: BipartiteGraph) -> dict:
    """Hopcroft-Karp; returns a dict a -> b."""
    adj = G.neighbours()
    match_a: dict = {a: None for a in G.A}
    match_b: dict = {b: None for b in G.B}
    inf = float('inf')

    def bfs() -> Optional[dict]:
        dist = {}
        queue = deque()
        for a in G.A:
            if match_a[a] is None:
                dist[a] = 0
                queue.append(a)
            else:
                dist[a] = inf
        found = False
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                a2 = match_b[b]
                if a2 is None:
                    found = True
                elif dist[a2] == inf:
                    dist[a2] = dist[a] + 1
                    queue.append(a2)
        return dist if found else None

    def dfs(a, dist) -> bool:
        # iterative would avoid recursion limits, but layers are short here
        for b in adj[a]:
            a2 = match_b[b]
            if a2 is None or (dist[a2] == dist[a] + 1 and dfs(a2, dist)):
                match_a[a] = b
                match_b[b] = a
                return True
        dist[a] = inf
        return False

    while True:
        dist = bfs()
        if dist is None:
            break
        for a in G.A:
            if match_a[a] is None:
                dfs(a, dist)
    return {a: b for a, b in match_a.items() if b is not None}


def matching_cover(G: BipartiteGraph) -> Optional[dict]:
    """A matching saturating A, or None if none exists."""
    m = maximum_matching(G)
    return m if len(m) == len(G.A) else None


def hall_conditions(G: BipartiteGraph) -> bool:
    """The degree conditions d(a) >= |B|/2, d(b) >= |A| - |B|/2 and |A| <= |B|."""
    na, nb = len(G.A), len(G.B)
    if na > nb:
        return False
    deg = {}
    for a, b in G.edges:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    return all(2 * deg.get(a, 0) >= nb for a in G.A) and \
        all(2 * deg.get(b, 0) >= 2 * na - nb for b in G.B)


def near_perfect_matching(G: BipartiteGraph, delta: Union[Fraction, str], eps: Union[Fraction, str],
                          n: int) -> dict:
    """
    Maximum matching of a bipartite graph whose classes have (1 +- eps) n
    vertices and whose degrees are all (delta +- eps) n; its size is at least
    (1 - 3 eps/delta) n.
    """
    delta, eps = Fraction(delta), Fraction(eps)
    if delta <= 0 or eps < 0 or n <= 0:
        raise PreconditionError('need delta > 0, eps >= 0, n > 0')
    for side in (G.A, G.B):
        if abs(len(side) - n) > eps * n:
            raise PreconditionError(f'class size {len(side)} is not (1 +- {eps}) {n}')
    deg = {x: 0 for x in G.A + G.B}
    for a, b in G.edges:
        deg[a] += 1
        deg[b] += 1
    for x, d in deg.items():
        if abs(d - delta * n) > eps * n:
            raise PreconditionError(f'vertex {x!r} has degree {d}, not ({delta} +- {eps}) {n}')
    m = maximum_matching(G)
    bound = (1 - 3 * eps / delta) * n
    assert len(m) >= bound, f'matching of size {len(m)} below {bound}'
    return m


def max_degree(n: int, edges: Iterable[tuple[int, int]]) -> int:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0)


def vizing_matchings(n: int, edges: Sequence[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """
    Split the edges of a simple undirected graph on 0..n-1 into at most
    max degree + 1 matchings.  Edges come back in their input orientation.
    """
    seen = set()
    for u, v in edges:
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise ValueError(f'bad edge {(u, v)}')
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f'repeated edge {(u, v)}')
        seen.add(key)
    colours = max_degree(n, edges) + 1
    at: list[dict[int, int]] = [dict() for _ in range(n)]  # colour -> neighbour

    def free(x: int) -> int:
        return next(c for c in range(colours) if c not in at[x])

    def colour_of(x: int, y: int) -> Optional[int]:
        return next((c for c, z in at[x].items() if z == y), None)

    def set_colour(x: int, y: int, c: int) -> None:
        at[x][c] = y
        at[y][c] = x

    def clear(x: int, y: int) -> None:
        c = colour_of(x, y)
        if c is not None:
            del at[x][c]
            del at[y][c]

    for u, v in edges:
        common = next((c for c in range(colours) if c not in at[u] and c not in at[v]), None)
        if common is not None:
            set_colour(u, v, common)
            continue
        fan = [v]
        in_fan = {v}
        grown = True
        while grown:
            grown = False
            last = fan[-1]
            for c, x in sorted(at[u].items()):
                if x not in in_fan and c not in at[last]:
                    fan.append(x)
                    in_fan.add(x)
                    grown = True
                    break
        c = free(u)
        d = free(fan[-1])
        # invert the cd-path starting at u (its first edge has colour d)
        path = []
        x, want = u, d
        while want in at[x]:
            y = at[x][want]
            path.append((x, y, want))
            x, want = y, (c if want == d else d)
        for x, y, col in path:
            del at[x][col]
            del at[y][col]
        for x, y, col in path:
            set_colour(x, y, c if col == d else d)
        # find the first fan vertex w with d free such that fan[:w+1] is still a fan
        w = None
        for i, x in enumerate(fan):
            if i > 0:
                ci = colour_of(u, x)
                if ci is None or ci in at[fan[i - 1]]:
                    break
            if d not in at[x]:
                w = i
                break
        assert w is not None, 'fan rotation failed'
        shifted = [colour_of(u, fan[i + 1]) for i in range(w)]
        for i in range(1, w + 1):
            clear(u, fan[i])
        for i in range(w):
            set_colour(u, fan[i], shifted[i])
        set_colour(u, fan[w], d)

    classes: list[list[tuple[int, int]]] = [[] for _ in range(colours)]
    for u, v in edges:
        classes[colour_of(u, v)].append((u, v))
    return [m for m in classes if m]
