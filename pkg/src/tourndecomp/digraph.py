"""
Digraphs, paths and path decompositions.

A digraph on vertices 0..n-1 is stored as a tuple of out-neighbourhood
bitmasks: bit v of ``out[u]`` is set iff u -> v is an edge.  Loops are not
allowed and each ordered pair carries at most one edge, so a pair of
vertices can be joined by at most two edges (one in each direction).

Paths are plain tuples of vertex ids.  A path with a single vertex is the
trivial path; it is a valid ``Path`` but may not occur inside a path
decomposition.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path as FilePath
from typing import Iterable, Iterator, Optional, Sequence

__all__ = [
    'Digraph', 'Edge', 'Path', 'ValidationReport', 'FormatError',
    'path_edges', 'is_path_in', 'validate_decomposition', 'validate_cycle_decomposition',
    'bits', 'popcount',
    'transitive_tournament', 'gen_regular_tournament', 'gen_apex', 'apex_vertices',
    'gen_chain_counterexample', 'random_tournament', 'random_digraph',
    'tournament_pairs', 'tournament_code', 'tournament_from_code',
    'encode_hex', 'decode_hex', 'enumerate_tournaments', 'canonical_code',
    'to_text', 'from_text', 'load_digraph', 'save_digraph',
]

Edge = tuple[int, int]
Path = tuple[int, ...]

ENUMERATION_CAP = 7


def popcount(x: int) -> int:
    return bin(x).count('1')


def bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FormatError(ValueError):
    """Raised when a digraph text file or encoding is malformed."""


@dataclass(frozen=True)
class Digraph:
    n: int
    out: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError('vertex count must be non-negative')
        if len(self.out) != self.n:
            raise ValueError('need one out-neighbourhood per vertex')
        full = (1 << self.n) - 1
        for v, mask in enumerate(self.out):
            if mask & ~full:
                raise ValueError(f'vertex {v} has an out-neighbour outside 0..{self.n - 1}')
            if mask >> v & 1:
                raise ValueError(f'loop at vertex {v}')

    # construction

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> 'Digraph':
        out = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f'edge {(u, v)} out of range for n={n}')
            if u == v:
                raise ValueError(f'loop at vertex {u}')
            out[u] |= 1 << v
        return cls(n, tuple(out))

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[int]]) -> 'Digraph':
        n = len(rows)
        out = []
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError('adjacency matrix must be square')
            mask = 0
            for j, x in enumerate(row):
                if x not in (0, 1):
                    raise ValueError('adjacency entries must be 0 or 1')
                if x:
                    mask |= 1 << j
            out.append(mask)
        return cls(n, tuple(out))

    @classmethod
    def empty(cls, n: int) -> 'Digraph':
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> 'Digraph':
        """Complete digraph: both directions between every pair."""
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def cycle(cls, n: int) -> 'Digraph':
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    # basic queries

    @cached_property
    def inn(self) -> tuple[int, ...]:
        """In-neighbourhood bitmasks."""
        inn = [0] * self.n
        for u, mask in enumerate(self.out):
            for v in bits(mask):
                inn[v] |= 1 << u
        return tuple(inn)

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple((u, v) for u in range(self.n) for v in bits(self.out[u]))

    @property
    def num_edges(self) -> int:
        return sum(popcount(m) for m in self.out)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.out[u] >> v & 1)

    def out_degree(self, v: int) -> int:
        return popcount(self.out[v])

    def in_degree(self, v: int) -> int:
        return popcount(self.inn[v])

    def degree(self, v: int) -> int:
        return self.out_degree(v) + self.in_degree(v)

    def out_neighbours(self, v: int) -> list[int]:
        return list(bits(self.out[v]))

    def in_neighbours(self, v: int) -> list[int]:
        return list(bits(self.inn[v]))

    @cached_property
    def is_oriented(self) -> bool:
        return all(not (self.out[u] & self.inn[u]) for u in range(self.n))

    @cached_property
    def is_tournament(self) -> bool:
        full = (1 << self.n) - 1
        return all((self.out[u] | self.inn[u]) == full & ~(1 << u) and not (self.out[u] & self.inn[u])
                   for u in range(self.n))

    @cached_property
    def regularity(self) -> Optional[int]:
        """The common semidegree r if every vertex has d+ = d- = r, else None."""
        if self.n == 0:
            return 0
        r = self.out_degree(0)
        for v in range(self.n):
            if self.out_degree(v) != r or self.in_degree(v) != r:
                return None
        return r

    @property
    def is_regular(self) -> bool:
        return self.regularity is not None

    def adjacency_matrix(self) -> list[list[int]]:
        return [[self.out[i] >> j & 1 for j in range(self.n)] for i in range(self.n)]

    # derived digraphs

    def without_edges(self, edges: Iterable[Edge]) -> 'Digraph':
        out = list(self.out)
        for u, v in edges:
            if not out[u] >> v & 1:
                raise ValueError(f'{(u, v)} is not an edge')
            out[u] &= ~(1 << v)
        return Digraph(self.n, tuple(out))

    def with_edges(self, edges: Iterable[Edge]) -> 'Digraph':
        out = list(self.out)
        for u, v in edges:
            if u == v:
                raise ValueError(f'loop at vertex {u}')
            out[u] |= 1 << v
        return Digraph(self.n, tuple(out))

    def restrict(self, vertices: Iterable[int]) -> 'Digraph':
        """Same vertex set, keeping only edges with both ends in ``vertices``."""
        keep = 0
        for v in vertices:
            keep |= 1 << v
        return Digraph(self.n, tuple(m & keep if keep >> u & 1 else 0 for u, m in enumerate(self.out)))

    def relabel(self, perm: Sequence[int]) -> 'Digraph':
        """Vertex v of self becomes vertex perm[v]."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError('perm must be a permutation of 0..n-1')
        return Digraph.from_edges(self.n, [(perm[u], perm[v]) for u, v in self.edges])

    def reverse(self) -> 'Digraph':
        return Digraph(self.n, self.inn)

    def disjoint_union(self, other: 'Digraph') -> 'Digraph':
        shift = self.n
        return Digraph(self.n + other.n, self.out + tuple(m << shift for m in other.out))


def path_edges(path: Sequence[int]) -> list[Edge]:
    return [(path[i], path[i + 1]) for i in range(len(path) - 1)]


def is_path_in(D: Digraph, path: Sequence[int]) -> bool:
    """True iff ``path`` is a simple directed path of D (trivial paths allowed)."""
    if not path or len(set(path)) != len(path):
        return False
    if any(not 0 <= v < D.n for v in path):
        return False
    return all(D.has_edge(u, v) for u, v in path_edges(path))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    kind: Optional[str] = None
    detail: str = ''

    def __bool__(self) -> bool:
        return self.ok


def _validate_walks(D: Digraph, walks: Sequence[Sequence[int]], closed: bool) -> ValidationReport:
    seen: set[Edge] = set()
    for i, walk in enumerate(walks):
        walk = list(walk)
        if any(not (isinstance(v, int) and 0 <= v < D.n) for v in walk):
            return ValidationReport(False, 'out-of-range', f'walk {i} references a vertex outside 0..{D.n - 1}')
        if len(walk) < 2:
            return ValidationReport(False, 'trivial-path', f'walk {i} has no edges')
        if len(set(walk)) != len(walk):
            dup = next(v for v in walk if walk.count(v) > 1)
            return ValidationReport(False, 'repeated-vertex', f'walk {i} repeats vertex {dup}')
        steps = path_edges(walk) + ([(walk[-1], walk[0])] if closed else [])
        for e in steps:
            if not D.has_edge(*e):
                return ValidationReport(False, 'non-edge', f'walk {i} uses non-edge {e}')
            if e in seen:
                return ValidationReport(False, 'duplicate-edge', f'edge {e} covered twice')
            seen.add(e)
    for e in D.edges:
        if e not in seen:
            return ValidationReport(False, 'uncovered-edge', f'edge {e} uncovered')
    return ValidationReport(True)


def validate_decomposition(D: Digraph, paths: Sequence[Sequence[int]]) -> ValidationReport:
    """Check that ``paths`` are non-trivial simple paths of D covering every edge exactly once."""
    return _validate_walks(D, paths, closed=False)


def validate_cycle_decomposition(D: Digraph, cycles: Sequence[Sequence[int]]) -> ValidationReport:
    """Same as validate_decomposition for cycles given as vertex sequences without the repeated start."""
    return _validate_walks(D, cycles, closed=True)


# generators

def transitive_tournament(n: int) -> Digraph:
    """TT_n with i -> j for all i < j; vertex 0 is the source."""
    return Digraph(n, tuple(((1 << n) - 1) & ~((1 << (i + 1)) - 1) for i in range(n)))


def gen_regular_tournament(n: int) -> Digraph:
    """Rotational regular tournament: i beats i+1, ..., i+(n-1)/2 (mod n)."""
    if n < 1 or n % 2 == 0:
        raise ValueError('a regular tournament needs odd order')
    h = (n - 1) // 2
    return Digraph.from_edges(n, [(i, (i + k) % n) for i in range(n) for k in range(1, h + 1)])


def apex_vertices(n: int) -> tuple[int, int]:
    """Labels (v_plus, v_minus) used by gen_apex."""
    return n - 2, n - 1


def gen_apex(n: int, inner: Optional[Digraph] = None) -> Digraph:
    """
    Apex tournament on n vertices: a regular tournament on 0..n-3, a vertex
    n-2 beating all of it, a vertex n-1 beaten by all of it, and the single
    edge (n-1) -> (n-2).
    """
    if n < 5 or n % 2 == 0:
        raise ValueError('apex tournaments need odd n >= 5')
    if inner is None:
        inner = gen_regular_tournament(n - 2)
    if inner.n != n - 2 or not inner.is_tournament or not inner.is_regular:
        raise ValueError('inner must be a regular tournament on n-2 vertices')
    vp, vm = apex_vertices(n)
    edges = list(inner.edges)
    edges += [(vp, v) for v in range(n - 2)]
    edges += [(v, vm) for v in range(n - 2)]
    edges.append((vm, vp))
    return Digraph.from_edges(n, edges)


def gen_chain_counterexample(m: int, k: int) -> Digraph:
    """
    k rotational regular tournaments on 2m+1 vertices chained in a ring.

    Block i occupies vertices i(2m+1) .. i(2m+1)+2m.  With x_i the first
    vertex of block i and y_i its successor, the edge x_i y_i is replaced by
    x_i y_{i+1}.  The result is an m-regular oriented graph.
    """
    if m < 1 or k < 2:
        raise ValueError('need m >= 1 and k >= 2')
    size = 2 * m + 1
    block = gen_regular_tournament(size)
    edges = []
    for i in range(k):
        base = i * size
        x, y = base, base + 1
        nxt = ((i + 1) % k) * size + 1
        for u, v in block.edges:
            if (base + u, base + v) != (x, y):
                edges.append((base + u, base + v))
        edges.append((x, nxt))
    return Digraph.from_edges(k * size, edges)


def random_tournament(n: int, rng: random.Random) -> Digraph:
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        edges.append((i, j) if rng.random() < 0.5 else (j, i))
    return Digraph.from_edges(n, edges)


def random_digraph(n: int, rng: random.Random, p: float = 0.5, oriented: bool = False,
                   max_edges: Optional[int] = None) -> Digraph:
    """Each ordered pair becomes an edge with probability p (one direction at most if oriented)."""
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if oriented:
            if rng.random() < p:
                edges.append((i, j) if rng.random() < 0.5 else (j, i))
        else:
            if rng.random() < p:
                edges.append((i, j))
            if rng.random() < p:
                edges.append((j, i))
    if max_edges is not None and len(edges) > max_edges:
        edges = rng.sample(edges, max_edges)
    return Digraph.from_edges(n, edges)


# tournament encodings

def tournament_pairs(n: int) -> list[Edge]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def tournament_code(T: Digraph) -> int:
    """Upper-triangle bits in row-major order; bit k is 1 iff the k-th pair (i,j), i<j, has i -> j."""
    if not T.is_tournament:
        raise ValueError('not a tournament')
    code = 0
    for k, (i, j) in enumerate(tournament_pairs(T.n)):
        if T.out[i] >> j & 1:
            code |= 1 << k
    return code


def tournament_from_code(n: int, code: int) -> Digraph:
    pairs = tournament_pairs(n)
    if code < 0 or code >> len(pairs):
        raise FormatError(f'code {code} out of range for n={n}')
    out = [0] * n
    for k, (i, j) in enumerate(pairs):
        if code >> k & 1:
            out[i] |= 1 << j
        else:
            out[j] |= 1 << i
    return Digraph(n, tuple(out))


def _hex_width(n: int) -> int:
    return max(1, (n * (n - 1) // 2 + 3) // 4)


def encode_hex(T: Digraph) -> str:
    return format(tournament_code(T), f'0{_hex_width(T.n)}x')


def decode_hex(n: int, text: str) -> Digraph:
    try:
        code = int(text, 16)
    except ValueError as exc:
        raise FormatError(f'bad hex encoding {text!r}') from exc
    return tournament_from_code(n, code)


def enumerate_tournaments(n: int, cap: int = ENUMERATION_CAP, canonical: bool = False) -> Iterator[Digraph]:
    """
    Every labeled tournament on n vertices, in increasing code order.

    With ``canonical=True`` only tournaments whose code equals their
    canonical code are produced, i.e. one per isomorphism class.
    """
    if n < 0:
        raise ValueError('n must be non-negative')
    if n > cap:
        raise ValueError(f'n={n} exceeds the enumeration cap {cap}')
    for code in range(1 << (n * (n - 1) // 2)):
        T = tournament_from_code(n, code)
        if canonical and canonical_code(T) != code:
            continue
        yield T


def canonical_code(T: Digraph) -> int:
    """Smallest code over all relabelings (brute force, n <= 7)."""
    n = T.n
    if n > ENUMERATION_CAP:
        raise ValueError('canonical form is brute force and capped at n=7')
    pairs = tournament_pairs(n)
    best = None
    for perm in itertools.permutations(range(n)):
        # perm[new] = old
        code = 0
        for k, (i, j) in enumerate(pairs):
            if T.out[perm[i]] >> perm[j] & 1:
                code |= 1 << k
        if best is None or code < best:
            best = code
    return best if best is not None else 0


# text format

def to_text(D: Digraph) -> str:
    lines = [str(D.n)]
    for row in D.adjacency_matrix():
        lines.append(' '.join(map(str, row)))
    return '\n'.join(lines) + '\n'


def from_text(text: str) -> Digraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError('empty input')
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise FormatError('first line must be the vertex count') from exc
    if n < 0 or len(lines) != n + 1:
        raise FormatError(f'expected {n} matrix rows, found {len(lines) - 1}')
    rows = []
    for i, ln in enumerate(lines[1:]):
        tokens = ln.split()
        if len(tokens) == 1 and n > 1 and set(tokens[0]) <= {'0', '1'}:
            tokens = list(tokens[0])
        if len(tokens) != n or any(t not in ('0', '1') for t in tokens):
            raise FormatError(f'row {i} must contain {n} entries in {{0,1}}')
        if tokens[i] != '0':
            raise FormatError(f'diagonal entry ({i},{i}) must be 0')
        rows.append([int(t) for t in tokens])
    return Digraph.from_matrix(rows)


def load_digraph(path) -> Digraph:
    return from_text(FilePath(path).read_text())


def save_digraph(D: Digraph, path) -> None:
    FilePath(path).write_text(to_text(D))
