"""
Excess of a digraph.

exc(v) = d+(v) - d-(v).  The global excess exc(D) is the total positive
excess, which equals the total negative excess.  Together with the maximum
semidegree it gives texc(D) = max(exc(D), max semidegree), a lower bound for
the number of paths in any path decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .digraph import Digraph, popcount

__all__ = ['ExcessProfile', 'excess_profile', 'degree_identities', 'even_order_facts',
           'exc_of_set', 'texc', 'total_excess', 'max_semidegree']


@dataclass(frozen=True)
class ExcessProfile:
    exc: tuple[int, ...]
    exc_plus: tuple[int, ...]
    exc_minus: tuple[int, ...]
    u_plus: frozenset[int]
    u_minus: frozenset[int]
    u_zero: frozenset[int]
    delta0: int
    exc_total: int
    texc: int
    n_plus: int
    n_minus: int

    def to_dict(self) -> dict:
        return {
            'exc': list(self.exc),
            'exc_plus': list(self.exc_plus),
            'exc_minus': list(self.exc_minus),
            'u_plus': sorted(self.u_plus),
            'u_minus': sorted(self.u_minus),
            'u_zero': sorted(self.u_zero),
            'delta0': self.delta0,
            'exc_total': self.exc_total,
            'texc': self.texc,
            'n_plus': self.n_plus,
            'n_minus': self.n_minus,
        }


def excess_profile(D: Digraph) -> ExcessProfile:
    outdeg = [popcount(m) for m in D.out]
    indeg = [popcount(m) for m in D.inn]
    exc = tuple(o - i for o, i in zip(outdeg, indeg))
    plus = tuple(max(0, e) for e in exc)
    minus = tuple(max(0, -e) for e in exc)
    total = sum(plus)
    delta0 = max([0] + outdeg + indeg)
    t = max(total, delta0)
    u_plus = frozenset(v for v, e in enumerate(exc) if e > 0)
    u_minus = frozenset(v for v, e in enumerate(exc) if e < 0)
    u_zero = frozenset(v for v, e in enumerate(exc) if e == 0)
    return ExcessProfile(exc, plus, minus, u_plus, u_minus, u_zero, delta0, total, t,
                         len(u_plus) + t - total, len(u_minus) + t - total)


def total_excess(D: Digraph) -> int:
    return sum(max(0, popcount(D.out[v]) - popcount(D.inn[v])) for v in range(D.n))


def max_semidegree(D: Digraph) -> int:
    return max([0] + [popcount(m) for m in D.out] + [popcount(m) for m in D.inn])


def texc(D: Digraph) -> int:
    return max(total_excess(D), max_semidegree(D))


def exc_of_set(D: Digraph, S: Iterable[int], sign: int) -> int:
    """Sum of exc^+ (sign=+1) or exc^- (sign=-1) over the vertices of S."""
    total = 0
    for v in S:
        e = popcount(D.out[v]) - popcount(D.inn[v])
        total += max(0, sign * e)
    return total


def degree_identities(D: Digraph, v: int) -> tuple[int, int]:
    """(d_min, d_max) at v, computed from the degree and the excess."""
    d = D.degree(v)
    e = abs(D.out_degree(v) - D.in_degree(v))
    d_min, d_max = (d - e) // 2, (d + e) // 2
    assert d_min == min(D.out_degree(v), D.in_degree(v))
    assert d_max == max(D.out_degree(v), D.in_degree(v))
    return d_min, d_max


def even_order_facts(T: Digraph) -> ExcessProfile:
    """For an even-order tournament, check texc = exc and that no vertex has zero excess."""
    if not T.is_tournament:
        raise ValueError('not a tournament')
    if T.n % 2:
        raise ValueError('tournament has odd order')
    prof = excess_profile(T)
    if prof.texc != prof.exc_total or prof.u_zero:
        raise AssertionError('even-order tournament with texc != exc or a balanced vertex')
    return prof
