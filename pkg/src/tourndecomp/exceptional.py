"""
Regular and apex tournaments.

An apex tournament consists of a regular tournament on V_0 (n-2 vertices)
together with a vertex v_plus beating all of V_0, a vertex v_minus beaten
by all of V_0, and the edge v_minus -> v_plus.  Regular and apex tournaments
are exactly the tournaments whose path number exceeds texc.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .digraph import Digraph, popcount

__all__ = ['REGULAR', 'APEX', 'GENERIC', 'TournamentClass', 'classify', 'apex_witness',
           'apex_characterization', 'is_exceptional']

REGULAR = 'Regular'
APEX = 'Apex'
GENERIC = 'Generic'


@dataclass(frozen=True)
class TournamentClass:
    kind: str
    witness: Optional[tuple[int, int]] = None

    def __str__(self) -> str:
        return self.kind


def _require_tournament(T: Digraph) -> None:
    if not T.is_tournament:
        raise ValueError('input is not a tournament')


def _apex_witness(n: int, out: tuple[int, ...], inn: tuple[int, ...]) -> Optional[tuple[int, int]]:
    if n < 5 or n % 2 == 0:
        return None
    full = (1 << n) - 1
    half = (n - 3) // 2
    for vp in range(n):
        for vm in range(n):
            if vp == vm:
                continue
            rest = full & ~(1 << vp) & ~(1 << vm)
            if out[vp] != rest or inn[vm] != rest or not out[vm] >> vp & 1:
                continue
            if all(popcount(out[v] & rest) == half for v in range(n) if rest >> v & 1):
                return vp, vm
    return None


def apex_witness(T: Digraph) -> Optional[tuple[int, int]]:
    """(v_plus, v_minus) if T is an apex tournament, else None."""
    _require_tournament(T)
    return _apex_witness(T.n, T.out, T.inn)


def classify(T: Digraph) -> TournamentClass:
    _require_tournament(T)
    if T.n < 3:
        raise ValueError('classification needs at least 3 vertices')
    if T.is_regular:
        return TournamentClass(REGULAR)
    w = _apex_witness(T.n, T.out, T.inn)
    if w is not None:
        return TournamentClass(APEX, w)
    return TournamentClass(GENERIC)


def is_exceptional(T: Digraph) -> bool:
    return classify(T).kind != GENERIC


def apex_characterization(T: Digraph) -> bool:
    """
    Excess-only test: exactly one vertex of positive and one of negative
    excess, joined by an edge from the negative to the positive one, and
    texc - exc < 2.
    """
    _require_tournament(T)
    n = T.n
    exc = [popcount(T.out[v]) - popcount(T.inn[v]) for v in range(n)]
    plus = [v for v in range(n) if exc[v] > 0]
    minus = [v for v in range(n) if exc[v] < 0]
    if len(plus) != 1 or len(minus) != 1:
        return False
    if not T.out[minus[0]] >> plus[0] & 1:
        return False
    total = exc[plus[0]]
    delta0 = max(max(popcount(m) for m in T.out), max(popcount(m) for m in T.inn))
    return max(total, delta0) - total < 2
