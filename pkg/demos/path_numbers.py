"""Path numbers of small tournaments next to the texc lower bound."""

from collections import Counter

from tourndecomp.digraph import Digraph, enumerate_tournaments, transitive_tournament
from tourndecomp.excess import excess_profile
from tourndecomp.exceptional import classify
from tourndecomp.solver import pn_exact

# a directed triangle: no excess anywhere, but one path cannot cover a cycle
C3 = Digraph.cycle(3)
res = pn_exact(C3)
print('C3 pn =', res.pn, 'paths', res.certificate)
print('C3 profile', excess_profile(C3).to_dict())

# transitive tournaments are consistent: pn = exc = floor(n^2/4)
for n in range(3, 9):
    T = transitive_tournament(n)
    print(f'TT_{n}: pn={pn_exact(T).pn} exc={excess_profile(T).exc_total}')

# every tournament on 5 vertices, grouped by class and gap pn - texc
gaps = Counter()
for T in enumerate_tournaments(5):
    gaps[classify(T).kind, pn_exact(T).pn - excess_profile(T).texc] += 1
for (kind, gap), count in sorted(gaps.items()):
    print(f'{kind:8s} gap {gap}: {count}')
