"""Robust outexpansion on small digraphs, checked over every vertex subset."""

import random
from fractions import Fraction

import numpy as np

from tourndecomp.digraph import Digraph, gen_regular_tournament, random_digraph, transitive_tournament
from tourndecomp.expander import (RobustParams, expansion_failure, hamilton_decomposition,
                                  robust_outexpander_grid, robust_outneighbourhood)

C3 = Digraph.cycle(3)
print('RN_{1/3}({0}) in C3:', sorted(robust_outneighbourhood(C3, {0}, '1/3')))
print('C3 fails at', sorted(expansion_failure(C3, RobustParams('1/3', '1/3'))))

nus = [Fraction(1, 12), Fraction(1, 8), Fraction(1, 6), Fraction(1, 4)]
taus = [Fraction(1, 8), Fraction(1, 6), Fraction(1, 4), Fraction(1, 3)]
grid = [RobustParams(nu, tau) for nu in nus for tau in taus]

for name, D in [('regular 11', gen_regular_tournament(11)), ('transitive 11', transitive_tournament(11)),
                ('random 12', random_digraph(12, random.Random(1), p=0.8))]:
    table = np.array(robust_outexpander_grid(D, grid), dtype=int).reshape(len(nus), len(taus))
    print(f'{name}: rows nu={[str(x) for x in nus]}, cols tau={[str(x) for x in taus]}')
    print(table)

# regular tournaments split into Hamilton cycles
cycles = hamilton_decomposition(gen_regular_tournament(7))
for cyc in cycles:
    print('cycle', cyc)
