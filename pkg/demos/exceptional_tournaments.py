"""Regular and apex tournaments, the two families with pn = texc + 1."""

from tourndecomp.digraph import gen_apex, gen_regular_tournament
from tourndecomp.excess import excess_profile
from tourndecomp.exceptional import apex_characterization, classify
from tourndecomp.solver import pn_exact

for n in (5, 7):
    T = gen_apex(n)
    prof = excess_profile(T)
    c = classify(T)
    print(f'apex n={n}: class={c.kind} witness={c.witness} exc={prof.exc_total} texc={prof.texc} '
          f'pn={pn_exact(T).pn} excess-test={apex_characterization(T)}')

for n in (3, 5, 7, 9):
    R = gen_regular_tournament(n)
    print(f'regular n={n}: texc={excess_profile(R).texc} pn={pn_exact(R).pn}')

# relabelling does not hide an apex tournament
A = gen_apex(7).relabel([6, 4, 2, 0, 1, 3, 5])
print('relabelled apex witness', classify(A).witness)
