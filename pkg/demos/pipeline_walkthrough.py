"""Run the decomposition pipeline on random tournaments and compare with the exact solver."""

import json
import random

from tourndecomp.digraph import random_tournament, validate_decomposition
from tourndecomp.pipeline import PipelineConfig, decompose, random_nice_instance, complete_decomposition
from tourndecomp.solver import pn_exact

rng = random.Random(2024)

# the final step on its own: r Hamilton cycles minus a vertex give r spanning paths
D, W1, A, Xp, Xm, Xs, X0 = random_nice_instance(9, 3, rng)
for p in complete_decomposition(D, W1, A, Xp, Xm, Xs, X0, 3):
    print('completion path', p)

T = random_tournament(11, rng)
res = decompose(T, PipelineConfig(seed=1))
print('n=11 size', res.size, 'texc', res.texc, 'fallback', res.fallback_stage,
      'valid', validate_decomposition(T, res.paths).ok)
for step in res.trace:
    print(json.dumps(step))

hits = 0
for k in range(20):
    T = random_tournament(rng.randint(9, 13), rng)
    res = decompose(T, PipelineConfig(seed=k))
    hits += res.fallback_stage is None and res.size == pn_exact(T).pn
print(f'pipeline reached pn on {hits}/20 random tournaments')
