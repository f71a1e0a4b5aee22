import random

from hypothesis import strategies as st

from tourndecomp.digraph import Digraph, tournament_from_code


@st.composite
def digraphs(draw, max_n=6, max_edges=None):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=max_edges)) if pairs else []
    return Digraph.from_edges(n, chosen)


@st.composite
def tournaments(draw, min_n=1, max_n=7):
    n = draw(st.integers(min_n, max_n))
    code = draw(st.integers(0, (1 << (n * (n - 1) // 2)) - 1))
    return tournament_from_code(n, code)


def rng(seed=0):
    return random.Random(seed)
