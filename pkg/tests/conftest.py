import random

from hypothesis import strategies as st

from coarsesim.generate import random_preorder
from coarsesim.model import TransitionSystem

CHAIN = TransitionSystem(3, [(0, 1), (1, 2)])
FORK = TransitionSystem(3, [(0, 2), (1, 2)])


@st.composite
def systems(draw, max_states=6, min_states=1):
    n = draw(st.integers(min_states, max_states))
    if n == 0:
        return TransitionSystem(0)
    arcs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                        max_size=n * n))
    return TransitionSystem(n, arcs)


@st.composite
def problems(draw, max_states=6):
    """A system with a random explicit initial preorder."""
    ts = draw(systems(max_states))
    seed = draw(st.integers(0, 2**32))
    return ts, random_preorder(random.Random(seed), ts.num_states)
