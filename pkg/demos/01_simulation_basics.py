#!/usr/bin/env python
# coding: utf-8

# # Simulation preorders in a few lines
#
# A state `d` simulates a state `c` when every move of `c` can be answered
# by a move of `d` that again lands on a simulating state.  `run` computes the
# coarsest such relation that fits inside an initial preorder.

import numpy as np

from coarsesim import TransitionSystem, explicit_relation, run, serialize_result
from coarsesim import oracle

# ## A chain
#
# `0 -> 1 -> 2`.  The further a state is from the dead end, the more it can do.

chain = TransitionSystem(3, [(0, 1), (1, 2)])
result = run(chain)
print(serialize_result(result))

# Every state ends up in its own block; the `rel` lines say block 1 is below
# block 0, block 2 below both.  As a state relation:

m = explicit_relation(result)
print(m.astype(int))

# ## Two states with the same future
#
# `0 -> 2` and `1 -> 2`: nothing tells 0 and 1 apart, so they share a block.

fork = TransitionSystem(3, [(0, 2), (1, 2)])
print(serialize_result(run(fork)))

# ## Cross-checking with the brute-force fixpoint
#
# The oracle deletes violating pairs until nothing changes.  It is far slower
# but easy to trust, so it makes a good referee on small random systems.

rng = np.random.default_rng(0)
for trial in range(200):
    n = int(rng.integers(1, 7))
    arcs = [(u, v) for u in range(n) for v in range(n) if rng.random() < 0.3]
    ts = TransitionSystem(n, arcs)
    fast = explicit_relation(run(ts))
    slow = oracle.naive_coarsest_simulation(ts, oracle.total(n))
    assert np.array_equal(fast, slow), trial
print("200 random systems agree with the oracle")

# ## Starting from labels
#
# An initial preorder restricts which states may simulate which.  Labels are
# the usual source: only equally labelled states are comparable.

from coarsesim import parse_problem

text = """
ts 4
0 1
2 3
end
label 0 a
label 1 b
label 2 a
label 3 c
"""
ts, init = parse_problem(text)
print(serialize_result(run(ts, init)))
# 0 and 2 carry the same label, but their successors do not, so they stay apart.
