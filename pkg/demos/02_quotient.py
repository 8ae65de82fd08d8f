#!/usr/bin/env python
# coding: utf-8

# # Shrinking a system by simulation equivalence
#
# Two states that simulate each other are interchangeable for many
# purposes.  Merging each class into one state gives a smaller system.

from coarsesim import TransitionSystem, quotient, run, serialize_system
from coarsesim import oracle

# A binary tree of depth 3 with dead-end leaves.  Nodes at the same depth
# are interchangeable, so the tree collapses to a path of four states.

edges = []
for parent in range(7):
    edges += [(parent, 2 * parent + 1), (parent, 2 * parent + 2)]
tree = TransitionSystem(15, edges)

classes = run(tree).canonical().blocks
print("classes:", classes)
small = quotient(tree, classes)
print(serialize_system(small))

# ## Checking that nothing was lost
#
# Put the original and the quotient side by side and ask the oracle whether
# each state and its class simulate each other.

n = tree.num_states
union = TransitionSystem(n + small.num_states,
                         list(tree.transitions) + [(u + n, v + n) for u, v in small.transitions])
sim = oracle.naive_coarsest_simulation(union, oracle.total(union.num_states))
print(all(sim[q, n + k] and sim[n + k, q] for k, b in enumerate(classes) for q in b))
