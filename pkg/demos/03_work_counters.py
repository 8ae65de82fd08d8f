#!/usr/bin/env python
# coding: utf-8

# # How much work does a run take?
#
# The engine counts executions of its inner loops.  Dividing by
# `blocks * transitions + blocks**2 + states + 1` gives a ratio that should
# stay flat as systems grow.

from coarsesim import parse_problem, run_with_stats
from coarsesim.generate import random_problem_text

for n in (50, 100, 200, 400):
    ratios = []
    for seed in range(5):
        ts, init = parse_problem(random_problem_text(seed, n, 4 * n, "labels"))
        _, stats = run_with_stats(ts, init)
        ratios.append(stats.ratio)
    print(f"{n:4d} states  blocks {stats.final_blocks:4d}  "
          f"iterations {stats.iterations}  mean ratio {sum(ratios) / len(ratios):.3f}")

# The full report for the last run, as printed by `coarsesim stats`:

print(stats.report())
