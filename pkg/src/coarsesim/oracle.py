"""Brute-force reference implementations over dense boolean relation matrices.

A relation over ``n`` states is an ``(n, n)`` boolean array ``M`` with
``M[q, r]`` meaning ``q`` is related to ``r``.  ``compose(first, then)`` is the
relation "apply ``first``, then ``then``"; the inverse transition relation is
the transpose of :meth:`TransitionSystem.adjacency`.

Everything here is deliberately naive and meant for a few dozen states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import InputError, InvariantViolation, TransitionSystem


@dataclass
class OracleReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, name: str, witness: str) -> None:
        self.violations.append((name, witness))

    def raise_if_failed(self) -> None:
        if self.violations:
            lines = "; ".join(f"{n}: {w}" for n, w in self.violations)
            raise InvariantViolation(lines)


def compose(first: np.ndarray, then: np.ndarray) -> np.ndarray:
    return (first.astype(np.int64) @ then.astype(np.int64)) > 0


def subset(a: np.ndarray, b: np.ndarray) -> bool:
    return not (a & ~b).any()


def first_pair(m: np.ndarray) -> tuple[int, int] | None:
    idx = np.argwhere(m)
    return None if len(idx) == 0 else (int(idx[0][0]), int(idx[0][1]))


def total(n: int) -> np.ndarray:
    return np.ones((n, n), dtype=bool)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=bool)


def is_preorder(m: np.ndarray) -> bool:
    return bool(m.diagonal().all()) and subset(compose(m, m), m)


def pairs(m: np.ndarray) -> set[tuple[int, int]]:
    return {(int(a), int(b)) for a, b in zip(*np.nonzero(m))}


def from_pairs(n: int, ps) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    for a, b in ps:
        m[a, b] = True
    return m


def equivalence_blocks(m: np.ndarray) -> list[list[int]]:
    """Classes of ``m & m.T`` ordered by minimum state."""
    eq = m & m.T
    owner = [-1] * m.shape[0]
    out = []
    for q in range(m.shape[0]):
        if owner[q] < 0:
            members = [int(r) for r in np.flatnonzero(eq[q])]
            for r in members:
                owner[r] = len(out)
            out.append(members)
    return out


def partition_matrix(n: int, blocks: Sequence[Sequence[int]]) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    for b in blocks:
        idx = np.asarray(list(b), dtype=np.intp)
        m[np.ix_(idx, idx)] = True
    return m


def canonical_blocks(blocks) -> list[list[int]]:
    return sorted(sorted(int(q) for q in b) for b in blocks)


# -- simulations -----------------------------------------------------------------

def is_simulation(ts: TransitionSystem, rel: np.ndarray) -> bool:
    """Pointwise check: every move of ``q`` is matched by each ``q'`` related to it."""
    for q, q2 in zip(*np.nonzero(rel)):
        for q1 in ts.successors[q]:
            if not any(rel[q1, r] for r in ts.successors[q2]):
                return False
    return True


def naive_coarsest_simulation(ts: TransitionSystem, init: np.ndarray) -> np.ndarray:
    """Greatest simulation inside the preorder ``init``, by repeated pair deletion."""
    if not is_preorder(init):
        raise InputError("initial relation is not a preorder")
    adj = ts.adjacency()
    s = init.copy()
    while True:
        # matched[q1, q'] : q' has a successor r with (q1, r) in s
        matched = compose(s, adj.T)
        bad = compose(adj, ~matched) & s
        if not bad.any():
            return s
        s &= ~bad


def maximal_transitions(ts: TransitionSystem, r: np.ndarray) -> np.ndarray:
    """Transitions ``q -> q'`` with no successor of ``q`` strictly above ``q'``."""
    adj = ts.adjacency()
    strict = r & ~r.T
    return adj & ~compose(adj, strict.T)


def is_stable(ts: TransitionSystem, r: np.ndarray, u: np.ndarray) -> bool:
    """Whether ``r`` composed after inverse transitions lands in inverse transitions then ``u``."""
    if not subset(r, u):
        raise InputError("r is not included in u")
    inv = ts.adjacency().T
    return subset(compose(inv, r), compose(u, inv))


def block_stability_forms(ts: TransitionSystem, blocks, r: np.ndarray) -> tuple[bool, bool, bool]:
    """Evaluate the three equivalent block-stability formulations.

    1. equivalent states agree on membership in every predecessor-of-``r(b)`` set;
    2. ``P`` after inverse transitions is inside inverse transitions after ``r``;
    3. the same with maximal transitions on the left and ``r``'s blocks on the right.
    """
    n = ts.num_states
    p = partition_matrix(n, blocks)
    if not subset(p, r & r.T):
        raise InputError("partition is not included in the preorder")
    inv = ts.adjacency().T
    pre_r = compose(r, inv)  # row b: states with a transition into r(b)
    same = True
    for b in blocks:
        cols = pre_r[:, list(b)]
        if not (cols == cols[:, :1]).all():
            same = False
            break
    form2 = subset(compose(inv, p), compose(r, inv))
    max_inv = maximal_transitions(ts, r).T
    form3 = subset(compose(max_inv, p), compose(r & r.T, inv))
    return same, form2, form3


def is_block_stable(ts: TransitionSystem, blocks, r: np.ndarray, cross_check: bool = True) -> bool:
    same, form2, form3 = block_stability_forms(ts, blocks, r)
    if cross_check and not same == form2 == form3:
        raise InvariantViolation(
            f"block-stability formulations disagree: {(same, form2, form3)}")
    return same


def coarsest_block_stable_partition(ts: TransitionSystem, r: np.ndarray) -> list[list[int]]:
    """Split the blocks of ``r`` on each predecessor-of-``r(b)`` set until nothing changes."""
    inv = ts.adjacency().T
    pre_r = compose(r, inv)
    blocks = [set(b) for b in equivalence_blocks(r)]
    changed = True
    while changed:
        changed = False
        for b in range(ts.num_states):
            pred = set(int(q) for q in np.flatnonzero(pre_r[b]))
            nxt = []
            for blk in blocks:
                inside, outside = blk & pred, blk - pred
                if inside and outside:
                    nxt += [inside, outside]
                    changed = True
                else:
                    nxt.append(blk)
            blocks = nxt
    return canonical_blocks(blocks)


# -- refinement step -------------------------------------------------------------

def notrel_product_form(ts: TransitionSystem, r: np.ndarray, u: np.ndarray,
                        blocks=None) -> np.ndarray:
    """Pairs to delete from ``r``: block products over plain transitions."""
    n = ts.num_states
    if blocks is None:
        blocks = coarsest_block_stable_partition(ts, r)
    pb = partition_matrix(n, blocks)
    inv = ts.adjacency().T
    notrel = u & ~r
    pre_notrel = compose(notrel, inv)
    pre_r = compose(r, inv)
    out = np.zeros((n, n), dtype=bool)
    for c, b in ts.transitions:
        ds = r[c] & pre_notrel[b] & ~pre_r[b]
        if ds.any():
            cols = pb[ds].any(axis=0)
            out[np.ix_(pb[c], cols)] = True
    return out


def notrel_maximal_form(ts: TransitionSystem, r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Pairs to delete from ``r``: single pairs over maximal transitions."""
    n = ts.num_states
    mx = maximal_transitions(ts, r)
    notrel = u & ~r
    pre_notrel = compose(notrel, mx.T)
    pre_r = compose(r, mx.T)
    out = np.zeros((n, n), dtype=bool)
    for c, b in zip(*np.nonzero(mx)):
        out[c] |= r[c] & pre_notrel[b] & ~pre_r[b]
    return out


def refine_report(ts: TransitionSystem, r: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, OracleReport]:
    """One refinement step from the ``u``-stable preorder ``r``, with its consequences checked."""
    report = OracleReport()
    if not (is_preorder(r) and is_preorder(u)):
        report.add("precondition", "r and u must be preorders")
        return r.copy(), report
    if not subset(r, u):
        report.add("precondition", f"r not inside u at {first_pair(r & ~u)}")
        return r.copy(), report
    if not is_stable(ts, r, u):
        report.add("precondition", "r is not u-stable")
    blocks = coarsest_block_stable_partition(ts, r)
    product = notrel_product_form(ts, r, u, blocks)
    maximal = notrel_maximal_form(ts, r, u)
    if not np.array_equal(product, maximal):
        report.add("product form == maximal form", str(first_pair(product ^ maximal)))
    v = r & ~product
    inv = ts.adjacency().T
    if not subset(compose(inv, v), compose(r, inv)):
        report.add("v after inverse transitions", "not inside inverse transitions after r")
    if not is_preorder(v):
        report.add("v is a preorder", "fails")
    elif not is_stable(ts, v, r):
        report.add("v is r-stable", "fails")
    if canonical_blocks(equivalence_blocks(v)) != blocks:
        report.add("blocks of v", "differ from the coarsest block-stable partition")
    return v, report


def refine_oracle(ts: TransitionSystem, r: np.ndarray, u: np.ndarray) -> np.ndarray:
    v, report = refine_report(ts, r, u)
    report.raise_if_failed()
    return v


# -- counters --------------------------------------------------------------------

def relcount_brute(ts: TransitionSystem, blocks: Sequence[Sequence[int]], reps: Sequence[int],
                   r: np.ndarray) -> np.ndarray:
    """``out[b, e]``: blocks reached from ``reps[e]`` whose states all sit above ``blocks[b]``."""
    k = len(blocks)
    owner = {}
    for i, b in enumerate(blocks):
        for q in b:
            owner[q] = i
    out = np.zeros((k, k), dtype=np.int64)
    for e in range(k):
        reached = {owner[q] for q in ts.successors[reps[e]]}
        for b in range(k):
            rows = list(blocks[b])
            out[b, e] = sum(1 for t in reached if r[np.ix_(rows, list(blocks[t]))].all())
    return out
