"""Coarsest simulation inside an initial preorder, by partition refinement.

The current preorder is kept as a partition of the states plus a boolean
relation over blocks (``rel[C, D]`` means every state of ``D`` simulates every
state of ``C``).  Each main-loop round

1. updates the counters for the pairs removed in the previous round,
2. splits blocks until the partition is the coarsest one that is stable with
   respect to the current preorder (two kinds of splitter transitions), and
3. removes from the relation the block pairs that can no longer simulate,
   recording them per node for the next round.

The round stops when nothing was removed.  Counters are per pair of blocks:
``relcount[B, E]`` is the number of blocks reached from the representative of
``E`` that lie entirely above ``B``.  Work is O(|P_sim| * |->|) and memory is
quadratic in the number of final blocks, not in the number of states.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .model import (InvariantViolation, PartitionRelationPair, TransitionSystem,
                    explicit_relation)
from .partition import RefinablePartition

CHECK_MODES = ("none", "full")


@dataclass
class EngineStats:
    num_states: int = 0
    num_transitions: int = 0
    iterations: int = 0
    final_blocks: int = 0
    nodes_created: int = 0
    relcount_entries: int = 0
    splits: int = 0
    split_rounds: int = 0
    tally: dict[str, int] = field(default_factory=lambda: {
        "simupdate": 0, "split1": 0, "split2": 0, "refine": 0})

    @property
    def loop_total(self) -> int:
        return sum(self.tally.values())

    @property
    def work_scale(self) -> int:
        b = self.final_blocks
        return b * self.num_transitions + b * b + self.num_states + 1

    @property
    def ratio(self) -> float:
        return self.loop_total / self.work_scale

    def report(self) -> str:
        rows = [
            ("states", self.num_states),
            ("transitions", self.num_transitions),
            ("iterations", self.iterations),
            ("final_blocks", self.final_blocks),
            ("nodes_created", self.nodes_created),
            ("relcount_entries", self.relcount_entries),
            ("splits", self.splits),
            ("split_rounds", self.split_rounds),
            ("loop_tally_simupdate", self.tally["simupdate"]),
            ("loop_tally_split1", self.tally["split1"]),
            ("loop_tally_split2", self.tally["split2"]),
            ("loop_tally_refine", self.tally["refine"]),
            ("loop_total", self.loop_total),
            ("ratio", f"{self.ratio:.6f}"),
        ]
        return "".join(f"{k}: {v}\n" for k, v in rows)


class SimEngine:
    """Engine state for one run; see :func:`run` for the usual entry point.

    ``checks="full"`` re-derives the loop invariants with the brute-force
    oracle at every phase and raises :class:`InvariantViolation` on mismatch.
    ``order_rng`` shuffles every free iteration order, for testing.
    """

    def __init__(self, ts: TransitionSystem, prp: PartitionRelationPair,
                 checks: str = "none", order_rng: random.Random | None = None):
        if checks not in CHECK_MODES:
            raise ValueError(f"checks must be one of {CHECK_MODES}")
        if prp.num_states != ts.num_states:
            raise ValueError("preorder and transition system disagree on the number of states")
        self.ts = ts
        self.init_prp = prp
        self.checks = checks
        self.rng = order_rng
        self.stats = EngineStats(num_states=ts.num_states, num_transitions=len(ts))
        self.partition = RefinablePartition.from_blocks(prp.blocks, ts.num_states)
        self.capacity = 0
        self.rel = np.zeros((0, 0), dtype=bool)
        self.relcount = np.zeros((0, 0), dtype=np.int64)
        self.refiner_nodes: list[int] = []
        self._prev: np.ndarray | None = None
        self._init()

    # -- storage -------------------------------------------------------------------

    def _reserve(self, nb: int) -> None:
        if nb <= self.capacity:
            return
        cap = max(4, self.capacity)
        while cap < nb:
            cap *= 2
        rel = np.zeros((cap, cap), dtype=bool)
        cnt = np.zeros((cap, cap), dtype=np.int64)
        k = self.capacity
        rel[:k, :k] = self.rel
        cnt[:k, :k] = self.relcount
        self.rel, self.relcount, self.capacity = rel, cnt, cap

    def _ordered(self, items: list[int]) -> list[int]:
        if self.rng is None:
            return items
        items = list(items)
        self.rng.shuffle(items)
        return items

    def _split(self, marked) -> None:
        order = self.rng.shuffle if self.rng is not None else None
        self.stats.splits += self.partition.split(marked, self._split_update_data, order)

    # -- phases --------------------------------------------------------------------

    def _init(self) -> None:
        p, ts = self.partition, self.ts
        nb = p.num_blocks
        self._reserve(nb)
        for i, j in self.init_prp.rel:
            self.rel[i, j] = True

        # States with a successor can only be simulated by states with one.
        self._split([q for q in range(ts.num_states) if ts.successors[q]])
        nb = p.num_blocks
        active = np.array([bool(ts.successors[p.rep[b]]) for b in range(nb)], dtype=bool)
        self.rel[np.ix_(active, ~active)] = False

        # Without transitions the preorder is already a simulation; the loop is skipped.
        for c in range(nb):
            node = p.block_node[c]
            p.notrel_next[node] = []
            p.notrel[node] = [p.block_node[d] for d in np.flatnonzero(~self.rel[c, :nb])]
            if p.notrel[node] and len(ts):
                self.refiner_nodes.append(node)

        self.relcount[:nb, :nb] = 0
        pred, block_of, rep = ts.predecessors, p.block_of, p.rep
        for e2 in range(nb):
            pre = set()
            for q in p.block_states(e2):
                for e in pred[q]:
                    b = block_of[e]
                    if rep[b] == e:
                        pre.add(b)
            for e in pre:
                self.relcount[:nb, e] += 1

        if self.checks == "full":
            self._prev = oracle.total(ts.num_states)
            init = explicit_relation(self.init_prp)
            sim = oracle.naive_coarsest_simulation(ts, init)
            if not oracle.subset(sim, self.relation()):
                raise InvariantViolation("init dropped a pair of the coarsest simulation")

    def _split_update_data(self, c: int, d: int) -> None:
        p, ts = self.partition, self.ts
        nb = p.num_blocks
        self._reserve(nb)
        rel, cnt = self.rel, self.relcount
        if p.node_begin[p.block_node[d]] <= p.node_end[p.block_node[c]] and \
                p.node_begin[p.block_node[c]] <= p.node_end[p.block_node[d]]:
            raise InvariantViolation(f"nodes of split blocks {c} and {d} overlap")
        p.count[d] = 0

        rel[d, :nb] = rel[c, :nb]
        rel[:nb, d] = rel[:nb, c]

        old_rep = p.rep[c]
        p.rep[d] = old_rep
        cnt[d, :nb] = cnt[c, :nb]
        if p.block_of[old_rep] == c:
            x = d
        else:
            cnt[:nb, d] = cnt[:nb, c]
            x = c

        # Representatives reaching both halves now count one more block.
        pred, block_of, rep = ts.predecessors, p.block_of, p.rep
        touched = set()
        for q in p.block_states(c):
            for e in pred[q]:
                b = block_of[e]
                if rep[b] == e:
                    touched.add(b)
        both = []
        seen = set()
        for q in p.block_states(d):
            for e in pred[q]:
                b = block_of[e]
                if rep[b] == e and b in touched and b not in seen:
                    seen.add(b)
                    both.append(b)
        if both:
            above_c = rel[:nb, c]
            for e in both:
                cnt[:nb, e] += above_c

        # The half that lost the old representative gets a new one and fresh counters.
        rep[x] = p.first_state(x)
        reached = sorted({block_of[q] for q in ts.successors[rep[x]]})
        if reached:
            cnt[:nb, x] = rel[:nb][:, reached].sum(axis=1)
        else:
            cnt[:nb, x] = 0

        for node in (p.block_node[c], p.block_node[d]):
            p.notrel[node] = []
            p.notrel_next[node] = []

    def sim_update_data(self) -> None:
        p, pred = self.partition, self.ts.predecessors
        block_of, rep, cnt = p.block_of, p.rep, self.relcount
        tally = 0
        for node in self._ordered(self.refiner_nodes):
            bp = p.choose_block(node)
            if self.checks == "full" and p.node_size(node) != p.block_size(bp):
                raise InvariantViolation(f"refiner node {node} holds more than one block")
            for nr in p.notrel[node]:
                for e2 in list(p.node_blocks(nr)):
                    pre = set()
                    for q in p.block_states(e2):
                        for e in pred[q]:
                            tally += 1
                            b = block_of[e]
                            if rep[b] == e:
                                pre.add(b)
                    for e in pre:
                        cnt[bp, e] -= 1
                        if cnt[bp, e] < 0:
                            raise InvariantViolation(f"negative counter relcount[{bp}, {e}]")
        self.stats.tally["simupdate"] += tally

    def split1(self) -> None:
        p, pred = self.partition, self.ts.predecessors
        tally = 0
        for node in self._ordered(self.refiner_nodes):
            bp = p.choose_block(node)
            row = self.relcount[bp]
            block_of = p.block_of
            split_needed = False
            for q in p.node_states(node):
                for e in pred[q]:
                    tally += 1
                    if row[block_of[e]] == 0:
                        split_needed = True
            if split_needed:
                marked = []
                for dblk in np.flatnonzero(self.rel[bp, :p.num_blocks]):
                    for q in p.block_states(int(dblk)):
                        marked.extend(pred[q])
                self._split(marked)
        self.stats.tally["split1"] += tally

    def split2(self) -> None:
        p, pred = self.partition, self.ts.predecessors
        count = p.count
        tally = 0
        for node in self._ordered(self.refiner_nodes):
            block_of, rep = p.block_of, p.rep
            touched = []
            for sub in list(p.node_blocks(node)):
                pre = set()
                for q in p.block_states(sub):
                    for e in pred[q]:
                        tally += 1
                        b = block_of[e]
                        if rep[b] == e:
                            pre.add(b)
                for e in pre:
                    if count[e] == 0:
                        touched.append(e)
                    count[e] += 1
            bp = p.choose_block(node)
            row = self.relcount[bp]
            maximal = set()
            for e in touched:
                if row[e] == count[e]:
                    # the transition from e's representative into this node is maximal
                    maximal.add(e)
                count[e] = 0
            if maximal:
                marked = [e for q in p.node_states(node) for e in pred[q] if block_of[e] in maximal]
                self._split(marked)
        self.stats.tally["split2"] += tally

    def split_phase(self) -> None:
        """Run split1 then split2 until a whole round splits nothing.

        A single round is not enough: a split made for one refiner node hands
        a fresh representative to one half, which can expose a splitter
        transition into a node that was already processed.  Every extra round
        is paid for by at least one split.
        """
        full = self.checks == "full"
        while True:
            before = self.stats.splits
            self.split1()
            if full:
                self._check_counters(self.relation(), "after split1")
            self.split2()
            if full:
                self._check_counters(self.relation(), "after split2")
            self.stats.split_rounds += 1
            if self.stats.splits == before:
                return

    def refine(self) -> None:
        p, pred = self.partition, self.ts.predecessors
        rel, cnt = self.rel, self.relcount
        block_of, block_node = p.block_of, p.block_node
        next_nodes: list[int] = []
        staged = set()
        tally = 0
        for node in self._ordered(self.refiner_nodes):
            bp = p.choose_block(node)
            row = cnt[bp]
            remove = set()
            for nr in p.notrel[node]:
                for q in p.node_states(nr):
                    for d in pred[q]:
                        tally += 1
                        dblk = block_of[d]
                        if row[dblk] == 0:
                            remove.add(dblk)
            if remove:
                remove_list = self._ordered(sorted(remove))
                for q in p.node_states(node):
                    for c in pred[q]:
                        cblk = block_of[c]
                        crow = rel[cblk]
                        for dblk in remove_list:
                            tally += 1
                            if crow[dblk]:
                                crow[dblk] = False
                                cnode = block_node[cblk]
                                p.notrel_next[cnode].append(block_node[dblk])
                                if cnode not in staged:
                                    staged.add(cnode)
                                    next_nodes.append(cnode)
            p.notrel[node] = []
        for node in next_nodes:
            p.notrel[node], p.notrel_next[node] = p.notrel_next[node], p.notrel[node]
        self.refiner_nodes = next_nodes
        self.stats.tally["refine"] += tally

    # -- driver --------------------------------------------------------------------

    def run(self) -> PartitionRelationPair:
        full = self.checks == "full"
        while self.refiner_nodes:
            self.stats.iterations += 1
            if full:
                self._check_loop_top()
            self.sim_update_data()
            if full:
                self._check_counters(self.relation(), "after counter update")
            self.split_phase()
            if full:
                self._check_after_split_phase()
            before = self.relation()
            self.refine()
            if full:
                self._check_after_refine(before)
        p = self.partition
        self.stats.final_blocks = p.num_blocks
        self.stats.nodes_created = p.num_nodes
        self.stats.relcount_entries = p.num_blocks * p.num_blocks
        return self.result()

    def result(self) -> PartitionRelationPair:
        p = self.partition
        nb = p.num_blocks
        blocks = tuple(tuple(sorted(p.block_states(b))) for b in range(nb))
        rel = frozenset((int(c), int(d)) for c, d in zip(*np.nonzero(self.rel[:nb, :nb])))
        return PartitionRelationPair(blocks, rel)

    def relation(self) -> np.ndarray:
        """The current preorder expanded to a state relation."""
        idx = np.asarray(self.partition.block_of, dtype=np.intp)
        return self.rel[np.ix_(idx, idx)]

    # -- checks = full ---------------------------------------------------------------

    def _notrel_relation(self) -> np.ndarray:
        p = self.partition
        n = self.ts.num_states
        m = np.zeros((n, n), dtype=bool)
        for node in self.refiner_nodes:
            rows = p.node_states(node)
            for nr in p.notrel[node]:
                m[np.ix_(rows, p.node_states(nr))] = True
        return m

    def _check_loop_top(self) -> None:
        p, ts = self.partition, self.ts
        cur, prev = self.relation(), self._prev
        if not oracle.is_preorder(cur):
            raise InvariantViolation("current relation is not a preorder")
        if not oracle.is_stable(ts, cur, prev):
            raise InvariantViolation("current relation is not stable w.r.t. the previous one")
        # In round 1 the previous relation is Q x Q; _init checks the initial preorder instead.
        sim = oracle.naive_coarsest_simulation(ts, prev) if self.stats.iterations > 1 else cur
        if not oracle.subset(sim, cur):
            raise InvariantViolation(
                f"simulation pair {oracle.first_pair(sim & ~cur)} lost from the relation")
        notrel = self._notrel_relation()
        if not np.array_equal(notrel, prev & ~cur):
            raise InvariantViolation(
                f"recorded removals differ from the relation difference at "
                f"{oracle.first_pair(notrel ^ (prev & ~cur))}")
        current_nodes = {p.block_node[b] for b in range(p.num_blocks)}
        expected = {node for node in current_nodes if p.notrel[node]}
        if set(self.refiner_nodes) != expected or len(self.refiner_nodes) != len(expected):
            raise InvariantViolation("refiner nodes do not match nodes with pending removals")
        for node in self.refiner_nodes:
            if p.node_size(node) != p.block_size(p.choose_block(node)):
                raise InvariantViolation(f"refiner node {node} holds more than one block")
        self._check_counters(prev, "at loop top")

    def _check_counters(self, r: np.ndarray, where: str) -> None:
        p = self.partition
        nb = p.num_blocks
        expect = oracle.relcount_brute(self.ts, p.blocks(), p.rep, r)
        got = self.relcount[:nb, :nb]
        if not np.array_equal(got, expect):
            b, e = oracle.first_pair(got != expect)
            raise InvariantViolation(
                f"counter relcount[{b}, {e}] = {got[b, e]}, expected {expect[b, e]} {where}")

    def _check_after_split_phase(self) -> None:
        p, ts = self.partition, self.ts
        cur = self.relation()
        inv = ts.adjacency().T
        pre_r = oracle.compose(cur, inv)
        for blk in oracle.equivalence_blocks(cur):
            target = pre_r[blk[0]]
            for e in range(p.num_blocks):
                members = p.block_states(e)
                reaches = any(v in blk for q in members for v in ts.successors[q])
                if reaches and not target[p.rep[e]]:
                    raise InvariantViolation(f"type-1 splitter left: block {e} into {blk}")
        want = oracle.coarsest_block_stable_partition(self.ts, cur)
        got = oracle.canonical_blocks(self.partition.blocks())
        if got != want:
            raise InvariantViolation(f"partition {got} is not the coarsest block-stable {want}")

    def _check_after_refine(self, before: np.ndarray) -> None:
        cur = self.relation()
        want = oracle.refine_oracle(self.ts, before, self._prev)
        if not np.array_equal(cur, want):
            raise InvariantViolation(
                f"refined relation differs from the oracle at {oracle.first_pair(cur ^ want)}")
        self._prev = before


def run(ts: TransitionSystem, prp: PartitionRelationPair | None = None, checks: str = "none",
        order_rng: random.Random | None = None) -> PartitionRelationPair:
    """Coarsest simulation inside ``prp`` (default ``Q x Q``), as a partition-relation pair."""
    if prp is None:
        prp = PartitionRelationPair.total(ts.num_states)
    return SimEngine(ts, prp, checks, order_rng).run()


def run_with_stats(ts: TransitionSystem, prp: PartitionRelationPair | None = None,
                   checks: str = "none") -> tuple[PartitionRelationPair, EngineStats]:
    if prp is None:
        prp = PartitionRelationPair.total(ts.num_states)
    engine = SimEngine(ts, prp, checks)
    result = engine.run()
    return result, engine.stats
