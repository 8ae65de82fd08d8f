import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsesim import oracle
from coarsesim.model import InputError, TransitionSystem, explicit_relation, init_refine

from conftest import CHAIN, problems

CHAIN_SIM = {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0), (2, 1)}


def chain_r1():
    r = oracle.total(3)
    r[0, 2] = r[1, 2] = False
    return r


def random_subpartition(rng, r):
    """Split each block of ``r`` at random."""
    out = []
    for blk in oracle.equivalence_blocks(r):
        k = rng.randint(1, len(blk))
        parts = [[] for _ in range(k)]
        for q in blk:
            parts[rng.randrange(k)].append(q)
        out += [p for p in parts if p]
    return out


class TestSimulation:
    def test_empty_and_identity(self):
        assert oracle.is_simulation(CHAIN, np.zeros((3, 3), dtype=bool))
        assert oracle.is_simulation(CHAIN, oracle.identity(3))

    def test_chain_counterexample(self):
        rel = oracle.from_pairs(3, {(0, 0), (1, 1), (2, 2), (0, 1)})
        assert not oracle.is_simulation(CHAIN, rel)

    def test_chain_fixpoint(self):
        assert oracle.pairs(oracle.naive_coarsest_simulation(CHAIN, oracle.total(3))) == CHAIN_SIM

    def test_no_transitions_and_identity(self):
        ts = TransitionSystem(3)
        init = oracle.from_pairs(3, {(0, 0), (1, 1), (2, 2), (0, 1)})
        assert np.array_equal(oracle.naive_coarsest_simulation(ts, init), init)
        assert np.array_equal(oracle.naive_coarsest_simulation(CHAIN, oracle.identity(3)),
                              oracle.identity(3))

    def test_rejects_non_preorder(self):
        with pytest.raises(InputError):
            oracle.naive_coarsest_simulation(CHAIN, np.zeros((3, 3), dtype=bool))

    @given(problems())
    def test_greatest(self, problem):
        ts, prp = problem
        init = explicit_relation(prp)
        s = oracle.naive_coarsest_simulation(ts, init)
        assert oracle.is_simulation(ts, s)
        assert oracle.subset(s, init)
        assert oracle.is_preorder(s)
        for q, r in oracle.pairs(init & ~s):
            grown = s.copy()
            grown[q, r] = True
            assert not oracle.is_simulation(ts, grown)


class TestMaximal:
    def test_identity_keeps_everything(self):
        assert np.array_equal(oracle.maximal_transitions(CHAIN, oracle.identity(3)),
                              CHAIN.adjacency())

    def test_smaller_target_not_maximal(self):
        ts = TransitionSystem(3, [(0, 1), (0, 2)])
        r = oracle.from_pairs(3, {(0, 0), (1, 1), (2, 2), (2, 1)})
        assert oracle.pairs(oracle.maximal_transitions(ts, r)) == {(0, 1)}

    @given(problems())
    def test_composition_identities(self, problem):
        ts, prp = problem
        r = explicit_relation(prp)
        inv = ts.adjacency().T
        max_inv = oracle.maximal_transitions(ts, r).T
        assert oracle.subset(inv, oracle.compose(r, max_inv))
        assert np.array_equal(oracle.compose(r, inv), oracle.compose(r, max_inv))


class TestStability:
    def test_total_is_not_stable_on_chain(self):
        assert not oracle.is_stable(CHAIN, oracle.total(3), oracle.total(3))

    def test_simulation_is_self_stable(self):
        s = oracle.from_pairs(3, CHAIN_SIM)
        assert oracle.is_stable(CHAIN, s, s)

    def test_requires_inclusion(self):
        with pytest.raises(InputError):
            oracle.is_stable(CHAIN, oracle.total(3), oracle.identity(3))

    def test_chain_block_forms(self):
        assert oracle.block_stability_forms(CHAIN, [[0, 1], [2]], chain_r1()) == (False,) * 3

    @given(problems())
    def test_singletons_are_block_stable(self, problem):
        ts, prp = problem
        singles = [[q] for q in range(ts.num_states)]
        assert oracle.is_block_stable(ts, singles, explicit_relation(prp))

    @settings(max_examples=300)
    @given(problems(), st.integers(0, 2**32))
    def test_three_forms_agree(self, problem, seed):
        ts, prp = problem
        r = explicit_relation(prp)
        p = random_subpartition(random.Random(seed), r)
        same, form2, form3 = oracle.block_stability_forms(ts, p, r)
        assert same == form2 == form3

    @given(problems())
    def test_coarsest_partition(self, problem):
        ts, prp = problem
        r = explicit_relation(prp)
        blocks = oracle.coarsest_block_stable_partition(ts, r)
        assert oracle.is_block_stable(ts, blocks, r)
        # refines the blocks of r
        own = oracle.equivalence_blocks(r)
        assert all(any(set(b) <= set(o) for o in own) for b in blocks)

    @given(problems())
    def test_simulation_keeps_own_blocks(self, problem):
        ts, prp = problem
        s = oracle.naive_coarsest_simulation(ts, explicit_relation(prp))
        assert oracle.coarsest_block_stable_partition(ts, s) == \
            oracle.canonical_blocks(oracle.equivalence_blocks(s))

    def test_identity_partition(self):
        assert oracle.coarsest_block_stable_partition(CHAIN, oracle.identity(3)) == [[0], [1], [2]]


class TestRefine:
    def test_chain_step(self):
        r1 = chain_r1()
        v = oracle.refine_oracle(CHAIN, r1, oracle.total(3))
        assert oracle.pairs(v) == CHAIN_SIM
        assert oracle.pairs(oracle.notrel_product_form(CHAIN, r1, oracle.total(3))) == {(0, 1)}
        assert np.array_equal(oracle.notrel_maximal_form(CHAIN, r1, oracle.total(3)),
                              oracle.notrel_product_form(CHAIN, r1, oracle.total(3)))

    def test_simulation_is_fixed(self):
        s = oracle.from_pairs(3, CHAIN_SIM)
        assert np.array_equal(oracle.refine_oracle(CHAIN, s, chain_r1()), s)

    def test_reports_unstable_input(self):
        _, report = oracle.refine_report(CHAIN, oracle.total(3), oracle.total(3))
        assert not report.passed
        assert report.violations[0][0] == "precondition"

    @given(problems())
    def test_iterated_refinement_reaches_simulation(self, problem):
        ts, prp = problem
        u = oracle.total(ts.num_states)
        r = explicit_relation(init_refine(prp, ts))
        while True:
            v = oracle.refine_oracle(ts, r, u)
            if np.array_equal(v, r):
                break
            u, r = r, v
        assert np.array_equal(r, oracle.naive_coarsest_simulation(ts, explicit_relation(prp)))


class TestTransitivityFacts:
    @given(problems())
    def test_blocks_related_wholesale(self, problem):
        ts, prp = problem
        r = explicit_relation(prp)
        blocks = oracle.equivalence_blocks(r)
        for x in blocks:
            for y in blocks:
                sub = r[np.ix_(x, y)]
                assert sub.all() or not sub.any()

    @given(problems(), st.integers(0, 2**32))
    def test_counter_independent_of_subset(self, problem, seed):
        ts, prp = problem
        rng = random.Random(seed)
        r = explicit_relation(prp)
        blocks = oracle.equivalence_blocks(r)
        reps = [rng.choice(b) for b in blocks]
        full = oracle.relcount_brute(ts, blocks, reps, r)
        for i, b in enumerate(blocks):
            sub = rng.sample(b, rng.randint(1, len(b)))
            owner = {q: j for j, blk in enumerate(blocks) for q in blk}
            for e in range(len(blocks)):
                reached = {owner[q] for q in ts.successors[reps[e]]}
                count = sum(1 for t in reached if r[np.ix_(sub, blocks[t])].all())
                assert count == full[i, e]
