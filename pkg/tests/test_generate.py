import random

import pytest

from coarsesim import oracle
from coarsesim.generate import random_instance, random_preorder, random_problem_text
from coarsesim.model import explicit_relation, parse_problem


def test_explicit_mode_always_parses():
    for seed in range(1000):
        n = seed % 9
        ts, prp = parse_problem(random_problem_text(seed, n, (seed * 7) % (n * n + 1), "explicit"))
        assert oracle.is_preorder(explicit_relation(prp))


def test_same_seed_same_text():
    assert random_problem_text(42, 5, 9, "labels") == random_problem_text(42, 5, 9, "labels")
    assert random_problem_text(42, 5, 9, "labels") != random_problem_text(43, 5, 9, "labels")


def test_labels_mode():
    ts, prp = parse_problem(random_problem_text(3, 6, 4, "labels"))
    assert all((i, i) in prp.rel for i in range(len(prp.blocks)))
    assert len(prp.rel) == len(prp.blocks)


@pytest.mark.parametrize("n, m", [(2, 5), (-1, 0), (3, -1)])
def test_bad_sizes(n, m):
    with pytest.raises(ValueError):
        random_problem_text(0, n, m)


def test_bad_mode():
    with pytest.raises(ValueError):
        random_problem_text(0, 2, 1, "chaos")


def test_random_preorder_is_closed():
    rng = random.Random(5)
    for _ in range(200):
        prp = random_preorder(rng, rng.randint(1, 9))
        assert oracle.is_preorder(explicit_relation(prp))


def test_random_instance_sizes():
    for seed in range(100):
        ts, prp = random_instance(seed, max_states=5)
        assert 1 <= ts.num_states <= 5
        assert prp.num_states == ts.num_states
