"""Seeded random problem instances.

All randomness comes from ``random.Random(seed)`` (Mersenne Twister MT19937),
so a seed and a configuration always produce the same instance.
"""

from __future__ import annotations

import random

from .model import PartitionRelationPair, TransitionSystem, serialize_system

PREORDER_MODES = ("qxq", "labels", "explicit")
LABEL_ALPHABET = "abc"


def random_system(rng: random.Random, num_states: int, num_arcs: int) -> TransitionSystem:
    """``num_arcs`` distinct transitions drawn uniformly without replacement."""
    if num_states < 0 or num_arcs < 0 or num_arcs > num_states * num_states:
        raise ValueError(f"cannot draw {num_arcs} transitions over {num_states} states")
    picks = rng.sample(range(num_states * num_states), num_arcs)
    return TransitionSystem(num_states, (divmod(i, num_states) for i in picks))


def random_labels(rng: random.Random, num_states: int) -> list[str]:
    return [rng.choice(LABEL_ALPHABET) for _ in range(num_states)]


def random_preorder(rng: random.Random, num_states: int,
                    edge_prob: float = 0.35) -> PartitionRelationPair:
    """Random partition plus the transitive closure of a random DAG over its blocks."""
    if num_states == 0:
        return PartitionRelationPair.total(0)
    k = rng.randint(1, num_states)
    owner = [rng.randrange(k) for _ in range(num_states)]
    groups: dict[int, list[int]] = {}
    for q, b in enumerate(owner):
        groups.setdefault(b, []).append(q)
    blocks = sorted(groups.values())
    nb = len(blocks)
    order = list(range(nb))
    rng.shuffle(order)
    above = [set() for _ in range(nb)]
    for a in range(nb):
        for b in range(a + 1, nb):
            if rng.random() < edge_prob:
                above[order[a]].add(order[b])
    # close transitively, walking the topological order backwards
    closure = [set() for _ in range(nb)]
    for a in reversed(range(nb)):
        x = order[a]
        closure[x] = {x}
        for y in above[x]:
            closure[x] |= closure[y]
    rel = frozenset((x, y) for x in range(nb) for y in closure[x])
    return PartitionRelationPair(tuple(tuple(b) for b in blocks), rel)


def random_problem_text(seed: int, num_states: int, num_arcs: int, mode: str = "qxq") -> str:
    """A complete input document; identical arguments give identical text."""
    if mode not in PREORDER_MODES:
        raise ValueError(f"preorder mode must be one of {PREORDER_MODES}")
    rng = random.Random(seed)
    ts = random_system(rng, num_states, num_arcs)
    out = [f"# seed {seed}, {num_states} states, {num_arcs} transitions, preorder {mode}\n",
           serialize_system(ts)]
    if mode == "labels":
        out += [f"label {q} {s}\n" for q, s in enumerate(random_labels(rng, num_states))]
    elif mode == "explicit":
        prp = random_preorder(rng, num_states)
        out.append("blocks\n")
        out += [f"{i}: " + " ".join(map(str, b)) + "\n" for i, b in enumerate(prp.blocks)]
        out.append("end\nrel\n")
        out += [f"{i} {j}\n" for i, j in sorted(prp.rel) if i != j]
        out.append("end\n")
    return "".join(out)


def random_instance(seed: int, max_states: int = 8, mode: str = "explicit"):
    """Small instance with random size, density and preorder, parsed back from text."""
    from .model import parse_problem

    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    m = rng.randint(0, min(n * n, 3 * n))
    text = random_problem_text(rng.getrandbits(63), n, m, mode)
    return parse_problem(text)
