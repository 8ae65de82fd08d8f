"""Transition systems, preorders as partition-relation pairs, and their text format.

A preorder over the states ``0..n-1`` is stored as a partition into blocks plus
a relation over block indexes.  A pair ``(i, j)`` in the relation means every
state of block ``j`` simulates every state of block ``i``.

The text format read by :func:`parse_problem`::

    ts <num_states>
    <u> <v>               # one transition per line
    end
    label <q> <string>    # optional
    blocks                # optional
    <idx>: <q> <q> ...
    end
    rel                   # optional, requires blocks; reflexive pairs implied
    <i> <j>
    end
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class InputError(ValueError):
    """Malformed or invalid problem input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantViolation(RuntimeError):
    """An internal consistency check failed."""


class TransitionSystem:
    """A finite transition system over states ``0..num_states-1``.

    Duplicate transitions are dropped on construction.  Instances are not
    meant to be mutated after construction.
    """

    __slots__ = ("num_states", "transitions", "successors", "predecessors")

    def __init__(self, num_states: int, transitions: Iterable[tuple[int, int]] = ()):
        if num_states < 0:
            raise InputError(f"negative number of states: {num_states}")
        self.num_states = num_states
        arcs = set()
        for u, v in transitions:
            if not (0 <= u < num_states and 0 <= v < num_states):
                raise InputError(f"transition ({u}, {v}) out of range for {num_states} states")
            arcs.add((int(u), int(v)))
        self.transitions: tuple[tuple[int, int], ...] = tuple(sorted(arcs))
        succ: list[list[int]] = [[] for _ in range(num_states)]
        pred: list[list[int]] = [[] for _ in range(num_states)]
        for u, v in self.transitions:
            succ[u].append(v)
            pred[v].append(u)
        self.successors: tuple[tuple[int, ...], ...] = tuple(map(tuple, succ))
        self.predecessors: tuple[tuple[int, ...], ...] = tuple(map(tuple, pred))

    def __len__(self) -> int:
        return len(self.transitions)

    def __eq__(self, other):
        if not isinstance(other, TransitionSystem):
            return NotImplemented
        return self.num_states == other.num_states and self.transitions == other.transitions

    def __hash__(self):
        return hash((self.num_states, self.transitions))

    def __repr__(self):
        return f"TransitionSystem({self.num_states}, {list(self.transitions)})"

    def adjacency(self) -> np.ndarray:
        """Dense boolean matrix ``A`` with ``A[u, v]`` iff ``u -> v``."""
        a = np.zeros((self.num_states, self.num_states), dtype=bool)
        if self.transitions:
            u, v = zip(*self.transitions)
            a[list(u), list(v)] = True
        return a

    def has_successor(self, q: int) -> bool:
        return bool(self.successors[q])


@dataclass(frozen=True)
class PartitionRelationPair:
    """A preorder given by ``blocks`` and a relation ``rel`` over block indexes.

    ``rel`` always holds the reflexive pairs.  Use :meth:`validated` to build
    an instance with its invariants checked.
    """

    blocks: tuple[tuple[int, ...], ...]
    rel: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    @classmethod
    def validated(cls, blocks: Sequence[Iterable[int]], rel: Iterable[tuple[int, int]],
                  num_states: int) -> "PartitionRelationPair":
        blocks = tuple(tuple(sorted(b)) for b in blocks)
        seen = [False] * num_states
        for i, b in enumerate(blocks):
            if not b:
                raise InputError(f"block {i} is empty")
            for q in b:
                if not 0 <= q < num_states:
                    raise InputError(f"state {q} out of range for {num_states} states")
                if seen[q]:
                    raise InputError(f"state {q} belongs to more than one block")
                seen[q] = True
        missing = [q for q in range(num_states) if not seen[q]]
        if missing:
            raise InputError(f"states not covered by any block: {missing}")
        k = len(blocks)
        pairs = set((i, i) for i in range(k))
        for i, j in rel:
            if not (0 <= i < k and 0 <= j < k):
                raise InputError(f"rel pair ({i}, {j}) refers to an unknown block")
            pairs.add((i, j))
        check_block_preorder(pairs, k)
        return cls(blocks, frozenset(pairs))

    @classmethod
    def total(cls, num_states: int) -> "PartitionRelationPair":
        """The one-block preorder ``Q x Q``."""
        if num_states == 0:
            return cls((), frozenset())
        return cls((tuple(range(num_states)),), frozenset({(0, 0)}))

    @classmethod
    def identity(cls, num_states: int) -> "PartitionRelationPair":
        return cls(tuple((q,) for q in range(num_states)),
                   frozenset((q, q) for q in range(num_states)))

    @property
    def num_states(self) -> int:
        return sum(len(b) for b in self.blocks)

    def block_index(self) -> list[int]:
        """``index[q]`` is the position in ``blocks`` of the block holding ``q``."""
        index = [0] * self.num_states
        for i, b in enumerate(self.blocks):
            for q in b:
                index[q] = i
        return index

    def canonical(self) -> "PartitionRelationPair":
        """Blocks sorted by minimum state, states ascending, rel renumbered."""
        order = sorted(range(len(self.blocks)), key=lambda i: min(self.blocks[i]))
        renum = {old: new for new, old in enumerate(order)}
        blocks = tuple(tuple(sorted(self.blocks[i])) for i in order)
        rel = frozenset((renum[i], renum[j]) for i, j in self.rel)
        return PartitionRelationPair(blocks, rel)


def check_block_preorder(pairs: set[tuple[int, int]], k: int) -> None:
    """Raise :class:`InputError` unless ``pairs`` is a partial order on ``range(k)``."""
    m = np.zeros((k, k), dtype=bool)
    for i, j in pairs:
        m[i, j] = True
    if not m.diagonal().all():
        raise InputError("rel is not reflexive")
    both = m & m.T
    np.fill_diagonal(both, False)
    if both.any():
        i, j = map(int, np.argwhere(both)[0])
        raise InputError(f"rel is not antisymmetric: blocks {i} and {j} are related both ways")
    closed = (m.astype(np.int64) @ m.astype(np.int64)) > 0
    extra = closed & ~m
    if extra.any():
        i, j = map(int, np.argwhere(extra)[0])
        raise InputError(f"rel is not transitive: ({i}, {j}) is implied but not listed")


# -- text format ---------------------------------------------------------------

def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InputError(f"expected an integer, got {token!r}", lineno) from None


def _parse_blocks_rel(lines: list[tuple[int, str]], pos: int, num_states: int | None):
    """Parse optional ``blocks``/``rel`` sections starting at ``lines[pos]``.

    Accepts both the input form (``blocks`` ... ``end``) and the output form
    (``blocks <k>`` followed directly by ``rel``).  Returns
    ``(blocks, rel, labels, pos)``; ``blocks`` is None when absent.
    """
    blocks = None
    rel = None
    labels: dict[int, str] = {}
    while pos < len(lines):
        lineno, text = lines[pos]
        head = text.split()
        if head[0] == "label":
            if len(head) < 3:
                raise InputError("label needs a state and a string", lineno)
            q = _int(head[1], lineno)
            if num_states is not None and not 0 <= q < num_states:
                raise InputError(f"state {q} out of range", lineno)
            if q in labels:
                raise InputError(f"state {q} labelled twice", lineno)
            labels[q] = " ".join(head[2:])
            pos += 1
        elif head[0] == "blocks":
            if blocks is not None:
                raise InputError("duplicate blocks section", lineno)
            declared = None
            if len(head) == 2:
                declared = _int(head[1], lineno)
            elif len(head) > 2:
                raise InputError("malformed blocks header", lineno)
            blocks = []
            pos += 1
            while pos < len(lines):
                lineno, text = lines[pos]
                if text == "end":
                    pos += 1
                    break
                if text.split()[0] == "rel":
                    break
                idx, sep, rest = text.partition(":")
                if not sep:
                    raise InputError("expected '<idx>: <states>'", lineno)
                if _int(idx.strip(), lineno) != len(blocks):
                    raise InputError(f"block index must be {len(blocks)}", lineno)
                blocks.append([_int(t, lineno) for t in rest.split()])
                pos += 1
            else:
                if declared is None:
                    raise InputError("unterminated blocks section", lines[-1][0])
            if declared is not None and declared != len(blocks):
                raise InputError(f"blocks header declares {declared} blocks, found {len(blocks)}",
                                 lineno)
        elif head[0] == "rel":
            if blocks is None:
                raise InputError("rel section requires a blocks section", lineno)
            if rel is not None:
                raise InputError("duplicate rel section", lineno)
            rel = []
            pos += 1
            while True:
                if pos >= len(lines):
                    raise InputError("unterminated rel section", lines[-1][0])
                lineno, text = lines[pos]
                pos += 1
                if text == "end":
                    break
                toks = text.split()
                if len(toks) != 2:
                    raise InputError("expected '<i> <j>'", lineno)
                rel.append((_int(toks[0], lineno), _int(toks[1], lineno)))
        else:
            raise InputError(f"unexpected line {text!r}", lineno)
    return blocks, rel, labels, pos


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if line:
            out.append((lineno, line))
    return out


def _build_prp(blocks, rel, num_states: int, lineno: int) -> PartitionRelationPair:
    try:
        return PartitionRelationPair.validated(blocks, rel or (), num_states)
    except InputError as exc:
        if exc.line is None:
            raise InputError(str(exc), lineno) from None
        raise


def parse_problem(text: str) -> tuple[TransitionSystem, PartitionRelationPair]:
    """Read a transition system and its initial preorder.

    Without a ``blocks`` section the preorder groups states by label with the
    identity relation between groups, or is ``Q x Q`` when there are no
    labels either.  A ``rel`` section must already be transitively closed.
    """
    lines = _content_lines(text)
    if not lines:
        raise InputError("empty input", 1)
    lineno, first = lines[0]
    head = first.split()
    if head[0] != "ts" or len(head) != 2:
        raise InputError("expected 'ts <num_states>'", lineno)
    n = _int(head[1], lineno)
    if n < 0:
        raise InputError("number of states must be non-negative", lineno)
    arcs = []
    pos = 1
    while True:
        if pos >= len(lines):
            raise InputError("unterminated ts section", lines[-1][0])
        lineno, line = lines[pos]
        pos += 1
        if line == "end":
            break
        toks = line.split()
        if len(toks) != 2:
            raise InputError("expected '<u> <v>'", lineno)
        u, v = _int(toks[0], lineno), _int(toks[1], lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise InputError(f"transition ({u}, {v}) out of range for {n} states", lineno)
        arcs.append((u, v))
    ts = TransitionSystem(n, arcs)
    last = lines[-1][0]
    blocks, rel, labels, _ = _parse_blocks_rel(lines, pos, n)
    if blocks is not None:
        prp = _build_prp(blocks, rel, n, last)
    elif labels:
        groups: dict[str | None, list[int]] = {}
        for q in range(n):
            groups.setdefault(labels.get(q), []).append(q)
        prp = PartitionRelationPair.validated(list(groups.values()), (), n)
    else:
        prp = PartitionRelationPair.total(n)
    return ts, prp


def parse_result(text: str, num_states: int | None = None) -> PartitionRelationPair:
    """Read the ``blocks``/``rel`` document written by :func:`serialize_result`."""
    lines = _content_lines(text)
    if not lines:
        raise InputError("empty input", 1)
    blocks, rel, labels, _ = _parse_blocks_rel(lines, 0, num_states)
    if blocks is None or labels:
        raise InputError("expected a blocks section", lines[0][0])
    if num_states is None:
        num_states = sum(len(b) for b in blocks)
    return _build_prp(blocks, rel, num_states, lines[-1][0])


def serialize_result(prp: PartitionRelationPair) -> str:
    """Canonical text: blocks by minimum state, then sorted non-reflexive rel pairs."""
    c = prp.canonical()
    out = [f"blocks {len(c.blocks)}"]
    out += [f"{i}: " + " ".join(map(str, b)) for i, b in enumerate(c.blocks)]
    out.append("rel")
    out += [f"{i} {j}" for i, j in sorted(c.rel) if i != j]
    out.append("end")
    return "\n".join(out) + "\n"


def serialize_system(ts: TransitionSystem) -> str:
    lines = [f"ts {ts.num_states}"]
    lines += [f"{u} {v}" for u, v in ts.transitions]
    lines.append("end")
    return "\n".join(lines) + "\n"


# -- relations -----------------------------------------------------------------

def explicit_relation(prp: PartitionRelationPair) -> np.ndarray:
    """The state relation ``M`` with ``M[q, r]`` iff ``block(q) rel block(r)``."""
    n = prp.num_states
    k = len(prp.blocks)
    index = np.array(prp.block_index(), dtype=np.intp)
    br = np.zeros((k, k), dtype=bool)
    for i, j in prp.rel:
        br[i, j] = True
    if n == 0:
        return np.zeros((0, 0), dtype=bool)
    return br[np.ix_(index, index)]


def prp_from_relation(m: np.ndarray) -> PartitionRelationPair:
    """Inverse of :func:`explicit_relation` for a preorder matrix ``m``."""
    n = m.shape[0]
    if not (m.diagonal().all() and not ((m.astype(np.int64) @ m.astype(np.int64) > 0) & ~m).any()):
        raise InputError("relation is not a preorder")
    equiv = m & m.T
    blocks: list[tuple[int, ...]] = []
    owner = [-1] * n
    for q in range(n):
        if owner[q] < 0:
            members = tuple(int(r) for r in np.flatnonzero(equiv[q]))
            for r in members:
                owner[r] = len(blocks)
            blocks.append(members)
    rel = frozenset((owner[q], owner[r]) for q, r in zip(*np.nonzero(m)))
    return PartitionRelationPair(tuple(blocks), rel)


def init_refine(prp: PartitionRelationPair, ts: TransitionSystem) -> PartitionRelationPair:
    """Drop every pair ``(c, d)`` where ``c`` has a successor and ``d`` has none.

    Each block is split on the has-successor predicate; the successor part
    keeps no relation to any successor-free block.
    """
    blocks: list[tuple[int, ...]] = []
    origin: list[int] = []
    active: list[bool] = []
    for i, b in enumerate(prp.blocks):
        with_succ = tuple(q for q in b if ts.successors[q])
        without = tuple(q for q in b if not ts.successors[q])
        for part, flag in ((with_succ, True), (without, False)):
            if part:
                blocks.append(part)
                origin.append(i)
                active.append(flag)
    rel = set()
    for x in range(len(blocks)):
        for y in range(len(blocks)):
            if (origin[x], origin[y]) in prp.rel and not (active[x] and not active[y]):
                rel.add((x, y))
    return PartitionRelationPair(tuple(blocks), frozenset(rel))


def quotient(ts: TransitionSystem, partition: Sequence[Iterable[int]]) -> TransitionSystem:
    """One state per block; ``B -> B'`` iff some member of ``B`` reaches one of ``B'``."""
    partition = [tuple(b) for b in partition]
    owner = [-1] * ts.num_states
    for i, b in enumerate(partition):
        if not b:
            raise InputError(f"block {i} is empty")
        for q in b:
            if not 0 <= q < ts.num_states:
                raise InputError(f"state {q} out of range")
            if owner[q] >= 0:
                raise InputError(f"state {q} belongs to more than one block")
            owner[q] = i
    if -1 in owner:
        raise InputError(f"state {owner.index(-1)} is not covered by the partition")
    return TransitionSystem(len(partition), ((owner[u], owner[v]) for u, v in ts.transitions))
