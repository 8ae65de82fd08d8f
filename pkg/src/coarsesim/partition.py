"""Array-backed refinable partition with two generations of blocks.

States live in one array ``T`` so that every block, and every node, is a
contiguous slice of it.  A node is a frozen snapshot of the state set of a
block at the time the node was created: when a block is split both halves get
fresh nodes and the old node stays behind as their common ancestor, still
covering the same slice of ``T``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Sequence

from .model import InputError


class RefinablePartition:
    """Partition of ``0..n-1`` supporting O(|marked|) splits.

    Block ids and node ids are allocated in increasing order and never reused.
    Within a split block the marked states are moved to the FRONT of the
    block's slice, so the new block comes first in ``T``.
    """

    def __init__(self, num_states: int):
        self.num_states = num_states
        self.T: list[int] = []
        self.position: list[int] = [0] * num_states
        self.block_of: list[int] = [0] * num_states
        # per block
        self.block_node: list[int] = []
        self.rep: list[int] = []
        self.count: list[int] = []
        # per node; `end` is inclusive
        self.node_begin: list[int] = []
        self.node_end: list[int] = []
        self.notrel: list[list[int]] = []
        self.notrel_next: list[list[int]] = []

    @classmethod
    def from_blocks(cls, blocks: Sequence[Iterable[int]], num_states: int) -> "RefinablePartition":
        p = cls(num_states)
        seen = [False] * num_states
        for b in blocks:
            members = list(b)
            if not members:
                raise InputError("empty block")
            begin = len(p.T)
            block = len(p.block_node)
            for q in members:
                if not 0 <= q < num_states or seen[q]:
                    raise InputError(f"not a partition: state {q}")
                seen[q] = True
                p.position[q] = len(p.T)
                p.block_of[q] = block
                p.T.append(q)
            node = p._new_node(begin, len(p.T) - 1)
            p.block_node.append(node)
            p.rep.append(p.T[begin])
            p.count.append(0)
        if len(p.T) != num_states:
            raise InputError("not a partition: some states are missing")
        return p

    def _new_node(self, begin: int, end: int) -> int:
        self.node_begin.append(begin)
        self.node_end.append(end)
        self.notrel.append([])
        self.notrel_next.append([])
        return len(self.node_begin) - 1

    @property
    def num_blocks(self) -> int:
        return len(self.block_node)

    @property
    def num_nodes(self) -> int:
        return len(self.node_begin)

    def node_size(self, node: int) -> int:
        return self.node_end[node] - self.node_begin[node] + 1

    def block_size(self, block: int) -> int:
        return self.node_size(self.block_node[block])

    def node_states(self, node: int) -> list[int]:
        return self.T[self.node_begin[node]:self.node_end[node] + 1]

    def block_states(self, block: int) -> list[int]:
        return self.node_states(self.block_node[block])

    def node_blocks(self, node: int) -> Iterator[int]:
        """Blocks inside ``node``, each once, in ``T`` order."""
        i, end = self.node_begin[node], self.node_end[node]
        T, block_of, block_node, node_end = self.T, self.block_of, self.block_node, self.node_end
        while i <= end:
            b = block_of[T[i]]
            yield b
            i = node_end[block_node[b]] + 1

    def choose_block(self, node: int) -> int:
        return self.block_of[self.T[self.node_begin[node]]]

    def representative(self, block: int) -> int:
        return self.rep[block]

    def first_state(self, block: int) -> int:
        return self.T[self.node_begin[self.block_node[block]]]

    def blocks(self) -> list[list[int]]:
        """Current blocks as state lists, indexed by block id."""
        return [self.block_states(b) for b in range(self.num_blocks)]

    def split(self, marked: Iterable[int],
              on_split: Callable[[int, int], None] | None = None,
              order: Callable[[list[int]], None] | None = None) -> int:
        """Split every block partly covered by ``marked``; return the number of splits.

        The marked part becomes a new block and the rest keeps the old id.
        Both parts get fresh nodes.  The new block starts with the kept
        block's representative; ``on_split(kept, new)`` runs right after each
        split and may reassign representatives.  Any block left without a
        member representative afterwards gets its first state.

        ``order`` may permute the list of touched blocks in place; it exists
        to test that results do not depend on processing order.
        """
        T, position, block_of = self.T, self.position, self.block_of
        hits: dict[int, int] = {}
        for q in marked:
            b = block_of[q]
            # Move q to the front of the unmarked tail of its block.
            node = self.block_node[b]
            k = hits.get(b, 0)
            slot = self.node_begin[node] + k
            pq = position[q]
            if pq < slot:
                continue  # already marked
            other = T[slot]
            T[slot], T[pq] = q, other
            position[q], position[other] = slot, pq
            hits[b] = k + 1
        touched = list(hits)
        if order is not None:
            order(touched)
        splits = 0
        for c in touched:
            k = hits[c]
            old = self.block_node[c]
            begin, end = self.node_begin[old], self.node_end[old]
            if k == end - begin + 1:
                continue
            d = len(self.block_node)
            d_node = self._new_node(begin, begin + k - 1)
            c_node = self._new_node(begin + k, end)
            self.block_node.append(d_node)
            self.block_node[c] = c_node
            self.rep.append(self.rep[c])
            self.count.append(0)
            for i in range(begin, begin + k):
                block_of[T[i]] = d
            splits += 1
            if on_split is not None:
                on_split(c, d)
            for b in (c, d):
                if block_of[self.rep[b]] != b:
                    self.rep[b] = self.first_state(b)
        return splits

    def check(self) -> None:
        """Assert the structural invariants; for tests."""
        n = self.num_states
        assert sorted(self.T) == list(range(n))
        for i, q in enumerate(self.T):
            assert self.position[q] == i
        for b in range(self.num_blocks):
            node = self.block_node[b]
            states = self.node_states(node)
            assert states, f"empty block {b}"
            assert all(self.block_of[q] == b for q in states)
            assert self.block_of[self.rep[b]] == b
        assert sum(self.block_size(b) for b in range(self.num_blocks)) == n
