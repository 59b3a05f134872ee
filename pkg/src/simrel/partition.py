"""Partition of the state set with stable node spans.

States live in one permutation array; every block owns a contiguous span
described by a node.  Splitting a block swaps the removed states to the front
of its span: the new block gets a fresh front node, the old block a fresh
tail node, and the superseded node record is kept frozen.  Node spans
therefore never change once issued, so a per-block "no longer related"
accumulator can store plain node ids and still denote a fixed state set after
any number of later splits.

Per block the structure also keeps a growable boolean row over block ids (the
block relation) and the node list just mentioned.  A split copies both to the
new block and extends every row containing the split block, which leaves the
induced state relation untouched.
"""

import numpy as np

from . import _kernels as K
from .errors import ValidationError

_MIN_CAP = 8


class Partition:
    """Blocks over a state permutation array; see the module docstring.

    Single-writer: one solver run mutates a partition at a time.  Read-only
    exports (induced_relation, states_of) can be shared freely.
    """

    def __init__(self, num_states, blocks, rel_pairs, debug=False):
        _validate_initial(num_states, blocks, rel_pairs)
        self.n = num_states
        self.debug = debug

        self.q_p = np.empty(num_states, dtype=np.int32)
        self.pos_qp = np.empty(num_states, dtype=np.int32)
        self.block_of = np.empty(num_states, dtype=np.int32)

        nb = len(blocks)
        cap = max(_MIN_CAP, 2 * nb)
        self.num_blocks = nb
        self.block_node = np.zeros(cap, dtype=np.int32)
        self.split_count = np.zeros(cap, dtype=np.int32)
        self.in_s = np.zeros(cap, dtype=np.uint8)
        self.rel = np.zeros((cap, cap), dtype=np.uint8)
        self._notrel = [[] for _ in range(cap)]
        self._touched = np.empty(cap, dtype=np.int32)

        self.num_nodes = nb
        ncap = max(_MIN_CAP, 2 * nb)
        self.node_start = np.zeros(ncap, dtype=np.int32)
        self.node_end = np.zeros(ncap, dtype=np.int32)  # inclusive

        pos = 0
        for b, states in enumerate(blocks):
            self.node_start[b] = pos
            for q in states:
                self.q_p[pos] = q
                self.pos_qp[q] = pos
                self.block_of[q] = b
                pos += 1
            self.node_end[b] = pos - 1
            self.block_node[b] = b
        for (b, c) in rel_pairs:
            self.rel[b, c] = 1

        self._captured = {}   # node id -> frozenset of states, debug only
        self._consumed = set()  # (block, node) pairs, debug only

    # -- basic queries ----------------------------------------------------

    def lookup(self, q):
        """Block id containing state q."""
        return int(self.block_of[q])

    def states_of(self, b):
        """States of block b, in current q_p order."""
        node = self.block_node[b]
        return self.q_p[self.node_start[node]:self.node_end[node] + 1]

    def block_size(self, b):
        node = self.block_node[b]
        return int(self.node_end[node] - self.node_start[node] + 1)

    def node_span_states(self, node):
        """States currently inside a node's span (a fixed set per node)."""
        return self.q_p[self.node_start[node]:self.node_end[node] + 1]

    # -- relation row edits ------------------------------------------------

    def rel_test(self, c, d):
        return bool(self.rel[c, d])

    def rel_remove(self, c, d):
        self.rel[c, d] = 0

    def rel_add(self, c, d):
        self.rel[c, d] = 1

    def rel_row(self, b):
        """Boolean row over block ids (capacity-wide, extra columns zero)."""
        return self.rel[b]

    def rel_blocks(self, b):
        """Ids of blocks related to b, ascending."""
        return np.flatnonzero(self.rel[b, :self.num_blocks])

    def relation_pairs(self):
        nb = self.num_blocks
        rows, cols = np.nonzero(self.rel[:nb, :nb])
        return set(zip(rows.tolist(), cols.tolist()))

    # -- pending-removal node lists ----------------------------------------

    def notrel_append(self, c, d):
        """Record block d's current states as pending work for block c.

        Caller must have removed d from c's rel row just before, which keeps
        the accumulated spans disjoint from each other and from c's rel.
        """
        node = int(self.block_node[d])
        self._notrel[c].append(node)
        if self.debug:
            if node not in self._captured:
                self._captured[node] = frozenset(self.node_span_states(node).tolist())
            self._check_notrel_disjoint(c)

    def notrel_nodes(self, b):
        return tuple(self._notrel[b])

    def notrel_len(self, b):
        return len(self._notrel[b])

    def take_notrel(self, b):
        """All states under b's pending nodes (concatenated spans), then reset
        the list.  The reset is O(1); the gather is linear in the result."""
        nodes = self._notrel[b]
        if not nodes:
            return np.empty(0, dtype=np.int32)
        if self.debug:
            for node in nodes:
                pair = (b, node)
                assert pair not in self._consumed, \
                    "pending node %d consumed twice by block %d" % (node, b)
                self._consumed.add(pair)
        out = np.concatenate([self.node_span_states(node) for node in nodes])
        self._notrel[b] = []
        return out

    # -- splitting ----------------------------------------------------------

    def split(self, remove):
        """Split every block meeting `remove` into its inside/outside parts.

        Returns (blocks_in_remove, split_couples): ids of blocks now entirely
        inside `remove` (old blocks fully covered plus the freshly created
        inside-parts), and (kept, new) id pairs for blocks actually split.
        The induced state relation is unchanged; `remove` must not repeat a
        state.
        """
        remove = np.ascontiguousarray(remove, dtype=np.int32)
        if remove.shape[0] == 0:
            return [], []
        if self.debug:
            assert np.unique(remove).shape[0] == remove.shape[0], \
                "split remove set repeats a state"
            assert not self.split_count[:self.num_blocks].any(), \
                "split counters not clean on entry"
            before = self._induced_small()

        n_touched = K.split_swap(remove, self.block_of, self.pos_qp, self.q_p,
                                 self.block_node, self.node_start,
                                 self.split_count, self._touched)
        touched = self._touched[:n_touched].tolist()

        blocks_in_remove = []
        couples = []
        for c in touched:
            node = self.block_node[c]
            start = int(self.node_start[node])
            end = int(self.node_end[node])
            cnt = int(self.split_count[c])
            if cnt == end - start + 1:
                blocks_in_remove.append(c)
            else:
                d = self._new_block()
                self.block_node[d] = self._new_node(start, start + cnt - 1)
                self.block_node[c] = self._new_node(start + cnt, end)
                self.rel[d, :] = self.rel[c, :]
                self._notrel[d] = list(self._notrel[c])
                self.block_of[self.q_p[start:start + cnt]] = d
                blocks_in_remove.append(d)
                couples.append((c, d))
            self.split_count[c] = 0

        nb = self.num_blocks
        for (c, d) in couples:
            self.rel[:nb, d] |= self.rel[:nb, c]

        if self.debug:
            self._check_permutation()
            self._check_tiling()
            self._check_captured_spans()
            after = self._induced_small()
            if before is not None and after is not None:
                assert np.array_equal(before, after), \
                    "split changed the induced relation"
        return blocks_in_remove, couples

    def _new_block(self):
        b = self.num_blocks
        if b >= self.block_node.shape[0]:
            self._grow_blocks()
        self.num_blocks = b + 1
        return b

    def _grow_blocks(self):
        cap = self.block_node.shape[0]
        new = 2 * cap
        self.block_node = np.concatenate([self.block_node,
                                          np.zeros(cap, np.int32)])
        self.split_count = np.concatenate([self.split_count,
                                           np.zeros(cap, np.int32)])
        self.in_s = np.concatenate([self.in_s, np.zeros(cap, np.uint8)])
        rel = np.zeros((new, new), dtype=np.uint8)
        rel[:cap, :cap] = self.rel
        self.rel = rel
        self._notrel.extend([] for _ in range(cap))
        self._touched = np.empty(new, dtype=np.int32)

    def _new_node(self, start, end):
        node = self.num_nodes
        if node >= self.node_start.shape[0]:
            cap = self.node_start.shape[0]
            self.node_start = np.concatenate([self.node_start,
                                              np.zeros(cap, np.int32)])
            self.node_end = np.concatenate([self.node_end,
                                            np.zeros(cap, np.int32)])
        self.node_start[node] = start
        self.node_end[node] = end
        self.num_nodes = node + 1
        return node

    # -- exports -------------------------------------------------------------

    def induced_relation(self):
        """Dense boolean state relation spanned by the block relation."""
        bits = np.zeros((self.n, self.n), dtype=bool)
        nb = self.num_blocks
        spans = [self.states_of(b) for b in range(nb)]
        for b in range(nb):
            for c in np.flatnonzero(self.rel[b, :nb]):
                bits[np.ix_(spans[b], spans[int(c)])] = True
        return bits

    def blocks_as_lists(self):
        """Current blocks as sorted state lists, in block id order."""
        return [sorted(self.states_of(b).tolist())
                for b in range(self.num_blocks)]

    # -- debug checks ----------------------------------------------------------

    def _induced_small(self):
        if self.n > 512:
            return None
        return self.induced_relation()

    def _check_permutation(self):
        assert np.array_equal(self.q_p[self.pos_qp], np.arange(self.n)), \
            "q_p and pos_qp are no longer inverse"

    def _check_tiling(self):
        seen = np.zeros(self.n, dtype=bool)
        for b in range(self.num_blocks):
            span = self.states_of(b)
            assert span.size > 0, "block %d has an empty span" % b
            assert not seen[span].any(), "block spans overlap"
            seen[span] = True
            assert (self.block_of[span] == b).all(), \
                "span of block %d contains foreign states" % b
        assert seen.all(), "block spans do not cover the state set"

    def _check_captured_spans(self):
        for node, states in self._captured.items():
            now = frozenset(self.node_span_states(node).tolist())
            assert now == states, \
                "node %d span changed its state set after capture" % node

    def _check_notrel_disjoint(self, c):
        taken = set()
        for node in self._notrel[c]:
            span = set(self.node_span_states(node).tolist())
            assert not (span & taken), "pending spans of block %d overlap" % c
            taken |= span
        rel_states = set()
        for d in self.rel_blocks(c):
            rel_states.update(self.states_of(int(d)).tolist())
        assert not (taken & rel_states), \
            "pending spans of block %d meet its rel union" % c


def _validate_initial(num_states, blocks, rel_pairs):
    seen = np.zeros(num_states, dtype=bool)
    for i, states in enumerate(blocks):
        if len(states) == 0:
            raise ValidationError("initial block %d is empty" % i)
        for q in states:
            if q < 0 or q >= num_states:
                raise ValidationError(
                    "initial block %d contains out-of-range state %d" % (i, q))
            if seen[q]:
                raise ValidationError(
                    "initial blocks overlap on state %d" % q)
            seen[q] = True
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise ValidationError(
            "initial partition does not cover state %d" % missing)
    pairs = set((int(b), int(c)) for (b, c) in rel_pairs)
    nb = len(blocks)
    for (b, c) in pairs:
        if not (0 <= b < nb and 0 <= c < nb):
            raise ValidationError("R_init pair (%d, %d) out of range" % (b, c))
    for b in range(nb):
        if (b, b) not in pairs:
            raise ValidationError("R_init not reflexive: missing (%d, %d)" % (b, b))
    for (b, c) in pairs:
        if b != c and (c, b) in pairs:
            raise ValidationError(
                "R_init not antisymmetric: both (%d, %d) and (%d, %d)"
                % (b, c, c, b))


def init_partition(lts, blocks, rel_pairs, debug=False):
    """Fresh partition from an initial partition-relation pair.

    Each initial block occupies consecutive slots and its own node; the block
    relation mirrors rel_pairs.  Raises ValidationError naming the violation
    for overlapping, empty or non-covering blocks and for an irreflexive or
    non-antisymmetric relation.
    """
    return Partition(lts.num_states, blocks, rel_pairs, debug=debug)
