"""Naive reference implementations used as ground truth in tests.

Everything here favours being obviously correct over being fast: plain loops
over a dense boolean matrix, no shared state with the solver.  The fixpoint
is capped at 12 states so an accidental use on a large instance fails loudly
instead of running for hours.
"""

import numpy as np

from .errors import ValidationError

ORACLE_STATE_CAP = 12


class StateRelation:
    """Dense boolean relation on states 0..n-1."""

    def __init__(self, n, bits=None):
        self.n = int(n)
        if bits is None:
            self.bits = np.zeros((n, n), dtype=bool)
        else:
            self.bits = np.array(bits, dtype=bool, copy=True)
            assert self.bits.shape == (n, n)

    @classmethod
    def identity(cls, n):
        return cls(n, np.eye(n, dtype=bool))

    @classmethod
    def universal(cls, n):
        return cls(n, np.ones((n, n), dtype=bool))

    @classmethod
    def from_pairs(cls, n, pairs):
        rel = cls(n)
        for (q, r) in pairs:
            rel.bits[q, r] = True
        return rel

    def copy(self):
        return StateRelation(self.n, self.bits)

    def pairs(self):
        return set(zip(*(idx.tolist() for idx in np.nonzero(self.bits))))

    def __contains__(self, pair):
        return bool(self.bits[pair[0], pair[1]])

    def __eq__(self, other):
        return isinstance(other, StateRelation) and self.n == other.n and \
            np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return "StateRelation(%d, pairs=%r)" % (self.n, sorted(self.pairs()))


def _out_moves(lts):
    """Per state, the list of (letter, target) moves."""
    out = [[] for _ in range(lts.num_states)]
    for q, a, qp in zip(lts.trans_source.tolist(), lts.trans_label.tolist(),
                        lts.trans_target.tolist()):
        out[q].append((a, qp))
    return out


def _pair_ok(out, q, r, bits):
    # every move of q must be answered by a same-letter move of r that stays
    # inside the relation
    for a, qp in out[q]:
        ok = False
        for b, rp in out[r]:
            if b == a and bits[qp, rp]:
                ok = True
                break
        if not ok:
            return False
    return True


def is_simulation(lts, rel):
    """True iff rel is a simulation: each related pair answers every move."""
    out = _out_moves(lts)
    n = lts.num_states
    for q in range(n):
        for r in range(n):
            if rel.bits[q, r] and not _pair_ok(out, q, r, rel.bits):
                return False
    return True


def naive_coarsest_simulation(lts, rel_init):
    """Greatest fixpoint by pair deletion, row-major scan order.

    Deletes any related pair that fails the local simulation condition until
    none does; the result is the unique coarsest simulation inside rel_init.
    `reverse_scan` only changes the deletion order, never the fixpoint (a
    self-check some tests exercise).
    """
    return _naive_fixpoint(lts, rel_init, reverse_scan=False)


def _naive_fixpoint(lts, rel_init, reverse_scan=False):
    n = lts.num_states
    assert n <= ORACLE_STATE_CAP, \
        "oracle capped at %d states, got %d" % (ORACLE_STATE_CAP, n)
    out = _out_moves(lts)
    bits = rel_init.bits.copy()
    order = range(n - 1, -1, -1) if reverse_scan else range(n)
    changed = True
    while changed:
        changed = False
        for q in order:
            for r in order:
                if bits[q, r] and not _pair_ok(out, q, r, bits):
                    bits[q, r] = False
                    changed = True
    return StateRelation(n, bits)


def is_preorder(rel):
    """Reflexive and transitive, checked by enumeration."""
    n = rel.n
    bits = rel.bits
    for q in range(n):
        if not bits[q, q]:
            return False
    for q in range(n):
        for r in range(n):
            if not bits[q, r]:
                continue
            for s in range(n):
                if bits[r, s] and not bits[q, s]:
                    return False
    return True


def _kernel_class(bits, q):
    return frozenset(r for r in range(bits.shape[0])
                     if bits[q, r] and bits[r, q])


def is_block_definable(rel):
    """Whenever two states are related, their whole mutual classes are."""
    n = rel.n
    assert n <= ORACLE_STATE_CAP
    bits = rel.bits
    for q in range(n):
        for r in range(n):
            if not bits[q, r]:
                continue
            for q2 in _kernel_class(bits, q):
                for r2 in _kernel_class(bits, r):
                    if not bits[q2, r2]:
                        return False
    return True


def init_refine_reference(lts, rel):
    """Keep (q, q') only when q' matches every letter q can fire at all.

    Idempotent; the result is a preorder containing every simulation that the
    input contains.
    """
    n = lts.num_states
    can_fire = np.zeros((n, lts.num_letters), dtype=bool)
    for q, a in zip(lts.trans_source.tolist(), lts.trans_label.tolist()):
        can_fire[q, a] = True
    bits = rel.bits.copy()
    for q in range(n):
        for r in range(n):
            if not bits[q, r]:
                continue
            for a in range(lts.num_letters):
                if can_fire[q, a] and not can_fire[r, a]:
                    bits[q, r] = False
                    break
    return StateRelation(n, bits)


def block_simulation_holds(lts, blocks, rel_pairs):
    """Blockwise simulation condition on a partition-relation pair.

    For every block B and letter a, each state related from a predecessor of
    B must itself reach the states related from B by an a-move.  Agrees with
    is_simulation on the induced relation.
    """
    n = lts.num_states
    induced = induced_relation(n, blocks, rel_pairs)
    out = _out_moves(lts)
    bits = induced.bits
    for states in blocks:
        block = set(states)
        for a in range(lts.num_letters):
            pre_a_b = set()
            for q in range(n):
                for (b, qp) in out[q]:
                    if b == a and qp in block:
                        pre_a_b.add(q)
            lhs = set()
            for q in pre_a_b:
                lhs.update(r for r in range(n) if bits[q, r])
            rel_of_block = set()
            for q in block:
                rel_of_block.update(r for r in range(n) if bits[q, r])
            rhs = set()
            for r in range(n):
                for (b, rp) in out[r]:
                    if b == a and rp in rel_of_block:
                        rhs.add(r)
                        break
            if not lhs <= rhs:
                return False
    return True


def induced_relation(n, blocks, rel_pairs):
    """State relation spanned by a partition-relation pair."""
    bits = np.zeros((n, n), dtype=bool)
    for (b, c) in rel_pairs:
        for q in blocks[b]:
            for r in blocks[c]:
                bits[q, r] = True
    return StateRelation(n, bits)


def preorder_to_partition_relation(rel):
    """Kernel classes of a preorder plus the class-level relation.

    Blocks are ordered by smallest member; round-trips exactly with
    induced_relation on preorders.
    """
    if not is_preorder(rel):
        raise ValidationError("relation is not a preorder")
    n = rel.n
    bits = rel.bits
    class_of = [-1] * n
    blocks = []
    for q in range(n):
        if class_of[q] >= 0:
            continue
        members = sorted(_kernel_class(bits, q))
        for r in members:
            class_of[r] = len(blocks)
        blocks.append(members)
    pairs = set()
    for b, members in enumerate(blocks):
        q = members[0]
        for c, others in enumerate(blocks):
            if bits[q, others[0]]:
                pairs.add((b, c))
    return blocks, pairs
