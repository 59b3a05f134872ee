"""Coarsest-simulation solver.

`run` refines an initial partition-relation pair until its induced relation
is the coarsest simulation contained in the initial preorder.  Each round
takes one block with pending work, derives per-letter remove sets with the
selected strategy, splits the partition against them and cuts the block
relation, queueing every block whose pending set grew.

Three interchangeable strategies implement the remove-set test:

* COMPROMISE probes each state-letter once per consumed batch against the
  block's rel row (good time/space balance, the default),
* COUNTING keeps per-block successor counters so each scanned transition
  costs O(1) (fastest, pays one counter row per block),
* SPACE keeps no per-block pending sets at all and rescans the whole
  transition relation per round (smallest footprint, slowest).
"""

import enum
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from . import oracle
from .errors import ValidationError
from .partition import Partition, init_partition


class Strategy(enum.Enum):
    """Remove-set test implementations; fixed for a whole run."""

    COMPROMISE = "compromise"
    COUNTING = "counting"
    SPACE = "space"


@dataclass
class Stats:
    """Instrumentation of one run.

    `splits` counts new blocks over the whole run (initialization included);
    the scan counters cover the main loop: `transitions_scanned` is every
    transition visited by the remove-set and predecessor scans, and
    `remove_test_probes` is the strategy's unit test steps (post-transition
    probes, counter decrements, or second-pass membership tests).
    """

    while_iterations: int = 0
    splits: int = 0
    transitions_scanned: int = 0
    remove_test_probes: int = 0
    peak_blocks: int = 0
    branching_factor_b: int = 0

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SimResult:
    """Final partition, block relation and counters of a run."""

    partition: Partition
    relation_pairs: frozenset
    stats: Stats

    def induced_relation(self):
        return self.partition.induced_relation()

    def blocks(self):
        return self.partition.blocks_as_lists()


class _WorkSet:
    """Queue, marks and scratch buffers shared by the scans of one run."""

    def __init__(self, lts):
        n_sl = lts.num_state_letters
        self.queue = deque()
        self.letter_mark = np.zeros(lts.num_letters, dtype=np.uint8)
        self.remove_mark = np.zeros(n_sl, dtype=np.uint8)
        self.preb_mark = np.zeros(n_sl, dtype=np.uint8)
        self.sl_seen = np.zeros(n_sl, dtype=np.uint8)
        self.prerel_mark = np.zeros(n_sl, dtype=np.uint8)
        self.scratch = np.empty(n_sl, dtype=np.int32)
        self.out = np.empty(n_sl, dtype=np.int32)
        self.out2 = np.empty(n_sl, dtype=np.int32)
        self.relcount = None
        self._alph = []

    def enqueue(self, part, b):
        if not part.in_s[b]:
            part.in_s[b] = 1
            self.queue.append(b)

    def assert_clean(self):
        # every round must start with empty per-letter scratch sets
        assert not self._alph, "per-letter sets were not cleared"

    def set_alph(self, letters):
        self._alph = letters
        for a in letters:
            self.letter_mark[a] = 1

    def clear_letters(self, removes_per, preb_per):
        for a in self._alph:
            self.letter_mark[a] = 0
        for sls in removes_per.values():
            self.remove_mark[sls] = 0
        for sls in preb_per.values():
            self.preb_mark[sls] = 0
        self._alph = []

    def alloc_relcount(self, lts, part):
        sizes = (lts.sl_post_end - lts.sl_post_start).astype(np.int32)
        cap = part.block_node.shape[0]
        self.relcount = np.repeat(sizes[None, :], cap, axis=0)

    def copy_relcount(self, c, d):
        if d >= self.relcount.shape[0]:
            extra = np.empty_like(self.relcount)
            self.relcount = np.concatenate([self.relcount, extra])
        self.relcount[d, :] = self.relcount[c, :]


def _group_by_letter(sls, sl_letter):
    """Group state-letter ids per letter, letters ascending, scan order kept
    inside each group."""
    letters = sl_letter[sls]
    order = np.argsort(letters, kind="stable")
    s = sls[order]
    lo = letters[order]
    cuts = np.flatnonzero(lo[1:] != lo[:-1]) + 1
    chunks = np.split(s, cuts)
    heads = np.concatenate(([0], cuts))
    alph = [int(lo[h]) for h in heads]
    return alph, dict(zip(alph, chunks))


def _check_rel_transitive(num_blocks, pairs):
    mat = np.zeros((num_blocks, num_blocks), dtype=bool)
    for (b, c) in pairs:
        mat[b, c] = True
    packed = np.packbits(mat, axis=1)
    for b in range(num_blocks):
        succ = np.flatnonzero(mat[b])
        if succ.size == 0:
            continue
        union = np.bitwise_or.reduce(packed[succ], axis=0)
        if (union & ~packed[b]).any():
            for c in succ:
                for d in np.flatnonzero(mat[c]):
                    if not mat[b, d]:
                        raise ValidationError(
                            "R_init not transitive: (%d,%d) and (%d,%d) "
                            "without (%d,%d)" % (b, c, c, d, b, d))
    return mat


def init_refine(lts, part, ws, strategy, stats=None):
    """Initial refinement: make the relation honour which letters each state
    can fire at all, then seed the pending sets and the queue.

    Per letter, the partition is split against the states firing it and every
    (inside, outside) block pair is cut.  COMPROMISE/COUNTING then give each
    block its full complement as pending nodes and queue blocks with any;
    SPACE queues every block and keeps no pending sets.  COUNTING counters
    start at each state-letter's out-degree (at this point every block's rel
    union plus pending set is the whole state space).
    """
    if lts.num_transitions == 0:
        return
    n_sl = lts.num_state_letters
    order = K.counting_sort_by_key(lts.sl_letter,
                                   np.arange(n_sl, dtype=np.int32),
                                   lts.num_letters)
    counts = np.bincount(lts.sl_letter, minlength=lts.num_letters)
    ends = np.cumsum(counts)
    starts = ends - counts
    for a in range(lts.num_letters):
        sls = order[starts[a]:ends[a]]
        if sls.size == 0:
            continue
        bir, couples = part.split(lts.sl_state[sls])
        if stats is not None:
            stats.splits += len(couples)
        nb = part.num_blocks
        in_bir = np.zeros(nb, dtype=np.uint8)
        in_bir[bir] = 1
        for c in bir:
            part.rel[c, :nb] &= in_bir

    nb = part.num_blocks
    if strategy is Strategy.SPACE:
        for b in range(nb):
            ws.enqueue(part, b)
    else:
        for c in range(nb):
            for d in np.flatnonzero(part.rel[c, :nb] == 0):
                part.notrel_append(c, int(d))
            if part.notrel_len(c):
                ws.enqueue(part, c)
        if strategy is Strategy.COUNTING:
            ws.alloc_relcount(lts, part)


def removes_compromise(lts, part, b, notrel_states, ws):
    """Remove sets via one probe per state-letter met in the consumed batch."""
    n, scanned, probes = K.compromise_scan(
        notrel_states, lts.pre_start, lts.pre_end, lts.pre_array,
        lts.trans_sl, lts.trans_target, lts.sl_post_start, lts.sl_post_end,
        part.block_of, part.rel_row(b), ws.sl_seen, ws.remove_mark,
        ws.scratch, ws.out)
    return ws.out[:n].copy(), scanned, probes


def removes_counting(lts, part, b, notrel_states, ws):
    """Remove sets via counter decrements, O(1) per scanned transition."""
    n, scanned, probes = K.counting_scan(
        notrel_states, lts.pre_start, lts.pre_end, lts.pre_array,
        lts.trans_sl, ws.relcount[b], ws.remove_mark, ws.out)
    return ws.out[:n].copy(), scanned, probes


def _removes_counting_debug(lts, part, b, notrel_states, ws):
    """Counting scan with a brute-force recount before every decrement.

    Same visit order and emissions as the kernel; each stored counter is
    checked against the definition (successors still inside the block's rel
    union or unconsumed pending states).  Quadratic, debug mode only.
    """
    row = ws.relcount[b]
    rel_states = set()
    for d in part.rel_blocks(b):
        rel_states.update(part.states_of(int(d)).tolist())
    remaining = set(notrel_states.tolist())
    out = []
    scanned = 0
    probes = 0
    for rp in notrel_states.tolist():
        for t in lts.incoming(rp).tolist():
            scanned += 1
            sl = int(lts.trans_sl[t])
            probes += 1
            expected = 0
            for t2 in lts.outgoing(sl).tolist():
                tgt = int(lts.trans_target[t2])
                if tgt in rel_states or tgt in remaining:
                    expected += 1
            assert expected == int(row[sl]), \
                "counter drift at state-letter %d: stored %d, recount %d" \
                % (sl, int(row[sl]), expected)
            row[sl] -= 1
            assert row[sl] >= 0
            if row[sl] == 0:
                ws.remove_mark[sl] = 1
                out.append(sl)
        remaining.discard(rp)
    return np.asarray(out, dtype=np.int32), scanned, probes


def removes_space(lts, part, b, ws, collect_prerel=False):
    """Remove sets from two full passes over the transition relation.

    With `collect_prerel` the pass-one marks are also returned (the optional
    alternative splitter); that path is vectorized numpy and emits sorted
    ids instead of scan order.
    """
    if collect_prerel:
        row = part.rel_row(b)
        tgt_in_rel = row[part.block_of[lts.trans_target]].astype(bool)
        sls = lts.trans_sl
        prerel_sls = np.unique(sls[tgt_in_rel]).astype(np.int32)
        mask = np.zeros(lts.num_state_letters, dtype=bool)
        mask[prerel_sls] = True
        outside = sls[~tgt_in_rel]
        remove_sls = np.unique(outside[~mask[outside]]).astype(np.int32)
        ws.remove_mark[remove_sls] = 1
        scanned = 2 * lts.num_transitions
        probes = int((~tgt_in_rel).sum())
        return remove_sls, prerel_sls, scanned, probes
    n, scanned, probes = K.space_scan(
        lts.trans_sl, lts.trans_target, part.block_of, part.rel_row(b),
        ws.prerel_mark, ws.remove_mark, ws.scratch, ws.out)
    return ws.out[:n].copy(), None, scanned, probes


def refine_step(lts, part, ws, stats, strategy, letter, remove_sls, preb_sls,
                prerel_sls=None):
    """One per-letter refinement: split on the remove set, cut the relation
    for every split couple, then cut every (predecessor block, removed block)
    pair still related.  With `prerel_sls` the split uses the alternative
    splitter (states leading into the rel union) and cuts run against the
    blocks disjoint from it.
    """
    space = strategy is Strategy.SPACE
    if prerel_sls is not None:
        bir, couples = part.split(lts.sl_state[prerel_sls])
    else:
        bir, couples = part.split(lts.sl_state[remove_sls])
    stats.splits += len(couples)
    if strategy is Strategy.COUNTING:
        for (c, d) in couples:
            ws.copy_relcount(c, d)

    if prerel_sls is not None:
        # the new front part is the inside-the-splitter side here
        for (c, d) in couples:
            part.rel_remove(d, c)
            ws.enqueue(part, c)
            ws.enqueue(part, d)
        inside = np.zeros(part.num_blocks, dtype=bool)
        if bir:
            inside[np.asarray(bir)] = True
        cand_d = np.flatnonzero(~inside)
    else:
        for (c, d) in couples:
            part.rel_remove(c, d)
            if space:
                ws.enqueue(part, c)
                ws.enqueue(part, d)
            else:
                part.notrel_append(c, d)
                ws.enqueue(part, c)
                if part.notrel_len(d):
                    # the copy carried pending work over to the new block
                    ws.enqueue(part, d)
        cand_d = np.asarray(bir, dtype=np.int64)

    if preb_sls is None or preb_sls.size == 0 or cand_d.size == 0:
        return
    cand_c = np.unique(part.block_of[lts.sl_state[preb_sls]])
    # cell [i, j] answers "is removed block i still in predecessor block j's
    # rel row"; iterate removed blocks outer
    snapshot = part.rel[np.ix_(cand_c, cand_d)].T
    for i, j in np.argwhere(snapshot):
        d = int(cand_d[i])
        c = int(cand_c[j])
        assert c != d
        part.rel_remove(c, d)
        if not space:
            part.notrel_append(c, d)
        ws.enqueue(part, c)


def _prepare(lts, p_init, r_init, strategy, debug_checks):
    strategy = Strategy(strategy)
    blocks = [list(b) for b in p_init]
    pairs = set((int(b), int(c)) for (b, c) in r_init)
    part = init_partition(lts, blocks, pairs, debug=debug_checks)
    _check_rel_transitive(len(blocks), pairs)
    ws = _WorkSet(lts)
    stats = Stats(branching_factor_b=lts.branching_factor()
                  if lts.num_transitions else 0)
    init_refine(lts, part, ws, strategy, stats)
    return strategy, part, ws, stats


def initial_refinement(lts, p_init, r_init, strategy=Strategy.COMPROMISE,
                       debug_checks=False):
    """Run only the initialization; returns the refined Partition."""
    _, part, _, _ = _prepare(lts, p_init, r_init, strategy, debug_checks)
    return part


def run(lts, p_init, r_init, strategy=Strategy.COMPROMISE, *,
        debug_checks=False, space_split_on_prerel=False):
    """Coarsest simulation inside the preorder induced by (p_init, r_init).

    The pair must be an antisymmetric partition-relation pair whose induced
    relation is a preorder (validated).  Returns a SimResult whose induced
    relation is the coarsest simulation over `lts` contained in the initial
    relation, itself always a preorder.

    `debug_checks` turns on the internal invariant checks (quadratic on
    purpose; meant for small instances).  `space_split_on_prerel` switches
    the SPACE strategy to the alternative splitter; off by default.
    """
    strategy, part, ws, stats = _prepare(lts, p_init, r_init, strategy,
                                         debug_checks)
    checker = _DebugChecker(lts, part, ws, strategy) if debug_checks else None
    use_prerel = space_split_on_prerel and strategy is Strategy.SPACE
    if checker:
        checker.check(loop_top=False)

    while ws.queue:
        if checker:
            checker.check(loop_top=True)
        b = int(ws.queue.popleft())
        part.in_s[b] = 0
        stats.while_iterations += 1
        ws.assert_clean()

        prerel_sls = None
        if strategy is Strategy.SPACE:
            out_sls, prerel_sls, scanned, probes = removes_space(
                lts, part, b, ws, collect_prerel=use_prerel)
        else:
            notrel_states = part.take_notrel(b)
            if strategy is Strategy.COMPROMISE:
                out_sls, scanned, probes = removes_compromise(
                    lts, part, b, notrel_states, ws)
            elif debug_checks:
                out_sls, scanned, probes = _removes_counting_debug(
                    lts, part, b, notrel_states, ws)
            else:
                out_sls, scanned, probes = removes_counting(
                    lts, part, b, notrel_states, ws)
        stats.transitions_scanned += scanned
        stats.remove_test_probes += probes
        if out_sls.size == 0:
            continue

        alph, removes_per = _group_by_letter(out_sls, lts.sl_letter)
        ws.set_alph(alph)
        n_preb, scanned = K.preb_scan(
            part.states_of(b), lts.pre_start, lts.pre_end, lts.pre_array,
            lts.trans_sl, lts.sl_letter, ws.letter_mark, ws.preb_mark,
            ws.remove_mark, ws.out2)
        stats.transitions_scanned += scanned
        preb_per = {}
        if n_preb:
            _, preb_per = _group_by_letter(ws.out2[:n_preb].copy(),
                                           lts.sl_letter)
        prerel_per = {}
        if use_prerel and prerel_sls is not None and prerel_sls.size:
            _, prerel_per = _group_by_letter(prerel_sls, lts.sl_letter)

        empty = np.empty(0, dtype=np.int32)
        for a in alph:
            refine_step(lts, part, ws, stats, strategy, a, removes_per[a],
                        preb_per.get(a),
                        prerel_per.get(a, empty) if use_prerel else None)
            if checker:
                checker.after_refine_step()
        ws.clear_letters(removes_per, preb_per)

    stats.peak_blocks = part.num_blocks
    return SimResult(partition=part,
                     relation_pairs=frozenset(part.relation_pairs()),
                     stats=stats)


class _DebugChecker:
    """Loop invariants checked by enumeration; only sensible on small inputs."""

    ENUM_CAP = oracle.ORACLE_STATE_CAP

    def __init__(self, lts, part, ws, strategy):
        self.lts = lts
        self.part = part
        self.ws = ws
        self.strategy = strategy
        self.enum = lts.num_states <= self.ENUM_CAP
        self.moves = oracle._out_moves(lts)

    def check(self, loop_top):
        self._reflexive()
        if self.strategy is not Strategy.SPACE:
            self._s_membership()
            if self.enum:
                self._loop_invariant()

    def after_refine_step(self):
        self._reflexive()
        if self.enum:
            rel = oracle.StateRelation(self.lts.num_states,
                                       self.part.induced_relation())
            assert oracle.is_block_definable(rel), \
                "induced relation lost block-definability"

    def _reflexive(self):
        nb = self.part.num_blocks
        assert all(self.part.rel[b, b] for b in range(nb)), \
            "block relation lost reflexivity"

    def _s_membership(self):
        part = self.part
        for g in range(part.num_blocks):
            assert bool(part.in_s[g]) == (part.notrel_len(g) > 0), \
                "queue membership does not match pending sets at block %d" % g

    def _loop_invariant(self):
        part, lts = self.part, self.lts
        bits = part.induced_relation()
        for g in range(part.num_blocks):
            union = set()
            for d in part.rel_blocks(g):
                union.update(part.states_of(int(d)).tolist())
            for node in part.notrel_nodes(g):
                union.update(part.node_span_states(node).tolist())
            g_states = set(part.states_of(g).tolist())
            for c in range(lts.num_letters):
                pre_u = set()
                pre_g = set()
                for q, moves in enumerate(self.moves):
                    for (a, qp) in moves:
                        if a != c:
                            continue
                        if qp in union:
                            pre_u.add(q)
                        if qp in g_states:
                            pre_g.add(q)
                lhs = set()
                for q in pre_u:
                    lhs.update(oracle._kernel_class(bits, q))
                for q in pre_g:
                    lhs.update(int(r) for r in np.flatnonzero(bits[q]))
                assert lhs <= pre_u, \
                    "loop invariant broken at block %d letter %d" % (g, c)
