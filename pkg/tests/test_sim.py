import numpy as np
import pytest

from simrel import oracle
from simrel.errors import ValidationError
from simrel.oracle import StateRelation, induced_relation
from simrel.partition import init_partition
from simrel.sim import (Stats, Strategy, _WorkSet, init_refine,
                        initial_refinement, removes_compromise,
                        removes_counting, removes_space, run)

from conftest import (corpus_lts, identity_init, initial_pairs, mk_lts,
                      universal_init)

STRATEGIES = list(Strategy)


def _oracle_result(lts, blocks, pairs):
    rel = induced_relation(lts.num_states, blocks, pairs)
    return oracle.naive_coarsest_simulation(lts, rel)


# ---------------------------------------------------------------- init ----

def test_init_refine_tiny(tiny_lts):
    part = initial_refinement(tiny_lts, *universal_init(2))
    # q0 can fire 'a', q1 cannot: the pair (q0, q1) is cut, nothing else
    got = part.induced_relation()
    want = oracle.init_refine_reference(
        tiny_lts, StateRelation.universal(2)).bits
    assert np.array_equal(got, want)
    assert part.num_blocks == 2


def test_init_refine_identity_partition(tiny_lts):
    # identity is already inside anything: nothing to prune, but every block
    # has a nonempty pending set, so all of them queue up
    blocks, pairs = identity_init(2)
    part = initial_refinement(tiny_lts, blocks, pairs)
    assert np.array_equal(part.induced_relation(), np.eye(2, dtype=bool))
    ws = _WorkSet(tiny_lts)
    part2 = init_partition(tiny_lts, blocks, pairs)
    init_refine(tiny_lts, part2, ws, Strategy.COMPROMISE)
    assert sorted(ws.queue) == list(range(part2.num_blocks))


def test_init_refine_empty_alphabet_guard():
    # a hand-built transitionless LTS never reaches the letter loops
    from simrel.lts import NormalizedLts
    lts = NormalizedLts(2, [], np.empty(0, np.int32), np.empty(0, np.int32),
                        np.empty(0, np.int32))
    part = init_partition(lts, [[0, 1]], {(0, 0)})
    ws = _WorkSet(lts)
    init_refine(lts, part, ws, Strategy.COMPROMISE)
    assert part.num_blocks == 1 and not ws.queue


def test_init_refine_matches_reference_on_corpus_sample():
    for seed in range(80):
        lts = corpus_lts(seed)
        n = lts.num_states
        for _, blocks, pairs in initial_pairs(seed, n):
            part = initial_refinement(lts, blocks, pairs)
            want = oracle.init_refine_reference(
                lts, induced_relation(n, blocks, pairs))
            assert np.array_equal(part.induced_relation(), want.bits)


def test_counting_counters_start_at_out_degree():
    lts = mk_lts(3, [(0, 0, 1), (0, 0, 2), (1, 0, 0)])
    part = init_partition(lts, [[0, 1, 2]], {(0, 0)})
    ws = _WorkSet(lts)
    init_refine(lts, part, ws, Strategy.COUNTING)
    sizes = (lts.sl_post_end - lts.sl_post_start).tolist()
    for b in range(part.num_blocks):
        assert ws.relcount[b].tolist() == sizes


def test_space_init_queues_every_block():
    lts = mk_lts(3, [(0, 0, 1), (1, 1, 2)])
    part = init_partition(lts, [[0, 1, 2]], {(0, 0)})
    ws = _WorkSet(lts)
    init_refine(lts, part, ws, Strategy.SPACE)
    assert sorted(ws.queue) == list(range(part.num_blocks))
    assert all(part.notrel_len(b) == 0 for b in range(part.num_blocks))


# ---------------------------------------------------------------- run -----

@pytest.mark.parametrize("strategy", STRATEGIES)
def test_run_tiny(tiny_lts, strategy):
    res = run(tiny_lts, *universal_init(2), strategy)
    want = _oracle_result(tiny_lts, *universal_init(2))
    assert np.array_equal(res.induced_relation(), want.bits)
    assert sorted(res.blocks()) == [[0], [1]]


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_run_sim_not_bisim(sim_not_bisim_lts, strategy):
    lts = sim_not_bisim_lts
    res = run(lts, *universal_init(7), strategy, debug_checks=True)
    blocks = sorted(res.blocks())
    # t0/u0 together, t1/u1 together, all deadlocks together
    assert blocks == [[0, 4], [1, 5], [2, 3, 6]]
    want = _oracle_result(lts, *universal_init(7))
    assert np.array_equal(res.induced_relation(), want.bits)
    # deadlocks are simulated by every block, nothing else crosses
    by_min = {min(b): i for i, b in enumerate(res.blocks())}
    pairs = res.relation_pairs
    dead = by_min[2]
    assert (dead, by_min[0]) in pairs and (dead, by_min[1]) in pairs
    assert (by_min[0], dead) not in pairs


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_rerun_on_fixpoint_changes_nothing(strategy):
    for seed in (3, 17, 40):
        lts = corpus_lts(seed)
        n = lts.num_states
        first = run(lts, *universal_init(n), strategy)
        blocks, pairs = oracle.preorder_to_partition_relation(
            StateRelation(n, first.induced_relation()))
        part_after_init = initial_refinement(lts, blocks, pairs, strategy)
        second = run(lts, blocks, pairs, strategy)
        # already a fixpoint: init output equals final output
        assert np.array_equal(part_after_init.induced_relation(),
                              second.induced_relation())
        assert np.array_equal(second.induced_relation(),
                              first.induced_relation())


def test_run_validates_preorder():
    lts = mk_lts(3, [(0, 0, 1), (1, 0, 2), (2, 0, 0)])
    blocks = [[0], [1], [2]]
    pairs = {(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)}  # not transitive
    with pytest.raises(ValidationError, match="transitive"):
        run(lts, blocks, pairs)


def test_run_accepts_strategy_strings(tiny_lts):
    res = run(tiny_lts, *universal_init(2), "counting")
    assert res.stats.branching_factor_b == 1


# ----------------------------------------------------- remove strategies --

def _prepped(lts, strategy):
    part = init_partition(lts, [list(range(lts.num_states))], {(0, 0)})
    ws = _WorkSet(lts)
    init_refine(lts, part, ws, strategy)
    return part, ws


def test_removes_compromise_empty_batch(tiny_lts):
    part, ws = _prepped(tiny_lts, Strategy.COMPROMISE)
    out, scanned, probes = removes_compromise(
        tiny_lts, part, 0, np.empty(0, np.int32), ws)
    assert out.size == 0 and scanned == 0 and probes == 0


def test_removes_compromise_emits_failing_state_letter(tiny_lts):
    # after init, {q0}'s row holds only itself and its pending set is {q1};
    # q0's a-move cannot land inside the row, so q0_a is emitted
    part, ws = _prepped(tiny_lts, Strategy.COMPROMISE)
    b = part.lookup(0)
    batch = part.take_notrel(b)
    assert batch.tolist() == [1]
    out, scanned, probes = removes_compromise(tiny_lts, part, b, batch, ws)
    assert [int(tiny_lts.sl_state[sl]) for sl in out] == [0]
    assert scanned == 1 and probes == 1
    ws.remove_mark[:] = 0


def test_removes_compromise_probes_each_state_letter_once():
    # r -a-> r1 and r -a-> r2 with both targets pending: one probe set only
    lts = mk_lts(4, [(0, 0, 1), (0, 0, 2), (3, 0, 3)])
    part = init_partition(lts, [[0, 3], [1], [2]],
                          {(0, 0), (1, 1), (2, 2)})
    ws = _WorkSet(lts)
    b = 0
    batch = np.array([1, 2], dtype=np.int32)
    out, scanned, probes = removes_compromise(lts, part, b, batch, ws)
    assert scanned == 2          # two transitions into the batch
    assert probes == 2           # 0_a probed once, over its two successors
    # 0 has no a-successor in block {0,3}'s rel row: emitted once
    assert [int(lts.sl_state[sl]) for sl in out] == [0]
    ws.remove_mark[:] = 0

    # relate block {0,3} to {2}: now the probe finds a successor, no emit
    part.rel_add(0, 2)
    out, scanned, probes = removes_compromise(lts, part, b, batch, ws)
    assert out.size == 0 and scanned == 2
    assert probes <= 2


def test_removes_counting_decrements_to_zero(tiny_lts):
    part, ws = _prepped(tiny_lts, Strategy.COUNTING)
    b = part.lookup(0)
    batch = part.take_notrel(b)
    assert batch.tolist() == [1]
    sl0 = int(tiny_lts.trans_sl[0])
    assert ws.relcount[b][sl0] == 1
    out, scanned, probes = removes_counting(tiny_lts, part, b, batch, ws)
    assert out.tolist() == [sl0]
    assert ws.relcount[b][sl0] == 0
    ws.remove_mark[:] = 0


def test_removes_counting_matches_compromise_on_corpus_sample():
    for seed in range(60):
        lts = corpus_lts(seed)
        n = lts.num_states
        a = run(lts, *universal_init(n), Strategy.COUNTING)
        b = run(lts, *universal_init(n), Strategy.COMPROMISE)
        assert np.array_equal(a.induced_relation(), b.induced_relation())


def test_removes_space_full_rel_row_finds_nothing(tiny_lts):
    # q1's block relates to everything after init: the complement is empty
    part, ws = _prepped(tiny_lts, Strategy.SPACE)
    b = part.lookup(1)
    assert part.rel_blocks(b).size == part.num_blocks
    out, _, scanned, probes = removes_space(tiny_lts, part, b, ws)
    assert out.size == 0 and probes == 0
    assert scanned == 2 * tiny_lts.num_transitions


def test_removes_space_tiny_self_block(tiny_lts):
    # q0's block relates only to itself; q0's move lands outside it and q0
    # is not marked by pass one, so q0_a is emitted
    part, ws = _prepped(tiny_lts, Strategy.SPACE)
    b = part.lookup(0)
    out, _, scanned, probes = removes_space(tiny_lts, part, b, ws)
    assert [int(tiny_lts.sl_state[sl]) for sl in out] == [0]
    ws.remove_mark[:] = 0
    # relate it to q1's block as well: pass one now marks q0, pass two skips
    part.rel_add(b, part.lookup(1))
    out, _, _, _ = removes_space(tiny_lts, part, b, ws)
    assert out.size == 0


@pytest.mark.parametrize("strategy", [Strategy.SPACE])
def test_space_and_counting_agree_on_seeded_corpus(strategy):
    for seed in range(120):
        lts = corpus_lts(seed)
        n = lts.num_states
        a = run(lts, *universal_init(n), strategy)
        b = run(lts, *universal_init(n), Strategy.COUNTING)
        assert np.array_equal(a.induced_relation(), b.induced_relation())


def test_space_alternative_splitter_matches_oracle():
    for seed in range(120):
        lts = corpus_lts(seed)
        n = lts.num_states
        for _, blocks, pairs in initial_pairs(seed, n):
            res = run(lts, blocks, pairs, Strategy.SPACE,
                      space_split_on_prerel=True)
            want = _oracle_result(lts, blocks, pairs)
            assert np.array_equal(res.induced_relation(), want.bits)


# ----------------------------------------------------------- invariants ---

@pytest.mark.parametrize("strategy", STRATEGIES)
def test_result_relation_is_preorder_and_antisymmetric(strategy):
    for seed in range(60):
        lts = corpus_lts(seed)
        n = lts.num_states
        res = run(lts, *universal_init(n), strategy)
        rel = StateRelation(n, res.induced_relation())
        assert oracle.is_preorder(rel)
        pairs = res.relation_pairs
        assert all((c, b) not in pairs for (b, c) in pairs if b != c)
        assert oracle.block_simulation_holds(lts, res.blocks(),
                                             res.relation_pairs)


def test_monotone_shrinking_from_init():
    for seed in range(40):
        lts = corpus_lts(seed)
        n = lts.num_states
        init_rel = initial_refinement(lts, *universal_init(n)).induced_relation()
        final = run(lts, *universal_init(n)).induced_relation()
        assert not (final & ~init_rel).any()


def test_stats_counters_populated(sim_not_bisim_lts):
    res = run(sim_not_bisim_lts, *universal_init(7), Strategy.COMPROMISE)
    s = res.stats
    assert s.while_iterations > 0
    assert s.peak_blocks == res.partition.num_blocks
    assert s.splits == res.partition.num_blocks - 1
    assert s.branching_factor_b == 2
    assert s.transitions_scanned > 0 and s.remove_test_probes > 0


def test_debug_checks_run_clean_on_small_corpus():
    for seed in range(40):
        lts = corpus_lts(seed)
        n = lts.num_states
        for strategy in STRATEGIES:
            run(lts, *universal_init(n), strategy, debug_checks=True)
