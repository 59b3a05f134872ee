"""Hot inner loops, compiled with numba when available.

Every kernel is a plain function over flat numpy arrays, so the identical code
runs either under ``@njit`` or interpreted.  The path is chosen once at import
time: set ``SIMREL_JIT=0`` to force the interpreted numpy fallback (the
benchmark in benchmarks/bench_jit.py times both paths against each other).
The untouched Python originals stay reachable through ``PY_KERNELS`` so tests
can cross-check the two paths inside one process.
"""

import os

import numpy as np


def jit_requested():
    env = os.environ.get("SIMREL_JIT", "auto").strip().lower()
    if env in ("0", "off", "no", "false", "py"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


JIT_ENABLED = jit_requested()


def counting_sort_by_key(keys, order, num_keys):
    """Stable counting sort of the item ids in `order` by keys[item].

    Returns a new order array; `keys` values must lie in [0, num_keys).
    """
    counts = np.zeros(num_keys + 1, np.int64)
    for i in range(order.shape[0]):
        counts[keys[order[i]] + 1] += 1
    for k in range(num_keys):
        counts[k + 1] += counts[k]
    out = np.empty_like(order)
    for i in range(order.shape[0]):
        k = keys[order[i]]
        out[counts[k]] = order[i]
        counts[k] += 1
    return out


def split_swap(remove, block_of, pos_qp, q_p, block_node, node_start,
               split_count, touched):
    """Phase one of a split: swap each removed state to the front of its
    block's span.  Mutates q_p/pos_qp/split_count in place and records blocks
    in first-touch order; returns how many blocks were touched.

    `remove` must be duplicate-free and all split counters zero on entry.
    """
    n_touched = 0
    for i in range(remove.shape[0]):
        r = remove[i]
        c = block_of[r]
        if split_count[c] == 0:
            touched[n_touched] = c
            n_touched += 1
        oldpos = pos_qp[r]
        newpos = node_start[block_node[c]] + split_count[c]
        other = q_p[newpos]
        q_p[newpos] = r
        q_p[oldpos] = other
        pos_qp[r] = newpos
        pos_qp[other] = oldpos
        split_count[c] += 1
    return n_touched


def compromise_scan(notrel_states, pre_start, pre_end, pre_array, trans_sl,
                    trans_target, sl_post_start, sl_post_end, block_of,
                    rel_row, sl_seen, remove_mark, scratch_sls, out_sls):
    """Remove-set scan that probes each state-letter once per consumed batch.

    Walks transitions into `notrel_states`; the first time a state-letter is
    met, its outgoing transitions are probed against `rel_row`.  State-letters
    with no successor inside the row are emitted into `out_sls` and marked in
    `remove_mark`.  `sl_seen` is restored to all-zero before returning.
    Returns (emitted, transitions scanned, probe steps).
    """
    n_out = 0
    n_probed = 0
    scanned = 0
    probes = 0
    for i in range(notrel_states.shape[0]):
        rp = notrel_states[i]
        for p in range(pre_start[rp], pre_end[rp]):
            t = pre_array[p]
            scanned += 1
            sl = trans_sl[t]
            if sl_seen[sl] != 0:
                continue
            sl_seen[sl] = 1
            scratch_sls[n_probed] = sl
            n_probed += 1
            hit = False
            for j in range(sl_post_start[sl], sl_post_end[sl]):
                probes += 1
                if rel_row[block_of[trans_target[j]]] != 0:
                    hit = True
                    break
            if not hit:
                remove_mark[sl] = 1
                out_sls[n_out] = sl
                n_out += 1
    for i in range(n_probed):
        sl_seen[scratch_sls[i]] = 0
    return n_out, scanned, probes


def counting_scan(notrel_states, pre_start, pre_end, pre_array, trans_sl,
                  relcount_row, remove_mark, out_sls):
    """Remove-set scan via per-state-letter successor counters.

    Each transition into a consumed state decrements its state-letter's
    counter; a counter reaching zero proves the source has no successor left
    inside the block's rel union, so the state-letter is emitted.  Counters
    must satisfy the documented invariant on entry; underflow is a bug.
    Returns (emitted, transitions scanned, probe steps).
    """
    n_out = 0
    scanned = 0
    probes = 0
    for i in range(notrel_states.shape[0]):
        rp = notrel_states[i]
        for p in range(pre_start[rp], pre_end[rp]):
            t = pre_array[p]
            scanned += 1
            sl = trans_sl[t]
            probes += 1
            relcount_row[sl] -= 1
            assert relcount_row[sl] >= 0
            if relcount_row[sl] == 0:
                remove_mark[sl] = 1
                out_sls[n_out] = sl
                n_out += 1
    return n_out, scanned, probes


def space_scan(trans_sl, trans_target, block_of, rel_row, prerel_mark,
               remove_mark, scratch_sls, out_sls):
    """Remove-set scan with no per-block memory: two passes over all
    transitions.  Pass one marks state-letters with a successor inside
    `rel_row`; pass two emits the unmarked ones that lead outside it.
    `prerel_mark` is restored to all-zero before returning; `remove_mark`
    keeps the emitted marks.  Returns (emitted, scanned, probe steps).
    """
    n_out = 0
    n_marked = 0
    scanned = 0
    probes = 0
    m = trans_sl.shape[0]
    for t in range(m):
        scanned += 1
        if rel_row[block_of[trans_target[t]]] != 0:
            sl = trans_sl[t]
            if prerel_mark[sl] == 0:
                prerel_mark[sl] = 1
                scratch_sls[n_marked] = sl
                n_marked += 1
    for t in range(m):
        scanned += 1
        if rel_row[block_of[trans_target[t]]] == 0:
            sl = trans_sl[t]
            probes += 1
            if prerel_mark[sl] == 0 and remove_mark[sl] == 0:
                remove_mark[sl] = 1
                out_sls[n_out] = sl
                n_out += 1
    for i in range(n_marked):
        prerel_mark[scratch_sls[i]] = 0
    return n_out, scanned, probes


def preb_scan(b_states, pre_start, pre_end, pre_array, trans_sl, sl_letter,
              letter_mark, preb_mark, remove_mark, out_sls):
    """Collect state-letters with a transition into the given block, for
    marked letters only.  A state-letter can never be in both the remove set
    and here (its block is related to itself), hence the assert.
    Returns (emitted, transitions scanned).
    """
    n_out = 0
    scanned = 0
    for i in range(b_states.shape[0]):
        q = b_states[i]
        for p in range(pre_start[q], pre_end[q]):
            t = pre_array[p]
            scanned += 1
            sl = trans_sl[t]
            if letter_mark[sl_letter[sl]] == 0:
                continue
            if preb_mark[sl] != 0:
                continue
            assert remove_mark[sl] == 0
            preb_mark[sl] = 1
            out_sls[n_out] = sl
            n_out += 1
    return n_out, scanned


PY_KERNELS = {
    "counting_sort_by_key": counting_sort_by_key,
    "split_swap": split_swap,
    "compromise_scan": compromise_scan,
    "counting_scan": counting_scan,
    "space_scan": space_scan,
    "preb_scan": preb_scan,
}

if JIT_ENABLED:
    from numba import njit

    counting_sort_by_key = njit(cache=True)(counting_sort_by_key)
    split_swap = njit(cache=True)(split_swap)
    compromise_scan = njit(cache=True)(compromise_scan)
    counting_scan = njit(cache=True)(counting_scan)
    space_scan = njit(cache=True)(space_scan)
    preb_scan = njit(cache=True)(preb_scan)
