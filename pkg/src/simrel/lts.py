"""Normalized labelled transition systems with dense scan indices.

Normalization restricts the alphabet to letters that label a transition and
the state set to states incident to one, deduplicates the transition list,
and builds the counting-sort indices everything downstream scans: transitions
grouped per (source, letter) state-letter, and grouped per target state.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ValidationError


@dataclass
class RawLts:
    """Transition list as parsed or generated, before normalization.

    Duplicate transitions are allowed; they are removed during normalization.
    """

    num_states: int
    labels: list
    transitions: list  # (source, label index, target) triples
    state_names: list | None = None


@dataclass
class RemapReport:
    """What normalization dropped or renumbered."""

    state_map: np.ndarray   # old state index -> new, -1 when dropped
    letter_map: np.ndarray  # old label index -> new, -1 when dropped
    dropped_states: list
    dropped_letters: list
    duplicates_removed: int
    first_state: int | None = None  # carried from .aut headers, unused otherwise


class NormalizedLts:
    """Indexed LTS: every letter labels a transition, every state touches one.

    Transitions are stored sorted by (source, letter, target); `post_array`
    is that permutation (the identity by construction) and the state-letter
    table carries one contiguous range per (source, letter) pair.  `pre_array`
    permutes transitions by target with one range per state.  Instances are
    immutable after construction and safe to share between threads.
    """

    def __init__(self, num_states, letters, trans_source, trans_label,
                 trans_target, state_names=None):
        self.num_states = int(num_states)
        self.letters = list(letters)
        self.num_letters = len(self.letters)
        self.state_names = list(state_names) if state_names is not None else None

        self.trans_source = trans_source
        self.trans_label = trans_label
        self.trans_target = trans_target
        m = trans_source.shape[0]
        self.post_array = np.arange(m, dtype=np.int32)

        # state-letter table: boundaries where (source, letter) changes
        new_sl = np.ones(m, dtype=bool)
        new_sl[1:] = (trans_source[1:] != trans_source[:-1]) | \
                     (trans_label[1:] != trans_label[:-1])
        self.trans_sl = (np.cumsum(new_sl) - 1).astype(np.int32)
        starts = np.flatnonzero(new_sl).astype(np.int32)
        self.sl_post_start = starts
        self.sl_post_end = np.append(starts[1:], np.int32(m)).astype(np.int32)
        self.sl_state = trans_source[starts].copy()
        self.sl_letter = trans_label[starts].copy()

        self.pre_array = K.counting_sort_by_key(
            trans_target, np.arange(m, dtype=np.int32), self.num_states)
        counts = np.bincount(trans_target, minlength=self.num_states)
        ends = np.cumsum(counts)
        self.pre_end = ends.astype(np.int32)
        self.pre_start = (ends - counts).astype(np.int32)

        for arr in (self.trans_source, self.trans_label, self.trans_target,
                    self.post_array, self.trans_sl, self.sl_post_start,
                    self.sl_post_end, self.sl_state, self.sl_letter,
                    self.pre_array, self.pre_start, self.pre_end):
            arr.setflags(write=False)

    @property
    def num_transitions(self):
        return int(self.trans_source.shape[0])

    @property
    def num_state_letters(self):
        return int(self.sl_state.shape[0])

    def incoming(self, state):
        """Transition ids ending in `state`, in pre_array order."""
        return self.pre_array[self.pre_start[state]:self.pre_end[state]]

    def outgoing(self, sl):
        """Transition ids of state-letter `sl`, in post_array order."""
        return self.post_array[self.sl_post_start[sl]:self.sl_post_end[sl]]

    def branching_factor(self):
        """Largest number of same-letter transitions out of one state."""
        return int((self.sl_post_end - self.sl_post_start).max())

    def state_name(self, q):
        if self.state_names is not None:
            return self.state_names[q]
        return str(q)

    def transition_triples(self):
        """The transition set as (source, letter, target) tuples."""
        return set(zip(self.trans_source.tolist(), self.trans_label.tolist(),
                       self.trans_target.tolist()))

    def to_raw(self):
        """Round back to a RawLts (normalize of the result is a no-op)."""
        triples = list(zip(self.trans_source.tolist(),
                           self.trans_label.tolist(),
                           self.trans_target.tolist()))
        return RawLts(self.num_states, list(self.letters), triples,
                      state_names=list(self.state_names) if self.state_names else None)


def _sort_and_dedup(num_states, num_letters, src, lab, tgt):
    """Stable counting sorts by target, then letter, then source, then drop
    adjacent duplicates.  Returns the final (source, letter, target) arrays
    in post order plus the number of duplicates removed.
    """
    m = src.shape[0]
    order = np.arange(m, dtype=np.int32)
    order = K.counting_sort_by_key(tgt, order, num_states)
    order = K.counting_sort_by_key(lab, order, num_letters)
    order = K.counting_sort_by_key(src, order, num_states)
    s, l, t = src[order], lab[order], tgt[order]
    keep = np.ones(m, dtype=bool)
    keep[1:] = (s[1:] != s[:-1]) | (l[1:] != l[:-1]) | (t[1:] != t[:-1])
    dups = int(m - keep.sum())
    return s[keep].copy(), l[keep].copy(), t[keep].copy(), dups


def build_indices(num_states, letters, src, lab, tgt, state_names=None):
    """Build a NormalizedLts from already-restricted index arrays.

    Sorting, deduplication and all range tables happen here; total time is
    linear in the number of transitions.
    """
    src = np.ascontiguousarray(src, dtype=np.int32)
    lab = np.ascontiguousarray(lab, dtype=np.int32)
    tgt = np.ascontiguousarray(tgt, dtype=np.int32)
    s, l, t, dups = _sort_and_dedup(num_states, len(letters), src, lab, tgt)
    lts = NormalizedLts(num_states, letters, s, l, t, state_names=state_names)
    return lts, dups


def normalize(raw):
    """Validate and normalize a RawLts.

    Returns (NormalizedLts, RemapReport).  Raises ValidationError for index
    range errors (naming the offending transition) and for an LTS with no
    transitions at all, which has nothing to simulate.
    """
    n_raw = int(raw.num_states)
    k_raw = len(raw.labels)
    if n_raw < 0:
        raise ValidationError("negative state count %d" % n_raw)
    if not raw.transitions:
        raise ValidationError("LTS has no transitions; nothing to normalize")

    m = len(raw.transitions)
    src = np.empty(m, dtype=np.int64)
    lab = np.empty(m, dtype=np.int64)
    tgt = np.empty(m, dtype=np.int64)
    for i, (a, b, c) in enumerate(raw.transitions):
        src[i], lab[i], tgt[i] = a, b, c
    bad = np.flatnonzero((src < 0) | (src >= n_raw) | (tgt < 0) |
                         (tgt >= n_raw) | (lab < 0) | (lab >= k_raw))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            "transition %d out of range: (%d, %d, %d) with %d states, %d labels"
            % (i, src[i], lab[i], tgt[i], n_raw, k_raw))

    # single marking pass restricts letters and states to the useful part
    letter_used = np.zeros(k_raw, dtype=bool)
    letter_used[lab] = True
    state_used = np.zeros(n_raw, dtype=bool)
    state_used[src] = True
    state_used[tgt] = True

    letter_map = np.full(k_raw, -1, dtype=np.int32)
    letter_map[letter_used] = np.arange(int(letter_used.sum()), dtype=np.int32)
    state_map = np.full(n_raw, -1, dtype=np.int32)
    state_map[state_used] = np.arange(int(state_used.sum()), dtype=np.int32)

    letters = [raw.labels[i] for i in np.flatnonzero(letter_used)]
    if raw.state_names is not None:
        names = [raw.state_names[i] for i in np.flatnonzero(state_used)]
    else:
        names = [str(i) for i in np.flatnonzero(state_used)]

    lts, dups = build_indices(int(state_used.sum()), letters,
                              state_map[src], letter_map[lab], state_map[tgt],
                              state_names=names)
    report = RemapReport(
        state_map=state_map,
        letter_map=letter_map,
        dropped_states=np.flatnonzero(~state_used).tolist(),
        dropped_letters=np.flatnonzero(~letter_used).tolist(),
        duplicates_removed=dups,
    )
    return lts, report
