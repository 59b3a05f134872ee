"""File formats and the seeded instance generator.

Three text formats live here:

* Aldebaran ``.aut``: header ``des (first, T, S)`` followed by exactly T
  lines ``(from, LABEL, to)``.  LABEL is either double-quoted (with ``\\"``
  and ``\\\\`` escapes) or a bare token without commas or parentheses.
* ``.pr``: an initial partition-relation pair.  A ``partition`` section of
  lines ``i: s1 s2 ...`` then a ``relation`` section of lines ``i j``.
  Reflexive pairs may be omitted; the induced relation must be a preorder.
* result documents: ``simrel-result v1`` header, blocks sorted by smallest
  member, the block relation, then the run counters.

The generator is reproducible bit-for-bit: a Marsaglia xorshift64* PRNG
(shifts 12/25/27, multiplier 2685821657736338717, zero seeds remapped to
0x9E3779B97F4A7C15) drawing uniform values below n by taking the top
ceil(log2 n) bits and rejecting values >= n; each transition draws source,
then letter, then target.
"""

import re

import numpy as np

from .errors import FormatError, ValidationError
from .lts import RawLts

RESULT_HEADER = "simrel-result v1"

_DES_RE = re.compile(r"^des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")


def _split_aut_line(text, lineno):
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise FormatError("transition must be parenthesized: %r" % body, lineno)
    body = body[1:-1]
    comma = body.find(",")
    if comma < 0:
        raise FormatError("missing comma after source state", lineno)
    src = body[:comma].strip()
    rest = body[comma + 1:].lstrip()
    if rest.startswith('"'):
        label_chars = []
        i = 1
        while i < len(rest):
            ch = rest[i]
            if ch == "\\" and i + 1 < len(rest) and rest[i + 1] in '"\\':
                label_chars.append(rest[i + 1])
                i += 2
                continue
            if ch == '"':
                break
            label_chars.append(ch)
            i += 1
        else:
            raise FormatError("unterminated quoted label", lineno)
        label = "".join(label_chars)
        rest = rest[i + 1:].lstrip()
        if not rest.startswith(","):
            raise FormatError("missing comma after label", lineno)
        tgt = rest[1:].strip()
    else:
        comma = rest.rfind(",")
        if comma < 0:
            raise FormatError("missing comma after label", lineno)
        label = rest[:comma].strip()
        if "(" in label or ")" in label:
            raise FormatError("bare label may not contain parentheses", lineno)
        if not label:
            raise FormatError("empty label", lineno)
        tgt = rest[comma + 1:].strip()
    if not src.isdigit():
        raise FormatError("source state %r is not a number" % src, lineno)
    if not tgt.isdigit():
        raise FormatError("target state %r is not a number" % tgt, lineno)
    return int(src), label, int(tgt)


def parse_aut(text):
    """Parse an Aldebaran document into a RawLts.

    Returns (RawLts, first_state).  Raises FormatError with the offending
    line number for malformed headers, bad transition lines, count mismatches
    and out-of-range state indices.
    """
    lines = text.splitlines()
    header_idx = None
    for i, line in enumerate(lines):
        if line.strip():
            header_idx = i
            break
    if header_idx is None:
        raise FormatError("empty document, expected a des(...) header", 1)
    m = _DES_RE.match(lines[header_idx].strip())
    if not m:
        raise FormatError("expected header 'des (first, transitions, states)', "
                          "got %r" % lines[header_idx].strip(), header_idx + 1)
    first_state, n_trans, n_states = (int(g) for g in m.groups())
    if first_state >= n_states and n_states > 0:
        raise FormatError("first state %d out of range (%d states)"
                          % (first_state, n_states), header_idx + 1)

    labels = []
    label_ids = {}
    transitions = []
    lineno = header_idx + 1
    for line in lines[header_idx + 1:]:
        lineno += 1
        if not line.strip():
            continue
        if len(transitions) == n_trans:
            raise FormatError("expected %d transitions, found extra data"
                              % n_trans, lineno)
        src, label, tgt = _split_aut_line(line, lineno)
        if src >= n_states or tgt >= n_states:
            raise FormatError("state index out of range in (%d, %s, %d): "
                              "header declares %d states"
                              % (src, label, tgt, n_states), lineno)
        if label not in label_ids:
            label_ids[label] = len(labels)
            labels.append(label)
        transitions.append((src, label_ids[label], tgt))
    if len(transitions) != n_trans:
        raise FormatError("expected %d transitions, found %d at EOF"
                          % (n_trans, len(transitions)), len(lines))
    return RawLts(n_states, labels, transitions), first_state


def _quote_label(label):
    return '"%s"' % label.replace("\\", "\\\\").replace('"', '\\"')


def emit_aut(lts, first_state=0):
    """Aldebaran text for a normalized LTS; transitions sorted by
    (source, label, target), labels quoted.  parse_aut inverts this up to
    label numbering."""
    triples = sorted(
        (int(s), lts.letters[l], int(t))
        for s, l, t in zip(lts.trans_source, lts.trans_label, lts.trans_target))
    out = ["des (%d, %d, %d)" % (first_state, len(triples), lts.num_states)]
    out.extend("(%d, %s, %d)" % (s, _quote_label(l), t) for s, l, t in triples)
    return "\n".join(out) + "\n"


def emit_raw_aut(raw, first_state=0):
    """Aldebaran text for a RawLts, transitions in list order (duplicates and
    isolated states preserved)."""
    out = ["des (%d, %d, %d)" % (first_state, len(raw.transitions),
                                 raw.num_states)]
    out.extend("(%d, %s, %d)" % (s, _quote_label(raw.labels[l]), t)
               for (s, l, t) in raw.transitions)
    return "\n".join(out) + "\n"


def parse_pr(text, num_states):
    """Parse an initial partition-relation pair over `num_states` states.

    Returns (blocks, pairs) with reflexive pairs added.  Raises FormatError
    for grammar problems and ValidationError-grade issues (overlap, missing
    states, antisymmetry or transitivity violations), all with line numbers.
    """
    blocks = {}
    pairs = set()
    section = None
    state_owner = {}
    block_line = {}
    last_line = 0
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        last_line = lineno
        if line == "partition":
            section = "partition"
            continue
        if line == "relation":
            if section is None:
                raise FormatError("relation section before partition", lineno)
            section = "relation"
            continue
        if section is None:
            raise FormatError("expected 'partition' section header, got %r"
                              % line, lineno)
        if section == "partition":
            if ":" not in line:
                raise FormatError("block line must look like 'i: s1 s2 ...'",
                                  lineno)
            head, _, tail = line.partition(":")
            if not head.strip().isdigit():
                raise FormatError("block index %r is not a number"
                                  % head.strip(), lineno)
            idx = int(head.strip())
            if idx in blocks:
                raise FormatError("block %d defined twice" % idx, lineno)
            members = []
            for tok in tail.split():
                if not tok.isdigit():
                    raise FormatError("state %r is not a number" % tok, lineno)
                q = int(tok)
                if q >= num_states:
                    raise FormatError("state %d out of range (%d states)"
                                      % (q, num_states), lineno)
                if q in state_owner:
                    raise FormatError(
                        "state %d already in block %d, blocks overlap"
                        % (q, state_owner[q]), lineno)
                state_owner[q] = idx
                members.append(q)
            if not members:
                raise FormatError("block %d is empty" % idx, lineno)
            blocks[idx] = members
            block_line[idx] = lineno
        else:
            toks = line.split()
            if len(toks) != 2 or not all(t.isdigit() for t in toks):
                raise FormatError("relation line must be two block indices",
                                  lineno)
            i, j = int(toks[0]), int(toks[1])
            if i not in blocks or j not in blocks:
                raise FormatError("relation pair (%d, %d) names an unknown "
                                  "block" % (i, j), lineno)
            if i != j and (j, i) in pairs:
                raise FormatError("antisymmetry violation: both (%d, %d) and "
                                  "(%d, %d)" % (j, i, i, j), lineno)
            pairs.add((i, j))

    if not blocks:
        raise FormatError("no partition section found", max(last_line, 1))
    indices = sorted(blocks)
    if indices != list(range(len(indices))):
        raise FormatError("block indices must be 0..%d" % (len(indices) - 1),
                          block_line[indices[-1]])
    missing = [q for q in range(num_states) if q not in state_owner]
    if missing:
        raise FormatError("partition misses state %d" % missing[0],
                          max(last_line, 1))
    for i in indices:
        pairs.add((i, i))
    # transitivity over blocks makes the induced relation a preorder
    for (i, j) in sorted(pairs):
        for (j2, k) in sorted(pairs):
            if j2 == j and (i, k) not in pairs:
                raise FormatError(
                    "relation not transitive: (%d,%d) and (%d,%d) without "
                    "(%d,%d)" % (i, j, j, k, i, k), max(last_line, 1))
    return [blocks[i] for i in indices], pairs


def emit_pr(blocks, pairs):
    """Text form of a partition-relation pair; parse_pr inverts it."""
    out = ["partition"]
    for i, members in enumerate(blocks):
        out.append("%d: %s" % (i, " ".join(str(q) for q in members)))
    out.append("relation")
    for (i, j) in sorted(pairs):
        out.append("%d %d" % (i, j))
    return "\n".join(out) + "\n"


def remap_pr(blocks, pairs, report):
    """Rewrite a raw-indexed pair through a normalization remap report.

    Dropped states leave their blocks; blocks emptied that way disappear and
    the relation is restricted accordingly.
    """
    state_map = report.state_map
    new_blocks = []
    block_map = {}
    for i, members in enumerate(blocks):
        kept = [int(state_map[q]) for q in members if state_map[q] >= 0]
        if kept:
            block_map[i] = len(new_blocks)
            new_blocks.append(kept)
    new_pairs = set((block_map[i], block_map[j]) for (i, j) in pairs
                    if i in block_map and j in block_map)
    return new_blocks, new_pairs


def default_pr(lts):
    """The universal initial preorder: one block, related to itself."""
    return [list(range(lts.num_states))], {(0, 0)}


def canonical_blocks(result):
    """Block state-lists sorted by smallest member, with the relation pairs
    renumbered accordingly."""
    blocks = result.blocks()
    order = sorted(range(len(blocks)), key=lambda b: blocks[b][0])
    renumber = {old: new for new, old in enumerate(order)}
    pairs = sorted((renumber[b], renumber[c])
                   for (b, c) in result.relation_pairs)
    return [blocks[b] for b in order], pairs


def emit_result(result, lts, include_stats=True, expand=False):
    """Deterministic result document.

    Blocks are sorted by smallest member and printed with original state
    names; relation pairs are sorted, reflexive ones included.  `expand`
    adds the induced relation as explicit state pairs (quadratic).  The
    stats section is what varies between strategies, so cross-variant
    comparisons drop it via include_stats=False.
    """
    blocks, pairs = canonical_blocks(result)
    out = [RESULT_HEADER]
    for k, members in enumerate(blocks):
        out.append("B%d: %s" % (k, " ".join(lts.state_name(q)
                                            for q in members)))
    out.append("R:")
    out.extend("%d %d" % (b, c) for (b, c) in pairs)
    if expand:
        out.append("R-expanded:")
        for (b, c) in pairs:
            for q in blocks[b]:
                for r in blocks[c]:
                    out.append("%s %s" % (lts.state_name(q), lts.state_name(r)))
    if include_stats:
        out.append("stats:")
        for key, value in result.stats.as_dict().items():
            out.append("%s=%d" % (key, value))
    return "\n".join(out) + "\n"


def parse_result(text):
    """Parse a result document back into (blocks, pairs, stats).

    Blocks come back as name lists; used for round-trip checks and diffing.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != RESULT_HEADER:
        raise FormatError("missing '%s' header" % RESULT_HEADER, 1)
    blocks = []
    pairs = set()
    stats = {}
    section = "blocks"
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line == "R:":
            section = "pairs"
            continue
        if line == "R-expanded:":
            section = "expanded"
            continue
        if line == "stats:":
            section = "stats"
            continue
        if section == "blocks":
            m = re.match(r"^B(\d+):\s*(.*)$", line)
            if not m or int(m.group(1)) != len(blocks):
                raise FormatError("unexpected block line %r" % line, lineno)
            blocks.append(m.group(2).split())
        elif section == "pairs":
            i, j = line.split()
            pairs.add((int(i), int(j)))
        elif section == "stats":
            key, _, value = line.partition("=")
            stats[key] = int(value)
    return blocks, pairs, stats


class XorShift64Star:
    """Marsaglia xorshift64*; see the module docstring for the exact spec."""

    MULT = 2685821657736338717
    MASK = (1 << 64) - 1

    def __init__(self, seed):
        self.state = int(seed) & self.MASK
        if self.state == 0:
            self.state = 0x9E3779B97F4A7C15

    def next_u64(self):
        x = self.state
        x ^= (x >> 12)
        x = (x ^ (x << 25)) & self.MASK
        x ^= (x >> 27)
        self.state = x
        return (x * self.MULT) & self.MASK

    def below(self, n):
        """Uniform integer in [0, n): top bits, rejecting values >= n."""
        bits = max(1, (n - 1).bit_length())
        while True:
            v = self.next_u64() >> (64 - bits)
            if v < n:
                return v


def random_lts(seed, num_states, num_letters, num_transitions):
    """Reproducible random RawLts from a seed.

    Uniform independent (source, letter, target) draws; duplicates are
    allowed and removed later by normalization.  Labels are a0, a1, ...
    """
    if num_states < 1 or num_letters < 1 or num_transitions < 0:
        raise ValidationError("random_lts needs >=1 state, >=1 letter and a "
                              "non-negative transition count")
    rng = XorShift64Star(seed)
    transitions = []
    for _ in range(num_transitions):
        src = rng.below(num_states)
        letter = rng.below(num_letters)
        tgt = rng.below(num_states)
        transitions.append((src, letter, tgt))
    labels = ["a%d" % i for i in range(num_letters)]
    return RawLts(num_states, labels, transitions)
