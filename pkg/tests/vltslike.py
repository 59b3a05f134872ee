"""Deterministic mid-size models in the style of protocol benchmarks.

Three builders cover 10^3 to 10^4 states with small final partitions so all
three strategies finish quickly, plus the families the scaling checks use.
"""

from simrel.io import XorShift64Star, random_lts
from simrel.lts import RawLts


def cyclic_protocol(n_cells=1200, period=3, fail_every=10):
    """Ring of cells firing letters by position, some able to fail into a
    sink; classes follow the combined period."""
    sink = n_cells
    trans = []
    for i in range(n_cells):
        trans.append((i, i % period, (i + 1) % n_cells))
        if i % fail_every == 0:
            trans.append((i, period, sink))
    labels = ["a%d" % i for i in range(period)] + ["fail"]
    return RawLts(n_cells + 1, labels, trans)


def replicated_core(seed=7, copies=60, core_states=40, core_letters=2,
                    core_transitions=100):
    """Disjoint copies of one random core; copies collapse into the core's
    own classes."""
    core = random_lts(seed, core_states, core_letters, core_transitions)
    trans = []
    for k in range(copies):
        off = k * core_states
        trans.extend((s + off, l, t + off) for (s, l, t) in core.transitions)
    return RawLts(core_states * copies, core.labels, trans)


def replicated_chains(copies=150, length=60):
    """Parallel a-chains: depth classes give a totally ordered partition."""
    trans = []
    for k in range(copies):
        off = k * (length + 1)
        trans.extend((off + i, 0, off + i + 1) for i in range(length))
    return RawLts(copies * (length + 1), ["a"], trans)


def big_models():
    return [
        ("cyclic_protocol", cyclic_protocol()),
        ("replicated_core", replicated_core()),
        ("replicated_chains", replicated_chains()),
    ]


def doubling_family(ks=(4, 8, 16, 32), core_seed=11, core_states=12,
                    core_letters=2, core_transitions=30):
    """Fixed core replicated k times: transition count doubles along `ks`
    while the final partition stays fixed."""
    core = random_lts(core_seed, core_states, core_letters, core_transitions)
    out = []
    for k in ks:
        trans = []
        for c in range(k):
            off = c * core.num_states
            trans.extend((s + off, l, t + off) for (s, l, t) in core.transitions)
        out.append((k, RawLts(core.num_states * k, core.labels, trans)))
    return out


def deterministic_lts(seed):
    """At most one transition per (state, letter): branching factor 1."""
    rng = XorShift64Star(seed + 1000)
    n = 20 + (seed % 8) * 5
    k = 2 + seed % 3
    trans = []
    for q in range(n):
        for a in range(k):
            if rng.below(4) < 3:
                trans.append((q, a, rng.below(n)))
    return RawLts(n, ["a%d" % i for i in range(k)], trans)
