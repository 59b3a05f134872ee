import numpy as np
import pytest

from simrel.io import XorShift64Star, random_lts
from simrel.lts import RawLts, normalize

# corpus knobs shared by the acceptance suite and the focused tests
CORPUS_SEEDS = 1000


def corpus_params(seed):
    """Instance sizes for a corpus seed: 2..8 states, 1..3 letters, 1..20
    raw transitions."""
    return 2 + seed % 7, 1 + seed % 3, 1 + (seed * 13) % 20


def corpus_lts(seed):
    states, letters, transitions = corpus_params(seed)
    raw = random_lts(seed, states, letters, transitions)
    lts, _ = normalize(raw)
    return lts


def mk_lts(num_states, triples, labels=None, names=None):
    """Normalized LTS from explicit (source, letter, target) triples."""
    if labels is None:
        k = max(l for (_, l, _) in triples) + 1
        labels = [chr(ord("a") + i) for i in range(k)]
    lts, _ = normalize(RawLts(num_states, list(labels), list(triples),
                              state_names=names))
    return lts


def universal_init(n):
    return [list(range(n))], {(0, 0)}


def identity_init(n):
    return [[q] for q in range(n)], {(q, q) for q in range(n)}


def kernel_preorder_init(seed, n):
    """Random kernel partition plus a random order on blocks, transitively
    closed; antisymmetric by construction (only i<j pairs are drawn)."""
    rng = XorShift64Star(seed ^ 0xABCDEF)
    k = 1 + rng.below(n)
    owner = [rng.below(k) for _ in range(n)]
    used = sorted(set(owner))
    remap = {o: i for i, o in enumerate(used)}
    blocks = [[] for _ in used]
    for q, o in enumerate(owner):
        blocks[remap[o]].append(q)
    kk = len(blocks)
    mat = np.eye(kk, dtype=bool)
    for i in range(kk):
        for j in range(i + 1, kk):
            if rng.below(3) == 0:
                mat[i, j] = True
    for a in range(kk):
        for b in range(kk):
            if mat[b, a]:
                mat[b] |= mat[a]
    pairs = set((int(a), int(b)) for a, b in zip(*np.nonzero(mat)))
    return blocks, pairs


def initial_pairs(seed, n):
    """The three initial preorders every corpus instance is crossed with."""
    return [
        ("universal", *universal_init(n)),
        ("identity", *identity_init(n)),
        ("kernel", *kernel_preorder_init(seed, n)),
    ]


@pytest.fixture(scope="session")
def tiny_lts():
    """Two states, one a-move: the smallest instance that refines."""
    return mk_lts(2, [(0, 0, 1)], labels=["a"], names=["q0", "q1"])


@pytest.fixture(scope="session")
def sim_not_bisim_lts():
    """Simulation-equivalent but not bisimilar branching: t0 picks its future
    eagerly, u0 lazily."""
    #   t0 -a-> t1 -b-> t3      u0 -a-> u1 -b-> u2
    #   t0 -a-> t2
    names = ["t0", "t1", "t2", "t3", "u0", "u1", "u2"]
    triples = [(0, 0, 1), (0, 0, 2), (1, 1, 3), (4, 0, 5), (5, 1, 6)]
    return mk_lts(7, triples, labels=["a", "b"], names=names)
