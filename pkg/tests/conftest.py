import numpy as np
import pytest
from hypothesis import strategies as st

from graphldp.core import MarkedGraph


def random_tree(rng, n, vmarks=(0, 1), emarks=(0,)):
    """Uniform-attachment random tree on ``n`` vertices with random marks."""
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    return _decorate(rng, n, edges, vmarks, emarks)


def random_graph(rng, n, p, vmarks=(0, 1), emarks=(0,)):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return _decorate(rng, n, edges, vmarks, emarks)


def _decorate(rng, n, edges, vmarks, emarks):
    vm = [vmarks[int(rng.integers(len(vmarks)))] for _ in range(n)]
    em = {}
    for u, v in edges:
        em[(u, v)] = emarks[int(rng.integers(len(emarks)))]
        em[(v, u)] = emarks[int(rng.integers(len(emarks)))]
    return MarkedGraph(n, edges, vm, em)


def random_perm(rng, n, fix_root=True):
    perm = rng.permutation(n)
    if fix_root:
        i = int(np.flatnonzero(perm == 0)[0])
        perm[i], perm[0] = perm[0], 0
    return perm


@st.composite
def marked_graphs(draw, max_n=8, vmarks=(0, 1), emarks=(0, 1)):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = [e for e in pairs if draw(st.booleans())]
    vm = [draw(st.sampled_from(vmarks)) for _ in range(n)]
    em = {}
    for u, v in edges:
        em[(u, v)] = draw(st.sampled_from(emarks))
        em[(v, u)] = draw(st.sampled_from(emarks))
    return MarkedGraph(n, edges, vm, em)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
