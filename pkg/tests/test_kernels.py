import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from graphldp import _pykernels, kernels


def csr(rng, n, p):
    return random_graph(rng, n, p).csr()


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40), st.floats(0.0, 0.3), st.integers(0, 4), st.integers(-1, 15), st.integers(0, 2**32 - 1))
def test_compiled_and_python_kernels_agree(n, p, radius, cap, s):
    from graphldp import _ckernels

    indptr, indices = csr(np.random.default_rng(s), n, p)
    src = s % n
    a = _ckernels.bfs_ball(indptr, indices, src, radius, cap)
    b = _pykernels.bfs_ball(indptr, indices, src, radius, cap)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert np.array_equal(_ckernels.ball_sizes(indptr, indices, radius, cap),
                          _pykernels.ball_sizes(indptr, indices, radius, cap))


def test_repeated_calls_do_not_leak_state():
    rng = np.random.default_rng(0)
    g1, g2 = csr(rng, 30, 0.1), csr(rng, 30, 0.2)
    first = kernels.bfs_ball(*g1, 0, 3)
    kernels.bfs_ball(*g2, 5, 3)
    again = kernels.bfs_ball(*g1, 0, 3)
    assert all(np.array_equal(x, y) for x, y in zip(first, again))


def test_pure_python_switch():
    env = dict(os.environ, GRAPHLDP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from graphldp import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
