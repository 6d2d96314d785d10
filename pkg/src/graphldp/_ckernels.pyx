# cython: language_level=3
"""Compiled breadth-first traversal kernels over CSR adjacency."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


# Per-size workspace reused across calls so a small ball costs O(ball), not
# O(n).  Entries are valid only where stamp == current generation.  Not safe
# for concurrent calls from several threads of one process.
_workspace = {}


def bfs_ball(const int64_t[:] indptr, const int64_t[:] indices, int64_t source,
             int64_t radius, int64_t cap=-1):
    """Vertices within ``radius`` of ``source`` in BFS order, with distances.

    Stops early (returning what was found) once more than ``cap`` vertices
    are discovered when ``cap >= 0``.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    ws = _workspace.get(n)
    if ws is None:
        ws = [np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64), np.empty(n, dtype=np.int64), 0]
        _workspace.clear()
        _workspace[n] = ws
    ws[3] += 1
    cdef int64_t gen = ws[3]
    cdef int64_t[:] stamp = ws[0]
    cdef int64_t[:] dist = ws[1]
    cdef int64_t[:] order = ws[2]
    cdef Py_ssize_t head = 0, tail = 0, k, i
    cdef int64_t v, u, dv
    stamp[source] = gen
    dist[source] = 0
    order[tail] = source
    tail += 1
    while head < tail:
        v = order[head]
        head += 1
        dv = dist[v]
        if dv >= radius:
            continue
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if stamp[u] != gen:
                stamp[u] = gen
                dist[u] = dv + 1
                order[tail] = u
                tail += 1
                if cap >= 0 and tail > cap:
                    head = tail
                    break
    verts = np.empty(tail, dtype=np.int64)
    dists = np.empty(tail, dtype=np.int64)
    cdef int64_t[:] vv = verts
    cdef int64_t[:] dd = dists
    for i in range(tail):
        vv[i] = order[i]
        dd[i] = dist[order[i]]
    return verts, dists


def ball_sizes(const int64_t[:] indptr, const int64_t[:] indices, int64_t radius,
               int64_t cap=-1):
    """Number of vertices within ``radius`` of every vertex.

    With ``cap >= 0`` each count saturates at ``cap + 1``.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[int64_t, ndim=1] stamp = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] dist = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] queue = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t s, head, tail, k
    cdef int64_t v, u, dv
    cdef bint stop
    for s in range(n):
        stamp[s] = s
        dist[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        stop = False
        while head < tail and not stop:
            v = queue[head]
            head += 1
            dv = dist[v]
            if dv >= radius:
                continue
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if stamp[u] != s:
                    stamp[u] = s
                    dist[u] = dv + 1
                    queue[tail] = u
                    tail += 1
                    if cap >= 0 and tail > cap:
                        stop = True
                        break
        out[s] = tail
    return out
