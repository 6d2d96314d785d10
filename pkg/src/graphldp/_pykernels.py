"""Pure-Python traversal kernels; same contract as the compiled module."""
from __future__ import annotations

from collections import deque

import numpy as np


def bfs_ball(indptr, indices, source, radius, cap=-1):
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    dist = {int(source): 0}
    order = [int(source)]
    queue = deque(order)
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv >= radius:
            continue
        for u in indices[indptr[v]:indptr[v + 1]].tolist():
            if u not in dist:
                dist[u] = dv + 1
                order.append(u)
                queue.append(u)
                if 0 <= cap < len(order):
                    queue.clear()
                    break
    verts = np.asarray(order, dtype=np.int64)
    return verts, np.asarray([dist[v] for v in order], dtype=np.int64)


def ball_sizes(indptr, indices, radius, cap=-1):
    indptr = np.asarray(indptr)
    n = len(indptr) - 1
    adj = [np.asarray(indices[indptr[v]:indptr[v + 1]]).tolist() for v in range(n)]
    out = np.empty(n, dtype=np.int64)
    for s in range(n):
        seen = {s}
        frontier = [s]
        size = 1
        stop = False
        for _ in range(radius):
            nxt = []
            for v in frontier:
                for u in adj[v]:
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
                        size += 1
                        if 0 <= cap < size:
                            stop = True
                            break
                if stop:
                    break
            if stop or not nxt:
                break
            frontier = nxt
        out[s] = size
    return out
