"""Marked graphs, rooted balls, canonical isomorphism codes and the local metric.

A marked graph carries a mark on every vertex and on every *oriented* edge.
Rooted balls are re-indexed so that the root is vertex 0 and vertices appear
in breadth-first order.  Canonical codes identify rooted marked balls up to
root-, edge- and mark-preserving isomorphism.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import kernels

DEFAULT_CODE_CAP = 4096
DEFAULT_SEARCH_BUDGET = 200_000


class GraphError(ValueError):
    """Invalid graph data (loops, duplicate edges, missing marks)."""


class BallTooLargeError(RuntimeError):
    """A ball exceeds the configured size cap or search budget."""


class NotATreeError(ValueError):
    """A tree-only operation met a ball containing a cycle."""


# ---------------------------------------------------------------- mark spaces


@dataclass(frozen=True)
class MarkSpace:
    """A metric mark space: a finite ordered alphabet or a real interval.

    Parameters
    ----------
    kind : {"finite", "real"}
    symbols : tuple
        Ordered alphabet for finite spaces.
    table : tuple of tuples, optional
        Pairwise distances between symbols; discrete metric when omitted.
    bounds : (float, float)
        Interval for real spaces.
    """

    kind: str
    symbols: tuple = ()
    table: tuple | None = None
    bounds: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        if self.kind not in ("finite", "real"):
            raise ValueError(f"unknown mark space kind {self.kind!r}")
        if self.kind == "finite":
            if len(set(self.symbols)) != len(self.symbols):
                raise ValueError("duplicate symbols in alphabet")
            if self.table is not None:
                t = np.asarray(self.table, dtype=float)
                k = len(self.symbols)
                if t.shape != (k, k):
                    raise ValueError("distance table shape does not match alphabet")
                if not np.allclose(t, t.T) or np.any(np.diag(t) != 0) or np.any(t < 0):
                    raise ValueError("distance table must be symmetric, nonnegative, zero diagonal")
                for i in range(k):
                    if np.any(t[i][:, None] > t[i][None, :] + t + 1e-12):
                        raise ValueError("distance table violates the triangle inequality")

    @classmethod
    def finite(cls, symbols: Iterable, table=None) -> "MarkSpace":
        tab = None if table is None else tuple(tuple(float(x) for x in row) for row in table)
        return cls("finite", tuple(symbols), tab)

    @classmethod
    def real(cls, lo: float = -math.inf, hi: float = math.inf) -> "MarkSpace":
        return cls("real", bounds=(float(lo), float(hi)))

    def index(self, symbol) -> int:
        return self.symbols.index(symbol)

    def distance(self, a, b) -> float:
        if self.kind == "real":
            return abs(float(a) - float(b))
        if self.table is None:
            return 0.0 if a == b else 1.0
        return self.table[self.index(a)][self.index(b)]

    def contains(self, a) -> bool:
        if self.kind == "real":
            return isinstance(a, Real) and self.bounds[0] <= a <= self.bounds[1]
        return a in self.symbols


def default_distance(a, b) -> float:
    """|a - b| for numbers, discrete metric otherwise."""
    if isinstance(a, Real) and isinstance(b, Real) and not isinstance(a, bool):
        return abs(float(a) - float(b))
    return 0.0 if a == b else 1.0


def _metric(space: MarkSpace | Callable | None) -> Callable[[Any, Any], float]:
    if space is None:
        return default_distance
    if isinstance(space, MarkSpace):
        return space.distance
    return space


# --------------------------------------------------------------- marked graph


class MarkedGraph:
    """Finite simple graph on ``range(n)`` with vertex and oriented-edge marks.

    Parameters
    ----------
    n : int
    edges : iterable of (u, v)
        Undirected edges; stored as sorted ``(min, max)`` pairs.
    vertex_marks : sequence, optional
        One mark per vertex (default all ``0``).
    edge_marks : dict, optional
        ``{(u, v): mark}`` for *both* orientations of every edge
        (default all ``0``).
    """

    __slots__ = ("n", "edges", "vertex_marks", "edge_marks", "_adj", "_csr")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), vertex_marks=None, edge_marks=None):
        n = int(n)
        if n < 0:
            raise GraphError("negative vertex count")
        norm = []
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        norm.sort()
        if vertex_marks is None:
            vertex_marks = (0,) * n
        vertex_marks = tuple(vertex_marks)
        if len(vertex_marks) != n:
            raise GraphError("vertex_marks must have length n")
        if edge_marks is None:
            edge_marks = {}
            for u, v in norm:
                edge_marks[(u, v)] = 0
                edge_marks[(v, u)] = 0
        else:
            edge_marks = {(int(a), int(b)): m for (a, b), m in edge_marks.items()}
            for u, v in norm:
                if (u, v) not in edge_marks or (v, u) not in edge_marks:
                    raise GraphError(f"edge ({u}, {v}) lacks a mark on one orientation")
            if len(edge_marks) != 2 * len(norm):
                raise GraphError("edge_marks has entries for non-edges")
        self.n = n
        self.edges = tuple(norm)
        self.vertex_marks = vertex_marks
        self.edge_marks = edge_marks
        self._adj = None
        self._csr = None

    # -- structure
    @property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        if self._adj is None:
            lists = [[] for _ in range(self.n)]
            for u, v in self.edges:
                lists[u].append(v)
                lists[v].append(u)
            self._adj = tuple(tuple(sorted(x)) for x in lists)
        return self._adj

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        if self._csr is None:
            deg = np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=self.n)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            indices = np.fromiter((u for a in self.adj for u in a), dtype=np.int64, count=int(indptr[-1]))
            self._csr = (indptr, indices)
        return self._csr

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def xi(self, u: int, v: int):
        return self.edge_marks[(u, v)]

    def tau(self, v: int):
        return self.vertex_marks[v]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def is_forest(self) -> bool:
        parent = list(range(self.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def with_marks(self, vertex_marks=None, edge_marks=None) -> "MarkedGraph":
        return MarkedGraph(
            self.n,
            self.edges,
            self.vertex_marks if vertex_marks is None else vertex_marks,
            self.edge_marks if edge_marks is None else edge_marks,
        )

    def relabel(self, perm: Sequence[int]) -> "MarkedGraph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        inv_marks = [None] * self.n
        for v in range(self.n):
            inv_marks[perm[v]] = self.vertex_marks[v]
        edges = [(perm[u], perm[v]) for u, v in self.edges]
        em = {(perm[u], perm[v]): m for (u, v), m in self.edge_marks.items()}
        return MarkedGraph(self.n, edges, inv_marks, em)

    def __eq__(self, other):
        if not isinstance(other, MarkedGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edges == other.edges
            and self.vertex_marks == other.vertex_marks
            and self.edge_marks == other.edge_marks
        )

    def __hash__(self):
        return hash((self.n, self.edges, self.vertex_marks, tuple(sorted(self.edge_marks.items()))))

    def __repr__(self):
        return f"MarkedGraph(n={self.n}, m={len(self.edges)})"


# ----------------------------------------------------------------- JSON I/O


def graph_to_dict(g: MarkedGraph, root: int | None = None) -> dict:
    doc = {
        "n": g.n,
        "edges": [[u, v] for u, v in g.edges],
        "vertex_marks": list(g.vertex_marks),
        "edge_marks": [
            {"from": u, "to": v, "mark": m} for (u, v), m in sorted(g.edge_marks.items())
        ],
    }
    if root is not None:
        doc["root"] = root
    return doc


def _tupleize(m):
    return tuple(_tupleize(x) for x in m) if isinstance(m, list) else m


def graph_from_dict(doc: dict) -> MarkedGraph:
    """Parse the interchange document; rejects loops and duplicate edges."""
    try:
        n = int(doc["n"])
        edges = [tuple(e) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from exc
    vm = doc.get("vertex_marks")
    vm = None if vm is None else [_tupleize(m) for m in vm]
    em = doc.get("edge_marks")
    if em is not None:
        emd = {}
        for rec in em:
            key = (int(rec["from"]), int(rec["to"]))
            if key in emd:
                raise GraphError(f"duplicate edge mark for {key}")
            emd[key] = _tupleize(rec["mark"])
        em = emd
    return MarkedGraph(n, edges, vm, em)


def save_graph(g: MarkedGraph, path, root: int | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(g, root), fh)


def load_graph(path) -> MarkedGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


# ---------------------------------------------------------------- rooted ball


@dataclass(frozen=True)
class RootedBall:
    """Depth-``h`` rooted marked neighbourhood, root at index 0.

    ``dist[i]`` is the graph distance of vertex ``i`` from the root and
    ``origin[i]`` its label in the graph it was cut from.  ``complete`` is
    True when the ball already contains the whole connected component.
    """

    graph: MarkedGraph
    depth: int
    dist: tuple[int, ...]
    complete: bool = False
    origin: tuple[int, ...] = ()
    _code: list = field(default_factory=list, repr=False, compare=False)

    root = 0

    @property
    def size(self) -> int:
        return self.graph.n

    def is_tree(self) -> bool:
        return self.graph.num_edges == self.graph.n - 1

    @property
    def root_mark(self):
        return self.graph.vertex_marks[0]

    @property
    def root_degree(self) -> int:
        return self.graph.degree(0)

    def code(self, cap: int = DEFAULT_CODE_CAP) -> bytes:
        if not self._code:
            self._code.append(canonical_code(self, cap=cap))
        return self._code[0]

    def truncate(self, r: int) -> "RootedBall":
        """The sub-ball of radius ``r`` (induced on distance <= r)."""
        radius = max(self.dist, default=0)
        if r >= radius:
            return RootedBall(self.graph, r, self.dist, self.complete or r > radius, self.origin)
        keep = [i for i in range(self.graph.n) if self.dist[i] <= r]
        return _induced(self.graph, keep, [self.dist[i] for i in keep], r, False,
                        [self.origin[i] for i in keep] if self.origin else keep)


def _induced(g: MarkedGraph, verts: Sequence[int], dist: Sequence[int], depth: int, complete: bool,
             origin: Sequence[int]) -> RootedBall:
    idx = {v: i for i, v in enumerate(verts)}
    edges = []
    em = {}
    for v in verts:
        iv = idx[v]
        for u in g.adj[v]:
            iu = idx.get(u)
            if iu is not None and iv < iu:
                edges.append((iv, iu))
                em[(iv, iu)] = g.edge_marks[(v, u)]
                em[(iu, iv)] = g.edge_marks[(u, v)]
    sub = MarkedGraph(len(verts), edges, [g.vertex_marks[v] for v in verts], em)
    return RootedBall(sub, depth, tuple(int(d) for d in dist), complete, tuple(int(o) for o in origin))


def ball(g: MarkedGraph, v: int, h: int) -> RootedBall:
    """Induced marked ball of radius ``h`` around ``v`` rooted at ``v``."""
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} not in graph of size {g.n}")
    if h < 0:
        raise ValueError("depth must be nonnegative")
    indptr, indices = g.csr()
    verts, dist = kernels.bfs_ball(indptr, indices, int(v), int(h), -1)
    verts = verts.tolist()
    dist = dist.tolist()
    inside = set(verts)
    complete = all(u in inside for w, dw in zip(verts, dist) if dw == h for u in g.adj[w])
    return _induced(g, verts, dist, h, complete, verts)


def ball_from_graph(g: MarkedGraph, root: int = 0, depth: int | None = None) -> RootedBall:
    """Root a whole (small) graph at ``root``; ``depth`` defaults to its radius."""
    if depth is None:
        depth = max(g.n, 1)
    return ball(g, root, depth)


# ------------------------------------------------------------ canonical codes


def mark_key(m) -> str:
    """Deterministic text encoding of a mark (JSON; tuples as lists)."""
    return json.dumps(m, separators=(",", ":"), sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"mark {o!r} is not encodable")


def tree_code_from(g: MarkedGraph, root: int, parent: int | None = None, depth: int | None = None) -> str:
    """Canonical text code of the subtree hanging at ``root`` away from ``parent``.

    ``depth`` limits how far below ``root`` the subtree is read.  The graph
    region explored must be acyclic.
    """
    # iterative post-order to survive deep paths
    limit = math.inf if depth is None else depth
    stack = [(root, parent, 0, False)]
    codes: dict[int, str] = {}
    seen = {root}
    order_children: dict[int, list[int]] = {}
    while stack:
        v, p, d, done = stack.pop()
        if done:
            parts = []
            for c in order_children[v]:
                parts.append(
                    "[" + mark_key(g.edge_marks[(c, v)]) + "," + mark_key(g.edge_marks[(v, c)]) + "," + codes.pop(c) + "]"
                )
            parts.sort()
            codes[v] = "[" + mark_key(g.vertex_marks[v]) + ("," + ",".join(parts) if parts else "") + "]"
            continue
        kids = [u for u in g.adj[v] if u != p] if d < limit else []
        for u in kids:
            if u in seen:
                raise NotATreeError("cycle encountered while coding a subtree")
            seen.add(u)
        order_children[v] = kids
        stack.append((v, p, d, True))
        for u in kids:
            stack.append((u, v, d + 1, False))
    return codes[root]


def _refine(g: MarkedGraph, colors: list[int]) -> list[int]:
    """Colour refinement with canonical relabelling of the colour classes."""
    n = g.n
    ncol = len(set(colors))
    ekeys = {k: mark_key(m) for k, m in g.edge_marks.items()}
    while True:
        sigs = []
        for v in range(n):
            nb = sorted((colors[u], ekeys[(v, u)], ekeys[(u, v)]) for u in g.adj[v])
            sigs.append((colors[v], tuple(nb)))
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if len(ranking) == ncol:
            return new
        colors, ncol = new, len(ranking)


def _certificate(g: MarkedGraph, colors: list[int]) -> str:
    pos = colors  # discrete: colours are a permutation of range(n)
    marks = [None] * g.n
    for v in range(g.n):
        marks[pos[v]] = mark_key(g.vertex_marks[v])
    es = []
    for u, v in g.edges:
        a, b = pos[u], pos[v]
        if a > b:
            a, b, u, v = b, a, v, u
        es.append((a, b, mark_key(g.edge_marks[(u, v)]), mark_key(g.edge_marks[(v, u)])))
    es.sort()
    return json.dumps([marks, [list(e) for e in es]], separators=(",", ":"))


def _peel_hanging_trees(b: RootedBall) -> tuple[MarkedGraph, list[int]]:
    """Fold every pendant tree into the label of the vertex it hangs from.

    Returns the reduced graph, whose vertex marks are text labels combining
    the original mark with the sorted codes of the folded trees, and the
    kept vertices (root first).
    """
    g = b.graph
    deg = [len(a) for a in g.adj]
    removed = [False] * g.n
    hang: list[list[str]] = [[] for _ in range(g.n)]

    def label(v):
        parts = sorted(hang[v])
        return "[" + mark_key(g.vertex_marks[v]) + ("," + ",".join(parts) if parts else "") + "]"

    queue = [v for v in range(1, g.n) if deg[v] == 1]
    while queue:
        leaf = queue.pop()
        if removed[leaf] or deg[leaf] != 1:
            continue
        p = next(u for u in g.adj[leaf] if not removed[u])
        hang[p].append("[" + mark_key(g.edge_marks[(leaf, p)]) + "," + mark_key(g.edge_marks[(p, leaf)]) + ","
                       + label(leaf) + "]")
        removed[leaf] = True
        deg[p] -= 1
        if p != 0 and deg[p] == 1:
            queue.append(p)
    keep = [v for v in range(g.n) if not removed[v]]
    idx = {v: i for i, v in enumerate(keep)}
    edges, em = [], {}
    for u, v in g.edges:
        if u in idx and v in idx:
            edges.append((idx[u], idx[v]))
            em[(idx[u], idx[v])] = g.edge_marks[(u, v)]
            em[(idx[v], idx[u])] = g.edge_marks[(v, u)]
    return MarkedGraph(len(keep), edges, [label(v) for v in keep], em), keep


def graph_code(b: RootedBall, budget: int = DEFAULT_SEARCH_BUDGET) -> str:
    """Canonical form of a rooted ball with cycles.

    Pendant trees are folded into vertex labels first; the remaining core is
    coded by individualise-and-refine, minimising a certificate over every
    discrete colouring reachable by individualising vertices of the first
    non-singleton cell.  The root is fixed because it alone has distance 0.
    """
    g, keep = _peel_hanging_trees(b)
    init = [(b.dist[v], g.vertex_marks[i]) for i, v in enumerate(keep)]
    rank = {s: i for i, s in enumerate(sorted(set(init)))}
    colors = _refine(g, [rank[s] for s in init])
    best = [None]
    leaves = [0]

    def search(cols):
        counts: dict[int, list[int]] = {}
        for v, c in enumerate(cols):
            counts.setdefault(c, []).append(v)
        target = None
        for c in sorted(counts):
            if len(counts[c]) > 1:
                target = counts[c]
                break
        if target is None:
            leaves[0] += 1
            if leaves[0] > budget:
                raise BallTooLargeError("canonical search budget exceeded")
            cert = _certificate(g, cols)
            if best[0] is None or cert < best[0]:
                best[0] = cert
            return
        for v in target:
            keyed = [(c, 0 if u == v else 1) if c == cols[v] else (c, 0) for u, c in enumerate(cols)]
            rk = {s: i for i, s in enumerate(sorted(set(keyed)))}
            search(_refine(g, [rk[s] for s in keyed]))

    search(colors)
    return best[0]


def tree_from_code(code: str | bytes) -> MarkedGraph:
    """Rebuild a rooted tree (root 0) from a tree code."""
    if isinstance(code, bytes):
        code = code.decode()
    if code.startswith("T"):
        code = code[1:]
    if code.startswith("G"):
        raise NotATreeError("code describes a ball with cycles")
    nested = json.loads(code)
    marks, edges, em = [], [], {}
    stack = [(nested, None, None, None)]
    while stack:
        node, parent, up, down = stack.pop()
        v = len(marks)
        marks.append(_tupleize(node[0]))
        if parent is not None:
            edges.append((parent, v))
            em[(v, parent)] = _tupleize(up)
            em[(parent, v)] = _tupleize(down)
        for child in reversed(node[1:]):
            stack.append((child[2], v, child[0], child[1]))
    return MarkedGraph(len(marks), edges, marks, em)


def canonical_code(b: RootedBall, cap: int = DEFAULT_CODE_CAP, budget: int = DEFAULT_SEARCH_BUDGET) -> bytes:
    """Isomorphism-class code of a rooted marked ball.

    Trees are coded by sorted recursive child codes; balls with cycles by
    the minimum certificate over root-fixing canonical orderings.
    """
    if b.size > cap:
        raise BallTooLargeError(f"ball has {b.size} vertices, cap is {cap}")
    if b.is_tree():
        return ("T" + tree_code_from(b.graph, 0)).encode()
    return ("G" + graph_code(b, budget)).encode()


# -------------------------------------------------------------- local metric


def _kuhn_perfect(allowed: list[list[int]], k: int) -> bool:
    match = [-1] * k

    def aug(i, seen):
        for j in allowed[i]:
            if not seen[j]:
                seen[j] = True
                if match[j] < 0 or aug(match[j], seen):
                    match[j] = i
                    return True
        return False

    return all(aug(i, [False] * k) for i in range(k))


def bottleneck_assignment(cost: list[list[float]]) -> float:
    """Minimum over perfect matchings of the maximum matched cost (inf if none)."""
    k = len(cost)
    if k == 0:
        return 0.0
    vals = sorted({c for row in cost for c in row if c != math.inf})
    lo, hi, best = 0, len(vals) - 1, math.inf
    while lo <= hi:
        mid = (lo + hi) // 2
        thr = vals[mid]
        allowed = [[j for j in range(k) if cost[i][j] <= thr] for i in range(k)]
        if _kuhn_perfect(allowed, k):
            best = thr
            hi = mid - 1
        else:
            lo = mid + 1
    return best


def _tree_gap(g1, g2, r, dt, dx):
    """Min over root-preserving isomorphisms of r-truncated trees of the max mark gap."""
    memo = {}

    def cost(u, pu, v, pv, left):
        key = (u, pu, v, pv, left)
        if key in memo:
            return memo[key]
        gap = dt(g1.vertex_marks[u], g2.vertex_marks[v])
        if left > 0:
            cu = [w for w in g1.adj[u] if w != pu]
            cv = [w for w in g2.adj[v] if w != pv]
            if len(cu) != len(cv):
                memo[key] = math.inf
                return math.inf
            mat = []
            for a in cu:
                row = []
                for c in cv:
                    sub = cost(a, u, c, v, left - 1)
                    if sub != math.inf:
                        sub = max(sub, dx(g1.edge_marks[(u, a)], g2.edge_marks[(v, c)]),
                                  dx(g1.edge_marks[(a, u)], g2.edge_marks[(c, v)]))
                    row.append(sub)
                mat.append(row)
            gap = max(gap, bottleneck_assignment(mat))
        memo[key] = gap
        return gap

    return cost(0, None, 0, None, r)


def _graph_gap(b1: RootedBall, b2: RootedBall, dt, dx, budget: int, upper: float = math.inf) -> float:
    """Backtracking over root-preserving isomorphisms of two general balls.

    Only isomorphisms beating ``upper`` are explored; ``upper`` is returned
    when none does.
    """
    g1, g2 = b1.graph, b2.graph
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return math.inf
    if sorted(zip(b1.dist, map(g1.degree, range(g1.n)))) != sorted(zip(b2.dist, map(g2.degree, range(g2.n)))):
        return math.inf
    order = sorted(range(g1.n), key=lambda v: b1.dist[v])
    mapping = [-1] * g1.n
    used = [False] * g2.n
    best = [upper]
    steps = [0]

    def extend(i, cur):
        steps[0] += 1
        if steps[0] > budget:
            raise BallTooLargeError("isomorphism enumeration budget exceeded")
        if cur >= best[0]:
            return
        if i == len(order):
            best[0] = cur
            return
        u = order[i]
        cands = [0] if i == 0 else range(g2.n)
        for v in cands:
            if used[v] or b2.dist[v] != b1.dist[u] or g2.degree(v) != g1.degree(u):
                continue
            gap = max(cur, dt(g1.vertex_marks[u], g2.vertex_marks[v]))
            ok = True
            for w in g1.adj[u]:
                mw = mapping[w]
                if mw >= 0:
                    if (v, mw) not in g2.edge_marks:
                        ok = False
                        break
                    gap = max(gap, dx(g1.edge_marks[(u, w)], g2.edge_marks[(v, mw)]),
                              dx(g1.edge_marks[(w, u)], g2.edge_marks[(mw, v)]))
            if ok:
                # mapped neighbours of v must come from mapped neighbours of u
                nmapped_u = sum(1 for w in g1.adj[u] if mapping[w] >= 0)
                nmapped_v = sum(1 for w in g2.adj[v] if used[w])
                ok = nmapped_u == nmapped_v
            if not ok or gap >= best[0]:
                continue
            mapping[u] = v
            used[v] = True
            extend(i + 1, gap)
            mapping[u] = -1
            used[v] = False

    extend(0, 0.0)
    return best[0]


def iso_gap(b1: RootedBall, b2: RootedBall, theta=None, xi=None, budget: int = DEFAULT_SEARCH_BUDGET,
            upper: float = math.inf) -> float:
    """Min over root-preserving isomorphisms of the underlying graphs of the
    maximal vertex/edge mark discrepancy; ``inf`` if not isomorphic."""
    dt, dx = _metric(theta), _metric(xi)
    if b1.is_tree() and b2.is_tree():
        if b1.size != b2.size:
            return math.inf
        return _tree_gap(b1.graph, b2.graph, max(b1.dist, default=0), dt, dx)
    if b1.is_tree() != b2.is_tree():
        return math.inf
    return _graph_gap(b1, b2, dt, dx, budget, upper)


def identity_gap(b1: RootedBall, b2: RootedBall, theta=None, xi=None) -> float:
    """Mark gap of the correspondence matching equal ``origin`` labels.

    Returns ``inf`` when that correspondence is not an isomorphism (the two
    balls were not cut from graphs sharing a skeleton).
    """
    if b1.size != b2.size or set(b1.origin) != set(b2.origin):
        return math.inf
    dt, dx = _metric(theta), _metric(xi)
    pos = {o: i for i, o in enumerate(b2.origin)}
    phi = [pos[o] for o in b1.origin]
    if phi[0] != 0:
        return math.inf
    g1, g2 = b1.graph, b2.graph
    if g1.num_edges != g2.num_edges:
        return math.inf
    gap = 0.0
    for v in range(g1.n):
        gap = max(gap, dt(g1.vertex_marks[v], g2.vertex_marks[phi[v]]))
    for (u, v), m in g1.edge_marks.items():
        other = g2.edge_marks.get((phi[u], phi[v]))
        if other is None:
            return math.inf
        gap = max(gap, dx(m, other))
    return gap


def local_distance(b1: RootedBall, b2: RootedBall, r_max: int, theta=None, xi=None,
                   cap: int = DEFAULT_CODE_CAP, identity_upper: bool = False) -> float:
    """Truncated local distance between two rooted marked balls.

    Returns the minimum over radii ``r <= r_max`` at which the underlying
    ``r``-balls are isomorphic of ``1/(1+r) + gap_r``, where ``gap_r`` is the
    smallest achievable maximal mark discrepancy.  When both balls are
    complete (whole components) and isomorphic, every radius is good and
    the value is the bare gap.

    Parameters
    ----------
    theta, xi : MarkSpace or callable, optional
        Metrics on vertex and edge marks (default: ``|a-b|`` on numbers,
        discrete otherwise).
    identity_upper : bool
        The balls were cut around the same vertex of two graphs on a common
        skeleton.  The identity correspondence then seeds the isomorphism
        search as an upper bound, and is used as the (still valid) upper
        bound when the search budget runs out on balls with cycles.
    """
    for b in (b1, b2):
        if b.depth < r_max and not b.complete:
            raise ValueError("ball depth is smaller than r_max")
        if b.size > cap:
            raise BallTooLargeError(f"ball has {b.size} vertices, cap is {cap}")
    best = math.inf
    rad1 = max(b1.dist, default=0)
    rad2 = max(b2.dist, default=0)
    for r in range(r_max + 1):
        t1, t2 = b1.truncate(r), b2.truncate(r)
        if identity_upper:
            up = identity_gap(t1, t2, theta, xi)
            try:
                gap = iso_gap(t1, t2, theta, xi, upper=up)
            except BallTooLargeError:
                gap = up
        else:
            gap = iso_gap(t1, t2, theta, xi)
        if gap == math.inf:
            break
        best = min(best, 1.0 / (1 + r) + gap)
        if b1.complete and b2.complete and r >= rad1 and r >= rad2:
            best = min(best, gap)
            break
    return best
