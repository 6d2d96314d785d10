"""Unimodular Galton-Watson trees grown from depth-h seeds.

``sample_ugwt`` grows a tree from an explicit seed by repeatedly extending
the branch below each vertex by one generation with the size-biased kernels
``hat_P``.  ``sample_pstar_tree`` is the direct Poisson Galton-Watson
recursion for the Poisson-product seed, which has the same law.
"""
from __future__ import annotations

import json
import warnings
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .core import MarkedGraph, RootedBall, _tupleize, ball, mark_key, tree_code_from, tree_from_code
from .empirical import EmpiricalMeasure, e_mu, edge_type_counts, half_type, symmetry_defect
from .ensembles import MarkLaw

DEFAULT_VERTEX_BUDGET = 1_000_000


class VertexBudgetError(RuntimeError):
    """A sampled tree outgrew the vertex budget."""


# ------------------------------------------------------------------- grafting


@dataclass(frozen=True)
class GraftArg:
    """Half of an edge type: an edge mark and a rooted tree hanging below it."""

    mark: object
    tree: MarkedGraph

    @classmethod
    def parse(cls, text: str) -> "GraftArg":
        """From the canonical text ``[mark, tree code]`` produced by ``half_type``."""
        mark, nested = json.loads(text)
        return cls(_tupleize(mark), tree_from_code(json.dumps(nested, separators=(",", ":"))))

    def text(self, depth: int | None = None) -> str:
        return half_type(self.mark, tree_code_from(self.tree, 0, depth=depth))


def oplus(t: GraftArg, t2: GraftArg) -> MarkedGraph:
    """Root of ``t.tree`` with one extra child carrying ``t2.tree``.

    The new edge has ``xi(v, o) = t.mark`` and ``xi(o, v) = t2.mark``.
    """
    a, b = t.tree, t2.tree
    off = a.n
    edges = list(a.edges) + [(u + off, v + off) for u, v in b.edges] + [(0, off)]
    em = dict(a.edge_marks)
    em.update({(u + off, v + off): m for (u, v), m in b.edge_marks.items()})
    em[(off, 0)] = t.mark
    em[(0, off)] = t2.mark
    return MarkedGraph(a.n + b.n, edges, list(a.vertex_marks) + list(b.vertex_marks), em)


# ------------------------------------------------------------------ kernels


def _branch_template(g: MarkedGraph, root: int, parent: int | None, depth: int):
    """Nodes below ``root`` (away from ``parent``) to ``depth``, BFS order.

    Each entry is ``(parent index, vertex mark, xi(child, parent), xi(parent, child))``
    with parent index ``-1`` meaning ``root``.
    """
    out = []
    frontier = [(root, parent, -1)]
    for _ in range(depth):
        nxt = []
        for v, p, idx in frontier:
            for u in g.adj[v]:
                if u == p:
                    continue
                out.append((idx, g.vertex_marks[u], g.edge_marks[(u, v)], g.edge_marks[(v, u)]))
                nxt.append((u, v, len(out) - 1))
        frontier = nxt
    return tuple(out)


@dataclass
class HatKernel:
    """Distribution ``hat_P_{t,t'}`` over extensions of the branch ``t``.

    ``options[i]`` is the branch template of ``t~[s]`` (depth h) and
    ``probs[i]`` its probability.
    """

    t: str
    t2: str
    codes: list
    options: list
    probs: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        self.cum = np.cumsum(self.probs)

    def draw(self, rng) -> int:
        i = int(np.searchsorted(self.cum, rng.random() * self.cum[-1], side="right"))
        return min(i, len(self.options) - 1)

    def as_dict(self) -> dict:
        return {c: float(p) for c, p in zip(self.codes, self.probs)}


def hat_P_table(P: EmpiricalMeasure, h: int | None = None) -> dict:
    """All kernels ``hat_P_{t,t'}`` with ``e_P(t,t') > 0``, keyed by ``(t, t')``.

    For a support tree ``T`` and a root edge ``(o, v)`` of type ``(t, t')``
    (``t`` the o-side, ``t'`` the v-side), removing ``v``'s branch leaves the
    extension ``t~`` with ``t~ (+) t' = T``; its weight is
    ``P(T) E_h(t, t')(T) / e_P(t, t')``.
    """
    h = P.depth if h is None else h
    acc: dict = defaultdict(lambda: defaultdict(float))
    tmpl: dict = {}
    for code, w, b in P.items():
        g = b.graph
        seen = set()
        counts = edge_type_counts(b, h)
        for v in g.adj[0]:
            own = tree_code_from(g, 0, parent=v, depth=h - 1)
            far = tree_code_from(g, v, parent=0, depth=h - 1)
            key = (half_type(g.edge_marks[(v, 0)], own), half_type(g.edge_marks[(0, v)], far))
            if key in seen:
                continue
            seen.add(key)
            ext = half_type(g.edge_marks[(v, 0)], tree_code_from(g, 0, parent=v, depth=h))
            acc[key][ext] += float(w) * counts[key]
            tmpl.setdefault(ext, _branch_template(g, 0, v, h))
    out = {}
    for key, dist in acc.items():
        codes = sorted(dist)
        p = np.array([dist[c] for c in codes], dtype=np.longdouble)
        tot = p.sum()
        if tot < 1e-300:
            warnings.warn(f"hat_P normaliser {float(tot):.3g} for edge type {key} is ill-conditioned",
                          RuntimeWarning, stacklevel=2)
        out[key] = HatKernel(key[0], key[1], codes, [tmpl[c] for c in codes], (p / tot).astype(float))
    return out


def hat_P(P: EmpiricalMeasure, t: str, t2: str, h: int | None = None) -> dict:
    """``hat_P_{t,t'}`` as ``{extension text: probability}``.

    When ``e_P(t, t') = 0`` the point mass on ``t`` itself is returned.
    """
    table = hat_P_table(P, h)
    if (t, t2) in table:
        return table[(t, t2)].as_dict()
    return {t: 1.0}


# ------------------------------------------------------------------ sampling


class _Tree:
    """Growable rooted tree with parent pointers (root 0)."""

    __slots__ = ("parent", "mark", "up", "down", "children", "depth", "alive", "budget", "n_alive")

    def __init__(self, budget):
        self.parent, self.mark, self.up, self.down = [], [], [], []
        self.children, self.depth, self.alive = [], [], []
        self.budget = budget
        self.n_alive = 0

    def add(self, parent, mark, up=None, down=None):
        if self.n_alive >= self.budget:
            raise VertexBudgetError(f"tree exceeded {self.budget} vertices")
        i = len(self.mark)
        self.parent.append(parent)
        self.mark.append(mark)
        self.up.append(up)
        self.down.append(down)
        self.children.append([])
        self.depth.append(0 if parent < 0 else self.depth[parent] + 1)
        self.alive.append(True)
        self.n_alive += 1
        if parent >= 0:
            self.children[parent].append(i)
        return i

    def graft(self, at, template):
        idx = []
        for p, mark, up, down in template:
            idx.append(self.add(at if p < 0 else idx[p], mark, up, down))

    def drop_below(self, v):
        stack = list(self.children[v])
        self.children[v] = []
        while stack:
            u = stack.pop()
            self.alive[u] = False
            self.n_alive -= 1
            stack.extend(self.children[u])

    def to_graph(self) -> MarkedGraph:
        keep = [i for i, a in enumerate(self.alive) if a]
        pos = {v: k for k, v in enumerate(keep)}
        edges, em = [], {}
        for v in keep[1:]:
            a, b = pos[self.parent[v]], pos[v]
            edges.append((a, b))
            em[(b, a)] = self.up[v]
            em[(a, b)] = self.down[v]
        return MarkedGraph(len(keep), edges, [self.mark[v] for v in keep], em)


def _half_code_tree(tr: _Tree, root: int, away: int, depth: int) -> str:
    """Tree code of ``root``'s side away from neighbour ``away``, to ``depth``."""

    def nbrs(v):
        out = [(c, tr.up[c], tr.down[c]) for c in tr.children[v]]
        p = tr.parent[v]
        if p >= 0:
            out.append((p, tr.down[v], tr.up[v]))
        return out

    def code(v, frm, left):
        parts = []
        if left > 0:
            for u, up_uv, down_vu in nbrs(v):
                if u == frm:
                    continue
                # up_uv = xi(u, v) from u's perspective toward v
                parts.append("[" + mark_key(up_uv) + "," + mark_key(down_vu) + "," + code(u, v, left - 1) + "]")
        parts.sort()
        return "[" + mark_key(tr.mark[v]) + ("," + ",".join(parts) if parts else "") + "]"

    return code(root, away, depth)


def sample_ugwt(P: EmpiricalMeasure, D: int, rng: np.random.Generator, h: int | None = None,
                table: dict | None = None, budget: int = DEFAULT_VERTEX_BUDGET,
                check_tol: float = 1e-9) -> RootedBall:
    """One tree from ``UGWT_h(P)`` grown to depth ``D`` (depth-``D`` vertices frozen).

    Parameters
    ----------
    P : explicit seed (finite law over depth-h trees)
    D : depth cutoff, ``D >= h``
    table : precomputed ``hat_P_table(P)`` (recommended for repeated draws)
    """
    h = P.depth if h is None else h
    if D < h:
        raise ValueError("cutoff must be at least the seed depth")
    if table is None:
        defect = symmetry_defect(e_mu(P, h))
        if defect > check_tol:
            raise ValueError(f"seed is not admissible (defect {defect:.3g})")
        table = hat_P_table(P, h)
    codes = list(P.weights)
    probs = np.array([float(P.weights[c]) for c in codes])
    b0 = P.reps[codes[int(rng.choice(len(codes), p=probs / probs.sum()))]]
    tr = _Tree(budget)
    tr.add(-1, b0.graph.vertex_marks[0])
    tr.graft(0, _branch_template(b0.graph, 0, None, h))
    level = [c for c in tr.children[0]]
    for k in range(1, D - h + 1):
        nxt = []
        for w in level:
            u = tr.parent[w]
            t = half_type(tr.down[w], _half_code_tree(tr, w, u, h - 1))
            t2 = half_type(tr.up[w], _half_code_tree(tr, u, w, h - 1))
            ker = table.get((t, t2))
            if ker is None:
                raise ValueError("edge type outside the seed's support; seed inadmissible?")
            i = ker.draw(rng)
            tr.drop_below(w)
            tr.graft(w, ker.options[i])
            nxt.extend(tr.children[w])
        level = nxt
    return ball(tr.to_graph(), 0, D)


def sample_pstar_tree(law: MarkLaw, d: float, D: int, rng: np.random.Generator,
                      budget: int = DEFAULT_VERTEX_BUDGET) -> RootedBall:
    """Poisson(``d``) Galton-Watson tree to depth ``D`` with i.i.d. marks.

    Vertex marks follow ``nu``; each edge draws an ordered pair from ``chi``
    and a fair coin decides which entry marks the parent-to-child direction.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    kt = len(law.theta)
    kx = len(law.xi)
    chi_flat = law.chi.ravel()
    marks = [law.theta[int(rng.choice(kt, p=law.nu))]]
    edges, em = [], {}
    frontier = np.array([0])
    for _ in range(D):
        if frontier.size == 0:
            break
        k = rng.poisson(d, size=frontier.size)
        total = int(k.sum())
        if len(marks) + total > budget:
            raise VertexBudgetError(f"tree exceeded {budget} vertices")
        if total == 0:
            break
        parents = np.repeat(frontier, k)
        vm = rng.choice(kt, size=total, p=law.nu)
        pair = rng.choice(kx * kx, size=total, p=chi_flat)
        coin = rng.integers(0, 2, size=total)
        first = pair // kx
        second = pair % kx
        down = np.where(coin == 0, first, second)
        up = np.where(coin == 0, second, first)
        start = len(marks)
        marks.extend(law.theta[i] for i in vm)
        for j in range(total):
            c, p = start + j, int(parents[j])
            edges.append((p, c))
            em[(p, c)] = law.xi[down[j]]
            em[(c, p)] = law.xi[up[j]]
        frontier = np.arange(start, start + total)
    return ball(MarkedGraph(len(marks), edges, marks, em), 0, D)


def code_histogram(trees, depth: int) -> dict:
    """Normalised histogram of depth-``depth`` ball codes at the roots."""
    acc: dict = defaultdict(float)
    trees = list(trees)
    for b in trees:
        acc[b.truncate(depth).code()] += 1.0
    return {c: v / len(trees) for c, v in acc.items()}
