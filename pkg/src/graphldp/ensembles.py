"""Samplers for Erdos-Renyi, uniform and prescribed-count (DA) marked graphs.

All samplers take an explicit ``numpy.random.Generator``.  Skeletons are
drawn as uniform sets of distinct vertex pairs; marks are laid on top either
i.i.d. (``decorate_iid``) or by uniform permutation of a prescribed mark
multiset (``sample_da``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .core import GraphError, MarkedGraph

PROB_TOL = 1e-12


class ParameterError(ValueError):
    """Invalid sampler parameters."""


# ---------------------------------------------------------------- containers


@dataclass(frozen=True)
class CountVectors:
    """Vertex-mark counts ``u`` and symmetric edge-mark-pair counts ``m``.

    ``m[i][j]`` (= ``m[j][i]``) is the number of edges whose two oriented
    marks are ``{xi[i], xi[j]}``; the edge total is the upper triangle sum.
    """

    u: tuple[int, ...]
    m: tuple[tuple[int, ...], ...]
    theta: tuple = ()
    xi: tuple = ()

    def __post_init__(self):
        u = tuple(int(a) for a in self.u)
        m = tuple(tuple(int(a) for a in row) for row in self.m)
        theta = tuple(self.theta) or tuple(range(len(u)))
        xi = tuple(self.xi) or tuple(range(len(m)))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "xi", xi)
        if len(theta) != len(u) or len(xi) != len(m):
            raise ParameterError("alphabet sizes do not match count vectors")
        if any(a < 0 for a in u) or any(a < 0 for row in m for a in row):
            raise ParameterError("negative counts")
        k = len(m)
        if any(len(row) != k for row in m):
            raise ParameterError("edge count matrix must be square")
        if any(m[i][j] != m[j][i] for i in range(k) for j in range(k)):
            raise ParameterError("edge count matrix must be symmetric")
        n = self.n
        if self.num_edges > n * (n - 1) // 2:
            raise ParameterError("more edges than vertex pairs")

    @property
    def n(self) -> int:
        return sum(self.u)

    @property
    def num_edges(self) -> int:
        k = len(self.m)
        return sum(self.m[i][j] for i in range(k) for j in range(i, k))

    @classmethod
    def trivial(cls, n: int, num_edges: int) -> "CountVectors":
        return cls((n,), ((num_edges,),))


@dataclass(frozen=True)
class MarkLaw:
    """Vertex-mark law ``nu`` and ordered edge-mark-pair law ``chi``.

    Finite laws carry probability vectors over the alphabets ``theta`` and
    ``xi`` (``chi`` is a ``|xi| x |xi|`` matrix, not necessarily symmetric).
    Real laws carry frozen ``scipy.stats`` distributions: ``nu`` for vertex
    marks and ``chi`` as a pair ``(first, second)`` of independent
    coordinate laws.
    """

    nu: Any
    chi: Any
    theta: tuple = ()
    xi: tuple = ()
    kind: str = "finite"

    def __post_init__(self):
        if self.kind == "finite":
            nu = np.asarray(self.nu, dtype=float)
            chi = np.asarray(self.chi, dtype=float)
            if chi.ndim != 2 or chi.shape[0] != chi.shape[1]:
                raise ParameterError("chi must be a square matrix")
            for name, p in (("nu", nu), ("chi", chi)):
                if np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
                    raise ParameterError(f"{name} is not a probability vector")
            theta = tuple(self.theta) or tuple(range(len(nu)))
            xi = tuple(self.xi) or tuple(range(chi.shape[0]))
            if len(theta) != len(nu) or len(xi) != chi.shape[0]:
                raise ParameterError("law dimensions do not match alphabets")
            object.__setattr__(self, "nu", nu)
            object.__setattr__(self, "chi", chi)
            object.__setattr__(self, "theta", theta)
            object.__setattr__(self, "xi", xi)
        elif self.kind == "real":
            if not isinstance(self.chi, tuple):
                object.__setattr__(self, "chi", (self.chi, self.chi))
        else:
            raise ParameterError(f"unknown law kind {self.kind!r}")

    @classmethod
    def real(cls, nu, chi_first, chi_second=None) -> "MarkLaw":
        return cls(nu, (chi_first, chi_first if chi_second is None else chi_second), kind="real")

    @classmethod
    def trivial(cls) -> "MarkLaw":
        return cls([1.0], [[1.0]])

    def chi_sym(self) -> np.ndarray:
        """Law of the unordered pair on ``x <= x'``: ``chi(x,x') + chi(x',x)``
        above the diagonal, ``chi(x,x)`` on it, zero below."""
        c = self.chi
        return np.triu(c + c.T, 1) + np.diag(np.diag(c))


def law_from_dict(doc: dict, theta=None, xi=None) -> MarkLaw:
    return MarkLaw(doc["nu"], doc["chi"], tuple(doc.get("theta", theta or ())), tuple(doc.get("xi", xi or ())))


# ------------------------------------------------------------------ skeletons


def _decode_pairs(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map lexicographic indices of pairs ``i < j`` in ``range(n)`` to ``(i, j)``."""
    k = k.astype(np.int64)
    tot = n * (n - 1) // 2
    # row i starts at offset i*n - i*(i+1)/2; invert with a float guess then fix
    rem = tot - 1 - k
    i = (n - 2 - np.floor((np.sqrt(8.0 * rem + 1) - 1) / 2)).astype(np.int64)

    def start(r):
        return r * n - r * (r + 1) // 2

    for _ in range(3):
        low = start(i) > k
        i = np.where(low, i - 1, i)
        high = start(i + 1) <= k
        i = np.where(high, i + 1, i)
    j = k - start(i) + i + 1
    return i, j


def _uniform_pairs(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ParameterError(f"edge count {m} outside [0, {total}]")
    if m == 0:
        return []
    idx = rng.choice(total, size=m, replace=False)
    i, j = _decode_pairs(np.asarray(idx), n)
    return list(zip(i.tolist(), j.tolist()))


def sample_uniform(n: int, m: int, rng: np.random.Generator) -> MarkedGraph:
    """Uniform simple graph on ``n`` vertices with exactly ``m`` edges."""
    if n < 1:
        raise ParameterError("n must be positive")
    return MarkedGraph(n, _uniform_pairs(int(n), int(m), rng))


def sample_er(n: int, d: float, rng: np.random.Generator) -> MarkedGraph:
    """Erdos-Renyi ``G(n, d/n)``: binomial edge count, then a uniform edge set."""
    if n < 1:
        raise ParameterError("n must be positive")
    if not 0 < d < n:
        if n == 1 and d > 0:
            return MarkedGraph(1)
        raise ParameterError(f"need 0 < d < n, got d={d}, n={n}")
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, d / n)) if total else 0
    return MarkedGraph(n, _uniform_pairs(n, m, rng))


# --------------------------------------------------------------------- marks


def _draw_vertex_marks(law: MarkLaw, n: int, rng) -> list:
    if law.kind == "finite":
        idx = rng.choice(len(law.theta), size=n, p=law.nu)
        return [law.theta[i] for i in idx]
    return [float(x) for x in np.atleast_1d(law.nu.rvs(size=n, random_state=rng))]


def _draw_edge_pairs(law: MarkLaw, m: int, rng) -> list[tuple]:
    if m == 0:
        return []
    if law.kind == "finite":
        k = len(law.xi)
        flat = rng.choice(k * k, size=m, p=law.chi.ravel())
        return [(law.xi[f // k], law.xi[f % k]) for f in flat]
    a = np.atleast_1d(law.chi[0].rvs(size=m, random_state=rng))
    b = np.atleast_1d(law.chi[1].rvs(size=m, random_state=rng))
    return list(zip(a.tolist(), b.tolist()))


def decorate_iid(g: MarkedGraph, law: MarkLaw, rng: np.random.Generator) -> MarkedGraph:
    """I.i.d. vertex marks from ``nu``; per edge an independent pair from
    ``chi`` whose orientation onto ``(u, v)`` is set by a fair coin."""
    vm = _draw_vertex_marks(law, g.n, rng)
    pairs = _draw_edge_pairs(law, g.num_edges, rng)
    coins = rng.integers(0, 2, size=g.num_edges)
    em = {}
    for (u, v), (a, b), c in zip(g.edges, pairs, coins):
        if c:
            a, b = b, a
        em[(u, v)] = a
        em[(v, u)] = b
    return MarkedGraph(g.n, g.edges, vm, em)


def sample_er_marked(n: int, d: float, law: MarkLaw, rng: np.random.Generator) -> MarkedGraph:
    return decorate_iid(sample_er(n, d, rng), law, rng)


def sample_uniform_marked(n: int, m: int, law: MarkLaw, rng: np.random.Generator) -> MarkedGraph:
    return decorate_iid(sample_uniform(n, m, rng), law, rng)


def sample_da(cv: CountVectors, rng: np.random.Generator) -> MarkedGraph:
    """Uniform marked graph with exactly the vertex and edge mark counts ``cv``.

    Draws a uniform skeleton with ``||m||_1`` edges, a uniform arrangement of
    the vertex-mark multiset and of the unordered edge-mark-pair multiset, and
    an independent orientation coin for every edge with two distinct marks.
    """
    n, m = cv.n, cv.num_edges
    if n < 1:
        raise ParameterError("counts describe an empty vertex set")
    g = sample_uniform(n, m, rng)
    vm = [cv.theta[i] for i, c in enumerate(cv.u) for _ in range(c)]
    vm = [vm[i] for i in rng.permutation(n)]
    k = len(cv.xi)
    pairs = [(cv.xi[i], cv.xi[j]) for i in range(k) for j in range(i, k) for _ in range(cv.m[i][j])]
    pairs = [pairs[i] for i in rng.permutation(m)]
    coins = rng.integers(0, 2, size=m)
    em = {}
    for (u, v), (a, b), c in zip(g.edges, pairs, coins):
        if c and a != b:
            a, b = b, a
        em[(u, v)] = a
        em[(v, u)] = b
    return MarkedGraph(n, g.edges, vm, em)


def count_vectors_of(g: MarkedGraph, theta: Sequence, xi: Sequence) -> CountVectors:
    """Vertex-mark and edge-mark-pair counts of a finite-marked graph."""
    ti = {t: i for i, t in enumerate(theta)}
    xj = {x: i for i, x in enumerate(xi)}
    u = [0] * len(theta)
    for t in g.vertex_marks:
        try:
            u[ti[t]] += 1
        except KeyError:
            raise GraphError(f"vertex mark {t!r} not in alphabet") from None
    k = len(xi)
    m = [[0] * k for _ in range(k)]
    for a, b in g.edges:
        try:
            i, j = xj[g.edge_marks[(a, b)]], xj[g.edge_marks[(b, a)]]
        except KeyError:
            raise GraphError("edge mark not in alphabet") from None
        m[i][j] += 1
        if i != j:
            m[j][i] += 1
    return CountVectors(tuple(u), tuple(tuple(r) for r in m), tuple(theta), tuple(xi))
