"""Tagged partitions of mark spaces, mark projection and the projection bound.

Real mark spaces are cut into equal-width half-open cells over a compact
core chosen from quantiles; everything outside the core is the remainder
cell, whose tag is the right end of the core.  Finite alphabets are grouped
greedily into cells of small diameter and have an empty remainder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import MarkedGraph, MarkSpace
from .empirical import coupled_bl_bound
from .ensembles import MarkLaw


class CertificationError(RuntimeError):
    """The remainder mass could not be certified below delta."""


@dataclass
class TaggedPartition:
    """Cells with tag points; the last cell is the remainder.

    For ``kind == "real"``: ``breaks`` holds ``lo = b_0 < ... < b_K = hi``, the
    core cells are ``[b_i, b_{i+1})`` tagged at their centres, and the
    remainder ``(-inf, lo) U [hi, inf)`` is tagged ``hi``.
    For ``kind == "finite"``: ``cells`` lists symbol groups with ``tags``; the
    remainder is empty.
    """

    kind: str
    eps: float
    delta: float
    breaks: np.ndarray | None = None
    cells: list = field(default_factory=list)
    tags: list = field(default_factory=list)
    remainder_mass: float = 0.0
    metric: MarkSpace | None = None

    def __post_init__(self):
        if self.kind == "real":
            b = np.asarray(self.breaks, dtype=float)
            self.breaks = b
            self.tags = [float(x) for x in (b[:-1] + b[1:]) / 2] + [float(b[-1])]
        elif self.kind == "finite":
            self._lookup = {s: i for i, cell in enumerate(self.cells) for s in cell}
        else:
            raise ValueError(f"unknown partition kind {self.kind!r}")

    @property
    def n_cells(self) -> int:
        """Number of cells including the remainder."""
        return len(self.tags) if self.kind == "real" else len(self.cells) + 1

    @property
    def remainder_index(self) -> int:
        return self.n_cells - 1

    @property
    def core(self) -> tuple[float, float]:
        return float(self.breaks[0]), float(self.breaks[-1])

    def index(self, x):
        """Cell index of each mark (array in, array out for real partitions)."""
        if self.kind == "real":
            xa = np.asarray(x, dtype=float)
            i = np.searchsorted(self.breaks, xa, side="right") - 1
            i = np.where((i < 0) | (i >= len(self.breaks) - 1), len(self.breaks) - 1, i)
            return i if xa.ndim else int(i)
        try:
            return self._lookup[x]
        except KeyError:
            raise ValueError(f"mark {x!r} lies in no cell") from None

    def project(self, x):
        return self.tags[self.index(x)]

    def alphabet(self) -> tuple:
        """Tags that projected marks can take (remainder included for real spaces)."""
        return tuple(self.tags)

    def in_remainder(self, x) -> bool:
        if self.kind == "real":
            return self.index(x) == self.remainder_index
        return False

    def diameters(self) -> list[float]:
        """Diameters of the core cells."""
        if self.kind == "real":
            return list(np.diff(self.breaks))
        dist = self.metric.distance if self.metric else (lambda a, b: 0.0 if a == b else 1.0)
        return [max((dist(a, b) for a in c for b in c), default=0.0) for c in self.cells]


def schedule(k: int) -> tuple[float, float]:
    """The k-th ``(eps, delta) = (1/(2k), exp(-k^2))`` discretisation level."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return 1.0 / (2 * k), math.exp(-k * k)


def _core_from_dist(dist, tail: float) -> tuple[float, float, float]:
    a, b = dist.support()
    lo = float(a) if np.isfinite(a) else float(dist.ppf(tail / 2))
    hi = float(b) if np.isfinite(b) else float(dist.isf(tail / 2))
    mass = float(dist.cdf(lo)) + float(dist.sf(hi))
    return lo, hi, mass


def good_partition(law, eps: float, delta: float, space: MarkSpace | None = None) -> TaggedPartition:
    """An ``(eps, delta)``-good tagged partition for one mark law.

    Parameters
    ----------
    law : frozen scipy distribution, sequence of them, sample array, or
        probability vector (with a finite ``space``)
        A sequence of distributions is treated as the coordinate marginals
        of an edge-pair law: each gets ``delta / len`` of the remainder
        budget and the core is the hull of their cores.
    """
    if eps <= 0 or delta <= 0:
        raise ValueError("eps and delta must be positive")
    if space is not None and space.kind == "finite":
        return _finite_partition(np.asarray(law, dtype=float), space, eps, delta)
    if isinstance(law, np.ndarray) and law.dtype.kind == "f":
        q = delta / 4
        lo, hi = np.quantile(law, [q, 1 - q])
        mass = float(np.mean((law < lo) | (law >= hi)))
        if hi <= lo:
            hi = lo + eps
    else:
        dists = list(law) if isinstance(law, (list, tuple)) else [law]
        share = delta / len(dists)
        cores = [_core_from_dist(dist, share / 2) for dist in dists]
        lo = min(c[0] for c in cores)
        hi = max(c[1] for c in cores)
        masses = [float(dist.cdf(lo)) + float(dist.sf(hi)) for dist in dists]
        mass = sum(masses)
    if not mass < delta:
        raise CertificationError(f"remainder mass {mass:.3g} is not below delta={delta}")
    k = max(1, math.ceil((hi - lo) / eps - 1e-12))
    breaks = np.linspace(lo, hi, k + 1)
    return TaggedPartition("real", eps, delta, breaks=breaks, remainder_mass=mass)


def _finite_partition(p: np.ndarray, space: MarkSpace, eps: float, delta: float) -> TaggedPartition:
    cells: list[list] = []
    for s in space.symbols:
        for cell in cells:
            if all(space.distance(s, t) <= eps for t in cell):
                cell.append(s)
                break
        else:
            cells.append([s])
    cells = [tuple(c) for c in cells]
    return TaggedPartition("finite", eps, delta, cells=cells, tags=[c[0] for c in cells], metric=space)


def identity_partition(space: MarkSpace) -> TaggedPartition:
    """Singleton cells over a finite alphabet."""
    cells = [(s,) for s in space.symbols]
    return TaggedPartition("finite", 0.0, 0.0, cells=cells, tags=[s for s in space.symbols], metric=space)


def single_cell_partition(space: MarkSpace, tag=None) -> TaggedPartition:
    cells = [tuple(space.symbols)]
    return TaggedPartition("finite", math.inf, 0.0, cells=cells, tags=[space.symbols[0] if tag is None else tag],
                           metric=space)


# -------------------------------------------------------------- push-forward


def _cell_masses(P: TaggedPartition, dist) -> np.ndarray:
    if P.kind == "real":
        cdf = dist.cdf(P.breaks)
        core = np.diff(cdf)
        rem = float(cdf[0]) + float(dist.sf(P.breaks[-1]))
        return np.append(core, rem)
    raise TypeError("finite partitions push forward probability vectors, not distributions")


def pushforward(P: TaggedPartition, law, symbols: Sequence | None = None) -> np.ndarray:
    """Mass of each cell (real: remainder last) under ``law``.

    ``law`` is a frozen distribution for real partitions, or a probability
    vector over ``symbols`` for finite ones.
    """
    if P.kind == "real":
        return _cell_masses(P, law)
    symbols = P.metric.symbols if symbols is None else symbols
    out = np.zeros(len(P.cells))
    for s, p in zip(symbols, np.asarray(law, dtype=float)):
        out[P.index(s)] += p
    return out


def pushforward_law(law: MarkLaw, A: TaggedPartition, B: TaggedPartition) -> MarkLaw:
    """Finite ``MarkLaw`` of projected marks (alphabets are the tags)."""
    if law.kind == "real":
        nu = pushforward(A, law.nu)
        c1 = pushforward(B, law.chi[0])
        c2 = pushforward(B, law.chi[1])
        chi = np.outer(c1, c2)
    else:
        nu = pushforward(A, law.nu, law.theta)
        kb = len(B.cells)
        chi = np.zeros((kb, kb))
        for i, x in enumerate(law.xi):
            for j, y in enumerate(law.xi):
                chi[B.index(x), B.index(y)] += law.chi[i, j]
    nu = nu / nu.sum()
    chi = chi / chi.sum()
    return MarkLaw(nu, chi, A.alphabet(), B.alphabet())


# ---------------------------------------------------------------- projection


def project_graph(g: MarkedGraph, A: TaggedPartition, B: TaggedPartition) -> MarkedGraph:
    """Same skeleton with every mark replaced by the tag of its cell."""
    vm = [A.project(x) for x in g.vertex_marks]
    em = {k: B.project(x) for k, x in g.edge_marks.items()}
    return MarkedGraph(g.n, g.edges, vm, em)


def sparsity_diagnostic(g: MarkedGraph, h: int, S: int) -> float:
    """Fraction of vertices whose depth-``h`` ball has more than ``S`` vertices."""
    if g.n == 0:
        return 0.0
    indptr, indices = g.csr()
    sizes = kernels.ball_sizes(indptr, indices, int(h), int(S))
    return float(np.count_nonzero(sizes > S)) / g.n


@dataclass(frozen=True)
class LemmaBound:
    lhs: float
    rhs: float
    depth_term: float
    eps: float
    big_ball_term: float
    vertex_remainder_fraction: float
    edge_band_fraction: float
    edges_both_in_remainder: int
    S: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def as_dict(self) -> dict:
        return dict(self.__dict__, holds=self.holds)


def lemma_bound(g: MarkedGraph, A: TaggedPartition, B: TaggedPartition, h: int, S: int,
                theta=None, xi=None) -> LemmaBound:
    """Both sides of the projection estimate for ``g`` and its projection.

    ``rhs = 1/(1+h) + eps + (2/n) #{v : |[G,v]_{2h}| > S}
    + 2S (#{v : O_v in A*} / n + #{e : X_e in B*} / n)`` where ``A*`` is the
    remainder cell and ``B*`` the band of edge-mark pairs with exactly one
    coordinate in the remainder cell.  ``lhs`` is the identity-coupling
    bound between ``U(G)`` and ``U(G^pi)``.  Edges with both coordinates
    in the remainder lie outside ``B*`` and are counted separately.
    """
    if h < 1 or S < 1:
        raise ValueError("need h >= 1 and S >= 1")
    n = g.n
    eps = max(A.eps, B.eps)
    indptr, indices = g.csr()
    big = np.count_nonzero(kernels.ball_sizes(indptr, indices, 2 * h, int(S)) > S)
    v_bad = sum(1 for x in g.vertex_marks if A.in_remainder(x))
    band = both = 0
    for u, v in g.edges:
        a = B.in_remainder(g.edge_marks[(u, v)])
        b = B.in_remainder(g.edge_marks[(v, u)])
        band += a != b
        both += a and b
    rhs = 1 / (1 + h) + eps + 2 * big / n + 2 * S * (v_bad / n + band / n)
    lhs = coupled_bl_bound(g, project_graph(g, A, B), h, theta, xi)
    return LemmaBound(lhs, rhs, 1 / (1 + h), eps, 2 * big / n, v_bad / n, band / n, both, S)
