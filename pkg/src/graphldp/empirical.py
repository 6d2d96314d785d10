"""Empirical neighbourhood distributions and depth-h type statistics.

An ``EmpiricalMeasure`` is a finite law over canonical codes of rooted
depth-``h`` balls, with one representative ball per code.  Weights are kept
as exact fractions when they come from a finite graph.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import stats

from .core import (
    DEFAULT_CODE_CAP,
    MarkedGraph,
    NotATreeError,
    RootedBall,
    ball,
    canonical_code,
    local_distance,
    mark_key,
    tree_code_from,
)


@dataclass
class EmpiricalMeasure:
    """Finite probability law over rooted ball classes of depth ``h``.

    Attributes
    ----------
    depth : int
    weights : dict
        canonical code (bytes) -> weight (``Fraction`` or float)
    reps : dict
        canonical code -> representative ``RootedBall``
    """

    depth: int
    weights: dict = field(default_factory=dict)
    reps: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.weights) != set(self.reps):
            raise ValueError("every weighted code needs a representative")
        if any(w <= 0 for w in self.weights.values()):
            raise ValueError("weights must be positive")
        tot = sum(self.weights.values())
        if abs(float(tot) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {float(tot)}, not 1")

    def __len__(self):
        return len(self.weights)

    def items(self):
        for c, w in self.weights.items():
            yield c, w, self.reps[c]

    def float_weights(self) -> dict:
        return {c: float(w) for c, w in self.weights.items()}

    def expect(self, fn: Callable[[RootedBall], float]):
        return sum(w * fn(b) for _, w, b in self.items())

    @classmethod
    def from_balls(cls, balls: Iterable[RootedBall], depth: int, weights: Iterable | None = None,
                   cap: int = DEFAULT_CODE_CAP) -> "EmpiricalMeasure":
        """Measure from a list of balls (equal weights unless ``weights``)."""
        balls = list(balls)
        ws = [Fraction(1, len(balls))] * len(balls) if weights is None else list(weights)
        acc: dict = defaultdict(int)
        reps: dict = {}
        for b, w in zip(balls, ws):
            c = canonical_code(b, cap=cap)
            acc[c] += w
            reps.setdefault(c, b)
        return cls(depth, dict(acc), reps)


def empirical_distribution(g: MarkedGraph, h: int, full_component: bool = False,
                           cap: int = DEFAULT_CODE_CAP) -> EmpiricalMeasure:
    """``(1/n) sum_v delta_[G, v]_h`` with exact ``k/n`` weights.

    With ``full_component`` each vertex contributes its whole rooted
    connected component instead of the depth-``h`` ball (oracle scale only;
    components larger than ``cap`` raise ``BallTooLargeError``).
    """
    if g.n == 0:
        raise ValueError("empty graph has no empirical distribution")
    counts: Counter = Counter()
    reps: dict = {}
    depth = g.n if full_component else h
    for v in range(g.n):
        b = ball(g, v, depth)
        c = canonical_code(b, cap=cap)
        counts[c] += 1
        reps.setdefault(c, b)
    weights = {c: Fraction(k, g.n) for c, k in counts.items()}
    return EmpiricalMeasure(depth, weights, reps)


def mark_marginal(mu: EmpiricalMeasure, theta) -> np.ndarray:
    """Probability vector of the root mark over the ordered alphabet ``theta``."""
    idx = {t: i for i, t in enumerate(theta)}
    out = np.zeros(len(theta))
    for _, w, b in mu.items():
        out[idx[b.root_mark]] += float(w)
    return out


def degree_matrix(mu: EmpiricalMeasure, xi) -> tuple[np.ndarray, float]:
    """Mean typed degrees ``deg^{x,x'}`` and the total mean degree.

    ``deg^{x,x'}`` counts neighbours ``v`` of the root with
    ``xi(v, o) = x`` and ``xi(o, v) = x'``.
    """
    if mu.depth < 1:
        raise ValueError("degree statistics need depth >= 1")
    idx = {x: i for i, x in enumerate(xi)}
    out = np.zeros((len(xi), len(xi)))
    for _, w, b in mu.items():
        g = b.graph
        for v in g.adj[0]:
            out[idx[g.edge_marks[(v, 0)]], idx[g.edge_marks[(0, v)]]] += float(w)
    return out, float(mean_degree(mu))


def mean_degree(mu: EmpiricalMeasure):
    """Exact mean root degree (a ``Fraction`` for exact weights)."""
    return sum(w * b.root_degree for _, w, b in mu.items())


# ----------------------------------------------------------------- edge types


def half_type(mark, subtree_code: str) -> str:
    """Canonical text of one half ``(edge mark, depth-(h-1) subtree)`` of an edge type."""
    return "[" + mark_key(mark) + "," + subtree_code + "]"


def edge_type_counts(b: RootedBall, h: int) -> Counter:
    """Counts ``E_h(g, g')`` of root edges by depth-``h`` type.

    The type of the root edge ``(o, v)`` is ``(g, g')`` with
    ``g = (xi(v, o), [o-side subtree]_{h-1})`` and
    ``g' = (xi(o, v), [v-side subtree]_{h-1})``.
    """
    if h < 1:
        raise ValueError("edge types need h >= 1")
    if b.depth < h and not b.complete:
        raise ValueError("ball is shallower than the type depth")
    if not b.is_tree():
        raise NotATreeError("edge types are defined on tree neighbourhoods")
    g = b.graph
    out: Counter = Counter()
    for v in g.adj[0]:
        own = tree_code_from(g, 0, parent=v, depth=h - 1)
        far = tree_code_from(g, v, parent=0, depth=h - 1)
        out[(half_type(g.edge_marks[(v, 0)], own), half_type(g.edge_marks[(0, v)], far))] += 1
    return out


def e_mu(mu: EmpiricalMeasure, h: int | None = None) -> dict:
    """Mean edge-type counts ``e_mu(g, g') = E_mu[E_h(g, g')]``."""
    h = mu.depth if h is None else h
    acc: dict = defaultdict(int)
    for _, w, b in mu.items():
        for t, k in edge_type_counts(b, h).items():
            acc[t] += w * k
    return dict(acc)


def symmetry_defect(e: Mapping) -> float:
    """``max |e(g, g') - e(g', g)|`` over all type pairs."""
    worst = 0.0
    for (a, b), val in e.items():
        worst = max(worst, abs(float(val) - float(e.get((b, a), 0))))
    return worst


def check_admissible(P, tol: float = 1e-9) -> tuple[float, bool]:
    """Symmetry defect of the mean edge-type counts and the verdict ``defect <= tol``.

    ``P`` is an ``EmpiricalMeasure``/explicit seed, or any object exposing
    ``edge_type_means()`` (parametric seeds).
    """
    if hasattr(P, "edge_type_means"):
        e = P.edge_type_means()
    else:
        e = e_mu(P)
    d = symmetry_defect(e)
    return d, d <= tol


# ----------------------------------------------------------- distances


def tv_distance(mu1: EmpiricalMeasure, mu2: EmpiricalMeasure) -> float:
    """Total variation between two measures of equal depth."""
    if mu1.depth != mu2.depth:
        raise ValueError(f"depth mismatch: {mu1.depth} vs {mu2.depth}")
    return tv_from_weights(mu1.weights, mu2.weights)


def tv_from_weights(w1: Mapping, w2: Mapping) -> float:
    keys = set(w1) | set(w2)
    return 0.5 * sum(abs(float(w1.get(k, 0)) - float(w2.get(k, 0))) for k in keys)


def coupled_bl_bound(g1: MarkedGraph, g2: MarkedGraph, h: int, theta=None, xi=None) -> float:
    """Upper bound on the bounded-Lipschitz distance of ``U(g1)`` and ``U(g2)``.

    Couples the two empirical laws through the identity map on vertices and
    averages ``min(local_distance, 2)`` of the depth-``h`` balls.
    """
    if g1.n != g2.n:
        raise ValueError("graphs must share the vertex set")
    return float(np.mean(per_vertex_distances(g1, g2, h, theta, xi))) if g1.n else 0.0


def per_vertex_distances(g1: MarkedGraph, g2: MarkedGraph, h: int, theta=None, xi=None) -> np.ndarray:
    if g1.n != g2.n:
        raise ValueError("graphs must share the vertex set")
    out = np.empty(g1.n)
    same_skeleton = g1.edges == g2.edges
    for v in range(g1.n):
        d = local_distance(ball(g1, v, h), ball(g2, v, h), h, theta, xi,
                           cap=max(DEFAULT_CODE_CAP, g1.n + 1), identity_upper=same_skeleton)
        out[v] = min(d, 2.0)
    return out


# -------------------------------------------------------------- unimodularity


@dataclass(frozen=True)
class UnimodularityReport:
    lhs: float
    rhs: float
    lhs_ci: float
    rhs_ci: float
    diff: float
    diff_ci: float
    n_samples: int
    level: float

    @property
    def consistent(self) -> bool:
        """True when the paired difference CI covers zero."""
        return abs(self.diff) <= self.diff_ci


def check_unimodular_mc(sampler: Callable[[np.random.Generator], MarkedGraph | RootedBall],
                        f: Callable[[MarkedGraph, int, int], float], n_samples: int,
                        rng: np.random.Generator, radius: int = 1, level: float = 0.99) -> UnimodularityReport:
    """Monte Carlo estimates of both sides of the mass-transport identity.

    Each sample is a rooted graph ``(G, 0)``; the per-sample sides are
    ``sum_v f(G, 0, v)`` and ``sum_v f(G, v, 0)`` over ``v`` within
    ``radius`` of the root.  The sampler must produce graphs deep enough for
    ``f`` to be evaluated at every such ``v``.
    """
    lhs = np.empty(n_samples)
    rhs = np.empty(n_samples)
    for i in range(n_samples):
        s = sampler(rng)
        g = s.graph if isinstance(s, RootedBall) else s
        near = ball(g, 0, radius).origin
        lhs[i] = sum(f(g, 0, v) for v in near)
        rhs[i] = sum(f(g, v, 0) for v in near)
    z = stats.norm.ppf(0.5 + level / 2)
    diff = lhs - rhs

    def half(x):
        return z * x.std(ddof=1) / math.sqrt(len(x)) if len(x) > 1 else math.inf

    return UnimodularityReport(lhs.mean(), rhs.mean(), half(lhs), half(rhs), diff.mean(), half(diff),
                               n_samples, level)
