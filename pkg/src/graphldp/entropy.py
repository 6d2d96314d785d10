"""Truncated BC entropy, rate functions, minimiser seeds and exact counts.

Seeds come in two forms.  ``ExplicitSeed`` is a finite law over depth-h
tree codes.  ``PStarSeed`` is the depth-1 Poisson-product law: the root mark
is drawn from ``Q`` and, for every child mark ``theta'`` and oriented edge
mark pair ``(x, x')``, the number of such children is Poisson with mean
``Q(theta') d_{x,x'}``, independently.  Each Poisson factor is truncated at
the smallest count whose upper tail is below ``tail_tol`` and renormalised,
so every quantity is an exact finite sum for the truncated law and the
distance to the untruncated law is reported as a remainder bound.

Natural logarithms throughout.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import special, stats

from .core import RootedBall, ball, mark_key, tree_from_code
from .empirical import (
    EmpiricalMeasure,
    degree_matrix,
    e_mu,
    edge_type_counts,
    half_type,
    mark_marginal,
    mean_degree,
    symmetry_defect,
)
from .ensembles import CountVectors, MarkLaw

TAIL_TOL = 1e-12
MARGINAL_TOL = 1e-9


class SeedError(ValueError):
    """Seed fails a precondition (inadmissible, zero degree, wrong support)."""


# ------------------------------------------------------------ basic entropies


def shannon_entropy(q) -> float:
    """``-sum q log q`` with ``0 log 0 = 0``."""
    q = np.asarray(q, dtype=float).ravel()
    if np.any(q < 0):
        raise ValueError("negative probability")
    return float(-special.xlogy(q, q).sum())


def relative_entropy(p, q) -> float:
    """``KL(p || q)``; ``inf`` when ``p`` is not absolutely continuous wrt ``q``."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch {p.shape} vs {q.shape}")
    if np.any((q == 0) & (p > 0)):
        return math.inf
    return float(special.rel_entr(p, q).sum())


def s_scalar(d: float) -> float:
    """``s(d) = d/2 - (d/2) log d`` with ``s(0) = 0``."""
    if d < 0:
        raise ValueError("negative degree")
    return 0.0 if d == 0 else d / 2 - d / 2 * math.log(d)


def s_vec(dvec) -> float:
    """Sum of ``s(d_{x,x'})`` over all ordered pairs."""
    return float(sum(s_scalar(float(v)) for v in np.asarray(dvec, dtype=float).ravel()))


def d_vector(d: float, P) -> np.ndarray:
    """Symmetric mean-degree matrix from total degree ``d`` and a law ``P`` on
    ``x <= x'`` (upper triangle of ``P`` is read; ``P[x][x]`` on the diagonal)."""
    P = np.asarray(P, dtype=float)
    if d <= 0:
        raise ValueError("d must be positive")
    upper = np.triu(P, 1) * (d / 2)
    return upper + upper.T + np.diag(np.diag(P) * d)


def pair_law(dvec) -> np.ndarray:
    """Inverse of ``d_vector``: the law on ``x <= x'`` (upper triangle)."""
    dvec = np.asarray(dvec, dtype=float)
    sym = (dvec + dvec.T) / 2
    d = sym.sum()
    return (np.triu(2 * sym, 1) + np.diag(np.diag(sym))) / d


def binomial_rate_psi(x: float, d: float) -> float:
    """``psi(x) = (x log(x/d) - x + d) / 2`` with ``psi(0) = d/2``."""
    if x < 0 or d <= 0:
        raise ValueError("need x >= 0 and d > 0")
    return 0.5 * (special.xlogy(x, x / d) - x + d)


# ----------------------------------------------------------- exact counting


def type_class_size(counts: Sequence[int], n: int | None = None) -> int:
    """Multinomial coefficient ``n! / prod counts!``."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("negative count")
    tot = sum(counts)
    if n is not None and tot != n:
        raise ValueError(f"counts sum to {tot}, not {n}")
    out = math.factorial(tot)
    for c in counts:
        out //= math.factorial(c)
    return out


def count_graphs(cv: CountVectors) -> int:
    """Number of marked graphs on ``[n]`` with vertex/edge mark counts ``cv``."""
    n, m = cv.n, cv.num_edges
    k = len(cv.xi)
    upper = [cv.m[i][j] for i in range(k) for j in range(i, k)]
    mixed = sum(cv.m[i][j] for i in range(k) for j in range(i + 1, k))
    return math.comb(math.comb(n, 2), m) * type_class_size(cv.u) * type_class_size(upper) * 2 ** mixed


def count_degrees(cv: CountVectors) -> np.ndarray:
    """Empirical mean-degree matrix of counts: ``2 m(x,x)/n`` and ``m(x,x')/n``."""
    m = np.asarray(cv.m, dtype=float)
    return (m + np.diag(np.diag(m))) / cv.n


def log_count_asymptotic(cv: CountVectors) -> float:
    """Leading-order ``log |G_{m,u}| ~ ||m|| log n + n (H(Q) + s(d))``."""
    n = cv.n
    q = np.asarray(cv.u, dtype=float) / n
    return cv.num_edges * math.log(n) + n * (shannon_entropy(q) + s_vec(count_degrees(cv)))


# ------------------------------------------------------------------- seeds


class ExplicitSeed(EmpiricalMeasure):
    """Finite-support law over depth-``h`` rooted marked trees."""

    def __post_init__(self):
        super().__post_init__()
        for c, b in self.reps.items():
            if not b.is_tree():
                raise SeedError("seed support must consist of trees")
            if max(b.dist, default=0) > self.depth:
                raise SeedError("seed tree deeper than the seed depth")

    @classmethod
    def from_trees(cls, pairs, h: int) -> "ExplicitSeed":
        """Build from ``[(tree MarkedGraph rooted at 0 | RootedBall, prob), ...]``."""
        balls, ws = [], []
        for t, p in pairs:
            b = t if isinstance(t, RootedBall) else ball(t, 0, h)
            balls.append(b)
            ws.append(p)
        base = EmpiricalMeasure.from_balls(balls, h, ws)
        return cls(h, base.weights, base.reps)

    @classmethod
    def from_codes(cls, weights: Mapping, h: int) -> "ExplicitSeed":
        acc: dict = {}
        reps: dict = {}
        for code, w in weights.items():
            b = ball(tree_from_code(code), 0, h)
            key = b.code()
            acc[key] = acc.get(key, 0) + w
            reps.setdefault(key, b)
        return cls(h, acc, reps)

    def edge_type_means(self) -> dict:
        return e_mu(self, self.depth)

    def mean_degree(self) -> float:
        return float(mean_degree(self))

    def mark_marginal(self, theta) -> np.ndarray:
        return mark_marginal(self, theta)

    def degree_matrix(self, xi) -> np.ndarray:
        return degree_matrix(self, xi)[0]


def _poisson_factor(alpha: float, tail_tol: float, n_max: int | None):
    """Truncated, renormalised Poisson(alpha) pmf and the dropped tail mass."""
    if alpha == 0:
        return np.array([1.0]), 0.0
    if n_max is None:
        n_max = int(stats.poisson.isf(tail_tol, alpha))
        while stats.poisson.sf(n_max, alpha) >= tail_tol:
            n_max += 1
    ks = np.arange(n_max + 1)
    p = stats.poisson.pmf(ks, alpha)
    tail = float(stats.poisson.sf(n_max, alpha))
    return p / p.sum(), tail


@dataclass
class PStarSeed:
    """Depth-1 Poisson-product seed with root-mark law ``Q`` and degrees ``dvec``.

    Parameters
    ----------
    Q : array over ``theta``
    dvec : symmetric ``|xi| x |xi|`` matrix of mean typed degrees
    tail_tol : per-factor Poisson tail allowed before truncation
    n_max : optional fixed per-factor cap (overrides ``tail_tol``)
    """

    Q: np.ndarray
    dvec: np.ndarray
    theta: tuple = ()
    xi: tuple = ()
    tail_tol: float = TAIL_TOL
    n_max: int | None = None
    depth: int = field(default=1, init=False)
    _factors: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.dvec = np.asarray(self.dvec, dtype=float)
        if abs(self.Q.sum() - 1) > 1e-12 or np.any(self.Q < 0):
            raise SeedError("Q is not a probability vector")
        if self.dvec.shape != (self.dvec.shape[0],) * 2 or not np.allclose(self.dvec, self.dvec.T, atol=0):
            raise SeedError("degree matrix must be square and symmetric")
        if np.any(self.dvec < 0) or self.dvec.sum() <= 0:
            raise SeedError("need nonnegative degrees with positive total")
        self.theta = tuple(self.theta) or tuple(range(len(self.Q)))
        self.xi = tuple(self.xi) or tuple(range(self.dvec.shape[0]))
        for a, x, y in self.factor_keys():
            self._factors[(a, x, y)] = _poisson_factor(self.alpha(a, x, y), self.tail_tol, self.n_max)

    @classmethod
    def from_law(cls, law: MarkLaw, d: float, **kw) -> "PStarSeed":
        """The seed with Poisson(``d``) root degree and i.i.d. ``nu``/``chi`` marks."""
        return cls(law.nu, d_vector(d, law.chi_sym()), law.theta, law.xi, **kw)

    # -- structure
    def factor_keys(self):
        kt, kx = len(self.Q), self.dvec.shape[0]
        return itertools.product(range(kt), range(kx), range(kx))

    def alpha(self, a: int, x: int, y: int) -> float:
        """Mean number of children with mark ``theta[a]``, ``xi(v,o)=xi[x]``, ``xi(o,v)=xi[y]``."""
        return float(self.Q[a] * self.dvec[x, y])

    def factor(self, a, x, y):
        return self._factors[(a, x, y)]

    @property
    def tail_mass(self) -> float:
        """Upper bound on the TV distance to the untruncated law."""
        return float(sum(t for _, t in self._factors.values()))

    def mean_degree(self) -> float:
        """Exact mean root degree of the truncated law."""
        return float(sum((np.arange(len(p)) * p).sum() for p, _ in self._factors.values()))

    def mark_marginal(self, theta=None) -> np.ndarray:
        return self.Q.copy()

    def degree_matrix(self, xi=None) -> np.ndarray:
        kx = self.dvec.shape[0]
        out = np.zeros((kx, kx))
        for (a, x, y), (p, _) in self._factors.items():
            out[x, y] += (np.arange(len(p)) * p).sum()
        return out

    def vertex_code(self, a: int) -> str:
        return "[" + mark_key(self.theta[a]) + "]"

    def edge_type_means(self) -> dict:
        """Mean edge-type counts ``e(g, g')`` with ``g = (xi(v,o), root mark)``
        and ``g' = (xi(o,v), child mark)``."""
        out = {}
        for (a, x, y), (p, _) in self._factors.items():
            mean_n = float((np.arange(len(p)) * p).sum())
            for r, qr in enumerate(self.Q):
                if qr == 0 or mean_n == 0:
                    continue
                key = (half_type(self.xi[x], self.vertex_code(r)), half_type(self.xi[y], self.vertex_code(a)))
                out[key] = out.get(key, 0.0) + qr * mean_n
        return out

    def support_size(self) -> int:
        size = 1
        for p, _ in self._factors.values():
            size *= len(p)
        return int(np.count_nonzero(self.Q)) * size

    def sample(self, rng: np.random.Generator) -> RootedBall:
        """Draw one depth-1 tree from the (truncated) seed."""
        root = int(rng.choice(len(self.Q), p=self.Q))
        children = []
        for (a, x, y), (p, _) in self._factors.items():
            k = int(rng.choice(len(p), p=p)) if len(p) > 1 else 0
            children += [(a, x, y)] * k
        return self._tree(root, children)

    def _tree(self, root: int, children) -> RootedBall:
        from .core import MarkedGraph

        marks = [self.theta[root]] + [self.theta[a] for a, _, _ in children]
        edges, em = [], {}
        for i, (_, x, y) in enumerate(children, start=1):
            edges.append((0, i))
            em[(i, 0)] = self.xi[x]
            em[(0, i)] = self.xi[y]
        return ball(MarkedGraph(len(marks), edges, marks, em), 0, 1)


def seed_pstar(nu, chi, d: float, theta=(), xi=(), **kw) -> PStarSeed:
    """Poisson-product seed from vertex law ``nu``, edge pair law ``chi`` and degree ``d``."""
    if d <= 0:
        raise SeedError("d must be positive")
    law = MarkLaw(nu, chi, tuple(theta), tuple(xi))
    return PStarSeed.from_law(law, d, **kw)


def explicit_truncation(seed: PStarSeed, n_max: int | None = None, budget: int = 200_000) -> ExplicitSeed:
    """Enumerate the support of a Poisson-product seed.

    Each Poisson factor is capped at ``n_max`` (default: the seed's own
    truncation) and renormalised; the dropped mass is ``seed.tail_mass`` for
    the default cap.
    """
    if n_max is not None and n_max != seed.n_max:
        seed = PStarSeed(seed.Q, seed.dvec, seed.theta, seed.xi, seed.tail_tol, n_max)
    if seed.support_size() > budget:
        raise SeedError(f"support of {seed.support_size()} trees exceeds the budget {budget}")
    keys = list(seed.factor_keys())
    pmfs = [seed.factor(*k)[0] for k in keys]
    weights: dict = {}
    reps: dict = {}
    for r, qr in enumerate(seed.Q):
        if qr == 0:
            continue
        for ns in itertools.product(*(range(len(p)) for p in pmfs)):
            w = qr * math.prod(p[k] for p, k in zip(pmfs, ns))
            if w == 0:
                continue
            children = [key for key, k in zip(keys, ns) for _ in range(k)]
            b = seed._tree(r, children)
            c = b.code()
            weights[c] = weights.get(c, 0.0) + w
            reps.setdefault(c, b)
    tot = sum(weights.values())
    weights = {c: w / tot for c, w in weights.items()}
    return ExplicitSeed(1, weights, reps)


# --------------------------------------------------------------- truncated J


@dataclass(frozen=True)
class JhTerms:
    """Every term of the truncated entropy and their combination."""

    h: int
    d: float
    s_d: float
    H_P: float
    H_pi: float
    sum_log_fact: float
    value: float
    remainder: float = 0.0

    def as_dict(self) -> dict:
        return {
            "h": self.h,
            "d": self.d,
            "minus_s_d": -self.s_d,
            "H_P": self.H_P,
            "minus_half_d_H_pi": -self.d / 2 * self.H_pi,
            "H_pi": self.H_pi,
            "minus_sum_E_log_fact": -self.sum_log_fact,
            "value": self.value,
            "remainder_bound": self.remainder,
        }


def pi_P(P) -> dict:
    """``pi_P(t, t') = e_P(t, t') / d`` for an admissible seed."""
    e = P.edge_type_means() if hasattr(P, "edge_type_means") else e_mu(P)
    d = float(sum(e.values()))
    if d <= 0:
        raise SeedError("mean degree is zero")
    return {k: float(v) / d for k, v in e.items()}


def _factor_entropy_terms(p: np.ndarray) -> tuple[float, float, float]:
    """Entropy, ``E[log N!]`` and mean of one truncated pmf."""
    ks = np.arange(len(p))
    return shannon_entropy(p), float((p * special.gammaln(ks + 1)).sum()), float((ks * p).sum())


def _remainder_poisson(seed: PStarSeed) -> float:
    """Bound on the change of H, E[log N!] and mean from truncating every factor.

    Past ``N >= max(4 alpha, 3)`` consecutive terms of ``p_n (alpha + n|log alpha| + n log n)``
    shrink by at least 1/2, so each tail is at most twice its first term; the
    renormalisation shifts finite sums by at most ``tail`` times their size.
    """
    out = 0.0
    for (a, x, y), (p, tail) in seed._factors.items():
        alpha = seed.alpha(a, x, y)
        if alpha == 0:
            continue
        n = len(p)
        if n < max(4 * alpha, 3):
            return math.inf
        pn = float(stats.poisson.pmf(n, alpha))
        bound_term = pn * (alpha + n * abs(math.log(alpha)) + n * math.log(n))
        h, lf, _ = _factor_entropy_terms(p)
        out += 2 * bound_term + tail * (h + lf + abs(math.log1p(-tail)) + 2)
    return out


def _jh_pstar(seed: PStarSeed, check_tol: float) -> JhTerms:
    H_P = shannon_entropy(seed.Q)
    slf = 0.0
    for (a, x, y), (p, _) in seed._factors.items():
        h, lf, _ = _factor_entropy_terms(p)
        H_P += h
        slf += lf
    e = seed.edge_type_means()
    defect = symmetry_defect(e)
    if defect > check_tol:
        raise SeedError(f"seed is not admissible (symmetry defect {defect:.3g})")
    d = float(sum(e.values()))
    pi = np.array([v / d for v in e.values()])
    H_pi = shannon_entropy(pi)
    s_d = s_scalar(d)
    value = -s_d + H_P - d / 2 * H_pi - slf
    return JhTerms(1, d, s_d, H_P, H_pi, slf, value, _remainder_poisson(seed) * (1 + d))


def _jh_explicit(P: EmpiricalMeasure, h: int, check_tol: float) -> JhTerms:
    if h > P.depth:
        raise SeedError("type depth exceeds seed depth")
    e: dict = {}
    H_P = 0.0
    slf = 0.0
    for _, w, b in P.items():
        wf = float(w)
        H_P -= wf * math.log(wf)
        for t, k in edge_type_counts(b, h).items():
            e[t] = e.get(t, 0.0) + wf * k
            slf += wf * math.lgamma(k + 1)
    defect = symmetry_defect(e)
    if defect > check_tol:
        raise SeedError(f"seed is not admissible (symmetry defect {defect:.3g})")
    d = float(sum(e.values()))
    if d <= 0:
        raise SeedError("mean degree is zero")
    H_pi = shannon_entropy(np.array(list(e.values())) / d)
    s_d = s_scalar(d)
    return JhTerms(h, d, s_d, H_P, H_pi, slf, -s_d + H_P - d / 2 * H_pi - slf, 0.0)


def truncated_entropy_Jh(P, h: int | None = None, check_tol: float = 1e-9) -> JhTerms:
    """Truncated entropy ``J_h(P)`` with its separate terms.

    Raises ``SeedError`` for inadmissible seeds and zero mean degree.
    """
    if isinstance(P, PStarSeed):
        if h not in (None, 1):
            raise SeedError("Poisson-product seeds have depth 1")
        return _jh_pstar(P, check_tol)
    return _jh_explicit(P, P.depth if h is None else h, check_tol)


# --------------------------------------------------------------------- rates


@dataclass
class RateReport:
    """A rate value, its parts and the propagated truncation bound.

    ``value`` is ``inf`` exactly when ``reason`` names the violated
    condition.
    """

    value: float
    terms: dict = field(default_factory=dict)
    bound: float = 0.0
    reason: str | None = None

    @property
    def finite(self) -> bool:
        return self.reason is None

    def as_dict(self) -> dict:
        return {"value": self.value, "reason": self.reason, "bound": self.bound, "terms": self.terms}


def _marginals(P, theta, xi):
    return np.asarray(P.mark_marginal(theta)), np.asarray(P.degree_matrix(xi)), P.mean_degree()


def _tol(P):
    return MARGINAL_TOL + (P.tail_mass * 10 if isinstance(P, PStarSeed) else 0.0)


def rate_da(P, dvec, Q, h: int | None = None, theta=None, xi=None) -> RateReport:
    """``H(Q) + s(d) - J_h(P)``, or ``inf`` when the seed's root-mark law or
    typed degrees differ from ``(Q, d)`` or the seed is inadmissible."""
    dvec = np.asarray(dvec, dtype=float)
    Q = np.asarray(Q, dtype=float)
    theta = tuple(range(len(Q))) if theta is None else tuple(theta)
    xi = tuple(range(dvec.shape[0])) if xi is None else tuple(xi)
    pm, dm, d = _marginals(P, theta, xi)
    tol = _tol(P)
    if np.max(np.abs(pm - Q)) > tol:
        return RateReport(math.inf, {"mark_marginal": pm.tolist()}, reason="mark_marginal_mismatch")
    if np.max(np.abs(dm - dvec)) > tol * max(1.0, d):
        return RateReport(math.inf, {"degree_matrix": dm.tolist()}, reason="degree_mismatch")
    if d <= 0:
        return RateReport(math.inf, reason="zero_degree")
    try:
        J = truncated_entropy_Jh(P, h)
    except SeedError as exc:
        return RateReport(math.inf, {"error": str(exc)}, reason="not_admissible")
    HQ = shannon_entropy(Q)
    sv = s_vec(dvec)
    terms = {"H_Q": HQ, "s_vec": sv, "J_h": J.value, "J_terms": J.as_dict()}
    return RateReport(HQ + sv - J.value, terms, J.remainder)


def _law_tables(law: MarkLaw):
    return np.asarray(law.nu, dtype=float), law.chi_sym()


def rate_uniform(P, d: float, law: MarkLaw, h: int | None = None) -> RateReport:
    """Rate for the uniform ``m``-edge graph with i.i.d. marks.

    Sum of the DA rate at the seed's own degrees and marks, the edge-mark
    penalty ``(d/2) KL(P(deg) || chi_sym)`` and the vertex-mark penalty
    ``KL(Pi || nu)``; ``inf`` unless the seed's mean degree equals ``d``.
    """
    nu, chi_sym = _law_tables(law)
    pm, dm, deg = _marginals(P, law.theta, law.xi)
    if abs(deg - d) > _tol(P) * max(1.0, d):
        return RateReport(math.inf, {"mean_degree": deg}, reason="degree_mismatch")
    base = rate_da(P, (dm + dm.T) / 2, pm, h, law.theta, law.xi)
    if not base.finite:
        return base
    p_deg = pair_law(dm)
    edge_pen = d / 2 * relative_entropy(np.triu(p_deg), np.triu(chi_sym))
    vert_pen = relative_entropy(pm, nu)
    terms = dict(base.terms, da_rate=base.value, edge_penalty=edge_pen, vertex_penalty=vert_pen,
                 pair_law=p_deg.tolist())
    value = base.value + edge_pen + vert_pen
    reason = None if math.isfinite(value) else "marks_not_absolutely_continuous"
    return RateReport(value, terms, base.bound, reason)


def rate_er(P, d: float, law: MarkLaw, h: int | None = None) -> RateReport:
    """Rate for ``G(n, d/n)`` with i.i.d. marks: the uniform-graph rate at the
    seed's own degree plus ``psi(deg)``."""
    deg = P.mean_degree()
    base = rate_uniform(P, deg, law, h)
    psi = binomial_rate_psi(deg, d)
    terms = dict(base.terms, uniform_rate=base.value, psi=psi)
    return RateReport(base.value + psi, terms, base.bound, base.reason)


def rate_discretized(P, d: float, law: MarkLaw, A, B, model: str = "uniform", h: int | None = None) -> RateReport:
    """Rate of the projected-mark model: ``rate_uniform``/``rate_er`` against the
    push-forwards of ``law`` through the tagged partitions ``A`` (vertices)
    and ``B`` (edge coordinates).  The seed must carry projected marks."""
    from .discretization import pushforward_law

    pushed = pushforward_law(law, A, B)
    for name, ok in (("vertex", _seed_marks_within(P, pushed.theta, True)),
                     ("edge", _seed_marks_within(P, pushed.xi, False))):
        if not ok:
            raise SeedError(f"seed carries {name} marks outside the projected alphabet")
    if model == "uniform":
        rep = rate_uniform(P, d, pushed, h)
    elif model == "er":
        rep = rate_er(P, d, pushed, h)
    else:
        raise ValueError(f"unknown model {model!r}")
    rep.terms["projected_nu"] = np.asarray(pushed.nu).tolist()
    rep.terms["projected_chi"] = np.asarray(pushed.chi).tolist()
    return rep


def _seed_marks_within(P, alphabet, vertex: bool) -> bool:
    allowed = set(alphabet)
    if isinstance(P, PStarSeed):
        return set(P.theta if vertex else P.xi) <= allowed
    for _, _, b in P.items():
        marks = b.graph.vertex_marks if vertex else b.graph.edge_marks.values()
        if not set(marks) <= allowed:
            return False
    return True


# --------------------------------------------------------------- seed files


def seed_to_dict(P) -> dict:
    if isinstance(P, PStarSeed):
        return {"kind": "pstar", "Q": P.Q.tolist(), "dvec": P.dvec.tolist(), "theta": list(P.theta),
                "xi": list(P.xi), "tail_tol": P.tail_tol}
    return {"kind": "explicit", "depth": P.depth,
            "weights": [{"code": c.decode(), "p": float(w)} for c, w in P.weights.items()]}


def seed_from_dict(doc: dict):
    if doc.get("kind") == "pstar":
        return PStarSeed(doc["Q"], doc["dvec"], tuple(doc.get("theta", ())), tuple(doc.get("xi", ())),
                         doc.get("tail_tol", TAIL_TOL))
    if doc.get("kind") == "explicit":
        return ExplicitSeed.from_codes({rec["code"]: rec["p"] for rec in doc["weights"]}, int(doc["depth"]))
    raise SeedError("seed document needs kind 'pstar' or 'explicit'")
