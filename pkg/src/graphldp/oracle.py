"""Exhaustive enumeration of tiny marked graphs and exact probabilities.

Everything here is exact: model parameters are converted to ``Fraction``
and every probability is a rational number.  Graph counts come from the
enumeration itself, never from closed-form formulas, so the results serve
as ground truth for the counting and mixture identities.
"""
from __future__ import annotations

import itertools
import math
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .core import MarkedGraph
from .ensembles import CountVectors

DEFAULT_BUDGET = 10**8


class BudgetExceededError(RuntimeError):
    """The enumeration would exceed the configured item budget."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class EnumerationDomain:
    """All marked graphs on ``[n]`` over ``theta`` and ``xi``.

    ``cv`` restricts to prescribed count vectors; ``num_edges`` restricts the
    skeleton to exactly that many edges.
    """

    n: int
    theta: tuple = (0,)
    xi: tuple = (0,)
    cv: CountVectors | None = None
    num_edges: int | None = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not 1 <= self.n <= 6:
            raise ValueError("enumeration supports 1 <= n <= 6")
        if not 1 <= len(self.theta) <= 3 or not 1 <= len(self.xi) <= 2:
            raise ValueError("enumeration supports |theta| <= 3 and |xi| <= 2")
        if self.cv is not None:
            if self.cv.n != self.n or tuple(self.cv.theta) != tuple(self.theta) or tuple(self.cv.xi) != tuple(self.xi):
                raise ValueError("count vectors do not match the domain")
            object.__setattr__(self, "num_edges", self.cv.num_edges)
        if self.size() > self.budget:
            raise BudgetExceededError(f"enumeration of {self.size()} items exceeds budget {self.budget}")

    @property
    def pairs(self) -> tuple:
        return tuple(itertools.combinations(range(self.n), 2))

    def edge_counts(self) -> range:
        N = len(self.pairs)
        if self.num_edges is None:
            return range(N + 1)
        if not 0 <= self.num_edges <= N:
            return range(0)
        return range(self.num_edges, self.num_edges + 1)

    def size(self) -> int:
        """Number of items visited (before any count-vector filter)."""
        N = len(self.pairs)
        t, x = len(self.theta), len(self.xi)
        return sum(math.comb(N, m) * t**self.n * x ** (2 * m) for m in self.edge_counts())


Raw = tuple  # (edges, vertex marks, oriented edge-mark pairs aligned with edges)


def _raw_graphs(dom: EnumerationDomain) -> Iterator[Raw]:
    """Lexicographic edge sets (by size, then combinations), then vertex
    marks, then per-edge ordered mark pairs ``(xi(u,v), xi(v,u))``."""
    pairs = dom.pairs
    marks2 = tuple(itertools.product(dom.xi, repeat=2))
    for m in dom.edge_counts():
        for edges in itertools.combinations(pairs, m):
            for vm in itertools.product(dom.theta, repeat=dom.n):
                for em in itertools.product(marks2, repeat=m):
                    yield edges, vm, em


def _raw_counts(dom: EnumerationDomain, raw: Raw) -> tuple:
    edges, vm, em = raw
    ti = {t: i for i, t in enumerate(dom.theta)}
    xj = {x: i for i, x in enumerate(dom.xi)}
    u = [0] * len(dom.theta)
    for t in vm:
        u[ti[t]] += 1
    k = len(dom.xi)
    mm = [[0] * k for _ in range(k)]
    for a, b in em:
        i, j = xj[a], xj[b]
        mm[i][j] += 1
        if i != j:
            mm[j][i] += 1
    return tuple(u), tuple(tuple(r) for r in mm)


def _filtered(dom: EnumerationDomain) -> Iterator[Raw]:
    if dom.cv is None:
        yield from _raw_graphs(dom)
        return
    target = (dom.cv.u, dom.cv.m)
    for raw in _raw_graphs(dom):
        if _raw_counts(dom, raw) == target:
            yield raw


def _to_graph(raw: Raw, n: int) -> MarkedGraph:
    edges, vm, em = raw
    marks = {}
    for (u, v), (a, b) in zip(edges, em):
        marks[(u, v)] = a
        marks[(v, u)] = b
    return MarkedGraph(n, edges, list(vm), marks)


def enumerate_marked_graphs(dom: EnumerationDomain) -> Iterator[MarkedGraph]:
    """Every marked graph of the domain exactly once, in canonical order."""
    for raw in _filtered(dom):
        yield _to_graph(raw, dom.n)


def count_by_vectors(dom: EnumerationDomain) -> Counter:
    """Enumerated number of graphs for every count-vector pair ``(u, m)``."""
    return Counter(_raw_counts(dom, raw) for raw in _raw_graphs(dom))


def enumerated_size(dom: EnumerationDomain) -> int:
    return sum(1 for _ in _filtered(dom))


# ------------------------------------------------------------------- models


@dataclass(frozen=True)
class ExactLaw:
    """Rational mark laws: ``nu`` over ``theta`` and ordered ``chi`` over ``xi^2``."""

    nu: tuple
    chi: tuple

    def __post_init__(self):
        nu = tuple(_frac(p) for p in self.nu)
        chi = tuple(tuple(_frac(p) for p in row) for row in self.chi)
        if sum(nu) != 1 or sum(sum(r) for r in chi) != 1 or min(nu) < 0 or min(min(r) for r in chi) < 0:
            raise ValueError("laws must be exact probability vectors")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "chi", chi)

    @classmethod
    def trivial(cls) -> "ExactLaw":
        return cls((1,), ((1,),))

    def chi_sorted(self, i: int, j: int) -> Fraction:
        """Probability of the unordered pair ``{i, j}`` (indices, any order)."""
        return self.chi[i][i] if i == j else self.chi[i][j] + self.chi[j][i]


@dataclass(frozen=True)
class Model:
    """``kind`` in ``{"er", "uniform", "da"}`` with ``d`` (ER), ``m``
    (uniform) or ``cv`` (DA); i.i.d. marks from ``law`` for ER/uniform."""

    kind: str
    law: ExactLaw | None = None
    d: Fraction | None = None
    m: int | None = None
    cv: CountVectors | None = None

    def __post_init__(self):
        if self.kind not in ("er", "uniform", "da"):
            raise ValueError(f"unknown model {self.kind!r}")
        if self.kind == "er" and self.d is None or self.kind == "uniform" and self.m is None:
            raise ValueError("missing model parameter")
        if self.kind == "da" and self.cv is None:
            raise ValueError("DA model needs count vectors")
        if self.d is not None:
            object.__setattr__(self, "d", _frac(self.d))
        if self.kind != "da" and self.law is None:
            object.__setattr__(self, "law", ExactLaw.trivial())


def _mark_prob(dom: EnumerationDomain, law: ExactLaw, raw: Raw) -> Fraction:
    """Probability of the marks of ``raw`` given its skeleton under i.i.d. marking:
    product of ``nu`` and, per edge, ``chi_<=`` halved for distinct marks."""
    _, vm, em = raw
    ti = {t: i for i, t in enumerate(dom.theta)}
    xj = {x: i for i, x in enumerate(dom.xi)}
    p = Fraction(1)
    for t in vm:
        p *= law.nu[ti[t]]
    for a, b in em:
        i, j = xj[a], xj[b]
        p *= law.chi[i][i] if i == j else law.chi_sorted(i, j) / 2
    return p


class _Evaluator:
    """Exact per-graph probability under a model on a domain."""

    def __init__(self, dom: EnumerationDomain, model: Model):
        self.dom, self.model = dom, model
        self.N = len(dom.pairs)
        if model.kind == "da":
            sub = EnumerationDomain(dom.n, dom.theta, dom.xi, cv=model.cv, budget=dom.budget)
            self.da_size = enumerated_size(sub)
            self.target = (model.cv.u, model.cv.m)

    def __call__(self, raw: Raw) -> Fraction:
        md, m = self.model, len(raw[0])
        if md.kind == "er":
            p = md.d / self.dom.n
            return p**m * (1 - p) ** (self.N - m) * _mark_prob(self.dom, md.law, raw)
        if md.kind == "uniform":
            if m != md.m:
                return Fraction(0)
            return Fraction(1, math.comb(self.N, m)) * _mark_prob(self.dom, md.law, raw)
        if _raw_counts(self.dom, raw) != self.target:
            return Fraction(0)
        return Fraction(1, self.da_size)


def exact_event_probability(dom: EnumerationDomain, model: Model,
                            predicate: Callable[[MarkedGraph], bool]) -> Fraction:
    """``P(predicate(G))`` in exact arithmetic, summing over the domain.

    ``predicate`` receives the marked graph; predicates on ``U(G)`` compute it
    from the graph (e.g. with ``empirical_distribution``).
    """
    ev = _Evaluator(dom, model)
    total = Fraction(0)
    for raw in _raw_graphs(dom):
        p = ev(raw)
        if p and predicate(_to_graph(raw, dom.n)):
            total += p
    return total


def total_probability(dom: EnumerationDomain, model: Model) -> Fraction:
    ev = _Evaluator(dom, model)
    return sum((ev(raw) for raw in _raw_graphs(dom)), Fraction(0))


# ------------------------------------------------------------------ mixtures


def _multinomial_prob(counts: Sequence[int], probs: Sequence[Fraction]) -> Fraction:
    out = Fraction(math.factorial(sum(counts)))
    for c, p in zip(counts, probs):
        out = out / math.factorial(c) * p**c
    return out


@dataclass(frozen=True)
class MixtureReport:
    discrepancy: Fraction
    n_graphs: int
    total_direct: Fraction
    total_mixture: Fraction

    @property
    def exact(self) -> bool:
        return self.discrepancy == 0 and self.total_direct == 1 and self.total_mixture == 1

    def as_dict(self) -> dict:
        return {"discrepancy": str(self.discrepancy), "n_graphs": self.n_graphs,
                "total_direct": str(self.total_direct), "total_mixture": str(self.total_mixture),
                "exact": self.exact}


def verify_mixture(n: int, law: ExactLaw, theta: tuple, xi: tuple, m: int | None = None,
                   d=None, budget: int = DEFAULT_BUDGET) -> MixtureReport:
    """Compare the i.i.d.-mark law with its mixture decomposition, graph by graph.

    With ``m``: uniform skeleton with ``m`` edges, decomposed as
    ``P(DA_{m_G,u_G} = G) P(L_m(X_<=) = m_G/m) P(L_n(O) = u_G/n)``.
    With ``d``: ER ``G(n, d/n)``, decomposed as ``Binomial(C(n,2), d/n)(|E|)``
    times the uniform-skeleton law above.  DA sizes come from enumeration.
    """
    if (m is None) == (d is None):
        raise ValueError("give exactly one of m (uniform) or d (ER)")
    dom = EnumerationDomain(n, theta, xi, num_edges=m, budget=budget)
    sizes = count_by_vectors(EnumerationDomain(n, theta, xi, num_edges=m, budget=budget))
    N = len(dom.pairs)
    k = len(xi)
    upper = [(i, j) for i in range(k) for j in range(i, k)]
    chi_le = [law.chi_sorted(i, j) for i, j in upper]
    direct_model = Model("er", law, d=d) if d is not None else Model("uniform", law, m=m)
    direct = _Evaluator(dom, direct_model)
    worst = Fraction(0)
    tot_d = tot_m = Fraction(0)
    count = 0
    for raw in _raw_graphs(dom):
        u, mm = _raw_counts(dom, raw)
        me = len(raw[0])
        p_dir = direct(raw)
        p_da = Fraction(1, sizes[(u, mm)])
        p_marks = _multinomial_prob([mm[i][j] for i, j in upper], chi_le) * _multinomial_prob(u, law.nu)
        p_mix = p_da * p_marks
        if d is not None:
            p = _frac(d) / n
            p_mix *= math.comb(N, me) * p**me * (1 - p) ** (N - me)
        worst = max(worst, abs(p_dir - p_mix))
        tot_d += p_dir
        tot_m += p_mix
        count += 1
    return MixtureReport(worst, count, tot_d, tot_m)


def verify_type_class(n: int, nu: Sequence, theta: tuple | None = None) -> bool:
    """``P(O = theta_vec) = P(L_n(O) = type) / |T_n(type)|`` for every ``theta_vec``.

    Type-class sizes and type probabilities are obtained by enumerating ``Theta^n``.
    """
    if n > 8:
        raise ValueError("type-class check supports n <= 8")
    nu = [_frac(p) for p in nu]
    if sum(nu) != 1:
        raise ValueError("nu must sum to 1")
    k = len(nu)
    probs: dict = {}
    for vec in itertools.product(range(k), repeat=n):
        p = Fraction(1)
        for i in vec:
            p *= nu[i]
        probs[vec] = p
    type_mass: Counter = Counter()
    type_size: Counter = Counter()
    for vec, p in probs.items():
        t = tuple(vec.count(i) for i in range(k))
        type_mass[t] += p
        type_size[t] += 1
    return all(p == type_mass[t] / type_size[t]
               for vec, p in probs.items()
               for t in [tuple(vec.count(i) for i in range(k))])


# --------------------------------------------------------------------- suite


def _count_check(n: int, nt: int, nx: int) -> dict:
    from .entropy import count_graphs

    theta, xi = tuple(range(nt)), tuple(range(nx))
    dom = EnumerationDomain(n, theta, xi)
    worst = 0
    tally = count_by_vectors(dom)
    for (u, mm), c in tally.items():
        worst = max(worst, abs(count_graphs(CountVectors(u, mm, theta, xi)) - c))
    return {"name": f"count_graphs n={n} |theta|={nt} |xi|={nx}", "discrepancy": str(worst),
            "n_vectors": len(tally), "passed": worst == 0}


def run_suite(max_n: int = 4) -> dict:
    """Counting, mixture, type-class and closed-form checks on the tiny matrix."""
    t0 = time.perf_counter()
    checks = []
    for n in range(1, max_n + 1):
        for nt in (1, 2):
            for nx in (1, 2):
                checks.append(_count_check(n, nt, nx))
    law2 = ExactLaw((Fraction(1, 3), Fraction(2, 3)), ((1,),))
    for m in (1, 2, 3):
        r = verify_mixture(3, law2, ("a", "b"), (0,), m=m)
        checks.append({"name": f"mixture uniform n=3 m={m}", **r.as_dict(), "passed": r.exact})
    r = verify_mixture(3, law2, ("a", "b"), (0,), d=Fraction(3, 2))
    checks.append({"name": "mixture er n=3 d=3/2", **r.as_dict(), "passed": r.exact})
    law_x = ExactLaw((Fraction(1, 2), Fraction(1, 2)),
                     ((Fraction(1, 5), Fraction(1, 5)), (Fraction(1, 10), Fraction(1, 2))))
    r = verify_mixture(3, law_x, ("a", "b"), ("x", "y"), m=2)
    checks.append({"name": "mixture uniform n=3 m=2 |xi|=2", **r.as_dict(), "passed": r.exact})
    for n, nu in ((2, (Fraction(1, 2),) * 2), (3, (Fraction(1, 2),) * 2), (4, (Fraction(1, 3), Fraction(2, 3))),
                  (3, (1, 0))):
        ok = verify_type_class(n, nu)
        checks.append({"name": f"type class n={n} nu={[str(p) for p in nu]}", "discrepancy": "0" if ok else "nonzero",
                       "passed": ok})
    dom = EnumerationDomain(3)
    tri = exact_event_probability(dom, Model("er", d=Fraction(3, 2)), lambda g: g.num_edges == 3)
    checks.append({"name": "er n=3 d=3/2 triangle", "value": str(tri),
                   "discrepancy": str(abs(tri - Fraction(1, 8))), "passed": tri == Fraction(1, 8)})
    return {"passed": all(c["passed"] for c in checks), "checks": checks,
            "seconds": round(time.perf_counter() - t0, 3)}
