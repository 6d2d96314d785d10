import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from graphldp.empirical import empirical_distribution
from graphldp.ensembles import CountVectors, MarkLaw, count_vectors_of, sample_er_marked
from graphldp.entropy import count_graphs
from graphldp.oracle import (
    BudgetExceededError,
    EnumerationDomain,
    ExactLaw,
    Model,
    count_by_vectors,
    enumerate_marked_graphs,
    enumerated_size,
    exact_event_probability,
    run_suite,
    total_probability,
    verify_mixture,
    verify_type_class,
)

HALF = Fraction(1, 2)
LAW2 = ExactLaw((Fraction(1, 3), Fraction(2, 3)), ((1,),))


# ------------------------------------------------------------- enumeration


def test_enumeration_examples():
    assert enumerated_size(EnumerationDomain(3, num_edges=2)) == 3
    assert enumerated_size(EnumerationDomain(3)) == 8
    cv = CountVectors((2, 1), ((2,),))
    assert enumerated_size(EnumerationDomain(3, cv.theta, cv.xi, cv=cv)) == 9


def test_enumeration_order_is_canonical_and_distinct():
    dom = EnumerationDomain(3, (0, 1), (0,))
    a = list(enumerate_marked_graphs(dom))
    assert a == list(enumerate_marked_graphs(dom))
    assert len(set(a)) == len(a) == dom.size()
    assert [g.num_edges for g in a] == sorted(g.num_edges for g in a)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("nt,nx", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_count_graphs_matches_enumeration(n, nt, nx):
    theta, xi = tuple(range(nt)), tuple(range(nx))
    tally = count_by_vectors(EnumerationDomain(n, theta, xi))
    for (u, m), c in tally.items():
        assert count_graphs(CountVectors(u, m, theta, xi)) == c


def test_domain_limits():
    with pytest.raises(ValueError):
        EnumerationDomain(7)
    with pytest.raises(ValueError):
        EnumerationDomain(3, (0, 1, 2, 3))
    with pytest.raises(BudgetExceededError):
        EnumerationDomain(6, (0, 1, 2), (0, 1), budget=1000)


# ----------------------------------------------------------- probabilities


def test_total_probability_is_one():
    dom = EnumerationDomain(3, ("a", "b"), ("x", "y"))
    law = ExactLaw((HALF, HALF), ((Fraction(1, 5), Fraction(1, 5)), (Fraction(1, 10), HALF)))
    assert total_probability(dom, Model("er", law, d=Fraction(3, 2))) == 1
    assert total_probability(EnumerationDomain(3, ("a", "b"), ("x", "y"), num_edges=2),
                             Model("uniform", law, m=2)) == 1
    assert exact_event_probability(dom, Model("er", law, d=1), lambda g: True) == 1


def test_er_triangle_probability():
    tri = exact_event_probability(EnumerationDomain(3), Model("er", d=Fraction(3, 2)), lambda g: g.num_edges == 3)
    assert tri == Fraction(1, 8)


def test_da_model_count_vector_event_is_certain():
    cv = CountVectors((2, 1), ((2,),), ("a", "b"), (0,))
    dom = EnumerationDomain(3, cv.theta, cv.xi, cv=cv)
    model = Model("da", cv=cv)
    assert exact_event_probability(dom, model, lambda g: count_vectors_of(g, cv.theta, cv.xi) == cv) == 1
    other = CountVectors((1, 2), ((2,),), ("a", "b"), (0,))
    assert exact_event_probability(dom, model, lambda g: count_vectors_of(g, cv.theta, cv.xi) == other) == 0


def test_event_on_empirical_distribution():
    # probability that every vertex has degree one under uniform m=1 on n=2
    dom = EnumerationDomain(2, num_edges=1)
    p = exact_event_probability(dom, Model("uniform", m=1),
                                lambda g: all(b.root_degree == 1 for _, _, b in empirical_distribution(g, 1).items()))
    assert p == 1


def test_er_marked_sampler_matches_oracle():
    theta = ("a", "b")
    law = ExactLaw((Fraction(1, 3), Fraction(2, 3)), ((1,),))
    dom = EnumerationDomain(3, theta, (0,))
    model = Model("er", law, d=Fraction(3, 2))
    graphs = list(enumerate_marked_graphs(dom))
    probs = np.array([float(exact_event_probability(dom, model, lambda h, g=g: h == g)) for g in graphs])
    assert math.isclose(probs.sum(), 1)
    index = {g: i for i, g in enumerate(graphs)}
    rng = np.random.default_rng(0)
    mlaw = MarkLaw([1 / 3, 2 / 3], [[1.0]], theta, (0,))
    draws = 200_000
    counts = Counter(index[sample_er_marked(3, 1.5, mlaw, rng)] for _ in range(draws))
    obs = np.array([counts.get(i, 0) for i in range(len(graphs))])
    _, p = stats.power_divergence(obs, probs * draws, lambda_="log-likelihood")
    assert p > 1e-3


# ----------------------------------------------------------------- mixtures


@pytest.mark.parametrize("m", [1, 2, 3])
def test_uniform_mixture_exact(m):
    r = verify_mixture(3, LAW2, ("a", "b"), (0,), m=m)
    assert r.discrepancy == 0 and r.exact


def test_er_mixture_exact():
    r = verify_mixture(3, LAW2, ("a", "b"), (0,), d=Fraction(3, 2))
    assert r.exact and r.n_graphs == 8 * 8


def test_mixture_with_edge_marks_and_trivial_marks():
    law = ExactLaw((HALF, HALF), ((Fraction(1, 5), Fraction(1, 5)), (Fraction(1, 10), HALF)))
    assert verify_mixture(3, law, ("a", "b"), ("x", "y"), m=2).exact
    assert verify_mixture(4, ExactLaw.trivial(), (0,), (0,), m=3).exact
    with pytest.raises(ValueError):
        verify_mixture(3, LAW2, ("a", "b"), (0,))


def test_type_class_identity():
    assert verify_type_class(2, (HALF, HALF))
    assert verify_type_class(3, (Fraction(1, 2), Fraction(1, 2)))
    assert verify_type_class(3, (1, 0))
    assert verify_type_class(4, (Fraction(1, 3), Fraction(2, 3)))


def test_exact_law_validation():
    with pytest.raises(ValueError):
        ExactLaw((HALF,), ((1,),))
    with pytest.raises(ValueError):
        Model("er")


def test_suite_passes():
    out = run_suite(3)
    assert out["passed"], [c for c in out["checks"] if not c["passed"]]
