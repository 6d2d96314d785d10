import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from graphldp.core import MarkedGraph, NotATreeError, ball
from graphldp.empirical import (
    EmpiricalMeasure,
    check_admissible,
    check_unimodular_mc,
    coupled_bl_bound,
    degree_matrix,
    e_mu,
    edge_type_counts,
    empirical_distribution,
    mark_marginal,
    mean_degree,
    per_vertex_distances,
    symmetry_defect,
    tv_distance,
)
from graphldp.ensembles import MarkLaw, sample_er, sample_er_marked
from graphldp.entropy import ExplicitSeed, seed_pstar
from graphldp.rng import make_rng
from graphldp.ugwt import sample_pstar_tree

from conftest import marked_graphs


def cycle(n, marks=None):
    return MarkedGraph(n, [(i, (i + 1) % n) for i in range(n)], marks)


def test_cycle_is_single_atom():
    mu = empirical_distribution(cycle(7), 1)
    assert len(mu) == 1 and list(mu.weights.values()) == [1]


def test_path_three_vertices():
    mu = empirical_distribution(MarkedGraph(3, [(0, 1), (1, 2)]), 1)
    assert sorted(mu.weights.values()) == [Fraction(1, 3), Fraction(2, 3)]
    heavy = max(mu.weights, key=mu.weights.get)
    assert mu.reps[heavy].root_degree == 1


def test_isolated_root_weight_er():
    g = sample_er(2000, 1.0, make_rng(5))
    mu = empirical_distribution(g, 1)
    iso = sum(float(w) for _, w, b in mu.items() if b.root_degree == 0)
    assert abs(iso - math.exp(-1)) < 0.05


@settings(max_examples=80, deadline=None)
@given(marked_graphs(max_n=9))
def test_weights_sum_to_one_exactly_and_degree_identity(g):
    mu = empirical_distribution(g, 1)
    assert sum(mu.weights.values()) == 1
    assert mean_degree(mu) == Fraction(2 * g.num_edges, g.n)


def test_full_component_mode():
    g = MarkedGraph(4, [(0, 1), (2, 3)])
    mu = empirical_distribution(g, 1, full_component=True)
    assert len(mu) == 1


def test_mark_marginals():
    g = MarkedGraph(2, [], ["a", "b"])
    mu = empirical_distribution(g, 1)
    assert mark_marginal(mu, ("a", "b")).tolist() == [0.5, 0.5]
    single = empirical_distribution(MarkedGraph(1, [], ["b"]), 0)
    assert mark_marginal(single, ("a", "b")).tolist() == [0.0, 1.0]


def test_mark_marginal_lln():
    law = MarkLaw([0.3, 0.7], [[1.0]], ("a", "b"))
    g = sample_er_marked(10_000, 2.0, law, make_rng(2))
    p = mark_marginal(empirical_distribution(g, 1), law.theta)
    sd = math.sqrt(0.3 * 0.7 / g.n)
    assert abs(p[0] - 0.3) < 4 * sd


def test_degree_matrix_examples():
    M, d = degree_matrix(empirical_distribution(cycle(6), 1), (0,))
    assert d == 2 and M[0, 0] == 2
    M, d = degree_matrix(empirical_distribution(MarkedGraph(4), 1), (0,))
    assert d == 0
    g = sample_er(10_000, 2.0, make_rng(6))
    _, d = degree_matrix(empirical_distribution(g, 1), (0,))
    assert abs(d - 2) < 0.1


def test_degree_matrix_orientation():
    g = MarkedGraph(2, [(0, 1)], edge_marks={(0, 1): "x", (1, 0): "y"})
    M, _ = degree_matrix(empirical_distribution(g, 1), ("x", "y"))
    # root 0 sees xi(v,o)=y, xi(o,v)=x; root 1 the reverse
    assert M[1, 0] == 0.5 and M[0, 1] == 0.5


# -------------------------------------------------------------- edge types


def test_star_single_type():
    g = MarkedGraph(5, [(0, i) for i in range(1, 5)])
    c = edge_type_counts(ball(g, 0, 1), 1)
    assert len(c) == 1 and list(c.values()) == [4]
    assert edge_type_counts(ball(MarkedGraph(1), 0, 1), 1) == {}


def test_edge_types_reject_cycles():
    with pytest.raises(NotATreeError):
        edge_type_counts(ball(cycle(3), 0, 1), 1)


def test_e_mu_total_mass_is_mean_degree_gw():
    law = MarkLaw.trivial()
    rng = make_rng(3)
    trees = [sample_pstar_tree(law, 2.0, 1, rng) for _ in range(100_000)]
    mu = EmpiricalMeasure.from_balls(trees, 1)
    assert abs(sum(float(v) for v in e_mu(mu).values()) - 2.0) < 0.05


@settings(max_examples=60, deadline=None)
@given(marked_graphs(max_n=8))
def test_e_mu_mass_equals_mean_degree_on_forests(g):
    if not g.is_forest():
        return
    mu = empirical_distribution(g, 2)
    assert abs(sum(e_mu(mu).values()) - mean_degree(mu)) < 1e-10
    # finite forests are unimodular, so their types are symmetric
    assert symmetry_defect(e_mu(mu)) == 0


def test_pstar_truncated_seed_is_admissible():
    seed = seed_pstar([1.0], [[1.0]], 1.0, n_max=30)
    defect, ok = check_admissible(seed)
    assert defect < 1e-9 and ok


def test_single_symmetric_type_seed():
    edge = MarkedGraph(2, [(0, 1)])
    P = ExplicitSeed.from_trees([(edge, 1.0)], 1)
    assert check_admissible(P) == (0.0, True)


def test_asymmetric_seed_defect_matches_hand_computation():
    # root a with one b-child (p=1/2), isolated root b (p=1/2):
    # e((a-side),(b-side)) = 1/2, the reverse pair has mass 0
    g = MarkedGraph(2, [(0, 1)], ["a", "b"])
    P = ExplicitSeed.from_trees([(g, 0.5), (MarkedGraph(1, [], ["b"]), 0.5)], 1)
    defect, ok = check_admissible(P)
    assert defect == pytest.approx(0.5) and not ok


# --------------------------------------------------------------- distances


def test_tv_identical_and_disjoint():
    a = empirical_distribution(cycle(5), 1)
    b = empirical_distribution(MarkedGraph(3), 1)
    assert tv_distance(a, a) == 0
    assert tv_distance(a, b) == 1
    with pytest.raises(ValueError):
        tv_distance(a, empirical_distribution(cycle(5), 2))


def test_tv_two_er_samples():
    a = empirical_distribution(sample_er(2000, 2.0, make_rng(1)), 1)
    b = empirical_distribution(sample_er(2000, 2.0, make_rng(2)), 1)
    assert tv_distance(a, b) < 0.1


def test_coupled_bound_same_graph():
    g = sample_er(300, 2.0, make_rng(0))
    for h in (1, 2):
        assert coupled_bl_bound(g, g, h) <= 1 / (1 + h)


def test_coupled_bound_mark_perturbation():
    rng = make_rng(1)
    g = sample_er(200, 2.0, rng)
    vm = rng.normal(size=g.n)
    em = {k: float(rng.normal()) for k in g.edge_marks}
    g1 = g.with_marks(vm.tolist(), em)
    eps = 0.03
    g2 = g.with_marks((vm + rng.uniform(-eps, eps, g.n)).tolist(),
                      {k: v + float(rng.uniform(-eps, eps)) for k, v in em.items()})
    assert coupled_bl_bound(g1, g2, 2) <= 1 / 3 + eps


def test_coupled_bound_is_mean_of_per_vertex_distances():
    rng = make_rng(4)
    g = sample_er(100, 2.0, rng)
    g1 = g.with_marks(rng.normal(size=g.n).tolist())
    g2 = g.with_marks(np.round(np.asarray(g1.vertex_marks), 1).tolist())
    per = per_vertex_distances(g1, g2, 1)
    assert coupled_bl_bound(g1, g2, 1) == pytest.approx(per.mean())
    assert np.all(per <= 0.5 + 0.05 + 1e-12)


# ----------------------------------------------------------- unimodularity


def test_symmetric_functional_exact_balance():
    f = lambda g, a, b: float(g.degree(a) + g.degree(b))  # noqa: E731
    rep = check_unimodular_mc(lambda r: sample_pstar_tree(MarkLaw.trivial(), 1.5, 3, r), f, 500, make_rng(0))
    assert rep.diff == 0 and rep.consistent


def test_degree_one_indicator_on_gw_trees():
    f = lambda g, a, b: float(a != b and g.degree(b) == 1)  # noqa: E731
    rep = check_unimodular_mc(lambda r: sample_pstar_tree(MarkLaw.trivial(), 1.0, 3, r), f, 100_000, make_rng(1))
    assert abs(rep.lhs - rep.rhs) <= rep.lhs_ci + rep.rhs_ci


def test_star_rooted_at_centre_violates_mass_transport():
    star = MarkedGraph(5, [(0, i) for i in range(1, 5)])
    f = lambda g, a, b: float(a != b and g.degree(b) == 1)  # noqa: E731
    rep = check_unimodular_mc(lambda r: star, f, 50, make_rng(0))
    assert rep.lhs == 4 and rep.rhs == 0 and not rep.consistent
