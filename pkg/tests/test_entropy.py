import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from graphldp.core import MarkedGraph
from graphldp.discretization import TaggedPartition, identity_partition, single_cell_partition
from graphldp.core import MarkSpace
from graphldp.ensembles import CountVectors, MarkLaw
from graphldp.entropy import (
    ExplicitSeed,
    PStarSeed,
    SeedError,
    binomial_rate_psi,
    count_degrees,
    count_graphs,
    d_vector,
    explicit_truncation,
    log_count_asymptotic,
    pair_law,
    pi_P,
    rate_da,
    rate_discretized,
    rate_er,
    rate_uniform,
    relative_entropy,
    s_scalar,
    s_vec,
    seed_from_dict,
    seed_pstar,
    seed_to_dict,
    shannon_entropy,
    truncated_entropy_Jh,
    type_class_size,
)

GRID = [(d, kt, kx) for d in (0.5, 1.0, 2.0) for kt in (1, 2) for kx in (1, 2)]


def grid_law(kt, kx):
    nu = [1.0] if kt == 1 else [0.3, 0.7]
    chi = [[1.0]] if kx == 1 else [[0.1, 0.2], [0.3, 0.4]]
    return MarkLaw(nu, chi)


# ------------------------------------------------------------- elementary


def test_entropy_examples():
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(math.log(2))
    assert shannon_entropy([1.0, 0.0]) == 0
    kl = 0.3 * math.log(0.6) + 0.7 * math.log(1.4)
    assert relative_entropy([0.3, 0.7], [0.5, 0.5]) == pytest.approx(kl, abs=1e-15)
    assert relative_entropy([0.5, 0.5], [1.0, 0.0]) == math.inf


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1), min_size=2, max_size=6))
def test_kl_nonnegative_and_matches_scipy(w):
    p = np.array(w) / sum(w)
    q = np.roll(p, 1)
    assert relative_entropy(p, q) >= 0
    assert relative_entropy(p, q) == pytest.approx(stats.entropy(p, q), rel=1e-12)
    assert relative_entropy(p, p) == 0


def test_s_examples():
    assert s_scalar(1) == 0.5
    assert s_scalar(0) == 0
    assert s_scalar(2) == pytest.approx(1 - math.log(2), abs=1e-15)
    assert s_vec([[1.0]]) == s_scalar(1.0)


def test_d_vector_examples():
    assert d_vector(3.0, [[1.0]]).tolist() == [[3.0]]
    P = np.triu(np.full((2, 2), 1 / 3))
    dv = d_vector(2.0, P)
    assert 2 * dv[0, 1] + dv[0, 0] + dv[1, 1] == pytest.approx(2.0)
    dv = d_vector(2.0, [[0, 1], [0, 0]])
    assert dv.tolist() == [[0, 1], [1, 0]]


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5), st.lists(st.floats(0.01, 1), min_size=3, max_size=3))
def test_pair_law_inverts_d_vector(d, w):
    P = np.zeros((2, 2))
    P[0, 0], P[0, 1], P[1, 1] = np.array(w) / sum(w)
    assert np.allclose(pair_law(d_vector(d, P)), P, atol=1e-12)


def test_psi_examples():
    d = 1.7
    assert binomial_rate_psi(d, d) == 0
    assert binomial_rate_psi(0, d) == pytest.approx(d / 2)
    assert binomial_rate_psi(2 * d, d) == pytest.approx(0.5 * (2 * d * math.log(2) - d))


# --------------------------------------------------------------- counting


def test_type_class_examples():
    assert type_class_size([2, 1]) == 3
    assert type_class_size([5]) == 1
    assert type_class_size([2, 2]) == 6


def test_count_graphs_examples():
    assert count_graphs(CountVectors.trivial(3, 2)) == 3
    assert count_graphs(CountVectors((2, 1), ((2,),))) == 9
    mixed = CountVectors((2,), ((0, 1), (1, 0)))
    same = CountVectors((2,), ((1, 0), (0, 0)))
    assert count_graphs(mixed) == 2 * count_graphs(same)


def test_count_degrees_and_asymptotics():
    cv = CountVectors((3, 3), ((2, 1), (1, 0)))
    dv = count_degrees(cv)
    assert dv.tolist() == [[4 / 6, 1 / 6], [1 / 6, 0]]
    assert dv.sum() == pytest.approx(2 * cv.num_edges / cv.n)
    # the leading-order formula tracks the exact count for a large instance
    big = CountVectors((500, 500), ((400, 300), (300, 200)))
    exact = math.log(count_graphs(big))
    assert abs(exact - log_count_asymptotic(big)) / exact < 0.02


# ------------------------------------------------------------------ seeds


def test_pstar_truncation_and_support():
    seed = seed_pstar([0.5, 0.5], [[1.0]], 1.0)
    assert all(seed.factor(*k)[1] < 1e-12 for k in seed.factor_keys())
    assert abs(seed.mean_degree() - 1.0) < 1e-9
    ex = explicit_truncation(seed)
    assert len(ex) > 1
    assert abs(float(sum(ex.weights.values())) - 1) < 1e-12


def test_pstar_sampling_isolated_root_probability():
    seed = seed_pstar([1.0], [[1.0]], 0.01)
    rng = np.random.default_rng(0)
    iso = np.mean([seed.sample(rng).root_degree == 0 for _ in range(20_000)])
    assert abs(iso - math.exp(-0.01)) < 4 * math.sqrt(0.01 / 20_000) + 1e-3


def test_pstar_delta_nu_marks_root():
    seed = seed_pstar([0.0, 1.0], [[1.0]], 2.0, theta=("a", "b"))
    rng = np.random.default_rng(1)
    assert {seed.sample(rng).root_mark for _ in range(200)} == {"b"}


def test_pstar_child_type_counts_uncorrelated():
    seed = seed_pstar([0.5, 0.5], [[0.5, 0.0], [0.0, 0.5]], 2.0)
    rng = np.random.default_rng(2)
    counts = []
    for _ in range(30_000):
        b = seed.sample(rng)
        g = b.graph
        c = [0, 0]
        for v in g.adj[0]:
            c[g.vertex_marks[v]] += 1
        counts.append(c)
    c = np.array(counts, dtype=float)
    r = np.corrcoef(c.T)[0, 1]
    assert abs(r) < 4 / math.sqrt(len(c))


def test_seed_round_trip():
    seed = seed_pstar([0.3, 0.7], [[0.2, 0.3], [0.1, 0.4]], 1.5)
    back = seed_from_dict(seed_to_dict(seed))
    assert np.allclose(back.dvec, seed.dvec) and back.theta == seed.theta
    ex = ExplicitSeed.from_trees([(MarkedGraph(2, [(0, 1)]), 1.0)], 1)
    assert seed_from_dict(seed_to_dict(ex)).weights.keys() == ex.weights.keys()


# ----------------------------------------------------------------- J_h


def test_unmarked_pstar_at_degree_one():
    J = truncated_entropy_Jh(seed_pstar([1.0], [[1.0]], 1.0), 1)
    assert abs(J.value - 0.5) < 1e-9


def test_zero_degree_seed_rejected():
    P = ExplicitSeed.from_trees([(MarkedGraph(1), 1.0)], 1)
    with pytest.raises(SeedError):
        truncated_entropy_Jh(P)


def test_two_mark_seed_value():
    d = 1.0
    seed = seed_pstar([0.5, 0.5], [[1.0]], d)
    J = truncated_entropy_Jh(seed, 1)
    assert J.value == pytest.approx(math.log(2) + s_vec(seed.dvec), abs=1e-9)


@pytest.mark.parametrize("d,kt,kx", GRID)
def test_component_identities(d, kt, kx):
    law = grid_law(kt, kx)
    seed = PStarSeed.from_law(law, d)
    J = truncated_entropy_Jh(seed, 1)
    HQ = shannon_entropy(seed.Q)
    sv = s_vec(seed.dvec)
    tol = 1e-8
    assert abs(-d / 2 * J.H_pi - (-d * HQ - sv + s_scalar(d))) < tol
    assert abs(J.H_P - J.sum_log_fact - (HQ + d * HQ + 2 * sv)) < tol


@pytest.mark.parametrize("d,kt,kx", [c for c in GRID if c[1] * c[2] <= 2])
def test_explicit_and_parametric_agree(d, kt, kx):
    seed = PStarSeed.from_law(grid_law(kt, kx), d)
    ex = explicit_truncation(seed)
    a = truncated_entropy_Jh(seed, 1).value
    b = truncated_entropy_Jh(ex, 1).value
    assert abs(a - b) < 1e-7


def test_pi_of_pstar_is_product_of_marks():
    seed = seed_pstar([0.25, 0.75], [[1.0]], 1.0, theta=("a", "b"))
    pi = pi_P(explicit_truncation(seed))
    total = sum(pi.values())
    assert total == pytest.approx(1.0, abs=1e-9)
    # every type pair pairs a root mark with a child mark; mass Q(a)Q(b) on each ordered pair
    masses = sorted(pi.values())
    want = sorted([0.25 * 0.25, 0.25 * 0.75, 0.75 * 0.25, 0.75 * 0.75])
    assert np.allclose(masses, want, atol=1e-9)


# ------------------------------------------------------------------ rates


@pytest.mark.parametrize("d,kt,kx", GRID)
def test_rates_vanish_at_pstar(d, kt, kx):
    law = grid_law(kt, kx)
    seed = PStarSeed.from_law(law, d)
    assert abs(rate_da(seed, seed.dvec, seed.Q).value) < 1e-8
    assert abs(rate_uniform(seed, d, law).value) < 1e-8
    assert abs(rate_er(seed, d, law).value) < 1e-8


def test_rate_da_infinite_cases():
    seed = seed_pstar([0.5, 0.5], [[1.0]], 1.0)
    assert rate_da(seed, seed.dvec, [0.4, 0.6]).reason == "mark_marginal_mismatch"
    assert rate_da(seed, seed.dvec * 2, seed.Q).reason == "degree_mismatch"
    assert math.isinf(rate_da(seed, seed.dvec * 2, seed.Q).value)


def test_rate_uniform_vertex_penalty():
    law = MarkLaw([0.5, 0.5], [[1.0]])
    seed = PStarSeed.from_law(law, 1.0)
    other = MarkLaw([0.2, 0.8], [[1.0]])
    r = rate_uniform(seed, 1.0, other)
    assert r.value > 0
    assert r.value == pytest.approx(relative_entropy([0.5, 0.5], [0.2, 0.8]), abs=1e-8)
    assert rate_uniform(seed, 2.0, law).reason == "degree_mismatch"


def test_rate_uniform_grows_with_chi_perturbation():
    law = MarkLaw([1.0], [[0.3, 0.2], [0.2, 0.3]])
    seed = PStarSeed.from_law(law, 2.0)
    other = MarkLaw([1.0], [[0.4, 0.1], [0.1, 0.4]])
    r = rate_uniform(seed, 2.0, other)
    want = 2.0 / 2 * relative_entropy(np.triu(law.chi_sym()), np.triu(other.chi_sym()))
    assert r.value == pytest.approx(want, abs=1e-8) and want > 0


def test_rate_er_psi():
    law = MarkLaw([0.5, 0.5], [[1.0]])
    dp, d = 1.5, 1.0
    seed = PStarSeed.from_law(law, dp)
    r = rate_er(seed, d, law)
    assert r.value == pytest.approx(0.5 * (dp * math.log(dp / d) - dp + d), abs=1e-8)
    assert rate_er(seed, dp, law).value == pytest.approx(rate_uniform(seed, dp, law).value, abs=1e-12)


def test_discretized_rate_identity_and_single_cell():
    law = MarkLaw([0.25, 0.25, 0.25, 0.25], [[1.0]], ("a", "b", "c", "d"), ("x",))
    seed = PStarSeed.from_law(MarkLaw([0.1, 0.2, 0.3, 0.4], [[1.0]], law.theta, law.xi), 1.0)
    A = identity_partition(MarkSpace.finite(law.theta))
    B = identity_partition(MarkSpace.finite(law.xi))
    assert rate_discretized(seed, 1.0, law, A, B).value == pytest.approx(rate_uniform(seed, 1.0, law).value, abs=1e-12)
    one = single_cell_partition(MarkSpace.finite(law.theta), tag="a")
    merged_seed = PStarSeed.from_law(MarkLaw([1.0], [[1.0]], ("a",), ("x",)), 1.0)
    assert abs(rate_discretized(merged_seed, 1.0, law, one, B).value) < 1e-8


def test_discretized_rate_two_cells():
    theta = ("a", "b", "c", "d")
    law = MarkLaw([0.1, 0.2, 0.3, 0.4], [[1.0]], theta, ("x",))
    A = TaggedPartition("finite", 1.0, 0.0, cells=[("a", "b"), ("c", "d")], tags=["a", "c"],
                        metric=MarkSpace.finite(theta))
    B = identity_partition(MarkSpace.finite(("x",)))
    seed = PStarSeed.from_law(MarkLaw([0.5, 0.5], [[1.0]], ("a", "c"), ("x",)), 1.0)
    want = relative_entropy([0.5, 0.5], [0.3, 0.7])
    assert rate_discretized(seed, 1.0, law, A, B).value == pytest.approx(want, abs=1e-8)
