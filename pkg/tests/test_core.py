import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphldp.core import (
    BallTooLargeError,
    GraphError,
    MarkedGraph,
    MarkSpace,
    ball,
    ball_from_graph,
    canonical_code,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    local_distance,
    save_graph,
    tree_from_code,
)
from graphldp.ensembles import sample_er

from conftest import marked_graphs, random_graph, random_perm, random_tree


def bfs_dist(g, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        v = q.popleft()
        for u in g.adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def floyd(g):
    n = g.n
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0)
    for u, v in g.edges:
        D[u, v] = D[v, u] = 1
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


# ------------------------------------------------------------------ graphs


def test_graph_rejects_loops_and_duplicates():
    with pytest.raises(GraphError):
        MarkedGraph(3, [(1, 1)])
    with pytest.raises(GraphError):
        MarkedGraph(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        MarkedGraph(2, [(0, 1)], edge_marks={(0, 1): "a"})


def test_graph_json_round_trip(tmp_path):
    g = MarkedGraph(3, [(0, 1), (1, 2)], ["a", "b", "a"], {(0, 1): 1, (1, 0): 2, (1, 2): 0, (2, 1): 0})
    assert graph_from_dict(graph_to_dict(g)) == g
    p = tmp_path / "g.json"
    save_graph(g, p)
    assert load_graph(p) == g


def test_graph_json_rejects_duplicate_edges():
    doc = {"n": 2, "edges": [[0, 1], [1, 0]]}
    with pytest.raises(GraphError):
        graph_from_dict(doc)


# ------------------------------------------------------------------- balls


def test_depth_zero_ball_is_root():
    g = MarkedGraph(3, [(0, 1), (1, 2), (0, 2)], ["a", "b", "c"])
    for v in range(3):
        b = ball(g, v, 0)
        assert b.size == 1 and b.root_mark == g.vertex_marks[v]


def test_path_ball_keeps_both_orientations():
    g = MarkedGraph(3, [(0, 1), (1, 2)], edge_marks={(0, 1): "x", (1, 0): "y", (1, 2): "z", (2, 1): "w"})
    b = ball(g, 0, 1)
    assert b.size == 2
    assert b.graph.edge_marks[(0, 1)] == "x" and b.graph.edge_marks[(1, 0)] == "y"


def test_ball_matches_all_pairs_shortest_paths():
    g = sample_er(50, 2.0, np.random.default_rng(4))
    D = floyd(g)
    for v in range(g.n):
        b = ball(g, v, 2)
        assert set(b.origin) == set(np.flatnonzero(D[v] <= 2).tolist())
        assert all(D[v, o] == d for o, d in zip(b.origin, b.dist))


@settings(max_examples=150, deadline=None)
@given(marked_graphs(max_n=9), st.integers(0, 4), st.data())
def test_ball_vertex_set_equals_bfs_oracle(g, h, data):
    v = data.draw(st.integers(0, g.n - 1))
    want = {u for u, d in bfs_dist(g, v).items() if d <= h}
    assert set(ball(g, v, h).origin) == want


def test_ball_completeness_flag():
    g = MarkedGraph(4, [(0, 1), (1, 2), (2, 3)])
    assert not ball(g, 0, 2).complete
    assert ball(g, 0, 3).complete
    assert ball(g, 1, 2).complete


# ------------------------------------------------------------------- codes


def star(k, root_mark="a", leaf_mark="b"):
    return MarkedGraph(k + 1, [(0, i) for i in range(1, k + 1)], [root_mark] + [leaf_mark] * k)


def test_star_relabelings_share_code():
    g = star(4)
    assert canonical_code(ball(g, 0, 1)) == canonical_code(ball(g.relabel([0, 3, 1, 4, 2]), 0, 1))


def test_root_mark_distinguishes_stars():
    assert canonical_code(ball(star(3, "a"), 0, 1)) != canonical_code(ball(star(3, "b"), 0, 1))


def _rooted_trees_on_4():
    pairs = list(itertools.combinations(range(4), 2))
    for edges in itertools.combinations(pairs, 3):
        g = MarkedGraph(4, edges)
        if g.is_forest():
            yield edges


def _isomorphic(g1, g2):
    for rest in itertools.permutations(range(1, g1.n)):
        perm = (0,) + rest
        if g1.relabel(perm) == g2:
            return True
    return False


def test_code_count_equals_bruteforce_isomorphism_classes_for_4_vertex_trees():
    graphs = []
    for edges in _rooted_trees_on_4():
        for vm in itertools.product("ab", repeat=4):
            graphs.append(MarkedGraph(4, edges, list(vm)))
    codes = {canonical_code(ball_from_graph(g)) for g in graphs}
    classes = []
    for g in graphs:
        if not any(_isomorphic(g, r) for r in classes):
            classes.append(g)
    assert len(codes) == len(classes)


def test_code_invariance_on_ten_thousand_random_instances():
    rng = np.random.default_rng(7)
    for i in range(10_000):
        n = int(rng.integers(1, 9))
        if i % 2:
            g = random_tree(rng, n, emarks=(0, 1))
        else:
            g = random_graph(rng, n, 0.4, emarks=(0, 1))
        h = int(rng.integers(0, 4))
        b = ball(g, 0, h)
        gp = g.relabel(random_perm(rng, n))
        assert canonical_code(b) == canonical_code(ball(gp, 0, h))


@settings(max_examples=200, deadline=None)
@given(marked_graphs(max_n=7), st.data())
def test_codes_separate_non_isomorphic_balls(g, data):
    """Equal codes imply a root-preserving marked isomorphism (brute force)."""
    h = data.draw(st.integers(1, 3))
    other = data.draw(marked_graphs(max_n=7))
    b1, b2 = ball(g, 0, h), ball(other, 0, h)
    if canonical_code(b1) == canonical_code(b2):
        assert b1.size == b2.size and _isomorphic(b1.graph, b2.graph)


def test_tree_code_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(300):
        g = random_tree(rng, int(rng.integers(1, 10)), emarks=("x", "y"))
        c = canonical_code(ball_from_graph(g))
        assert canonical_code(ball_from_graph(tree_from_code(c))) == c


def test_code_cap_raises():
    g = star(10)
    with pytest.raises(BallTooLargeError):
        canonical_code(ball(g, 0, 1), cap=5)


# ---------------------------------------------------------------- distance


def test_identical_balls_at_finite_truncation():
    g = sample_er(40, 2.5, np.random.default_rng(2))
    b = ball(g, 0, 4)
    if not b.complete:
        assert local_distance(b, b, 4) == pytest.approx(1 / 5)


def test_complete_identical_balls_have_zero_distance():
    g = MarkedGraph(3, [(0, 1), (1, 2)])
    b = ball(g, 0, 5)
    assert b.complete and local_distance(b, b, 4) == 0.0


def test_root_mark_perturbation_gives_its_size():
    eps = 0.05
    g1 = MarkedGraph(3, [(0, 1), (0, 2)], [0.0, 1.0, 2.0], {k: 0.0 for k in [(0, 1), (1, 0), (0, 2), (2, 0)]})
    g2 = g1.with_marks(vertex_marks=[eps, 1.0, 2.0])
    d = local_distance(ball(g1, 0, 4), ball(g2, 0, 4), 4)
    assert d == pytest.approx(eps)


def test_first_mismatch_radius():
    # paths agree to radius 2 around the root, differ at radius 3
    g1 = MarkedGraph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    g2 = MarkedGraph(6, [(0, 1), (1, 2), (2, 3), (2, 4), (4, 5)])
    d = local_distance(ball(g1, 0, 4), ball(g2, 0, 4), 4)
    assert d == pytest.approx(1 / (1 + 2))


def _real_tree(rng, n):
    g = random_tree(rng, n)
    vm = rng.normal(size=n).tolist()
    em = {k: float(rng.normal()) for k in g.edge_marks}
    return g.with_marks(vm, em)


def test_local_distance_symmetry_and_triangle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        gs = [_real_tree(rng, int(rng.integers(1, 6))) for _ in range(3)]
        bs = [ball(g, 0, 3) for g in gs]
        d = lambda a, b: local_distance(a, b, 3)  # noqa: E731
        assert d(bs[0], bs[1]) == d(bs[1], bs[0])
        assert d(bs[0], bs[2]) <= d(bs[0], bs[1]) + d(bs[1], bs[2]) + 1e-12


def test_mark_space_distance():
    sp = MarkSpace.finite(["a", "b", "c"], table=((0, 1, 2), (1, 0, 1), (2, 1, 0)))
    assert sp.distance("a", "c") == 2
    assert MarkSpace.real().distance(1.0, 3.5) == 2.5
