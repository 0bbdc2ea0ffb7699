import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopeskel import (
    PointCloud,
    SkeletonGraph,
    build_filtration,
    build_hopes,
    derived_hopes,
    diagonal_gaps,
    graph_thickness,
    hopes_of_cloud,
    minimum_spanning_tree,
    prune_degree_one,
    reduced_hopes,
    simhopes,
    simplify,
)
from hopeskel.filtration import filtration_from_lists
from hopeskel.hopes import sample_segments, simplification_scale
from hopeskel.skeleton import Edge
from hopeskel.synth import CloudType, NoiseModel, make_cloud, make_pattern
from oracles import euclidean_mst_length


def _hexagon():
    ang = np.arange(6) * np.pi / 3
    return np.c_[np.cos(ang), np.sin(ang)]


def _graph(coords, pairs, kind="tree"):
    coords = np.asarray(coords, dtype=float)
    edges = tuple(Edge(u, v, float(np.linalg.norm(coords[u] - coords[v])), kind) for u, v in pairs)
    return SkeletonGraph(np.arange(len(coords)), coords, edges)


def _proper_crossings(g: SkeletonGraph) -> int:
    """Pairs of edges without a shared endpoint that meet (brute force)."""
    def orient(p, q, r):
        return np.sign((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))

    def on(p, q, r):
        return min(p[0], q[0]) - 1e-12 <= r[0] <= max(p[0], q[0]) + 1e-12 and \
            min(p[1], q[1]) - 1e-12 <= r[1] <= max(p[1], q[1]) + 1e-12

    E = list(g.edges)
    bad = 0
    for i in range(len(E)):
        for j in range(i + 1, len(E)):
            a, b = E[i], E[j]
            if {a.u, a.v} & {b.u, b.v}:
                continue
            p, q, r, s = (g.position(x) for x in (a.u, a.v, b.u, b.v))
            o1, o2, o3, o4 = orient(p, q, r), orient(p, q, s), orient(r, s, p), orient(r, s, q)
            if (o1 * o2 < 0 and o3 * o4 < 0) or (o1 == 0 and on(p, q, r)) or (o2 == 0 and on(p, q, s)) \
                    or (o3 == 0 and on(r, s, p)) or (o4 == 0 and on(r, s, q)):
                bad += 1
    return bad


# -----------------------------------------------------------------------------
# full, reduced and derived skeletons
# -----------------------------------------------------------------------------
def test_hexagon_hopes():
    h = hopes_of_cloud(PointCloud.from_points(_hexagon()))
    assert len(h.tree_edges()) == 5
    (c,) = h.critical_edges()
    assert math.isclose(c.birth, 0.5) and math.isclose(c.death, 1.0) and math.isclose(c.length, 1.0)
    assert h.betti() == 1
    assert reduced_hopes(h, 0.7).betti() == 1
    assert reduced_hopes(h, 1.01).betti() == 0     # the class is dead past its death scale
    assert reduced_hopes(h, 0.4).n_edges == 0
    d = derived_hopes(h)
    assert d.betti() == 1 and d.meta["vs"] == pytest.approx(0.5)


def test_mst_of_random_cloud_matches_kruskal():
    P = np.random.default_rng(9).uniform(size=(60, 2))
    f = build_filtration(PointCloud.from_points(P))
    assert minimum_spanning_tree(f, P).total_length() == pytest.approx(euclidean_mst_length(P), abs=1e-12)


def test_disconnected_rips_gives_forest_with_warning():
    P = np.array([[0, 0], [1, 0], [10, 0], [11, 0]], dtype=float)
    f = build_filtration(PointCloud.from_points(P), "rips", max_scale=1.0)
    with pytest.warns(RuntimeWarning):
        t = minimum_spanning_tree(f, P)
    assert t.n_edges == 2 and len(t.components()) == 2


def test_derived_without_dots_is_the_mst():
    P = np.c_[np.linspace(0, 1, 8), np.zeros(8)]
    h = hopes_of_cloud(PointCloud.from_points(P))
    d = derived_hopes(h)
    assert d.n_edges == 7 and d.betti() == 0 and d.meta["vs"] is None


def test_critical_edges_are_h1_creators():
    # a square with one diagonal filled late: one critical edge, born at 1
    f = filtration_from_lists(4, [((0, 1), 1), ((1, 2), 1), ((2, 3), 1), ((0, 3), 1), ((0, 2), 2)],
                              [((0, 1, 2), 2), ((0, 2, 3), 2)])
    h = build_hopes(f)
    (c,) = h.critical_edges()
    assert (c.birth, c.death) == (1.0, 2.0) and c.length == 2.0
    assert h.coords is None and h.betti() == 1


def test_skeleton_json_roundtrip():
    h = hopes_of_cloud(PointCloud.from_points(_hexagon()))
    back = SkeletonGraph.from_json(h.to_json({"tool": "test"}))
    assert back.n_edges == h.n_edges and back.betti() == 1
    assert np.allclose(back.coords, h.coords)
    assert [e.kind for e in back.edges] == [e.kind for e in h.edges]


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 40), st.integers(0, 10_000), st.floats(0.01, 0.8))
def test_reduced_hopes_homology_matches_complex(n, seed, alpha):
    from hopeskel import compute_persistence
    P = np.random.default_rng(seed).uniform(0, 1, (n, 2))
    f = build_filtration(PointCloud.from_points(P))
    res = compute_persistence(f)
    r = reduced_hopes(build_hopes(f, P, result=res), alpha)
    assert r.betti() == res.pd1.live_count(alpha)
    comps = sum(1 for b, d, m in res.pd0.dots for _ in range(m) if b <= alpha < d)
    assert len(r.components()) == comps


# -----------------------------------------------------------------------------
# pruning and simplification
# -----------------------------------------------------------------------------
def test_prune_path_keeps_one_vertex():
    g = _graph([[i, 0] for i in range(5)], [(0, 1), (1, 2), (2, 3), (3, 4)])
    p = prune_degree_one(g)
    assert p.ids.tolist() == [4] and p.n_edges == 0


def test_prune_keeps_cycles_and_removes_hairs():
    coords = [[0, 0], [1, 0], [1, 1], [0, 1], [2, 0], [3, 0]]
    g = _graph(coords, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 4), (4, 5)])
    p = prune_degree_one(g)
    assert sorted(p.ids.tolist()) == [0, 1, 2, 3] and p.betti() == 1


def test_simplify_never_collapses_a_triangle():
    g = _graph([[0, 0], [0.1, 0], [0.05, 0.08]], [(0, 1), (1, 2), (0, 2)])
    s = simplify(g, 1.0)
    assert s.n_edges == 3 and s.betti() == 1


def test_simplify_keeps_the_branch_vertex_in_place():
    coords = [[0, 0], [0.1, 0], [-1, 0.5], [-1, -0.5], [1, 0]]
    g = _graph(coords, [(0, 1), (0, 2), (0, 3), (1, 4)])
    s = simplify(g, 0.2)
    assert s.n_vertices == 4 and s.n_edges == 3
    assert any(np.allclose(s.position(v), [0, 0]) for v in s.ids)


def test_simplify_merges_two_degree_two_vertices_at_the_midpoint():
    g = _graph([[0, 0], [1, 0], [1.1, 0], [2.1, 0.5]], [(0, 1), (1, 2), (2, 3)])
    s = simplify(g, 0.2)
    assert s.n_vertices == 3
    assert any(np.allclose(s.position(v), [1.05, 0]) for v in s.ids)


def test_simplify_rejects_multigraphs():
    g = SkeletonGraph(np.arange(2), np.array([[0, 0], [1, 0.0]]),
                      (Edge(0, 1, 1.0), Edge(0, 1, 1.0, "critical", 0.5, 1.0)))
    with pytest.raises(ValueError):
        simplify(g, 0.1)


def test_simplify_keeps_edge_labels():
    g = _graph([[0, 0], [0.05, 0], [1, 0], [1, 1]], [(0, 1), (1, 2), (2, 3)])
    g = SkeletonGraph(g.ids, g.coords, g.edges[:2] + (Edge(2, 3, 1.0, "critical", 0.5, 0.9),))
    s = simplify(g, 0.1)
    assert [(e.kind, e.birth) for e in s.edges if e.kind == "critical"] == [("critical", 0.5)]


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["hex:1", "hex:2", "grid:2,2", "wheel:4"]), st.integers(0, 1000),
       st.sampled_from(["uniform:0.1", "gaussian:0.05", "none"]))
def test_simhopes_pipeline_is_plane_and_keeps_homology(pat, seed, noise):
    c = make_cloud(CloudType(pat, NoiseModel.parse(noise)), seed, 0, 0, density=40).cloud()
    h = hopes_of_cloud(c)
    gd = diagonal_gaps(h.meta["_pd1"])
    d = derived_hopes(h, gd)
    s = simhopes(h, gd)
    assert s.betti() == d.betti()
    assert len(s.components()) == len(d.components())
    assert _proper_crossings(s) == 0
    assert s.n_vertices <= d.n_vertices


def test_simhopes_of_noiseless_hexagon_cloud():
    c = make_cloud(CloudType("hex:1", NoiseModel()), 1, 0, 0).cloud()
    h = hopes_of_cloud(c)
    gd = diagonal_gaps(h.meta["_pd1"])
    s = simhopes(h, gd)
    assert s.provenance == "simhopes" and s.betti() == 1
    assert s.n_vertices < 20
    ds = gd.ds(1)
    top = [e.death for e in h.critical_edges() if e.death - e.birth >= ds - 1e-9]
    assert simplification_scale(gd) == max(top)


# -----------------------------------------------------------------------------
# thickness
# -----------------------------------------------------------------------------
def _polyline(points):
    P = np.asarray(points, dtype=float)
    return P, np.roll(P, -1, axis=0)


def test_circle_has_zero_thickness():
    t = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    rep = graph_thickness(_polyline(np.c_[np.cos(t), np.sin(t)]), sample_density=200)
    assert rep.theta == 0.0
    assert len(rep.deaths) == 1 and rep.deaths[0] == pytest.approx(1.0, abs=0.01)


def test_cardioid_has_zero_thickness():
    # non-convex heart-like cycle: no hole is born after scale 0
    t = np.linspace(0, 2 * np.pi, 600, endpoint=False)
    r = 1 - np.cos(t)
    rep = graph_thickness(_polyline(np.c_[r * np.cos(t), r * np.sin(t)]), sample_density=200)
    assert rep.theta == 0.0 and len(rep.deaths) == 1


def _peanut(n=400):
    # outer arcs of two unit circles centred at (+-1.2, 0), joined where |y| = 0.5
    phi0 = math.asin(0.5)
    right = np.linspace(-(math.pi - phi0), math.pi - phi0, n)
    left = right + math.pi
    R = np.c_[1.2 + np.cos(right), np.sin(right)]
    L = np.c_[-1.2 + np.cos(left), np.sin(left)]
    return np.vstack([R, L])


def test_peanut_has_positive_thickness():
    rep = graph_thickness(_polyline(_peanut()), sample_density=200, check_convergence=True)
    assert len(rep.deaths) == 1
    assert rep.theta == pytest.approx(0.5, abs=0.03)
    assert rep.converged


def test_hexagon_pattern_thickness():
    rep = graph_thickness(make_pattern("hex:2"), sample_density=200)
    assert rep.theta == 0.0
    assert rep.deaths == pytest.approx([math.sqrt(3) / 2] * 2, abs=0.01)


def test_sample_segments_spacing():
    A, B = np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]])
    P = sample_segments(A, B, 10)
    assert len(P) == 11 and np.allclose(np.diff(P[:, 0]), 0.1)
