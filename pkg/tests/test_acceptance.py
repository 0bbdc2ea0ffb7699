"""
Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines are repeated
in the terminal summary) or as a script: ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time

import networkx as nx
import numpy as np
import pytest

from conftest import record
from hopeskel import (
    PersistenceDiagram,
    PointCloud,
    bottleneck_distance,
    build_filtration,
    build_hopes,
    compute_persistence,
    derived_hopes,
    diagonal_gaps,
    vertical_gaps,
    hopes_of_cloud,
    is_homeomorphic,
    make_pattern,
    minimum_spanning_tree,
    prune_degree_one,
    reduced_hopes,
    rms_distance,
    simplify,
    graph_thickness,
)
from hopeskel.baselines import MAPPER_EPS_GRID, MAPPER_T_GRID, REEB_ALPHA_GRID, MapperConfig, alpha_reeb, mapper
from hopeskel.evaluate import directed_hausdorff_segments, hausdorff_cloud_graph
from hopeskel.hopes import simplification_scale
from hopeskel.synth import CloudType, NoiseModel, make_cloud
from oracles import (
    betti1_of_complex,
    bottleneck_brute,
    euclidean_mst_length,
    is_admissible,
    kruskal_length,
    shortest_admissible,
)


def _random_clouds(count: int, n_max: int, seed: int, n_min: int = 3):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        yield rng, rng.uniform(0.0, 1.0, (n, 2))


def _scales(f, rng, count: int = 5) -> np.ndarray:
    top = max(s.value for s in f.simplices)
    return rng.uniform(0.0, 1.1 * top, count)


def _prefix(f, alpha):
    pre = f.prefix(alpha)
    edges = [s.vertices for s in pre if s.dim == 1]
    tris = [s.vertices for s in pre if s.dim == 2]
    lengths = [2.0 * s.value for s in pre if s.dim == 1]
    return edges, tris, lengths


def _filtrations(points):
    """Alpha filtration of the points and Rips filtration of their distance matrix."""
    cloud = PointCloud.from_points(points)
    yield build_filtration(cloud, "alpha"), points
    yield build_filtration(PointCloud.from_matrix(cloud.distances()), "rips"), points


# -----------------------------------------------------------------------------
# 1. live dots of PD1 versus Z/2 Betti numbers of prefix complexes
# -----------------------------------------------------------------------------
def test_criterion_01_persistence_oracle():
    t0 = time.perf_counter()
    checks = bad = 0
    for rng, P in _random_clouds(200, 12, seed=101):
        for f, _ in _filtrations(P):
            pd1 = compute_persistence(f).pd1
            for a in _scales(f, rng):
                edges, tris, _ = _prefix(f, a)
                checks += 1
                bad += pd1.live_count(a) != betti1_of_complex(f.n_vertices, edges, tris)
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 60
    record(1, ok, f"{checks} (cloud, filtration, scale) checks, {bad} mismatches, {dt:.1f} s (< 60 s)")
    assert ok


# -----------------------------------------------------------------------------
# 2. reduced HoPeS is a shortest homology-preserving spanning subgraph
# -----------------------------------------------------------------------------
def test_criterion_02_optimality():
    t0 = time.perf_counter()
    checks = worse = not_admissible = 0
    for rng, P in _random_clouds(50, 8, seed=202):
        for f, coords in _filtrations(P):
            h = build_hopes(f, coords)
            for a in _scales(f, rng):
                edges, tris, lengths = _prefix(f, a)
                r = reduced_hopes(h, a)
                index = {e: i for i, e in enumerate(edges)}
                chosen = [index[e.key] for e in r.edges]
                checks += 1
                not_admissible += not is_admissible(f.n_vertices, edges, tris, chosen)
                shorter = shortest_admissible(f.n_vertices, edges, lengths, tris, r.total_length(), tol=1e-9)
                worse += shorter is not None
    dt = time.perf_counter() - t0
    ok = worse == 0 and not_admissible == 0 and dt < 600
    record(2, ok, f"{checks} checks: {worse} shorter admissible graphs, {not_admissible} inadmissible skeletons, "
                  f"{dt:.1f} s (< 600 s)")
    assert ok


# -----------------------------------------------------------------------------
# 3. length of reduced HoPeS = MST(C; alpha) + 2 * sum of live births
# -----------------------------------------------------------------------------
def test_criterion_03_length_identity():
    worst = 0.0
    checks = 0
    for rng, P in _random_clouds(200, 12, seed=101):
        for f, coords in _filtrations(P):
            res = compute_persistence(f)
            h = build_hopes(f, coords, result=res)
            for a in _scales(f, rng):
                lhs = reduced_hopes(h, a).total_length()
                mst = minimum_spanning_tree(f, coords, alpha=a, result=res).total_length()
                births = sum(b * m for b, d, m in res.pd1.dots if b <= a < d)
                worst = max(worst, abs(lhs - (mst + 2.0 * births)))
                checks += 1
    ok = worst <= 1e-9
    record(3, ok, f"{checks} checks, max |difference| = {worst:.3g} (<= 1e-9)")
    assert ok


# -----------------------------------------------------------------------------
# 4. HoPeS tree length equals Kruskal
# -----------------------------------------------------------------------------
def test_criterion_04_mst_oracle():
    bad = 0
    worst = 0.0
    for _, P in _random_clouds(100, 40, seed=404, n_min=2):
        ref = euclidean_mst_length(P)
        for f, coords in _filtrations(P):
            tree = math.fsum(e.length for e in build_hopes(f, coords).tree_edges())
            worst = max(worst, abs(tree - ref))
            # Kruskal directly on the filtration lengths
            lens = [(2.0 * s.value, *s.vertices) for s in f.simplices if s.dim == 1]
            bad += tree != kruskal_length(f.n_vertices, lens)
    ok = bad == 0 and worst <= 1e-12
    record(4, ok, f"100 clouds x 2 filtrations: {bad} exact mismatches with Kruskal, "
                  f"max deviation from the Euclidean MST {worst:.3g}")
    assert ok


# -----------------------------------------------------------------------------
# 5. stability of PD1 under bounded perturbations
# -----------------------------------------------------------------------------
def test_criterion_05_stability():
    rng = np.random.default_rng(505)
    patterns = ["hex:1", "wheel:4", "grid:2,2", "hex:2", "wheel:3"]
    worst_slack = -math.inf
    fails = 0
    for trial in range(50):
        ct = CloudType(patterns[trial % len(patterns)], NoiseModel("uniform", 0.05))
        P = make_cloud(ct, 505, trial % len(patterns), trial, density=60).points
        delta = float(rng.uniform(0.001, 0.05))
        ang = rng.uniform(0, 2 * np.pi, len(P))
        rad = delta * np.sqrt(rng.uniform(0, 1, len(P)))
        Q = P + np.c_[rad * np.cos(ang), rad * np.sin(ang)]
        d = bottleneck_distance(hopes_of_cloud(PointCloud.from_points(P)).meta["_pd1"],
                                hopes_of_cloud(PointCloud.from_points(Q)).meta["_pd1"])
        worst_slack = max(worst_slack, d - delta)
        fails += d > delta + 1e-6
    ok = fails == 0
    record(5, ok, f"50 trials, {fails} violations, max d_B - delta = {worst_slack:.4g} (<= 1e-6)")
    assert ok


# -----------------------------------------------------------------------------
# 6. bottleneck distance versus exhaustive matching
# -----------------------------------------------------------------------------
def _random_diagram(rng):
    k = int(rng.integers(0, 6))
    pairs = []
    for _ in range(k):
        b = float(rng.uniform(0, 1))
        pairs.append((b, b + float(rng.uniform(0.001, 1))))
    if rng.uniform() < 0.3 and pairs:
        pairs[0] = (pairs[0][0], math.inf)
    return pairs


def test_criterion_06_bottleneck_oracle():
    rng = np.random.default_rng(606)
    worst = 0.0
    done = 0
    while done < 100:
        A, B = _random_diagram(rng), _random_diagram(rng)
        if sum(map(lambda p: math.isinf(p[1]), A)) != sum(map(lambda p: math.isinf(p[1]), B)):
            continue
        got = bottleneck_distance(PersistenceDiagram.from_pairs(A), PersistenceDiagram.from_pairs(B))
        ref = bottleneck_brute(A, B)
        worst = max(worst, abs(got - ref))
        done += 1
    ok = worst <= 1e-9
    record(6, ok, f"100 diagram pairs, max |d_B - brute force| = {worst:.3g} (<= 1e-9)")
    assert ok


# -----------------------------------------------------------------------------
# 7. gap fixtures
# -----------------------------------------------------------------------------
def test_criterion_07_gap_fixtures():
    gd = diagonal_gaps(PersistenceDiagram.from_pairs([(1.5, 2.577), (2.0, 2.577)]))
    v11, v12 = vertical_gaps(gd, 1, 1), vertical_gaps(gd, 1, 2)
    gd2 = diagonal_gaps(PersistenceDiagram.from_pairs([(0.0, 2.577), (0.0, 2.577)]))
    got = {
        "ds1": (gd.ds(1), 0.577),
        "vs11": (v11.vs, 2.0),
        "vs12": (v12.vs, 1.5),
        "ds1'": (gd2.ds(1), 2.577),
        "vs11'": (vertical_gaps(gd2, 1, 1).vs, 0.0),
    }
    errs = {k: abs(a - b) for k, (a, b) in got.items()}
    ok = all(e <= 1e-12 for e in errs.values())
    record(7, ok, "; ".join(f"{k} = {a:.6g} (want {b})" for k, (a, b) in got.items()))
    assert ok


# -----------------------------------------------------------------------------
# 8-10. reconstruction on noisy pattern clouds
# -----------------------------------------------------------------------------
RECON_TYPES = [("wheel:5", "gaussian:0.04"), ("grid:3,3", "uniform:0.2"), ("hex:6", "uniform:0.4")]
RECON_SEED = 8


@pytest.fixture(scope="module")
def reconstructions():
    t0 = time.perf_counter()
    out = []
    for tid, (pat, noise) in enumerate(RECON_TYPES):
        G = make_pattern(pat)
        for i in range(20):
            sample = make_cloud(CloudType(pat, NoiseModel.parse(noise)), RECON_SEED, tid, i)
            cloud = sample.cloud()
            h = hopes_of_cloud(cloud)
            gd = diagonal_gaps(h.meta["_pd1"])
            out.append({"pattern": pat, "noise": noise, "G": G, "cloud": cloud, "h": h, "gd": gd,
                        "derived": derived_hopes(h, gd, 1, 1)})
    return out, time.perf_counter() - t0


def test_criterion_08_reconstruction(reconstructions):
    runs, build_time = reconstructions
    t0 = time.perf_counter()
    lines, ok = [], True
    contain_fail = 0
    worst = -math.inf
    for pat, noise in RECON_TYPES:
        rs = [r for r in runs if r["pattern"] == pat]
        want = rs[0]["G"].betti()
        rate = 100.0 * sum(r["derived"].betti() == want for r in rs) / len(rs)
        ok &= rate >= 90.0
        for r in rs:
            eps = hausdorff_cloud_graph(r["cloud"], r["G"], step=1e-4)
            dist = directed_hausdorff_segments(r["derived"], r["G"], step=0.005)
            worst = max(worst, dist - 2 * eps)
            contain_fail += dist > 2 * eps + 1e-6
        lines.append(f"{pat} {noise}: Betti {rate:.0f}%")
    dt = build_time + time.perf_counter() - t0
    ok &= contain_fail == 0 and dt < 900
    record(8, ok, "; ".join(lines) + f" (>= 90%); containment violations {contain_fail}, "
                  f"max dist - 2eps = {worst:.3g}; {dt:.0f} s (< 900 s)")
    assert ok


def test_criterion_09_simplification_safety(reconstructions):
    runs, _ = reconstructions
    bad = 0
    for r in runs:
        d = r["derived"]
        s = simplify(prune_degree_one(d), simplification_scale(r["gd"]))
        bad += s.betti() != d.betti()
    ok = bad == 0
    record(9, ok, f"{len(runs)} skeletons, {bad} Betti changes after pruning and simplification")
    assert ok


def test_criterion_10_zero_rms(reconstructions):
    runs, _ = reconstructions
    clouds = [(r["cloud"], r["h"]) for r in runs]
    for i in range(20):
        c = make_cloud(CloudType("hex:1", NoiseModel()), 13, 0, i).cloud()
        clouds.append((c, hopes_of_cloud(c)))
    vals = [rms_distance(c, h, mode) for c, h in clouds for mode in ("mean", "sum")]
    ok = all(v == 0.0 for v in vals)
    record(10, ok, f"{len(clouds)} clouds, max RMS of full HoPeS = {max(vals)!r} (exactly 0)")
    assert ok


# -----------------------------------------------------------------------------
# 11. stability of derived skeletons
# -----------------------------------------------------------------------------
STAB_PATTERNS = ["hex:1", "hex:2", "hex:3", "grid:2,2"]
STAB_NOISE = 0.02


def test_criterion_11_derived_stability():
    rng = np.random.default_rng(1111)
    worst_slack = -math.inf
    fails = hyp_fail = 0
    for tid, pat in enumerate(STAB_PATTERNS):
        G = make_pattern(pat)
        rep = graph_thickness(G, sample_density=400)
        ys = np.array(rep.deaths)
        gap = float(np.max(np.diff(ys))) if len(ys) > 1 else 0.0
        for i in range(5):
            C = make_cloud(CloudType(pat, NoiseModel("uniform", STAB_NOISE)), 11, tid, i).points
            eps = hausdorff_cloud_graph(C, G, step=1e-4)
            delta = eps / 2
            ang = rng.uniform(0, 2 * np.pi, len(C))
            rad = delta * np.sqrt(rng.uniform(0, 1, len(C)))
            Ct = C + np.c_[rad * np.cos(ang), rad * np.sin(ang)]
            eps_t = hausdorff_cloud_graph(Ct, G, step=1e-4)
            # both clouds must satisfy the single-gap reconstruction hypothesis
            for e in (eps, eps_t):
                hyp_fail += not (len(ys) == G.betti() and ys[0] > 7 * e + 2 * rep.theta + gap)
            S = derived_hopes(hopes_of_cloud(PointCloud.from_points(C)))
            St = derived_hopes(hopes_of_cloud(PointCloud.from_points(Ct)))
            d = max(directed_hausdorff_segments(S, St, step=0.005), directed_hausdorff_segments(St, S, step=0.005))
            bound = 2 * delta + 4 * eps
            worst_slack = max(worst_slack, d - bound)
            fails += d > bound + 1e-6
    ok = fails == 0 and hyp_fail == 0
    record(11, ok, f"20 cloud pairs, {fails} violations, {hyp_fail} hypothesis failures, "
                   f"max d_H - (2 delta + 4 eps) = {worst_slack:.3g}")
    assert ok


# -----------------------------------------------------------------------------
# 12. homeomorphism fixtures
# -----------------------------------------------------------------------------
def _subdivide(g: nx.MultiGraph, rng, splits: int) -> nx.MultiGraph:
    g = nx.MultiGraph(g)
    nxt = max(g.nodes) + 1
    for _ in range(splits):
        edges = list(g.edges(keys=True))
        u, v, k = edges[int(rng.integers(len(edges)))]
        g.remove_edge(u, v, k)
        g.add_edge(u, nxt)
        g.add_edge(nxt, v)
        nxt += 1
    return g


def test_criterion_12_homeomorphism():
    rng = np.random.default_rng(1212)
    W4, G22, W5 = (make_pattern(p).to_skeleton().to_networkx() for p in ("wheel:4", "grid:2,2", "wheel:5"))
    base = is_homeomorphic(W4, G22) and not is_homeomorphic(W4, W5)
    bad = 0
    for _ in range(100):
        a = _subdivide(W4, rng, int(rng.integers(1, 8)))
        b = _subdivide(G22, rng, int(rng.integers(1, 8)))
        c = _subdivide(W5, rng, int(rng.integers(1, 8)))
        bad += not is_homeomorphic(a, b) or is_homeomorphic(a, c) or not is_homeomorphic(a, W4)
    ok = base and bad == 0
    record(12, ok, f"W(4) ~ G(2,2): {is_homeomorphic(W4, G22)}; W(4) ~ W(5): {is_homeomorphic(W4, W5)}; "
                   f"{bad}/100 subdivision trials changed the answer")
    assert ok


# -----------------------------------------------------------------------------
# 13. baselines on noiseless single hexagons
# -----------------------------------------------------------------------------
def test_criterion_13_baselines():
    clouds = [make_cloud(CloudType("hex:1", NoiseModel()), 13, 0, i).cloud() for i in range(20)]
    need = 16

    def best(runs):
        top, arg = -1, None
        for param, build in runs:
            hits = sum(build(c).betti() == 1 for c in clouds)
            if hits > top:
                top, arg = hits, param
            if top >= need:
                break
        return top, arg

    m_hits, m_arg = best([((t, e), lambda c, t=t, e=e: mapper(c, MapperConfig(t, e)))
                          for t in MAPPER_T_GRID for e in MAPPER_EPS_GRID])
    r_hits, r_arg = best([(a, lambda c, a=a: alpha_reeb(c, a)) for a in REEB_ALPHA_GRID])
    ok = m_hits >= need and r_hits >= need
    record(13, ok, f"Mapper {100 * m_hits / 20:.0f}% at (t, eps) = {m_arg}; "
                   f"alpha-Reeb {100 * r_hits / 20:.0f}% at alpha = {r_arg} (>= 80%)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
