"""DBSCAN, the Mapper graph and the alpha-Reeb graph as embedded skeletons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .geometry import PointCloud, neighbourhood_graph
from .skeleton import Edge, SkeletonGraph

__all__ = [
    "Clustering",
    "dbscan",
    "MapperConfig",
    "mapper",
    "mapper_intervals",
    "reeb_intervals",
    "alpha_reeb",
    "default_graph_eps",
    "MAPPER_T_GRID",
    "MAPPER_EPS_GRID",
    "REEB_ALPHA_GRID",
]

MAPPER_T_GRID = tuple(round(1.5 + 0.2 * i, 10) for i in range(10))
MAPPER_EPS_GRID = tuple(round(0.05 * (i + 1), 10) for i in range(10))
REEB_ALPHA_GRID = tuple(round(0.15 + 0.05 * i, 10) for i in range(10))


# -----------------------------------------------------------------------------
# DBSCAN
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Clustering:
    """Cluster label per point; ``-1`` marks noise."""

    labels: np.ndarray
    eps: float
    min_pts: int

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) and self.labels.max() >= 0 else 0

    def clusters(self) -> list[np.ndarray]:
        return [np.nonzero(self.labels == c)[0] for c in range(self.n_clusters)]


def _neighbourhoods(cloud: PointCloud, eps: float) -> list[np.ndarray]:
    if cloud.points is not None:
        tree = cKDTree(cloud.points)
        return [np.array(sorted(nb), dtype=int) for nb in tree.query_ball_point(cloud.points, eps)]
    D = cloud.distances()
    return [np.nonzero(D[i] <= eps)[0] for i in range(cloud.n)]


def dbscan(cloud: PointCloud, eps: float, min_pts: int) -> Clustering:
    """
    Density-based clustering with seeds taken in ascending index order.

    Neighbourhoods are closed balls and include the point itself. Every
    unclaimed neighbour of a visited point joins the cluster (noise labels may
    be overwritten). Only core points extend the search, and they extend it by
    their whole neighbourhood, including points already claimed by an earlier
    cluster; those keep their label but are visited.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1")
    nbhd = _neighbourhoods(cloud, eps)
    UNSEEN, NOISE = -2, -1
    labels = np.full(cloud.n, UNSEEN, dtype=int)
    cid = 0
    for p in range(cloud.n):
        if labels[p] != UNSEEN:
            continue
        if len(nbhd[p]) < min_pts:
            labels[p] = NOISE
            continue
        labels[p] = cid
        queue = [p]
        queued = {p}
        while queue:
            q = queue.pop(0)
            core = len(nbhd[q]) >= min_pts
            for r in nbhd[q]:
                r = int(r)
                if labels[r] < 0:
                    labels[r] = cid
                if core and r not in queued:
                    queued.add(r)
                    queue.append(r)
        cid += 1
    labels[labels == UNSEEN] = NOISE
    return Clustering(labels, eps, min_pts)


# -----------------------------------------------------------------------------
# Mapper
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class MapperConfig:
    """``t`` sets the interval count ``round(t * n / 100)``; overlap is 50%."""

    t: float = 2.5
    eps: float = 0.3
    min_pts: int = 5
    overlap: float = 0.5
    base: int = 0

    def n_intervals(self, n: int) -> int:
        return max(1, int(round(self.t * n / 100.0)))


def mapper_intervals(lo: float, hi: float, count: int, overlap: float = 0.5) -> list[tuple[float, float]]:
    """``count`` closed intervals of equal length covering ``[lo, hi]``, adjacent ones overlapping by ``overlap``."""
    if count < 1:
        raise ValueError("interval count must be positive")
    span = hi - lo
    step_frac = 1.0 - overlap
    length = span / (1.0 + step_frac * (count - 1))
    step = length * step_frac
    out = [(lo + i * step, lo + i * step + length) for i in range(count)]
    out[-1] = (out[-1][0], hi)
    return out


def _centroid(cloud: PointCloud, idx) -> np.ndarray | None:
    if cloud.points is None:
        return None
    return cloud.points[np.asarray(idx, dtype=int)].mean(axis=0)


def mapper(cloud: PointCloud, cfg: MapperConfig = MapperConfig()) -> SkeletonGraph:
    """
    Mapper graph with a distance filter and DBSCAN clustering.

    The filter is the distance from the point farthest from ``cfg.base``.
    Vertices are clusters placed at their centroids; two clusters sharing a
    point are joined by an edge.
    """
    D = cloud.distances()
    base = int(np.argmax(D[cfg.base]))
    f = D[base]
    intervals = mapper_intervals(float(f.min()), float(f.max()), cfg.n_intervals(cloud.n), cfg.overlap)

    members: list[np.ndarray] = []
    level: list[int] = []
    for i, (a, b) in enumerate(intervals):
        idx = np.nonzero((f >= a) & (f <= b))[0]
        if len(idx) == 0:
            continue
        sub = PointCloud.from_matrix(D[np.ix_(idx, idx)]) if cloud.points is None \
            else PointCloud.from_points(cloud.points[idx])
        cl = dbscan(sub, cfg.eps, cfg.min_pts)
        for c in cl.clusters():
            members.append(idx[c])
            level.append(i)

    owner: dict[int, list[int]] = {}
    for v, idx in enumerate(members):
        for p in idx:
            owner.setdefault(int(p), []).append(v)
    pairs = set()
    for vs in owner.values():
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                pairs.add((min(vs[a], vs[b]), max(vs[a], vs[b])))

    coords = None
    if cloud.points is not None:
        coords = np.array([_centroid(cloud, m) for m in members]).reshape(len(members), 2)
    edges = []
    for u, v in sorted(pairs):
        L = float(np.linalg.norm(coords[u] - coords[v])) if coords is not None else 1.0
        edges.append(Edge(u, v, L, "link"))
    meta = {"t": cfg.t, "eps": cfg.eps, "min_pts": cfg.min_pts, "intervals": len(intervals),
            "_members": members, "_levels": level}
    return SkeletonGraph(np.arange(len(members)), coords, tuple(edges), "mapper", meta)


# -----------------------------------------------------------------------------
# alpha-Reeb
# -----------------------------------------------------------------------------
def reeb_intervals(max_d: float, alpha: float) -> list[tuple[float, float]]:
    """
    ``I_i = [i*alpha/2, i*alpha/2 + alpha]`` for ``0 <= i <= m`` with ``m`` the
    least integer ``>= 2 (max_d - alpha) / alpha``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    m = max(0, math.ceil(2.0 * (max_d - alpha) / alpha - 1e-12))
    return [(i * alpha / 2.0, i * alpha / 2.0 + alpha) for i in range(m + 1)]


def default_graph_eps(cloud: PointCloud) -> float:
    """Twice the longest edge of the Euclidean minimum spanning tree (the coarsest sampling gap)."""
    from scipy.sparse.csgraph import minimum_spanning_tree as _mst

    D = cloud.distances()
    if cloud.n < 2:
        return 1.0
    T = _mst(D)
    return 2.0 * float(T.data.max()) if T.nnz else 1.0


class _UF:
    def __init__(self):
        self.p: dict = {}

    def find(self, x):
        self.p.setdefault(x, x)
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.p[rb] = ra


def _reeb_component(cloud: PointCloud, A, verts: np.ndarray, alpha: float, base: int):
    """Stages 1-5 on one connected component of at least two vertices."""
    sub = A[verts][:, verts]
    d0 = dijkstra(sub, directed=False, indices=base)
    root = int(np.argmax(d0))
    d = dijkstra(sub, directed=False, indices=root)
    max_d = float(d.max())
    intervals = reeb_intervals(max_d, alpha)

    # stage 3: connected pieces of each preimage
    nodes: list[tuple[int, np.ndarray]] = []           # (interval index, local vertex ids)
    for i, (a, b) in enumerate(intervals):
        idx = np.nonzero((d >= a - 1e-12) & (d <= b + 1e-12))[0]
        if len(idx) == 0:
            continue
        nc, lab = connected_components(sub[idx][:, idx], directed=False)
        for c in range(nc):
            nodes.append((i, idx[lab == c]))

    # stage 4: nodes sharing a vertex
    owner: dict[int, list[int]] = {}
    for v, (_, idx) in enumerate(nodes):
        for p in idx:
            owner.setdefault(int(p), []).append(v)
    links = set()
    for vs in owner.values():
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                links.add((min(vs[a], vs[b]), max(vs[a], vs[b])))

    # stage 5: quotient of the interval copies
    uf = _UF()
    for v in range(len(nodes)):
        for k in range(3):
            uf.find(("P", v, k))
        uf.find(("S", v, 0))
        uf.find(("S", v, 1))
    for a, b in sorted(links):
        ia, ib = nodes[a][0], nodes[b][0]
        lo, hi = (a, b) if ia <= ib else (b, a)
        gap = abs(ib - ia)
        if gap == 1:
            uf.union(("S", lo, 1), ("S", hi, 0))
            uf.union(("P", lo, 1), ("P", hi, 0))
            uf.union(("P", lo, 2), ("P", hi, 1))
        elif gap == 2:
            uf.union(("P", lo, 2), ("P", hi, 0))
    return nodes, uf, links, d


def alpha_reeb(cloud: PointCloud, alpha: float, graph_eps: float | None = None, base: int = 0) -> SkeletonGraph:
    """
    Alpha-Reeb graph of the neighbourhood graph ``N(C, graph_eps)``.

    The graph distance from a root (the vertex farthest from ``base``) is
    covered by intervals of length ``alpha`` overlapping by half. Each
    connected piece of a preimage contributes an interval copy split at its
    midpoint; overlapping halves of linked pieces are glued. The quotient is
    returned as a multigraph whose vertices are glued points and whose edges
    are glued half-intervals. A midpoint sits at the centroid of its piece.
    Disconnected neighbourhood graphs are processed per component.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    eps = default_graph_eps(cloud) if graph_eps is None else graph_eps
    A = neighbourhood_graph(cloud, eps).adjacency()
    ncomp, comp = connected_components(A, directed=False)

    ids: list[int] = []
    coords: list = []
    edges: list[Edge] = []
    next_id = 0
    for c in range(ncomp):
        verts = np.nonzero(comp == c)[0]
        if len(verts) == 1:
            ids.append(next_id)
            coords.append(_centroid(cloud, verts))
            next_id += 1
            continue
        b = int(np.searchsorted(verts, base)) if base in verts else 0
        nodes, uf, links, d = _reeb_component(cloud, A, verts, alpha, b)
        # placement of every point of every interval copy
        place: dict = {}
        for v, (i, idx) in enumerate(nodes):
            g = verts[idx]
            lo_i = i * alpha / 2.0
            dv = d[idx]
            mid = _centroid(cloud, g)
            bot = idx[dv <= lo_i + alpha / 2.0]
            top = idx[dv >= lo_i + alpha / 2.0]
            place[("P", v, 1)] = (0, mid)
            place[("P", v, 0)] = (1, _centroid(cloud, verts[bot]) if len(bot) else mid)
            place[("P", v, 2)] = (1, _centroid(cloud, verts[top]) if len(top) else mid)
        classes: dict = {}
        for key, (rank, pos) in place.items():
            r = uf.find(key)
            classes.setdefault(r, []).append((rank, pos))
        cid = {}
        for r in sorted(classes, key=repr):
            cid[r] = next_id
            ids.append(next_id)
            next_id += 1
            if cloud.points is not None:
                best = min(rk for rk, _ in classes[r])
                coords.append(np.mean([p for rk, p in classes[r] if rk == best], axis=0))
        seen = set()
        for v in range(len(nodes)):
            for h in (0, 1):
                s = uf.find(("S", v, h))
                if s in seen:
                    continue
                seen.add(s)
                u_ = cid[uf.find(("P", v, h))]
                w_ = cid[uf.find(("P", v, h + 1))]
                edges.append(Edge(min(u_, w_), max(u_, w_), 0.0, "link"))

    crd = np.array(coords, dtype=float).reshape(len(ids), 2) if cloud.points is not None else None
    if crd is not None:
        row = {v: i for i, v in enumerate(ids)}
        edges = [Edge(e.u, e.v, float(np.linalg.norm(crd[row[e.u]] - crd[row[e.v]])), e.kind) for e in edges]
    return SkeletonGraph(np.array(ids, dtype=int), crd, tuple(edges), "alpha-reeb",
                         {"alpha": alpha, "graph_eps": eps, "components": int(ncomp)})
