"""
Homologically persistent skeletons.

A HoPeS is a minimum spanning tree of a filtration plus its critical edges:
the edges that create an H1 class living for a positive time. Edge lengths
are filtration lengths (twice the entry value), so that a critical edge has
length exactly twice its birth.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .filtration import Filtration, alpha_filtration, build_filtration
from .geometry import TOL, PointCloud, Triangulation, delaunay, segments_intersect
from .persistence import (
    GAP_TOL,
    GapDecomposition,
    PersistenceDiagram,
    PersistenceResult,
    compute_persistence,
    diagonal_gaps,
    significant,
    vertical_gaps,
)
from .skeleton import Edge, SkeletonGraph

__all__ = [
    "minimum_spanning_tree",
    "build_hopes",
    "hopes_of_cloud",
    "reduced_hopes",
    "derived_hopes",
    "prune_degree_one",
    "simplify",
    "simplification_scale",
    "simhopes",
    "ThicknessReport",
    "graph_thickness",
    "sample_segments",
]


def _persistence(f: Filtration, result: PersistenceResult | None) -> PersistenceResult:
    return result if result is not None else compute_persistence(f)


def _vertex_frame(f: Filtration, coords) -> tuple[np.ndarray, np.ndarray | None]:
    ids = np.arange(f.n_vertices)
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        if len(coords) != f.n_vertices:
            raise ValueError("coordinates do not match the filtration's vertex count")
    return ids, coords


def minimum_spanning_tree(f: Filtration, coords=None, alpha: float = math.inf,
                          result: PersistenceResult | None = None) -> SkeletonGraph:
    """
    Minimum spanning tree as the H0 merging edges of the filtration.

    With finite ``alpha`` this is the reduced forest MST(C; alpha): tree edges
    longer than ``2 * alpha`` are dropped. A filtration that does not connect
    (a capped Rips filtration) yields a spanning forest and a warning.
    """
    res = _persistence(f, result)
    ids, coords = _vertex_frame(f, coords)
    edges = []
    for p in res.pairing.of_dim(0):
        if p.destroyer is None:
            continue
        s = f.simplices[p.destroyer]
        if s.value <= alpha:
            edges.append(Edge(s.vertices[0], s.vertices[1], 2.0 * s.value, "tree"))
    n_roots = sum(1 for p in res.pairing.of_dim(0) if p.destroyer is None)
    if n_roots > 1 and math.isinf(alpha):
        warnings.warn(f"filtration is disconnected ({n_roots} components); returning a spanning forest",
                      RuntimeWarning, stacklevel=2)
    prov = "mst" if math.isinf(alpha) else f"mst({alpha!r})"
    return SkeletonGraph(ids, coords, tuple(edges), prov, {"filtration": f.kind})


def build_hopes(f: Filtration, coords=None, result: PersistenceResult | None = None) -> SkeletonGraph:
    """
    Full HoPeS: MST plus every critical edge labelled with (birth, death).

    The persistence diagrams are kept on the graph (``meta['_pd0']``,
    ``meta['_pd1']``) for the gap-based subgraphs.
    """
    res = _persistence(f, result)
    tree = minimum_spanning_tree(f, coords, result=res)
    crit = []
    for p in res.pairing.of_dim(1):
        if significant(p.birth, p.death):
            s = f.simplices[p.creator]
            crit.append(Edge(s.vertices[0], s.vertices[1], 2.0 * s.value, "critical", p.birth, p.death))
    meta = {"filtration": f.kind, "_pd0": res.pd0, "_pd1": res.pd1}
    return SkeletonGraph(tree.ids, tree.coords, tree.edges + tuple(crit), "hopes", meta)


def hopes_of_cloud(cloud: PointCloud, kind: str = "auto", max_scale: float = math.inf) -> SkeletonGraph:
    """Filter a cloud (alpha complex in the plane, Rips otherwise) and build its HoPeS."""
    f = build_filtration(cloud, kind, max_scale)
    return build_hopes(f, cloud.points)


def _pd1(h: SkeletonGraph) -> PersistenceDiagram:
    pd = h.meta.get("_pd1")
    if pd is None:
        pd = PersistenceDiagram.from_pairs((e.birth, e.death) for e in h.critical_edges())
    return pd


def reduced_hopes(h: SkeletonGraph, alpha: float) -> SkeletonGraph:
    """
    HoPeS(C; alpha): drop edges longer than ``2 * alpha`` and critical edges
    whose class is dead by ``alpha``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")

    def keep(e: Edge) -> bool:
        if e.length > 2.0 * alpha:
            return False
        return e.kind != "critical" or e.death > alpha

    return h.filter_edges(keep, f"reduced({alpha!r})")


def derived_hopes(h: SkeletonGraph, gd: GapDecomposition | None = None, k: int = 1, l: int = 1) -> SkeletonGraph:
    """
    Derived skeleton HoPeS_{k,l}: edges no longer than ``2 * vs_{k,l}`` and the
    critical edges whose dots lie in ``VS_{k,l}`` and are still alive at
    ``vs_{k,l}``.

    A diagram without dots gives the full MST (no critical edges).
    """
    if gd is None:
        gd = diagonal_gaps(_pd1(h))
    if gd.m == 0:
        g = h.filter_edges(lambda e: e.kind != "critical", f"derived({k},{l})")
        g.meta["vs"] = None
        return g
    split = vertical_gaps(gd, k, l)
    vs, ds = split.vs, gd.ds(k)
    tol = gd.tol

    def in_vs(e: Edge) -> bool:
        return e.birth <= vs + tol and (e.death - e.birth) >= ds - tol

    def keep(e: Edge) -> bool:
        if e.length > 2.0 * vs:
            return False
        if e.kind != "critical":
            return True
        return e.death > vs and in_vs(e)

    g = h.filter_edges(keep, f"derived({k},{l})")
    g.meta.update({"vs": vs, "ds": ds, "k": k, "l": l})
    return g


# -----------------------------------------------------------------------------
# pruning and simplification
# -----------------------------------------------------------------------------
def prune_degree_one(g: SkeletonGraph) -> SkeletonGraph:
    """
    Remove degree-1 vertices until none is left, smallest id first.

    A tree component shrinks to a single isolated vertex, so no component
    disappears and the Betti number is unchanged.
    """
    deg = g.degrees()
    inc: dict[int, list[int]] = {v: [] for v in deg}
    for k, e in enumerate(g.edges):
        inc[e.u].append(k)
        if e.v != e.u:
            inc[e.v].append(k)
    alive_edge = [True] * len(g.edges)
    removed: set[int] = set()
    heap = [v for v, d in deg.items() if d == 1]
    heapq.heapify(heap)
    while heap:
        v = heapq.heappop(heap)
        if v in removed or deg[v] != 1:
            continue
        k = next(k for k in inc[v] if alive_edge[k])
        alive_edge[k] = False
        e = g.edges[k]
        w = e.v if e.u == v else e.u
        removed.add(v)
        deg[v] = 0
        deg[w] -= 1
        if deg[w] == 1:
            heapq.heappush(heap, w)
    keep_ids = [int(v) for v in g.ids if int(v) not in removed]
    out = g.induced(keep_ids, f"pruned:{g.provenance}")
    return out


def _shared_overlap(s: np.ndarray, a: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    """Segments ``[s, a]`` and ``[s, B_k]`` overlap beyond their common endpoint ``s``."""
    if len(B) == 0:
        return np.zeros(0, dtype=bool)
    da = a - s
    dB = B - s
    cross = da[0] * dB[:, 1] - da[1] * dB[:, 0]
    dot = dB @ da
    return (np.abs(cross) <= tol) & (dot > 0)


class _Planar:
    """Mutable embedded simple graph used by :func:`simplify`."""

    def __init__(self, g: SkeletonGraph):
        self.pos = {int(v): g.coords[i].astype(float) for i, v in enumerate(g.ids)}
        self.adj: dict[int, dict[int, Edge]] = {v: {} for v in self.pos}
        self.multi = False
        for e in g.edges:
            if e.u == e.v or e.v in self.adj[e.u]:
                self.multi = True
            self.adj[e.u][e.v] = e
            self.adj[e.v][e.u] = e
        self.next_id = max(self.pos) + 1 if self.pos else 0

    def length(self, u: int, v: int) -> float:
        return float(np.linalg.norm(self.pos[u] - self.pos[v]))

    def edge_arrays(self, skip: set[int]):
        """All current edges not incident to ``skip`` as endpoint id and coordinate arrays."""
        us, vs = [], []
        for u, nb in self.adj.items():
            if u in skip:
                continue
            for v in nb:
                if u < v and v not in skip:
                    us.append(u)
                    vs.append(v)
        return us, vs


def _collapse_creates_crossing(G: _Planar, u: int, v: int, p: np.ndarray, nbrs: list[int], tol: float) -> bool:
    us, vs = G.edge_arrays({u, v})
    if us:
        A = np.array([G.pos[a] for a in us])
        B = np.array([G.pos[b] for b in vs])
        ua, va = np.array(us), np.array(vs)
    else:
        A = B = np.empty((0, 2))
        ua = va = np.empty(0, dtype=int)
    for w in nbrs:
        q = G.pos[w]
        if np.allclose(p, q, atol=tol, rtol=0):
            return True
        free = (ua != w) & (va != w)
        if np.any(segments_intersect(p, q, A[free], B[free], tol)):
            return True
        # edges sharing w: collinear overlap along the new edge
        other = np.where(ua == w, va, ua)[~free]
        if len(other) and np.any(_shared_overlap(q, p, np.array([G.pos[o] for o in other]), tol)):
            return True
    # new edges among themselves share p
    Q = np.array([G.pos[w] for w in nbrs]) if nbrs else np.empty((0, 2))
    for i in range(len(nbrs)):
        if np.any(_shared_overlap(p, Q[i], Q[i + 1:], tol)):
            return True
    # an isolated vertex must not end up on a new edge
    iso = [G.pos[w] for w, nb in G.adj.items() if not nb and w not in (u, v)]
    if iso:
        R = np.array(iso)
        for q in Q:
            if np.any(segments_intersect(p, q, R, R, tol)):
                return True
    return False


def simplify(g: SkeletonGraph, eps: float, tol: float = TOL) -> SkeletonGraph:
    """
    Collapse edges shorter than ``eps``, shortest first.

    An edge in a triangular cycle is never collapsed. The merged vertex goes
    to the midpoint when both endpoints have degree 2 or neither has;
    otherwise it stays where the endpoint of degree other than 2 was. New
    edges keep the attributes of the edges they replace. A collapse that
    would make edges intersect is undone, so the graph stays plane and its
    Betti number does not change.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if g.coords is None:
        raise ValueError("simplify needs an embedded graph")
    G = _Planar(g)
    if G.multi:
        raise ValueError("simplify expects a simple graph")

    heap: list[tuple[float, int, int]] = []
    for u, nb in G.adj.items():
        for v in nb:
            if u < v:
                L = G.length(u, v)
                if L < eps:
                    heap.append((L, u, v))
    heapq.heapify(heap)
    rejected: set[tuple[int, int]] = set()

    while heap:
        L, u, v = heapq.heappop(heap)
        if u not in G.adj or v not in G.adj[u] or (u, v) in rejected:
            continue
        if abs(G.length(u, v) - L) > 0:
            continue                         # stale entry
        nu, nv = set(G.adj[u]) - {v}, set(G.adj[v]) - {u}
        if nu & nv:
            continue                         # edge lies in a triangular cycle
        du, dv = len(G.adj[u]), len(G.adj[v])
        if (du == 2) == (dv == 2):
            p = (G.pos[u] + G.pos[v]) / 2.0
        elif du != 2:
            p = G.pos[u].copy()
        else:
            p = G.pos[v].copy()
        nbrs = sorted(nu | nv)
        if _collapse_creates_crossing(G, u, v, p, nbrs, tol):
            rejected.add((u, v))
            continue
        w_new = G.next_id
        G.next_id += 1
        G.pos[w_new] = p
        G.adj[w_new] = {}
        for old in (u, v):
            for w, e in G.adj[old].items():
                if w in (u, v):
                    continue
                ne = Edge(w_new, w, 0.0, e.kind, e.birth, e.death)
                G.adj[w_new][w] = ne
                G.adj[w][w_new] = ne
                del G.adj[w][old]
            del G.adj[old]
            del G.pos[old]
        for w in nbrs:
            Lw = G.length(w_new, w)
            if Lw < eps:
                a, b = min(w, w_new), max(w, w_new)
                heapq.heappush(heap, (Lw, a, b))
        # edges rejected before may be collapsible now
        rejected = {r for r in rejected if r[0] in G.adj and r[1] in G.adj}
        for r in list(rejected):
            if w_new in r or any(x in nbrs for x in r):
                rejected.discard(r)
                if r[1] in G.adj[r[0]]:
                    heapq.heappush(heap, (G.length(*r), *r))

    ids = sorted(G.pos)
    coords = np.array([G.pos[v] for v in ids]) if ids else np.empty((0, 2))
    edges = []
    for u in ids:
        for v, e in G.adj[u].items():
            if u < v:
                edges.append(Edge(u, v, G.length(u, v), e.kind, e.birth, e.death))
    meta = {k: val for k, val in g.meta.items() if not k.startswith("_")}
    meta["eps"] = eps
    return SkeletonGraph(np.array(ids, dtype=int), coords, tuple(edges), f"simplified({eps!r})", meta)


def simplification_scale(gd: GapDecomposition) -> float:
    """Maximum death among the dots above the widest diagonal gap."""
    DS = gd.DS(1)
    return float(np.max(DS[:, 1])) if len(DS) else 0.0


def simhopes(h: SkeletonGraph, gd: GapDecomposition | None = None, eps: float | None = None) -> SkeletonGraph:
    """Derived HoPeS_{1,1}, pruned, then simplified at the max-death scale."""
    if gd is None:
        gd = diagonal_gaps(_pd1(h))
    d = prune_degree_one(derived_hopes(h, gd, 1, 1))
    if eps is None:
        eps = simplification_scale(gd)
    if eps <= 0:
        return d
    out = simplify(d, eps)
    return SkeletonGraph(out.ids, out.coords, out.edges, "simhopes", out.meta)


# -----------------------------------------------------------------------------
# thickness
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ThicknessReport:
    """
    Offset persistence of an embedded graph.

    ``theta`` is the largest persistence of a hole born after scale 0;
    ``deaths`` lists the deaths of the holes present at scale 0 (one per
    independent cycle) in increasing order; ``radii`` holds the persistence
    of every later-born hole.
    """

    theta: float
    deaths: tuple[float, ...]
    radii: tuple[float, ...]
    spacing: float
    n_samples: int
    converged: bool | None = None
    diagram: PersistenceDiagram | None = field(default=None, compare=False, repr=False)


def sample_segments(A: np.ndarray, B: np.ndarray, density: float) -> np.ndarray:
    """Evenly spaced points on every segment (endpoints included, deduplicated)."""
    pts = []
    for a, b in zip(A, B):
        L = float(np.linalg.norm(b - a))
        k = max(1, int(math.ceil(L * density)))
        t = np.linspace(0.0, 1.0, k + 1)[:, None]
        pts.append(a[None, :] * (1 - t) + b[None, :] * t)
    if not pts:
        return np.empty((0, 2))
    P = np.vstack(pts)
    key = np.round(P, 9)
    _, first = np.unique(key, axis=0, return_index=True)
    return P[np.sort(first)]


def _segments_of(g) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(g, "segments"):
        return g.segments()
    A, B = g
    return np.asarray(A, float), np.asarray(B, float)


def _thickness_once(A, B, density):
    P = sample_segments(A, B, density)
    spacing = 1.0 / density
    f = alpha_filtration(delaunay(PointCloud.from_points(P)))
    pd = compute_persistence(f, validate=False).pd1
    deaths, radii = [], []
    for b, d, m in pd.dots:
        pers = d - b
        if b <= spacing:
            if pers > 2 * spacing:
                deaths.extend([d] * m)
        elif pers > 2 * spacing:
            radii.extend([pers] * m)
    theta = max(radii, default=0.0)
    return theta, sorted(deaths), sorted(radii), spacing, len(P), pd


def graph_thickness(g, sample_density: float = 1000.0, check_convergence: bool = False,
                    tol: float | None = None) -> ThicknessReport:
    """
    Thickness of an embedded graph, computed on a dense even sample.

    Holes born within one sampling step of 0 are the graph's own cycles;
    later-born holes shorter-lived than two sampling steps are treated as
    sampling artifacts. ``check_convergence`` recomputes at double density and
    compares the thickness within ``tol`` (default: four sampling steps).
    """
    A, B = _segments_of(g)
    theta, deaths, radii, spacing, n, pd = _thickness_once(A, B, sample_density)
    converged = None
    if check_convergence:
        theta2, *_ = _thickness_once(A, B, 2 * sample_density)
        converged = abs(theta2 - theta) <= (4 * spacing if tol is None else tol)
    return ThicknessReport(theta, tuple(deaths), tuple(radii), spacing, n, converged, pd)
