"""Point clouds, planar Delaunay triangulations and neighbourhood graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, QhullError

__all__ = [
    "TOL",
    "CloudError",
    "MetricAxiomError",
    "DuplicatePointError",
    "PointCloud",
    "Triangulation",
    "MetricGraph",
    "load_cloud",
    "save_cloud",
    "delaunay",
    "neighbourhood_graph",
    "circumradius",
    "point_segment_sqdist",
    "distance_to_segments",
    "segments_intersect",
]

TOL = 1e-9


class CloudError(ValueError):
    """Raised for unparsable or invalid point-cloud input."""


class MetricAxiomError(CloudError):
    def __init__(self, message: str, triple: tuple[int, ...] = ()):
        super().__init__(message)
        self.triple = triple


class DuplicatePointError(CloudError):
    def __init__(self, message: str, indices: tuple[int, int]):
        super().__init__(message)
        self.indices = indices


# -----------------------------------------------------------------------------
# point clouds
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class PointCloud:
    """
    Finite metric space, given either by coordinates or by a distance matrix.

    Exactly one of ``points`` (shape ``(n, d)``) and ``dist`` (shape ``(n, n)``)
    is set. Construction validates the input; use :meth:`from_points` and
    :meth:`from_matrix` rather than the raw constructor.
    """

    points: np.ndarray | None = None
    dist: np.ndarray | None = None
    _dist_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if (self.points is None) == (self.dist is None):
            raise CloudError("exactly one of points / dist must be given")
        if self.points is not None:
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
                raise CloudError(f"points must be an (n, d) array with n, d >= 1; got {pts.shape}")
            if not np.all(np.isfinite(pts)):
                raise CloudError("points contain non-finite coordinates")
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)
        else:
            D = np.asarray(self.dist, dtype=float)
            check_metric(D)
            D.setflags(write=False)
            object.__setattr__(self, "dist", D)

    @classmethod
    def from_points(cls, points) -> "PointCloud":
        return cls(points=np.asarray(points, dtype=float))

    @classmethod
    def from_matrix(cls, dist) -> "PointCloud":
        return cls(dist=np.asarray(dist, dtype=float))

    @property
    def mode(self) -> str:
        return "coordinates" if self.points is not None else "distance-matrix"

    @property
    def n(self) -> int:
        return len(self.points) if self.points is not None else len(self.dist)

    @property
    def dim(self) -> int | None:
        return None if self.points is None else self.points.shape[1]

    def distances(self) -> np.ndarray:
        """Full ``(n, n)`` distance matrix (cached for coordinate clouds)."""
        if self.dist is not None:
            return self.dist
        if "D" not in self._dist_cache:
            diff = self.points[:, None, :] - self.points[None, :, :]
            D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            D.setflags(write=False)
            self._dist_cache["D"] = D
        return self._dist_cache["D"]

    def distance(self, i: int, j: int) -> float:
        if self.dist is not None:
            return float(self.dist[i, j])
        return float(math.dist(self.points[i], self.points[j]))


def check_metric(D: np.ndarray, tol: float = TOL) -> None:
    """Validate positiveness, symmetry and the triangle inequality."""
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
        raise CloudError(f"distance matrix must be square and non-empty; got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise CloudError("distance matrix contains non-finite entries")
    n = D.shape[0]
    diag = np.abs(np.diag(D))
    if np.any(diag > tol):
        i = int(np.argmax(diag))
        raise MetricAxiomError(f"positiveness violated: d({i},{i}) = {D[i, i]!r} != 0", (i, i))
    off = D + np.eye(n)
    if np.any(off <= tol):
        i, j = map(int, np.argwhere(off <= tol)[0])
        raise MetricAxiomError(f"positiveness violated: d({i},{j}) = {D[i, j]!r} for distinct points", (i, j))
    asym = np.abs(D - D.T)
    if np.any(asym > tol):
        i, j = map(int, np.unravel_index(np.argmax(asym), asym.shape))
        raise MetricAxiomError(f"symmetry violated: d({i},{j}) = {D[i, j]!r} but d({j},{i}) = {D[j, i]!r}", (i, j))
    # d(p, r) <= d(p, q) + d(q, r), one q-slice at a time to bound memory
    for q in range(n):
        excess = D - (D[:, q][:, None] + D[q, :][None, :])
        if np.any(excess > tol):
            p, r = map(int, np.unravel_index(np.argmax(excess), excess.shape))
            raise MetricAxiomError(
                f"triangle inequality violated: d({p},{r}) = {D[p, r]!r} > "
                f"d({p},{q}) + d({q},{r}) = {D[p, q] + D[q, r]!r}",
                (p, q, r),
            )


def load_cloud(path, format: str = "csv-coords") -> PointCloud:
    """
    Read a cloud from CSV.

    ``csv-coords``: one point per line, comma-separated coordinates.
    ``csv-matrix``: ``n`` lines of ``n`` comma-separated distances.
    Blank lines and lines starting with ``#`` are skipped.
    """
    path = Path(path)
    if not path.exists():
        raise CloudError(f"no such file: {path}")
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise CloudError(f"{path}:{lineno}: cannot parse {line!r}") from exc
    if not rows:
        raise CloudError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise CloudError(f"{path}: rows have differing numbers of columns")
    arr = np.array(rows, dtype=float)
    if format == "csv-coords":
        return PointCloud.from_points(arr)
    if format == "csv-matrix":
        if arr.shape[0] != arr.shape[1]:
            raise CloudError(f"{path}: distance matrix is {arr.shape[0]}x{arr.shape[1]}, not square")
        return PointCloud.from_matrix(arr)
    raise CloudError(f"unknown cloud format {format!r}")


def save_cloud(cloud: PointCloud, path, header: list[str] | None = None) -> None:
    """Write a cloud in the format :func:`load_cloud` reads; floats use ``repr`` so they round-trip."""
    arr = cloud.points if cloud.points is not None else cloud.dist
    with Path(path).open("w") as fh:
        for line in header or ():
            fh.write(f"# {line}\n")
        for row in arr:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


# -----------------------------------------------------------------------------
# Delaunay triangulation
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Triangulation:
    """
    Planar Delaunay triangulation.

    ``edges`` are sorted vertex pairs with their half-lengths (the radius of the
    smallest circumball), ``triangles`` sorted vertex triples with circumradii.
    """

    points: np.ndarray
    edges: np.ndarray           # (E, 2) int
    edge_radius: np.ndarray     # (E,)
    triangles: np.ndarray       # (T, 3) int
    tri_radius: np.ndarray      # (T,)

    @property
    def n(self) -> int:
        return len(self.points)


def circumradius(a: float, b: float, c: float) -> float:
    """Circumradius ``abc / 4K`` of a triangle with side lengths a, b, c (K via stable Heron)."""
    a, b, c = sorted((a, b, c), reverse=True)
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    if prod <= 0.0:
        return math.inf
    return a * b * c / math.sqrt(prod)


def _find_duplicate(points: np.ndarray) -> tuple[int, int] | None:
    order = np.lexsort(points.T[::-1])
    srt = points[order]
    same = np.all(srt[1:] == srt[:-1], axis=1)
    if np.any(same):
        k = int(np.argmax(same))
        i, j = sorted((int(order[k]), int(order[k + 1])))
        return i, j
    return None


def _collinear(points: np.ndarray) -> bool:
    if len(points) < 3:
        return True
    p0 = points[0]
    far = np.argmax(np.sum((points - p0) ** 2, axis=1))
    d = points[far] - p0
    scale = max(float(np.max(np.abs(points - p0))), 1.0)
    cross = d[0] * (points[:, 1] - p0[1]) - d[1] * (points[:, 0] - p0[0])
    return bool(np.all(np.abs(cross) <= TOL * scale * scale))


def _peel_flat_hull(pts: np.ndarray, triangles: np.ndarray, rel: float = 1e-10) -> np.ndarray:
    """
    Drop zero-area slivers that qhull leaves along collinear hull points.

    A flat triangle whose longest edge lies on the hull is removed with that
    edge; removal can expose the next sliver, so this repeats to a fixed point.
    """
    a, b, c = pts[triangles[:, 0]], pts[triangles[:, 1]], pts[triangles[:, 2]]
    cross = np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    side2 = np.max(np.stack([np.sum((a - b) ** 2, 1), np.sum((a - c) ** 2, 1), np.sum((b - c) ** 2, 1)]), axis=0)
    flat = set(np.nonzero(cross <= rel * side2)[0].tolist())
    if not flat:
        return triangles
    cofaces: dict[tuple[int, int], set[int]] = {}
    for t, (i, j, k) in enumerate(triangles):
        for e in ((i, j), (i, k), (j, k)):
            cofaces.setdefault(e, set()).add(t)
    alive = np.ones(len(triangles), dtype=bool)
    changed = True
    while changed:
        changed = False
        for t in sorted(flat):
            i, j, k = (int(x) for x in triangles[t])
            edges = [(i, j), (i, k), (j, k)]
            longest = max(edges, key=lambda e: float(np.sum((pts[e[0]] - pts[e[1]]) ** 2)))
            if cofaces[longest] == {t}:
                for e in edges:
                    cofaces[e].discard(t)
                alive[t] = False
                flat.discard(t)
                changed = True
    return triangles[alive]


def delaunay(cloud: PointCloud) -> Triangulation:
    """
    Delaunay triangulation of a planar coordinate cloud.

    Collinear clouds (and clouds with fewer than three points) degrade to the
    path joining consecutive points along their common line. Duplicate points
    raise :class:`DuplicatePointError`.
    """
    if cloud.points is None:
        raise CloudError("Delaunay triangulation needs coordinates; use a Rips filtration for distance matrices")
    if cloud.dim != 2:
        raise CloudError(f"Delaunay triangulation is planar only; cloud has dimension {cloud.dim}")
    pts = cloud.points
    dup = _find_duplicate(pts)
    if dup is not None:
        raise DuplicatePointError(f"duplicate points at indices {dup[0]} and {dup[1]}", dup)

    if _collinear(pts):
        order = np.lexsort(pts.T[::-1])
        edges = np.sort(np.stack([order[:-1], order[1:]], axis=1), axis=1)
        triangles = np.empty((0, 3), dtype=int)
    else:
        try:
            tri = Delaunay(pts)
        except QhullError as exc:  # pragma: no cover - guarded by the collinearity test
            raise CloudError(f"triangulation failed: {exc}") from exc
        if len(tri.coplanar):
            i = int(tri.coplanar[0][0])
            j = int(tri.coplanar[0][2])
            raise DuplicatePointError(f"points {j} and {i} are numerically coincident", tuple(sorted((i, j))))
        triangles = _peel_flat_hull(pts, np.sort(tri.simplices.astype(int), axis=1))
        triangles = triangles[np.lexsort(triangles.T[::-1])]
        e = np.concatenate([triangles[:, [0, 1]], triangles[:, [0, 2]], triangles[:, [1, 2]]])
        edges = np.unique(e, axis=0)

    edges = edges[np.lexsort(edges.T[::-1])]
    lengths = np.linalg.norm(pts[edges[:, 0]] - pts[edges[:, 1]], axis=1)
    tri_r = np.array(
        [
            circumradius(
                math.dist(pts[i], pts[j]), math.dist(pts[i], pts[k]), math.dist(pts[j], pts[k])
            )
            for i, j, k in triangles
        ],
        dtype=float,
    )
    return Triangulation(
        points=pts,
        edges=edges.astype(int),
        edge_radius=lengths / 2.0,
        triangles=triangles.astype(int),
        tri_radius=tri_r,
    )


# -----------------------------------------------------------------------------
# neighbourhood graphs
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class MetricGraph:
    """Graph on cloud indices with edge lengths equal to cloud distances."""

    n: int
    edges: np.ndarray    # (E, 2) int, i < j
    lengths: np.ndarray  # (E,)
    eps: float

    def adjacency(self):
        from scipy.sparse import coo_matrix

        i, j = self.edges.T if len(self.edges) else (np.empty(0, int), np.empty(0, int))
        A = coo_matrix((self.lengths, (i, j)), shape=(self.n, self.n))
        return (A + A.T).tocsr()


def neighbourhood_graph(cloud: PointCloud, eps: float) -> MetricGraph:
    """All pairs at distance ``<= eps`` (boundary inclusive)."""
    if not eps > 0:
        raise ValueError(f"eps must be positive; got {eps}")
    D = cloud.distances()
    i, j = np.nonzero(np.triu(D <= eps, k=1))
    return MetricGraph(n=cloud.n, edges=np.stack([i, j], axis=1).astype(int), lengths=D[i, j].copy(), eps=eps)


# -----------------------------------------------------------------------------
# segment predicates
# -----------------------------------------------------------------------------
def point_segment_sqdist(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Squared distances from each point to each segment ``[a_k, b_k]``.

    Returns shape ``(n_points, n_segments)``. The distance is exactly zero when a
    point coincides with a segment endpoint.
    """
    points = np.atleast_2d(points)
    ab = b - a                                       # (m, d)
    ap = points[:, None, :] - a[None, :, :]          # (n, m, d)
    bp = points[:, None, :] - b[None, :, :]
    den = np.einsum("md,md->m", ab, ab)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("nmd,md->nm", ap, ab) / den
    t = np.where(den > 0, t, 0.0)
    da = np.einsum("nmd,nmd->nm", ap, ap)
    db = np.einsum("nmd,nmd->nm", bp, bp)
    proj = ap - t[..., None] * ab[None, :, :]
    dm = np.einsum("nmd,nmd->nm", proj, proj)
    return np.where(t <= 0, da, np.where(t >= 1, db, np.minimum(dm, np.minimum(da, db))))


def distance_to_segments(points: np.ndarray, a: np.ndarray, b: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Distance from each point to the nearest of the segments ``[a_k, b_k]``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(points))
    for s in range(0, len(points), chunk):
        out[s:s + chunk] = np.sqrt(np.min(point_segment_sqdist(points[s:s + chunk], a, b), axis=1))
    return out


def _orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])


def _on_segment(p, q, r, tol):
    # r collinear with pq: is r within the bounding box of pq?
    return (
        (np.minimum(p[..., 0], q[..., 0]) - tol <= r[..., 0]) & (r[..., 0] <= np.maximum(p[..., 0], q[..., 0]) + tol)
        & (np.minimum(p[..., 1], q[..., 1]) - tol <= r[..., 1]) & (r[..., 1] <= np.maximum(p[..., 1], q[..., 1]) + tol)
    )


def segments_intersect(p: np.ndarray, q: np.ndarray, A: np.ndarray, B: np.ndarray, tol: float = TOL) -> np.ndarray:
    """
    Closed-segment intersection of ``[p, q]`` against each ``[A_k, B_k]``.

    Touching counts as intersecting. Callers must exclude segments that
    legitimately share an endpoint with ``[p, q]``.
    """
    p = np.broadcast_to(p, A.shape)
    q = np.broadcast_to(q, A.shape)
    o1 = _orient(p, q, A)
    o2 = _orient(p, q, B)
    o3 = _orient(A, B, p)
    o4 = _orient(A, B, q)
    s1, s2, s3, s4 = (np.where(np.abs(o) <= tol, 0, np.sign(o)) for o in (o1, o2, o3, o4))
    proper = (s1 * s2 < 0) & (s3 * s4 < 0)
    touch = (
        ((s1 == 0) & _on_segment(p, q, A, tol))
        | ((s2 == 0) & _on_segment(p, q, B, tol))
        | ((s3 == 0) & _on_segment(A, B, p, tol))
        | ((s4 == 0) & _on_segment(A, B, q, tol))
    )
    return proper | touch
