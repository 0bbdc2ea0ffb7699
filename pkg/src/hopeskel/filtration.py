"""Filtrations of simplicial complexes (dimension <= 2) on point clouds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .geometry import TOL, CloudError, PointCloud, Triangulation, delaunay

__all__ = [
    "Simplex",
    "Filtration",
    "FiltrationError",
    "alpha_filtration",
    "rips_filtration",
    "build_filtration",
]


class FiltrationError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class Simplex:
    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def key(self) -> tuple:
        return (self.value, self.dim, self.vertices)

    def faces(self) -> list[tuple[int, ...]]:
        if self.dim == 0:
            return []
        return list(combinations(self.vertices, len(self.vertices) - 1))


@dataclass(frozen=True)
class Filtration:
    """
    Simplices in filtration order, with values in the offset-radius convention.

    An edge of length ``l`` enters a Rips filtration at ``l / 2``; the prefix
    of all simplices with value ``<= a`` is the complex at scale ``a``.
    """

    simplices: tuple[Simplex, ...]
    kind: str
    n_vertices: int
    max_scale: float = math.inf
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_simplices(cls, simplices: Iterable[Simplex], kind: str, n_vertices: int,
                       max_scale: float = math.inf, sort: bool = True) -> "Filtration":
        simplices = list(simplices)
        if sort:
            simplices.sort(key=lambda s: s.key)
        return cls(tuple(simplices), kind, n_vertices, max_scale)

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)

    def index(self, vertices: tuple[int, ...]) -> int:
        if not self._index:
            self._index.update({s.vertices: i for i, s in enumerate(self.simplices)})
        return self._index[vertices]

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.simplices])

    @property
    def dims(self) -> np.ndarray:
        return np.array([s.dim for s in self.simplices], dtype=int)

    def of_dim(self, d: int) -> list[Simplex]:
        return [s for s in self.simplices if s.dim == d]

    def prefix(self, alpha: float) -> list[Simplex]:
        """The complex Q(C; alpha): all simplices with value ``<= alpha``."""
        return [s for s in self.simplices if s.value <= alpha]

    def validate(self) -> None:
        """Faces precede cofaces and values never decrease along face relations."""
        seen: dict[tuple[int, ...], float] = {}
        prev = -math.inf
        for pos, s in enumerate(self.simplices):
            if s.value < prev:
                raise FiltrationError(f"simplex {s.vertices} at position {pos} has value {s.value} < previous {prev}")
            prev = s.value
            if list(s.vertices) != sorted(set(s.vertices)):
                raise FiltrationError(f"simplex {s.vertices} is not a sorted tuple of distinct vertices")
            if s.dim > 2:
                raise FiltrationError(f"simplex {s.vertices} has dimension > 2")
            for f in s.faces():
                if f not in seen:
                    raise FiltrationError(f"face {f} of {s.vertices} does not precede it")
                if seen[f] > s.value:
                    raise FiltrationError(f"face {f} of {s.vertices} enters later ({seen[f]} > {s.value})")
            seen[s.vertices] = s.value

    def dump(self) -> str:
        """One simplex per line: ``value,dim,v0[,v1[,v2]]``."""
        return "".join(
            f"{s.value!r},{s.dim}," + ",".join(map(str, s.vertices)) + "\n" for s in self.simplices
        )


def alpha_filtration(tri: Triangulation) -> Filtration:
    """
    Alpha-complex filtration of a planar Delaunay triangulation.

    Triangles enter at their circumradius. An edge enters at half its length
    unless it is attached (an opposite vertex lies strictly inside its
    diametral disk), in which case it enters with its earliest coface.
    """
    pts = tri.points
    n = len(pts)
    edge_id = {(int(u), int(v)): k for k, (u, v) in enumerate(tri.edges)}
    half = tri.edge_radius.astype(float)
    attached = np.zeros(len(tri.edges), dtype=bool)
    coface_min = np.full(len(tri.edges), math.inf)

    tri_val = np.empty(len(tri.triangles))
    for t, (i, j, k) in enumerate(tri.triangles):
        i, j, k = int(i), int(j), int(k)
        ids = (edge_id[(i, j)], edge_id[(i, k)], edge_id[(j, k)])
        # max() guards against last-ulp disagreement between R and a half-length
        val = max(float(tri.tri_radius[t]), *(half[e] for e in ids))
        tri_val[t] = val
        for e, w in zip(ids, (k, j, i)):
            u, v = tri.edges[e]
            mid = (pts[u] + pts[v]) / 2.0
            if math.dist(pts[w], mid) < half[e] - TOL * max(1.0, half[e]):
                attached[e] = True
            coface_min[e] = min(coface_min[e], val)

    edge_val = np.where(attached, coface_min, half)
    simplices = [Simplex((v,), 0.0) for v in range(n)]
    simplices += [Simplex((int(u), int(v)), float(edge_val[e])) for e, (u, v) in enumerate(tri.edges)]
    simplices += [Simplex(tuple(int(x) for x in t), float(tri_val[m])) for m, t in enumerate(tri.triangles)]
    return Filtration.from_simplices(simplices, "alpha", n)


def rips_filtration(cloud: PointCloud, max_scale: float = math.inf) -> Filtration:
    """
    Vietoris-Rips filtration capped at dimension 2.

    Edge ``{p, q}`` enters at ``d(p, q) / 2``; a triangle enters at the largest
    value of its edges. Only simplices with value ``<= max_scale`` are kept.
    """
    if not max_scale > 0:
        raise ValueError(f"max_scale must be positive; got {max_scale}")
    D = cloud.distances()
    n = cloud.n
    half = D / 2.0
    simplices = [Simplex((v,), 0.0) for v in range(n)]
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if half[i, j] <= max_scale:
                simplices.append(Simplex((i, j), float(half[i, j])))
                nbrs[i].add(j)
    for i in range(n):
        for j in sorted(nbrs[i]):
            for k in sorted(nbrs[i] & nbrs[j]):
                val = max(half[i, j], half[i, k], half[j, k])
                simplices.append(Simplex((i, j, k), float(val)))
    return Filtration.from_simplices(simplices, "rips", n, max_scale)


def build_filtration(cloud: PointCloud, kind: str = "auto", max_scale: float = math.inf) -> Filtration:
    """Alpha filtration for planar coordinate clouds, Rips otherwise (or as requested)."""
    if kind == "auto":
        kind = "alpha" if cloud.points is not None and cloud.dim == 2 else "rips"
    if kind == "alpha":
        if cloud.points is None or cloud.dim != 2:
            raise CloudError("alpha filtration needs a planar coordinate cloud")
        return alpha_filtration(delaunay(cloud))
    if kind == "rips":
        return rips_filtration(cloud, max_scale)
    raise ValueError(f"unknown filtration kind {kind!r}")


def filtration_from_lists(vertices: int, edges: Sequence[tuple[tuple[int, int], float]],
                          triangles: Sequence[tuple[tuple[int, int, int], float]] = (),
                          kind: str = "custom") -> Filtration:
    """Convenience constructor used by tests and by graph-offset filtrations."""
    simplices = [Simplex((v,), 0.0) for v in range(vertices)]
    simplices += [Simplex(tuple(sorted(e)), float(val)) for e, val in edges]
    simplices += [Simplex(tuple(sorted(t)), float(val)) for t, val in triangles]
    return Filtration.from_simplices(simplices, kind, vertices)
