"""The graph type shared by HoPeS, its subgraphs and the baseline skeletons."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

__all__ = ["Edge", "SkeletonGraph"]


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float
    kind: str = "tree"            # tree | critical | link
    birth: float | None = None
    death: float | None = None

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u <= self.v else (self.v, self.u)

    def to_json(self) -> dict:
        out = {"u": self.u, "v": self.v, "length": self.length, "kind": self.kind}
        if self.birth is not None:
            out["birth"] = self.birth
        if self.death is not None:
            out["death"] = self.death if math.isfinite(self.death) else "inf"
        return out


@dataclass(frozen=True)
class SkeletonGraph:
    """
    Embedded (multi)graph.

    Vertices are identified by integer ids (cloud indices for HoPeS graphs);
    ``coords[i]`` is the position of ``ids[i]`` or ``coords`` is ``None`` for
    abstract graphs. Edge lengths of HoPeS graphs are filtration lengths, i.e.
    twice the scale at which the edge enters.
    """

    ids: np.ndarray
    coords: np.ndarray | None
    edges: tuple[Edge, ...]
    provenance: str = "hopes"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        ids = np.asarray(self.ids, dtype=int)
        object.__setattr__(self, "ids", ids)
        if self.coords is not None:
            object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(len(ids), -1))
        object.__setattr__(self, "edges", tuple(self.edges))

    # ---- basic structure ---------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def row(self) -> dict[int, int]:
        cache = self.meta.setdefault("_row", None)
        if cache is None or len(cache) != len(self.ids):
            cache = {int(v): i for i, v in enumerate(self.ids)}
            self.meta["_row"] = cache
        return cache

    def position(self, vid: int) -> np.ndarray:
        if self.coords is None:
            raise ValueError("graph has no coordinates")
        return self.coords[self.row[vid]]

    def degrees(self) -> dict[int, int]:
        deg = {int(v): 0 for v in self.ids}
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {int(v): [] for v in self.ids}
        for e in self.edges:
            adj[e.u].append(e.v)
            if e.u != e.v:
                adj[e.v].append(e.u)
        return adj

    def components(self) -> list[list[int]]:
        parent = {int(v): int(v) for v in self.ids}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = find(e.u), find(e.v)
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[int, list[int]] = {}
        for v in self.ids:
            groups.setdefault(find(int(v)), []).append(int(v))
        return sorted(groups.values())

    def betti(self) -> int:
        """First Betti number ``E - V + #components``."""
        return self.n_edges - self.n_vertices + len(self.components())

    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges)

    def critical_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "critical"]

    def tree_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "tree"]

    # ---- derived graphs ----------------------------------------------------
    def filter_edges(self, keep: Callable[[Edge], bool], provenance: str | None = None) -> "SkeletonGraph":
        """Same vertex set, edges restricted by a predicate."""
        return replace(
            self,
            edges=tuple(e for e in self.edges if keep(e)),
            provenance=provenance or self.provenance,
            meta={k: v for k, v in self.meta.items() if not k.startswith("_")},
        )

    def induced(self, vertex_ids: Iterable[int], provenance: str | None = None) -> "SkeletonGraph":
        keep = sorted(set(int(v) for v in vertex_ids))
        rows = [self.row[v] for v in keep]
        kset = set(keep)
        return SkeletonGraph(
            ids=np.array(keep, dtype=int),
            coords=None if self.coords is None else self.coords[rows],
            edges=tuple(e for e in self.edges if e.u in kset and e.v in kset),
            provenance=provenance or self.provenance,
            meta={k: v for k, v in self.meta.items() if not k.startswith("_")},
        )

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as two ``(E, d)`` arrays."""
        if self.coords is None:
            raise ValueError("graph has no coordinates")
        if not self.edges:
            d = self.coords.shape[1] if self.coords.size else 2
            return np.empty((0, d)), np.empty((0, d))
        r = self.row
        iu = [r[e.u] for e in self.edges]
        iv = [r[e.v] for e in self.edges]
        return self.coords[iu], self.coords[iv]

    def geometry(self) -> tuple[np.ndarray, np.ndarray]:
        """Segments plus isolated vertices as degenerate segments."""
        A, B = self.segments()
        deg = self.degrees()
        iso = [self.row[v] for v, d in deg.items() if d == 0]
        if iso:
            P = self.coords[iso]
            A, B = np.vstack([A, P]), np.vstack([B, P])
        return A, B

    def euclidean_lengths(self) -> np.ndarray:
        A, B = self.segments()
        return np.linalg.norm(A - B, axis=1)

    def to_networkx(self):
        import networkx as nx

        G = nx.MultiGraph()
        G.add_nodes_from(int(v) for v in self.ids)
        G.add_edges_from((e.u, e.v) for e in self.edges)
        return G

    # ---- serialisation -----------------------------------------------------
    def to_dict(self) -> dict:
        verts = []
        for i, v in enumerate(self.ids):
            rec = {"id": int(v)}
            if self.coords is not None:
                rec["x"] = float(self.coords[i, 0])
                rec["y"] = float(self.coords[i, 1]) if self.coords.shape[1] > 1 else 0.0
            verts.append(rec)
        meta = {k: v for k, v in self.meta.items() if not k.startswith("_")}
        return {
            "vertices": verts,
            "edges": [e.to_json() for e in sorted(self.edges, key=lambda e: (e.key, e.kind, e.length))],
            "provenance": self.provenance,
            "meta": meta,
        }

    def to_json(self, header: dict | None = None) -> str:
        d = self.to_dict()
        if header is not None:
            d = {"header": header, **d}
        return json.dumps(d, indent=2, sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "SkeletonGraph":
        verts = d["vertices"]
        ids = np.array([v["id"] for v in verts], dtype=int)
        coords = None
        if verts and "x" in verts[0]:
            coords = np.array([[v["x"], v["y"]] for v in verts], dtype=float)
        edges = []
        for e in d["edges"]:
            death = e.get("death")
            if death == "inf":
                death = math.inf
            edges.append(Edge(int(e["u"]), int(e["v"]), float(e["length"]), e.get("kind", "tree"),
                              e.get("birth"), death))
        return cls(ids, coords, tuple(edges), d.get("provenance", "hopes"), dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text: str) -> "SkeletonGraph":
        return cls.from_dict(json.loads(text))
