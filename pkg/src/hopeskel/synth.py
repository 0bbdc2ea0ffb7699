"""Synthetic planar patterns, noisy samples and dataset manifests."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .geometry import PointCloud, save_cloud
from .skeleton import Edge, SkeletonGraph

__all__ = [
    "EmbeddedGraph",
    "make_pattern",
    "parse_pattern",
    "EdgeSample",
    "sample_points",
    "NoiseModel",
    "apply_noise",
    "CloudType",
    "DatasetSpec",
    "ManifestRow",
    "cloud_rng",
    "make_cloud",
    "iter_dataset",
    "generate_dataset",
    "paper_grid",
    "read_manifest",
]


@dataclass(frozen=True)
class EmbeddedGraph:
    """Straight-line planar graph with per-edge frames."""

    vertices: np.ndarray      # (V, 2)
    edges: np.ndarray         # (E, 2) int
    name: str = ""

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]], axis=1)

    @property
    def directions(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return d / self.lengths[:, None]

    @property
    def normals(self) -> np.ndarray:
        """Left normals of the edge directions ``u -> v``."""
        d = self.directions
        return np.stack([-d[:, 1], d[:, 0]], axis=1)

    @property
    def total_length(self) -> float:
        return float(math.fsum(self.lengths))

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices[self.edges[:, 0]], self.vertices[self.edges[:, 1]]

    def to_skeleton(self) -> SkeletonGraph:
        edges = tuple(Edge(int(u), int(v), float(L), "link") for (u, v), L in zip(self.edges, self.lengths))
        return SkeletonGraph(np.arange(len(self.vertices)), self.vertices, edges, f"pattern:{self.name}")

    def betti(self) -> int:
        return self.to_skeleton().betti()


def _wheel(k: int) -> EmbeddedGraph:
    if k < 3:
        raise ValueError("a wheel needs k >= 3")
    ang = 2 * np.pi * np.arange(k) / k
    V = np.vstack([[0.0, 0.0], np.stack([np.cos(ang), np.sin(ang)], axis=1)])
    E = [(0, i + 1) for i in range(k)] + [(i + 1, (i + 1) % k + 1) for i in range(k)]
    return EmbeddedGraph(V, np.array([tuple(sorted(e)) for e in E]), f"W({k})")


def _grid(k: int, l: int) -> EmbeddedGraph:
    if k < 1 or l < 1:
        raise ValueError("a grid needs k, l >= 1")
    idx = {}
    V = []
    for i in range(k + 1):
        for j in range(l + 1):
            idx[(i, j)] = len(V)
            V.append((float(i), float(j)))
    E = []
    for (i, j), a in idx.items():
        if (i + 1, j) in idx:
            E.append((a, idx[(i + 1, j)]))
        if (i, j + 1) in idx:
            E.append((a, idx[(i, j + 1)]))
    return EmbeddedGraph(np.array(V), np.array(E), f"G({k},{l})")


_HEX_DIRS = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]   # axial, counter-clockwise from 30 degrees


def _hex_centres(k: int) -> list[tuple[int, int]]:
    """Axial coordinates of the first ``k`` hexagons: the centre, then ring after ring."""
    out = [(0, 0)]
    ring = 1
    while len(out) < k:
        # start at the cell in direction 4 scaled by the ring, walk the six sides
        q, r = _HEX_DIRS[4][0] * ring, _HEX_DIRS[4][1] * ring
        cells = []
        for side in range(6):
            for _ in range(ring):
                cells.append((q, r))
                dq, dr = _HEX_DIRS[side]
                q, r = q + dq, r + dr
        # order the ring counter-clockwise by angle, starting from 30 degrees
        def angle(c):
            x, y = 1.5 * c[0], math.sqrt(3) * (c[1] + c[0] / 2)
            return (math.atan2(y, x) - math.pi / 6) % (2 * math.pi)
        out.extend(sorted(cells, key=angle))
        ring += 1
    return out[:k]


def _hexagons(k: int) -> EmbeddedGraph:
    if k < 1:
        raise ValueError("hexagons need k >= 1")
    verts: dict[tuple[float, float], int] = {}
    V: list[tuple[float, float]] = []
    E: set[tuple[int, int]] = set()

    def vid(p):
        key = (round(p[0], 9) + 0.0, round(p[1], 9) + 0.0)
        if key not in verts:
            verts[key] = len(V)
            V.append(p)
        return verts[key]

    for q, r in _hex_centres(k):
        cx, cy = 1.5 * q, math.sqrt(3) * (r + q / 2)
        ring = [vid((cx + math.cos(math.pi * i / 3), cy + math.sin(math.pi * i / 3))) for i in range(6)]
        for i in range(6):
            a, b = ring[i], ring[(i + 1) % 6]
            E.add((min(a, b), max(a, b)))
    return EmbeddedGraph(np.array(V), np.array(sorted(E)), f"H({k})")


_PATTERN_RE = re.compile(r"^\s*(wheel|w|grid|g|hexagons|hex|h)\s*[:(]?\s*(\d+)\s*(?:[,x]\s*(\d+))?\s*\)?\s*$", re.I)


def parse_pattern(text: str) -> tuple[str, tuple[int, ...]]:
    """``'wheel:5'``, ``'W(5)'``, ``'grid:3,3'``, ``'hex:6'`` -> (kind, params)."""
    m = _PATTERN_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse pattern {text!r}")
    kind = {"w": "wheel", "g": "grid", "h": "hexagons", "hex": "hexagons"}.get(m.group(1).lower(), m.group(1).lower())
    params = tuple(int(x) for x in m.groups()[1:] if x is not None)
    if kind == "grid" and len(params) != 2:
        raise ValueError("grid patterns need two sizes, e.g. grid:3,3")
    if kind != "grid" and len(params) != 1:
        raise ValueError(f"{kind} patterns take one size")
    return kind, params


def make_pattern(kind: str, *params: int) -> EmbeddedGraph:
    """Wheel ``W(k)``, grid ``G(k,l)`` or hexagons ``H(k)``; ``kind`` may be a full spec string."""
    if not params:
        kind, params = parse_pattern(kind)
    kind = kind.lower()
    if kind in ("wheel", "w"):
        return _wheel(*params)
    if kind in ("grid", "g"):
        return _grid(*params)
    if kind in ("hexagons", "hex", "h"):
        return _hexagons(*params)
    raise ValueError(f"unknown pattern {kind!r}")


# -----------------------------------------------------------------------------
# sampling and noise
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class EdgeSample:
    """Points together with the pattern edge each one was drawn from."""

    points: np.ndarray
    edge: np.ndarray
    graph: EmbeddedGraph

    def cloud(self) -> PointCloud:
        return PointCloud.from_points(self.points)


def sample_points(g: EmbeddedGraph, density: float = 100.0, rng: np.random.Generator | int | None = None,
                  n: int | None = None) -> EdgeSample:
    """
    Uniform sample by length: one variable on ``[0, total length]`` picks the
    edge and the point ``w*u + (1-w)*v`` on it. ``n`` defaults to
    ``round(density * total length)``.
    """
    if n is None:
        if not density > 0:
            raise ValueError("density must be positive")
        n = int(round(density * g.total_length))
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    L = g.lengths
    cum = np.concatenate([[0.0], np.cumsum(L)])
    t = rng.uniform(0.0, cum[-1], n)
    j = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(L) - 1)
    w = (t - cum[j]) / L[j]
    U = g.vertices[g.edges[j, 0]]
    V = g.vertices[g.edges[j, 1]]
    P = w[:, None] * U + (1.0 - w)[:, None] * V
    return EdgeSample(P, j, g)


@dataclass(frozen=True)
class NoiseModel:
    """``uniform`` with bound ``param``, ``gaussian`` with deviation ``param``, or ``none``."""

    kind: str = "none"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and not self.param > 0:
            raise ValueError("noise parameter must be positive")

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        if text.strip().lower() in ("none", "0", ""):
            return cls()
        kind, _, p = text.partition(":")
        return cls(kind.strip().lower(), float(p))

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``(n, 2)`` shifts ``(d_e, d_perp)``."""
        if self.kind == "uniform":
            return rng.uniform(-self.param, self.param, (n, 2))
        if self.kind == "gaussian":
            return rng.normal(0.0, self.param, (n, 2))
        return np.zeros((n, 2))

    def tag(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind}:{self.param:g}"


def apply_noise(sample: EdgeSample, model: NoiseModel, rng: np.random.Generator | int | None = None) -> EdgeSample:
    """Shift each point by ``d_e`` along its edge (``u -> v``) and ``d_perp`` along the left normal."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    D = model.draw(rng, len(sample.points))
    g = sample.graph
    P = sample.points + D[:, :1] * g.directions[sample.edge] + D[:, 1:] * g.normals[sample.edge]
    return EdgeSample(P, sample.edge, g)


# -----------------------------------------------------------------------------
# datasets
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class CloudType:
    pattern: str
    noise: NoiseModel

    def tag(self) -> str:
        kind, params = parse_pattern(self.pattern)
        p = "x".join(map(str, params))
        return f"{kind}{p}_{self.noise.kind}{self.noise.param:g}"


@dataclass(frozen=True)
class DatasetSpec:
    """Cloud types, clouds per type, sampling density and the master seed."""

    types: tuple[CloudType, ...]
    clouds_per_type: int = 200
    density: float = 100.0
    seed: int = 0

    @classmethod
    def product(cls, patterns: Sequence[str], noises: Sequence[NoiseModel | str], **kw) -> "DatasetSpec":
        ns = [NoiseModel.parse(n) if isinstance(n, str) else n for n in noises]
        return cls(tuple(CloudType(p, n) for p in patterns for n in ns), **kw)


@dataclass(frozen=True)
class ManifestRow:
    type_id: int
    pattern: str
    noise_kind: str
    noise_param: float
    seed: str
    n_points: int
    path: str

    FIELDS = ("type_id", "pattern", "noise_kind", "noise_param", "seed", "n_points", "path")

    def as_list(self) -> list:
        return [self.type_id, self.pattern, self.noise_kind, repr(self.noise_param), self.seed, self.n_points, self.path]


def cloud_rng(seed: int, type_id: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for cloud ``index`` of type ``type_id``."""
    ss = np.random.SeedSequence(seed, spawn_key=(type_id, index))
    return np.random.Generator(np.random.Philox(ss))


def make_cloud(ct: CloudType, seed: int, type_id: int, index: int, density: float = 100.0) -> EdgeSample:
    rng = cloud_rng(seed, type_id, index)
    g = make_pattern(ct.pattern)
    return apply_noise(sample_points(g, density, rng), ct.noise, rng)


def iter_dataset(spec: DatasetSpec) -> Iterator[tuple[int, int, CloudType, EdgeSample]]:
    """Yield ``(type_id, index, type, sample)`` for every cloud of the dataset, in manifest order."""
    for tid, ct in enumerate(spec.types):
        for i in range(spec.clouds_per_type):
            yield tid, i, ct, make_cloud(ct, spec.seed, tid, i, spec.density)


def generate_dataset(spec: DatasetSpec, out_dir, write_clouds: bool = True) -> list[ManifestRow]:
    """
    Write every cloud as CSV and a ``manifest.csv``.

    With ``write_clouds=False`` only the manifest is written (paths are where
    the clouds would go; point counts are exact since they depend only on the
    pattern and density). Failures to write a cloud are recorded in the
    manifest's path column as ``ERROR: ...`` rather than aborting the batch.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[ManifestRow] = []
    for tid, ct in enumerate(spec.types):
        g = make_pattern(ct.pattern)
        n_pts = int(round(spec.density * g.total_length))
        for i in range(spec.clouds_per_type):
            rel = f"{tid:03d}_{ct.tag()}_{i:03d}.csv"
            seed_tag = f"{spec.seed}/{tid}/{i}"
            path = rel
            if write_clouds:
                s = make_cloud(ct, spec.seed, tid, i, spec.density)
                header = [f"pattern={ct.pattern}", f"noise={ct.noise.tag()}", f"seed={seed_tag}",
                          f"density={spec.density:g}"]
                try:
                    save_cloud(s.cloud(), out / rel, header)
                except OSError as exc:
                    path = f"ERROR: {exc}"
            rows.append(ManifestRow(tid, ct.pattern, ct.noise.kind, ct.noise.param, seed_tag, n_pts, path))
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ManifestRow.FIELDS)
        for r in rows:
            w.writerow(r.as_list())
    return rows


def read_manifest(path) -> list[ManifestRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [ManifestRow(int(r["type_id"]), r["pattern"], r["noise_kind"], float(r["noise_param"]),
                            r["seed"], int(r["n_points"]), r["path"]) for r in rd]


def _steps(start: float, stop: float, step: float) -> list[float]:
    n = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def paper_grid(clouds_per_type: int = 200, density: float = 100.0, seed: int = 0) -> DatasetSpec:
    """The full benchmark grid: 70 wheel, 108 grid and 217 hexagonal cloud types."""
    types: list[CloudType] = []

    def add(patterns, mus, sigmas):
        for p in patterns:
            types.extend(CloudType(p, NoiseModel("uniform", m)) for m in mus)
            types.extend(CloudType(p, NoiseModel("gaussian", s)) for s in sigmas)

    add([f"wheel:{k}" for k in range(3, 10)], _steps(0.05, 0.25, 0.05), _steps(0.02, 0.1, 0.02))
    add([f"grid:{k},{l}" for k, l in ((1, 1), (2, 1), (3, 1), (2, 2), (3, 2), (3, 3))],
        _steps(0.05, 0.4, 0.05), _steps(0.02, 0.2, 0.02))
    add([f"hexagons:{k}" for k in range(1, 8)], _steps(0.05, 0.75, 0.05), _steps(0.02, 0.32, 0.02))
    return DatasetSpec(tuple(types), clouds_per_type, density, seed)
