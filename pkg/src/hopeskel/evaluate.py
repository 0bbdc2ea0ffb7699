"""Skeleton quality measures and the benchmark runner."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from .baselines import MAPPER_EPS_GRID, MAPPER_T_GRID, REEB_ALPHA_GRID, MapperConfig, alpha_reeb, mapper
from .geometry import PointCloud, distance_to_segments, load_cloud
from .hopes import hopes_of_cloud, prune_degree_one, simhopes
from .persistence import diagonal_gaps
from .skeleton import SkeletonGraph
from .synth import DatasetSpec, EmbeddedGraph, make_cloud, make_pattern, read_manifest

__all__ = [
    "betti_number",
    "smooth_degree_two",
    "is_homeomorphic",
    "rms_distance",
    "max_distance_to_graph",
    "directed_hausdorff_segments",
    "hausdorff_cloud_graph",
    "largest_component",
    "CloudResult",
    "EvalReport",
    "run_benchmark",
]


def betti_number(g: SkeletonGraph) -> int:
    """First Betti number ``E - V + #components``."""
    return g.betti()


def _as_multigraph(g) -> nx.MultiGraph:
    if isinstance(g, nx.Graph):
        return nx.MultiGraph(g)
    if isinstance(g, EmbeddedGraph):
        g = g.to_skeleton()
    return g.to_networkx()


def smooth_degree_two(g) -> nx.MultiGraph:
    """
    Erase every degree-2 vertex, merging its two edges into one.

    A component that is a pure cycle ends as a single vertex with a loop.
    """
    G = _as_multigraph(g).copy()
    changed = True
    while changed:
        changed = False
        for w in sorted(G.nodes):
            if G.degree(w) != 2 or G.number_of_edges(w, w) > 0:
                continue
            nbrs = [x for _, x in G.edges(w)]
            a, b = nbrs
            G.remove_node(w)
            G.add_edge(a, b)
            changed = True
    return G


def is_homeomorphic(a, b) -> bool:
    """Topological equivalence of two graphs: isomorphism after smoothing degree-2 vertices."""
    A, B = smooth_degree_two(a), smooth_degree_two(b)
    if A.number_of_nodes() != B.number_of_nodes() or A.number_of_edges() != B.number_of_edges():
        return False
    if sorted(d for _, d in A.degree) != sorted(d for _, d in B.degree):
        return False
    return nx.is_isomorphic(A, B)


def largest_component(g: SkeletonGraph) -> SkeletonGraph:
    """The component with the most edges (ties: the one with the smallest vertex id)."""
    comps = g.components()
    if len(comps) <= 1:
        return g
    count = {min(c): 0 for c in comps}
    where = {v: min(c) for c in comps for v in c}
    for e in g.edges:
        count[where[e.u]] += 1
    best = max(comps, key=lambda c: (count[min(c)], -min(c)))
    return g.induced(best)


# -----------------------------------------------------------------------------
# geometric measures
# -----------------------------------------------------------------------------
def _cloud_points(cloud) -> np.ndarray:
    return cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))


def rms_distance(cloud, g, mode: str = "mean") -> float:
    """
    Root of the mean (``mode='mean'``) or the sum (``mode='sum'``) of squared
    distances from the cloud points to the nearest edge of ``g``. Isolated
    vertices count as degenerate edges.
    """
    P = _cloud_points(cloud)
    A, B = g.geometry() if isinstance(g, SkeletonGraph) else g.segments()
    if len(A) == 0:
        raise ValueError("graph has no vertices")
    d = distance_to_segments(P, A, B)
    s = float(np.sum(d * d))
    if mode == "mean":
        return math.sqrt(s / len(P))
    if mode == "sum":
        return math.sqrt(s)
    raise ValueError(f"unknown mode {mode!r}")


def max_distance_to_graph(points, g) -> float:
    A, B = g.geometry() if isinstance(g, SkeletonGraph) else g.segments()
    return float(np.max(distance_to_segments(_cloud_points(points), A, B)))


def _pieces(A: np.ndarray, B: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Split segments into consecutive pieces no longer than ``step``."""
    a_out, b_out = [], []
    for a, b in zip(A, B):
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / step)))
        t = np.linspace(0.0, 1.0, k + 1)[:, None]
        P = a * (1 - t) + b * t
        a_out.append(P[:-1])
        b_out.append(P[1:])
    if not a_out:
        return np.empty((0, 2)), np.empty((0, 2))
    return np.vstack(a_out), np.vstack(b_out)


def directed_hausdorff_segments(src, dst, step: float = 0.01, chunk: int = 256) -> float:
    """
    Upper bound on ``sup_{x in src} d(x, dst)`` for two segment unions.

    The distance to one segment is convex along a line, so on a piece
    ``[a, b]`` of ``src`` it is at most ``max(d(a, s), d(b, s))`` for every
    segment ``s`` of ``dst``. The bound tightens as ``step`` shrinks.
    """
    SA, SB = src.geometry() if isinstance(src, SkeletonGraph) else src.segments() if hasattr(src, "segments") else src
    DA, DB = dst.geometry() if isinstance(dst, SkeletonGraph) else dst.segments() if hasattr(dst, "segments") else dst
    PA, PB = _pieces(np.asarray(SA, float), np.asarray(SB, float), step)
    from .geometry import point_segment_sqdist

    best = 0.0
    for s in range(0, len(PA), chunk):
        da = point_segment_sqdist(PA[s:s + chunk], DA, DB)
        db = point_segment_sqdist(PB[s:s + chunk], DA, DB)
        val = np.min(np.maximum(da, db), axis=1)
        best = max(best, float(np.sqrt(np.max(val))) if len(val) else 0.0)
    # isolated points of src (degenerate segments) are handled as zero-length pieces
    return best


def hausdorff_cloud_graph(cloud, g, step: float = 1e-3) -> float:
    """
    Upper bound on the Hausdorff distance between a cloud and an embedded
    graph. Graph-to-cloud uses the 1-Lipschitz bound on pieces of length
    ``step`` (overestimate at most ``step / 2``); cloud-to-graph is exact.
    """
    P = _cloud_points(cloud)
    to_graph = max_distance_to_graph(P, g)
    A, B = g.segments()
    PA, PB = _pieces(A, B, step)
    tree = cKDTree(P)
    da, _ = tree.query(PA)
    db, _ = tree.query(PB)
    h = np.linalg.norm(PB - PA, axis=1)
    to_cloud = float(np.max((da + db + h) / 2.0)) if len(h) else 0.0
    return max(to_graph, to_cloud)


# -----------------------------------------------------------------------------
# benchmark
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class CloudResult:
    algorithm: str
    type_id: int
    index: int
    pattern: str
    noise: str
    betti_ok: bool
    homeo_ok: bool
    rms: float | None          # over Betti-correct outputs only
    ms: float
    error: str = ""


def _hopes_run(P: np.ndarray, target, want: int, rms_mode: str):
    t0 = time.perf_counter()
    cloud = PointCloud.from_points(P)
    h = hopes_of_cloud(cloud)
    gd = diagonal_gaps(h.meta["_pd1"])
    s = simhopes(h, gd)
    ms = (time.perf_counter() - t0) * 1e3
    ok = s.betti() == want
    homeo = ok and is_homeomorphic(largest_component(s), target)
    rms = rms_distance(P, s, rms_mode) if ok else None
    return ok, homeo, rms, ms


def _grid_run(P: np.ndarray, target, want: int, rms_mode: str, build):
    """Best of grid, separately per measure; time is the mean over the grid."""
    cloud = PointCloud.from_points(P)
    any_ok = any_homeo = False
    best_rms = None
    times = []
    for make in build:
        t0 = time.perf_counter()
        g = prune_degree_one(make(cloud))
        times.append((time.perf_counter() - t0) * 1e3)
        if g.betti() != want:
            continue
        any_ok = True
        if not any_homeo and is_homeomorphic(largest_component(g), target):
            any_homeo = True
        r = rms_distance(P, g, rms_mode)
        best_rms = r if best_rms is None else min(best_rms, r)
    return any_ok, any_homeo, best_rms, float(np.mean(times)) if times else 0.0


def _task(args) -> list[CloudResult]:
    tid, idx, pattern, noise, P, algorithms, mapper_grid, reeb_grid, rms_mode = args
    target = make_pattern(pattern)
    want = target.betti()
    out = []
    for algo in algorithms:
        try:
            if algo == "hopes":
                ok, homeo, rms, ms = _hopes_run(P, target, want, rms_mode)
            elif algo == "mapper":
                build = [lambda c, t=t, e=e: mapper(c, MapperConfig(t, e)) for t, e in mapper_grid]
                ok, homeo, rms, ms = _grid_run(P, target, want, rms_mode, build)
            elif algo == "alpha-reeb":
                build = [lambda c, a=a: alpha_reeb(c, a) for a in reeb_grid]
                ok, homeo, rms, ms = _grid_run(P, target, want, rms_mode, build)
            else:
                raise ValueError(f"unknown algorithm {algo!r}")
            out.append(CloudResult(algo, tid, idx, pattern, noise, ok, homeo, rms, ms))
        except Exception as exc:  # per-cloud failures are recorded, not fatal
            out.append(CloudResult(algo, tid, idx, pattern, noise, False, False, None, 0.0, repr(exc)))
    return out


@dataclass
class EvalReport:
    """Per-cloud results and their per-(algorithm, type) aggregation."""

    results: list[CloudResult]
    rms_mode: str = "mean"
    best_of_grid: bool = True

    REPORT_FIELDS = ("algorithm", "pattern", "noise", "betti%", "homeo%", "rms", "ms", "clouds", "failures")

    def summary(self) -> list[dict]:
        groups: dict[tuple, list[CloudResult]] = {}
        for r in self.results:
            groups.setdefault((r.algorithm, r.type_id, r.pattern, r.noise), []).append(r)
        rows = []
        for (algo, tid, pattern, noise), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            n = len(rs)
            ok = [r for r in rs if r.betti_ok]
            rms = [r.rms for r in ok if r.rms is not None]
            rows.append({
                "algorithm": algo,
                "pattern": pattern,
                "noise": noise,
                "betti%": 100.0 * len(ok) / n,
                "homeo%": 100.0 * sum(r.homeo_ok for r in ok) / len(ok) if ok else 0.0,
                "rms": float(np.mean(rms)) if rms else float("nan"),
                "ms": float(np.mean([r.ms for r in rs])),
                "clouds": n,
                "failures": sum(1 for r in rs if r.error),
            })
        return rows

    def thresholds(self, levels: Sequence[float] = (90.0, 95.0)) -> list[dict]:
        """
        Per (pattern, noise kind, algorithm): the largest noise parameter up to
        which every level keeps the Betti success rate at or above each threshold.
        """
        table: dict[tuple, list[tuple[float, float]]] = {}
        for row in self.summary():
            kind, _, param = row["noise"].partition(":")
            p = float(param) if param else 0.0
            table.setdefault((row["pattern"], kind, row["algorithm"]), []).append((p, row["betti%"]))
        out = []
        for (pattern, kind, algo), pts in sorted(table.items()):
            pts.sort()
            rec = {"pattern": pattern, "noise_kind": kind, "algorithm": algo}
            for lv in levels:
                last = ""
                for p, rate in pts:
                    if rate < lv:
                        break
                    last = p
                rec[f"last>={lv:g}"] = last
            out.append(rec)
        return out

    def write_csv(self, path) -> None:
        rows = self.summary()
        with open(path, "w", newline="") as fh:
            fh.write(f"# rms={'sqrt(mean d^2)' if self.rms_mode == 'mean' else 'sqrt(sum d^2)'}; "
                     f"baselines best-of-grid per measure per cloud={self.best_of_grid}\n")
            w = csv.DictWriter(fh, fieldnames=self.REPORT_FIELDS, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})

    def write_thresholds(self, path, levels: Sequence[float] = (90.0, 95.0)) -> None:
        rows = self.thresholds(levels)
        fields = ["pattern", "noise_kind", "algorithm"] + [f"last>={lv:g}" for lv in levels]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)


def _clouds_from(source, base_dir=None) -> Iterable[tuple[int, int, str, str, np.ndarray]]:
    if isinstance(source, DatasetSpec):
        for tid, ct in enumerate(source.types):
            for i in range(source.clouds_per_type):
                s = make_cloud(ct, source.seed, tid, i, source.density)
                yield tid, i, ct.pattern, ct.noise.tag(), s.points
        return
    path = Path(source)
    rows = read_manifest(path)
    base = Path(base_dir) if base_dir is not None else path.parent
    counter: dict[int, int] = {}
    for r in rows:
        i = counter.get(r.type_id, 0)
        counter[r.type_id] = i + 1
        noise = "none" if r.noise_kind == "none" else f"{r.noise_kind}:{r.noise_param:g}"
        yield r.type_id, i, r.pattern, noise, load_cloud(base / r.path).points


def run_benchmark(source, algorithms: Sequence[str] = ("hopes", "mapper", "alpha-reeb"),
                  mapper_grid: Sequence[tuple[float, float]] | None = None,
                  reeb_grid: Sequence[float] | None = None,
                  rms_mode: str = "mean", n_jobs: int = 1, base_dir=None) -> EvalReport:
    """
    Run the algorithms on every cloud of a dataset spec or manifest file.

    HoPeS is parameter-free (derived skeleton for the widest gaps, pruned and
    simplified at the max-death scale). Mapper and alpha-Reeb are scanned over
    their grids and each measure keeps its best value per cloud.
    """
    if mapper_grid is None:
        mapper_grid = [(t, e) for t in MAPPER_T_GRID for e in MAPPER_EPS_GRID]
    if reeb_grid is None:
        reeb_grid = list(REEB_ALPHA_GRID)
    tasks = [(tid, i, pat, noise, P, tuple(algorithms), tuple(mapper_grid), tuple(reeb_grid), rms_mode)
             for tid, i, pat, noise, P in _clouds_from(source, base_dir)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            chunks = list(ex.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    results = [r for c in chunks for r in c]
    results.sort(key=lambda r: (r.algorithm, r.type_id, r.index))
    return EvalReport(results, rms_mode, True)
