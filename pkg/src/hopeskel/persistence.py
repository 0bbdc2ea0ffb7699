"""
Persistent homology in dimensions 0 and 1 over Z/2.

H0 pairs come from a union-find sweep (equivalent to reducing the edge
columns); H1 pairs come from reducing triangle columns with Python integers as
bit-vectors. Both follow the standard youngest-creator convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Iterable, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .filtration import Filtration, FiltrationError

__all__ = [
    "PersistenceDiagram",
    "Pair",
    "Pairing",
    "PersistenceResult",
    "compute_persistence",
    "bottleneck_distance",
    "Gap",
    "GapDecomposition",
    "VerticalSplit",
    "diagonal_gaps",
    "vertical_gaps",
    "GAP_TOL",
    "PERS_TOL",
    "significant",
]

GAP_TOL = 1e-9
# relative persistence below which a computed pair counts as born and killed at once
PERS_TOL = 1e-12


def significant(birth: float, death: float) -> bool:
    """True when ``death`` exceeds ``birth`` by more than rounding noise."""
    return death - birth > PERS_TOL * max(1.0, abs(birth))


# -----------------------------------------------------------------------------
# diagrams
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class PersistenceDiagram:
    """
    Multiset of off-diagonal dots ``(birth, death)`` with multiplicities.

    Diagonal dots are implicit. ``death`` may be ``inf`` for classes that never
    die within the filtration.
    """

    dots: tuple[tuple[float, float, int], ...]
    dimension: int = 1

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]], dimension: int = 1) -> "PersistenceDiagram":
        counts: dict[tuple[float, float], int] = {}
        for b, d in pairs:
            b, d = float(b), float(d)
            if d < b:
                raise ValueError(f"dot ({b}, {d}) has death < birth")
            if d == b:
                continue
            counts[(b, d)] = counts.get((b, d), 0) + 1
        dots = tuple((b, d, m) for (b, d), m in sorted(counts.items()))
        return cls(dots, dimension)

    def __len__(self) -> int:
        return sum(m for _, _, m in self.dots)

    def points(self, finite: bool | None = None) -> np.ndarray:
        """Dots expanded by multiplicity as an ``(N, 2)`` array."""
        rows = [(b, d) for b, d, m in self.dots for _ in range(m)
                if finite is None or (math.isfinite(d) == finite)]
        return np.array(rows, dtype=float).reshape(-1, 2)

    def finite(self) -> "PersistenceDiagram":
        return PersistenceDiagram(tuple(t for t in self.dots if math.isfinite(t[1])), self.dimension)

    def live_count(self, alpha: float) -> int:
        """Number of dots with ``birth <= alpha < death``."""
        return sum(m for b, d, m in self.dots if b <= alpha < d)

    def to_json(self) -> list[dict]:
        return [
            {"birth": b, "death": (d if math.isfinite(d) else "inf"), "multiplicity": m}
            for b, d, m in self.dots
        ]

    @classmethod
    def from_json(cls, records: list[dict], dimension: int = 1) -> "PersistenceDiagram":
        pairs = []
        for r in records:
            d = math.inf if r["death"] in ("inf", None) else float(r["death"])
            pairs += [(float(r["birth"]), d)] * int(r.get("multiplicity", 1))
        return cls.from_pairs(pairs, dimension)


class Pair(NamedTuple):
    dim: int
    creator: int             # filtration index
    destroyer: int | None    # filtration index, None if never killed
    birth: float
    death: float


@dataclass(frozen=True)
class Pairing:
    pairs: tuple[Pair, ...]

    def of_dim(self, dim: int) -> list[Pair]:
        return [p for p in self.pairs if p.dim == dim]


class PersistenceResult(NamedTuple):
    pd0: PersistenceDiagram
    pd1: PersistenceDiagram
    pairing: Pairing


def compute_persistence(f: Filtration, validate: bool = True) -> PersistenceResult:
    """
    H0 and H1 persistence of a filtration.

    Every pair ``(creator, destroyer)`` is recorded in the pairing, including
    zero-persistence ones; the diagrams keep only dots with death > birth.
    Raises :class:`FiltrationError` for a filtration that is not monotone.
    """
    if validate:
        f.validate()
    simplices = f.simplices
    index = {s.vertices: i for i, s in enumerate(simplices)}

    # H0: union-find, the younger component (larger filtration index) dies
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    pairs: list[Pair] = []
    positive_edges: list[int] = []
    for pos, s in enumerate(simplices):
        if s.dim == 0:
            parent[pos] = pos
        elif s.dim == 1:
            ru = find(index[(s.vertices[0],)])
            rv = find(index[(s.vertices[1],)])
            if ru == rv:
                positive_edges.append(pos)
                continue
            young, old = max(ru, rv), min(ru, rv)
            parent[young] = old
            pairs.append(Pair(0, young, pos, simplices[young].value, s.value))

    roots = sorted({find(p) for p in parent})
    for r in roots:
        pairs.append(Pair(0, r, None, simplices[r].value, math.inf))

    # H1: reduce triangle columns; rows restricted to positive edges
    bit_of = {pos: k for k, pos in enumerate(positive_edges)}
    pivot_col: dict[int, int] = {}        # pivot bit -> reduced column
    pivot_owner: dict[int, int] = {}      # pivot bit -> triangle index
    for pos, s in enumerate(simplices):
        if s.dim != 2:
            continue
        i, j, k = s.vertices
        col = 0
        for face in ((i, j), (i, k), (j, k)):
            b = bit_of.get(index[face])
            if b is not None:
                col ^= 1 << b
        while col:
            piv = col.bit_length() - 1
            other = pivot_col.get(piv)
            if other is None:
                pivot_col[piv] = col
                pivot_owner[piv] = pos
                break
            col ^= other

    for k, epos in enumerate(positive_edges):
        tpos = pivot_owner.get(k)
        death = simplices[tpos].value if tpos is not None else math.inf
        pairs.append(Pair(1, epos, tpos, simplices[epos].value, death))

    pairs.sort(key=lambda p: (p.dim, p.creator))
    pd0 = PersistenceDiagram.from_pairs(((p.birth, p.death) for p in pairs if p.dim == 0 and significant(p.birth, p.death)), 0)
    pd1 = PersistenceDiagram.from_pairs(((p.birth, p.death) for p in pairs if p.dim == 1 and significant(p.birth, p.death)), 1)
    return PersistenceResult(pd0, pd1, Pairing(tuple(pairs)))


# -----------------------------------------------------------------------------
# bottleneck distance
# -----------------------------------------------------------------------------
def _linf(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(P[:, None, 0] - Q[None, :, 0]), np.abs(P[:, None, 1] - Q[None, :, 1]))


def _feasible(r: float, C: np.ndarray, hA: np.ndarray, hB: np.ndarray) -> bool:
    """Perfect matching in the diagonal-augmented bipartite graph at threshold r."""
    n, m = C.shape
    # rows: A dots then diagonal copies of B; cols: B dots then diagonal copies of A
    top = np.hstack([C <= r, np.diag(hA <= r) if n else np.zeros((0, 0), bool)])
    bottom = np.hstack([np.diag(hB <= r) if m else np.zeros((0, 0), bool), np.ones((m, n), bool)])
    M = np.vstack([top, bottom]) if n + m else np.zeros((0, 0), bool)
    if M.size == 0:
        return True
    match = maximum_bipartite_matching(csr_matrix(M.astype(np.int8)), perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_distance(A: PersistenceDiagram, B: PersistenceDiagram) -> float:
    """
    Exact bottleneck distance between two diagrams.

    Dots with infinite death can only be matched with each other; differing
    counts give ``inf``. The finite part is solved by binary search over the
    finite set of candidate costs with a bipartite matching test.
    """
    PA, PB = A.points(finite=True), B.points(finite=True)
    IA = np.sort(A.points(finite=False)[:, 0])
    IB = np.sort(B.points(finite=False)[:, 0])
    if len(IA) != len(IB):
        return math.inf
    inf_part = float(np.max(np.abs(IA - IB))) if len(IA) else 0.0

    hA = (PA[:, 1] - PA[:, 0]) / 2.0
    hB = (PB[:, 1] - PB[:, 0]) / 2.0
    C = _linf(PA, PB) if len(PA) and len(PB) else np.zeros((len(PA), len(PB)))
    cands = np.unique(np.concatenate([C.ravel(), hA, hB, [0.0]]))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(float(cands[mid]), C, hA, hB):
            hi = mid
        else:
            lo = mid + 1
    return max(float(cands[lo]), inf_part)


# -----------------------------------------------------------------------------
# diagonal and vertical gaps
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Gap:
    """Open strip ``lower < coordinate < upper``; ``upper`` may be ``inf``."""

    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper if math.isfinite(self.upper) else "inf",
                "width": self.width if math.isfinite(self.width) else "inf"}


def _levels(values: np.ndarray, tol: float) -> list[float]:
    """Distinct values, merging runs closer than ``tol``."""
    out: list[float] = []
    for v in np.sort(values):
        if not out or v - out[-1] > tol:
            out.append(float(v))
    return out


def _rank(gaps: list[Gap], prefer_low: bool, tol: float) -> list[Gap]:
    def cmp(g: Gap, h: Gap) -> int:
        if g.width > h.width + tol:
            return -1
        if h.width > g.width + tol:
            return 1
        # equal widths: the lower / leftmost gap counts as wider
        return -1 if g.lower < h.lower else (1 if g.lower > h.lower else 0)

    return sorted(gaps, key=cmp_to_key(cmp))


@dataclass(frozen=True)
class GapDecomposition:
    """
    Diagonal gaps of a diagram, ranked widest first.

    ``dots`` holds the finite dots (expanded by multiplicity). ``dgaps[i]`` is
    the (i+1)-th widest diagonal gap; gaps beyond the number of distinct
    persistence levels are empty.
    """

    dots: np.ndarray
    dgaps: tuple[Gap, ...]
    tol: float = GAP_TOL

    @property
    def m(self) -> int:
        return len(self.dgaps)

    def dgap(self, k: int) -> Gap | None:
        return self.dgaps[k - 1] if 1 <= k <= len(self.dgaps) else None

    def dgap_width(self, k: int) -> float:
        g = self.dgap(k)
        return 0.0 if g is None else g.width

    def ds(self, k: int) -> float:
        """Diagonal scale: the upper boundary of the lowest of the k widest gaps."""
        if not self.dgaps:
            raise ValueError("diagram has no off-diagonal dots")
        chosen = self.dgaps[:max(1, min(k, len(self.dgaps)))]
        return min(chosen, key=lambda g: g.lower).upper

    def DS(self, k: int) -> np.ndarray:
        if not self.dgaps:
            return np.empty((0, 2))
        a = self.ds(k)
        pers = self.dots[:, 1] - self.dots[:, 0]
        return self.dots[pers >= a - self.tol]

    def to_json(self) -> dict:
        return {
            "dots": [[float(b), float(d)] for b, d in self.dots],
            "dgaps": [g.to_json() for g in self.dgaps],
            "ds": [self.ds(k) for k in range(1, self.m + 1)],
        }


def diagonal_gaps(pd: PersistenceDiagram, tol: float = GAP_TOL) -> GapDecomposition:
    """
    Rank the diagonal gaps ``{a < death - birth < b}`` of a diagram.

    The diagonal itself bounds the lowest gap from below; the unbounded strip
    above the most persistent dot is not a gap.
    """
    dots = pd.points(finite=True)
    if len(dots) == 0:
        return GapDecomposition(dots, (), tol)
    levels = _levels(dots[:, 1] - dots[:, 0], tol)
    bounds = [0.0] + levels
    gaps = [Gap(bounds[i], bounds[i + 1]) for i in range(len(levels))]
    return GapDecomposition(dots, tuple(_rank(gaps, True, tol)), tol)


@dataclass(frozen=True)
class VerticalSplit:
    """Vertical gaps inside ``DS_k`` and the subdiagram left of the first ``l``."""

    k: int
    l: int
    vgaps: tuple[Gap, ...]
    VS: np.ndarray
    vs: float

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "vgaps": [g.to_json() for g in self.vgaps],
            "VS": [[float(b), float(d)] for b, d in self.VS],
            "vs": self.vs,
        }


def vertical_gaps(gd: GapDecomposition, k: int, l: int) -> VerticalSplit:
    """
    Vertical gaps of ``DS_k`` and the vertical subdiagram ``VS_{k,l}``.

    The widest gap is always the unbounded strip right of the largest birth.
    For ``l`` beyond the number of gaps the selection stays at the last one.
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive integers")
    DS = gd.DS(k)
    if len(DS) == 0:
        raise ValueError(f"DS_{k} is empty")
    xs = _levels(DS[:, 0], gd.tol)
    bounded = [Gap(xs[i], xs[i + 1]) for i in range(len(xs) - 1)]
    ranked = [Gap(xs[-1], math.inf)] + _rank(bounded, False, gd.tol)
    chosen = ranked[:min(l, len(ranked))]
    vs = min(g.lower for g in chosen)
    VS = DS[DS[:, 0] <= vs + gd.tol]
    return VerticalSplit(k, l, tuple(ranked), VS, vs)


def gap_report(pd: PersistenceDiagram, k_max: int = 3, l_max: int = 3) -> dict:
    """JSON-ready report of diagonal gaps and the vertical splits for small k, l."""
    gd = diagonal_gaps(pd)
    out = {"diagonal": gd.to_json(), "vertical": []}
    for k in range(1, min(k_max, gd.m) + 1):
        for l in range(1, l_max + 1):
            out["vertical"].append(vertical_gaps(gd, k, l).to_json())
    return out


def diagram_json(pd0: PersistenceDiagram, pd1: PersistenceDiagram) -> str:
    return json.dumps({"H0": pd0.to_json(), "H1": pd1.to_json()}, indent=2)
