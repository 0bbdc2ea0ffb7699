"""Independent reference computations: slow, simple, and free of package internals."""

from __future__ import annotations

import itertools
import math

import numpy as np


# -----------------------------------------------------------------------------
# GF(2) linear algebra on Python-int bitmasks
# -----------------------------------------------------------------------------
class XorBasis:
    """Row-echelon basis of a GF(2) vector space, vectors stored as ints."""

    def __init__(self):
        self.rows: dict[int, int] = {}   # leading bit -> vector

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            if top not in self.rows:
                return v
            v ^= self.rows[top]
        return 0

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if v:
            self.rows[v.bit_length() - 1] = v
            return True
        return False

    def copy(self) -> "XorBasis":
        b = XorBasis()
        b.rows = dict(self.rows)
        return b

    def __len__(self) -> int:
        return len(self.rows)


def gf2_rank(vectors) -> int:
    b = XorBasis()
    for v in vectors:
        b.add(v)
    return len(b)


def betti1_of_complex(n_vertices: int, edges, triangles) -> int:
    """rank H1 over Z/2 = (#edges - rank d1) - rank d2, from boundary matrices."""
    edges = [tuple(sorted(e)) for e in edges]
    index = {e: i for i, e in enumerate(edges)}
    d1 = [(1 << u) | (1 << v) for u, v in edges]
    d2 = []
    for t in triangles:
        a, b, c = sorted(t)
        d2.append((1 << index[(a, b)]) | (1 << index[(a, c)]) | (1 << index[(b, c)]))
    return len(edges) - gf2_rank(d1) - gf2_rank(d2)


# -----------------------------------------------------------------------------
# minimum spanning tree
# -----------------------------------------------------------------------------
def kruskal_length(n: int, weighted_edges) -> float:
    """Total weight of a minimum spanning forest (plain Kruskal with its own union-find)."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for w, u, v in sorted(weighted_edges):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append(w)
    return math.fsum(chosen)


def euclidean_mst_length(points: np.ndarray) -> float:
    n = len(points)
    edges = [(float(np.linalg.norm(points[i] - points[j])), i, j) for i in range(n) for j in range(i + 1, n)]
    return kruskal_length(n, edges)


# -----------------------------------------------------------------------------
# bottleneck distance by enumeration
# -----------------------------------------------------------------------------
def bottleneck_brute(A, B) -> float:
    """
    Exhaustive bottleneck distance between two small diagrams given as lists of
    (birth, death); deaths may be ``inf``. Unmatched finite dots pay half their
    persistence, infinite dots must be matched to infinite dots.
    """
    Af = [p for p in A if math.isfinite(p[1])]
    Bf = [p for p in B if math.isfinite(p[1])]
    Ai = sorted(p[0] for p in A if not math.isfinite(p[1]))
    Bi = sorted(p[0] for p in B if not math.isfinite(p[1]))
    if len(Ai) != len(Bi):
        return math.inf
    inf_cost = 0.0
    if Ai:
        inf_cost = min(max(abs(a - b) for a, b in zip(Ai, perm)) for perm in itertools.permutations(Bi))

    def diag(p):
        return (p[1] - p[0]) / 2.0

    best = math.inf
    for k in range(min(len(Af), len(Bf)) + 1):
        for sa in itertools.combinations(range(len(Af)), k):
            for sb in itertools.permutations(range(len(Bf)), k):
                cost = 0.0
                for i, j in zip(sa, sb):
                    cost = max(cost, abs(Af[i][0] - Bf[j][0]), abs(Af[i][1] - Bf[j][1]))
                for i in set(range(len(Af))) - set(sa):
                    cost = max(cost, diag(Af[i]))
                for j in set(range(len(Bf))) - set(sb):
                    cost = max(cost, diag(Bf[j]))
                best = min(best, cost)
    return max(best, inf_cost)


# -----------------------------------------------------------------------------
# exhaustive search for short homology-preserving subgraphs
# -----------------------------------------------------------------------------
def _components(n: int, edges) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    c = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            c -= 1
    return c


def _tree_path(adj: dict[int, list[tuple[int, int]]], s: int, t: int) -> int:
    """Bitmask of edge indices on the unique forest path from s to t."""
    prev = {s: None}
    stack = [s]
    while stack:
        x = stack.pop()
        if x == t:
            break
        for y, ei in adj.get(x, ()):
            if y not in prev:
                prev[y] = (x, ei)
                stack.append(y)
    mask = 0
    while prev[t] is not None:
        x, ei = prev[t]
        mask |= 1 << ei
        t = x
    return mask


def is_admissible(n: int, edges, triangles, chosen) -> bool:
    """
    Does the edge subset ``chosen`` (indices into ``edges``) span the complex and
    induce an isomorphism on H1? Checked directly: equal component counts, equal
    first Betti numbers, and no cycle of the subgraph bounding in the complex.
    """
    edges = [tuple(sorted(e)) for e in edges]
    sub = [edges[i] for i in chosen]
    if _components(n, sub) != _components(n, edges):
        return False
    b1 = betti1_of_complex(n, edges, triangles)
    b1_sub = len(sub) - (n - _components(n, sub))
    if b1_sub != b1:
        return False
    index = {e: i for i, e in enumerate(edges)}
    basis = XorBasis()
    for t in triangles:
        a, b, c = sorted(t)
        basis.add((1 << index[(a, b)]) | (1 << index[(a, c)]) | (1 << index[(b, c)]))
    adj: dict[int, list[tuple[int, int]]] = {}
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in chosen:
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            adj.setdefault(u, []).append((v, i))
            adj.setdefault(v, []).append((u, i))
        elif not basis.add((1 << i) | _tree_path(adj, u, v)):
            return False
    return True


def shortest_admissible(n: int, edges, lengths, triangles, bound: float, tol: float = 1e-9):
    """
    Exhaustive depth-first search over edge subsets of the complex for an
    admissible subgraph (see :func:`is_admissible`) of total length
    ``< bound - tol``. Returns the first one found, or ``None``.

    Admissible subgraphs all have ``V - c + b1`` edges; branches are cut when
    the partial length plus the cheapest completion reaches the bound, or when
    a chosen cycle already bounds (or repeats a class) in the complex.
    """
    edges = [tuple(sorted(e)) for e in edges]
    index = {e: i for i, e in enumerate(edges)}
    order = sorted(range(len(edges)), key=lambda i: lengths[i])
    c = _components(n, edges)
    b1 = betti1_of_complex(n, edges, triangles)
    size = n - c + b1
    boundary = XorBasis()
    for t in triangles:
        a, b, cc = sorted(t)
        boundary.add((1 << index[(a, b)]) | (1 << index[(a, cc)]) | (1 << index[(b, cc)]))
    L = [lengths[i] for i in order]
    limit = bound - tol

    def search(pos: int, chosen: list[int], total: float, basis: XorBasis, forest: list[tuple[int, int]]):
        need = size - len(chosen)
        if need == 0:
            return list(chosen) if total < limit else None
        if len(order) - pos < need:
            return None
        if total + sum(L[pos:pos + need]) >= limit:
            return None
        for q in range(pos, len(order) - need + 1):
            if total + L[q] + sum(L[q + 1:q + need]) >= limit:
                break
            i = order[q]
            u, v = edges[i]
            adj: dict[int, list[tuple[int, int]]] = {}
            for a, b, ei in forest:
                adj.setdefault(a, []).append((b, ei))
                adj.setdefault(b, []).append((a, ei))
            same = u != v and _connected(adj, u, v)
            nb = basis
            nf = forest
            if same:
                nb = basis.copy()
                if not nb.add((1 << i) | _tree_path(adj, u, v)):
                    continue
            else:
                nf = forest + [(u, v, i)]
            chosen.append(i)
            found = search(q + 1, chosen, total + L[q], nb, nf)
            chosen.pop()
            if found is not None:
                return found
        return None

    return search(0, [], 0.0, boundary, [])


def _connected(adj, s: int, t: int) -> bool:
    seen = {s}
    stack = [s]
    while stack:
        x = stack.pop()
        if x == t:
            return True
        for y, _ in adj.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def dbscan_staged(D, eps, min_pts):
    """DBSCAN written as staged set growth: seed, grow Nbhd(p1), repeat on unlabelled points."""
    n = len(D)
    nb = [set(int(j) for j in np.nonzero(D[i] <= eps)[0]) for i in range(n)]
    labels = [None] * n
    c = 0
    for p in range(n):
        if labels[p] is not None:
            continue
        if len(nb[p]) < min_pts:
            labels[p] = -1
            continue
        grow = set(nb[p])
        for j in grow:
            if labels[j] is None or labels[j] == -1:
                labels[j] = c
        done = {p}
        while grow - done:
            q = min(grow - done)
            done.add(q)
            for j in nb[q]:
                if labels[j] is None or labels[j] == -1:
                    labels[j] = c
            if len(nb[q]) >= min_pts:
                grow |= nb[q]
        c += 1
    return [(-1 if x is None else x) for x in labels]
