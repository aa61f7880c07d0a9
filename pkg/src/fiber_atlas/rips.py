"""Vietoris-Rips homology of point clouds over Z/2.

Builds the 2-skeleton at a single scale, computes beta_0 (union-find) and
beta_1 (boundary-matrix reduction), decides whether a given vertex loop is a
Z/2 boundary, and optionally emits persistence pairs across the edge-length
filtration.  Z/2 is enough here: connectivity and boundary membership are
the only questions asked of the complex.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "ComplexTooLarge",
    "DegenerateCloud",
    "LoopNotCycle",
    "UnionFind",
    "PersistenceSummary",
    "LoopClass",
    "RipsComplex",
    "select_scale",
    "rips_components",
    "rips_betti1",
    "betti_summary",
    "betti0_by_reduction",
    "loop_is_boundary",
    "euler_estimate",
    "farthest_point_subsample",
    "persistence_pairs",
    "write_persistence_csv",
]

DEFAULT_SIMPLEX_CAP = 2_000_000
DEFAULT_SCALE_FACTOR = 3.0
DEFAULT_SCALE_PERCENTILE = 90.0


class ComplexTooLarge(RuntimeError):
    """Simplex count exceeds the configured cap; subsample the cloud."""


class DegenerateCloud(ValueError):
    """All points coincide; no scale can be selected."""


class LoopNotCycle(ValueError):
    """Consecutive loop vertices are farther apart than the scale."""


class UnionFind:
    """Array-based disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.n_components = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1
        return True

    def labels(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))])


def select_scale(
    points: np.ndarray,
    factor: float = DEFAULT_SCALE_FACTOR,
    percentile: float = DEFAULT_SCALE_PERCENTILE,
) -> float:
    """Scale rule: ``factor`` times the ``percentile`` of nearest-neighbor
    distances.  The percentile makes the rule ignore sparse outliers."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 2:
        raise ValueError("scale selection needs at least 2 points")
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=2)
    nn = dist[:, 1]
    if float(nn.max()) == 0.0:
        raise DegenerateCloud("all points coincide")
    return float(factor * np.percentile(nn, percentile))


@dataclass(frozen=True)
class PersistenceSummary:
    """Betti data of a cloud at one scale, with the rule that chose it."""

    n_points: int
    scale: float
    scale_rule: str
    b0: int
    b1: int

    @property
    def euler(self) -> int:
        return self.b0 - self.b1

    def to_json_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "scale": self.scale,
            "scale_rule": self.scale_rule,
            "b0": self.b0,
            "b1": self.b1,
            "euler": self.euler,
            "euler_note": "b0 - b1; valid for spaces of 1-dimensional homotopy type",
        }


@dataclass(frozen=True)
class LoopClass:
    """An ordered vertex cycle on a complex and its Z/2 boundary verdict."""

    vertices: Tuple[int, ...]
    is_boundary: bool
    scale: float


class RipsComplex:
    """The 2-skeleton of the Vietoris-Rips complex at one scale.

    Edges are sorted by (length, index pair) so edge ids double as a
    filtration order; triangles are stored as sorted edge-id triples in
    filtration order of their longest edge.
    """

    def __init__(self, points: np.ndarray, scale: float, simplex_cap: int = DEFAULT_SIMPLEX_CAP):
        if scale <= 0:
            raise ValueError("scale must be positive")
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise ValueError("points must be a 2D array")
        self.points = points
        self.scale = float(scale)
        self.simplex_cap = int(simplex_cap)
        n = points.shape[0]

        if n == 0:
            pairs = np.zeros((0, 2), dtype=np.int64)
        else:
            tree = cKDTree(points)
            pairs = tree.query_pairs(self.scale, output_type="ndarray").astype(np.int64)
        if pairs.shape[0]:
            lengths = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
            order = np.lexsort((pairs[:, 1], pairs[:, 0], lengths))
            pairs = pairs[order]
            lengths = lengths[order]
        else:
            lengths = np.zeros(0)
        self.edges = pairs
        self.edge_lengths = lengths
        self._edge_id = {(int(i), int(j)): k for k, (i, j) in enumerate(pairs)}

        if n + pairs.shape[0] > self.simplex_cap:
            raise ComplexTooLarge(
                f"{n} vertices + {pairs.shape[0]} edges exceed the cap {self.simplex_cap}"
            )

        # triangles: for each edge (i,j), common neighbors above j
        nbr_above: List[set] = [set() for _ in range(n)]
        for i, j in pairs:
            nbr_above[int(i)].add(int(j))
        tri_edges: List[Tuple[int, int, int]] = []
        budget = self.simplex_cap - n - pairs.shape[0]
        eid = self._edge_id
        for k, (i, j) in enumerate(pairs):
            i, j = int(i), int(j)
            common = nbr_above[i] & nbr_above[j]
            if not common:
                continue
            if len(tri_edges) + len(common) > budget:
                raise ComplexTooLarge(
                    f"triangle count passed the cap {self.simplex_cap}; "
                    "subsample the cloud (farthest_point_subsample) or lower the scale"
                )
            for kk in common:
                tri_edges.append(tuple(sorted((k, eid[(i, kk)], eid[(j, kk)]))))
        if tri_edges:
            tri = np.array(tri_edges, dtype=np.int64)
            # filtration order: by longest edge id, then the rest
            order = np.lexsort((tri[:, 0], tri[:, 1], tri[:, 2]))
            tri = tri[order]
        else:
            tri = np.zeros((0, 3), dtype=np.int64)
        self.triangles = tri

        self._uf: Optional[UnionFind] = None
        self._reduction: Optional[Tuple[Dict[int, np.ndarray], List[Tuple[int, int]]]] = None

    # -- sizes ---------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return int(self.points.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def edge_id(self, i: int, j: int) -> Optional[int]:
        if i > j:
            i, j = j, i
        return self._edge_id.get((int(i), int(j)))

    # -- homology ------------------------------------------------------

    def union_find(self) -> UnionFind:
        if self._uf is None:
            uf = UnionFind(self.n_vertices)
            for i, j in self.edges:
                uf.union(int(i), int(j))
            self._uf = uf
        return self._uf

    @property
    def betti0(self) -> int:
        if self.n_vertices == 0:
            return 0
        return self.union_find().n_components

    def _reduce(self):
        if self._reduction is None:
            self._reduction = _reduce_triangle_columns(self.triangles)
        return self._reduction

    @property
    def betti1(self) -> int:
        if self.n_vertices == 0:
            return 0
        cycle_edges = self.n_edges - (self.n_vertices - self.betti0)
        _, pairs = self._reduce()
        return cycle_edges - len(pairs)

    def reduce_chain(self, edge_ids: Sequence[int]) -> np.ndarray:
        """Reduce a Z/2 1-chain against the triangle pivot columns."""
        pivots, _ = self._reduce()
        cur = np.unique(np.asarray(sorted(edge_ids), dtype=np.int64))
        while cur.size:
            p = int(cur[-1])
            col = pivots.get(p)
            if col is None:
                break
            cur = np.setxor1d(cur, col, assume_unique=True)
        return cur


def _reduce_triangle_columns(triangles: np.ndarray):
    """Standard Z/2 column reduction of the triangle boundary matrix.

    Columns arrive in filtration order; each either claims its pivot edge
    (a persistence pair) or reduces to zero.  Chains of column additions are
    accumulated in a lazy max-heap with parity cancellation, which avoids
    materialising intermediate columns.  Returns (pivot -> sorted column
    list, list of (pivot edge id, triangle index)).
    """
    import heapq

    pivots: Dict[int, List[int]] = {}
    pairs: List[Tuple[int, int]] = []
    tri_list = triangles.tolist()
    heappush, heappop, heapify = heapq.heappush, heapq.heappop, heapq.heapify
    for t_idx, col in enumerate(tri_list):
        p = col[2]
        owner = pivots.get(p)
        if owner is None:
            pivots[p] = col
            pairs.append((p, t_idx))
            continue
        # lazy-heap accumulation (negated ids give a max-heap)
        heap = [-col[0], -col[1], -col[2]]
        heapify(heap)
        for e in owner:
            heappush(heap, -e)
        while heap:
            top = heappop(heap)
            parity = 1
            while heap and heap[0] == top:
                heappop(heap)
                parity ^= 1
            if not parity:
                continue
            p = -top
            owner = pivots.get(p)
            if owner is None:
                column = [p]
                while heap:
                    e = heappop(heap)
                    if column[-1] == -e:
                        column.pop()
                    else:
                        column.append(-e)
                column.reverse()
                pivots[p] = column
                pairs.append((p, t_idx))
                break
            for e in owner:
                if e != p:
                    heappush(heap, -e)
    return pivots, pairs


# ----------------------------------------------------------------------
# functional wrappers
# ----------------------------------------------------------------------


def rips_components(points: np.ndarray, scale: float) -> int:
    """Number of connected components of the scale-neighborhood graph
    (0 for an empty cloud)."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] == 0:
        return 0
    return RipsComplex(points, scale, simplex_cap=2**62).betti0


def rips_betti1(points: np.ndarray, scale: float, simplex_cap: int = DEFAULT_SIMPLEX_CAP) -> int:
    """Rank of H1 of the 2-skeleton at the given scale, over Z/2."""
    return RipsComplex(points, scale, simplex_cap=simplex_cap).betti1


def betti_summary(
    points: np.ndarray,
    scale: Optional[float] = None,
    factor: float = DEFAULT_SCALE_FACTOR,
    percentile: float = DEFAULT_SCALE_PERCENTILE,
    simplex_cap: int = DEFAULT_SIMPLEX_CAP,
) -> PersistenceSummary:
    """(beta_0, beta_1) at the given or auto-selected scale."""
    points = np.asarray(points, dtype=float)
    if scale is None:
        scale = select_scale(points, factor=factor, percentile=percentile)
        rule = f"{factor} x p{percentile:g}(nearest-neighbor distance)"
    else:
        rule = "explicit"
    cx = RipsComplex(points, scale, simplex_cap=simplex_cap)
    return PersistenceSummary(
        n_points=cx.n_vertices, scale=float(scale), scale_rule=rule,
        b0=cx.betti0, b1=cx.betti1,
    )


def betti0_by_reduction(points: np.ndarray, scale: float) -> int:
    """beta_0 via rank of the vertex boundary matrix (oracle for union-find)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n == 0:
        return 0
    cx = RipsComplex(points, scale, simplex_cap=2**62)
    pivots: Dict[int, np.ndarray] = {}
    rank = 0
    for i, j in cx.edges:
        cur = np.array(sorted((int(i), int(j))), dtype=np.int64)
        while cur.size:
            p = int(cur[-1])
            col = pivots.get(p)
            if col is None:
                pivots[p] = cur
                rank += 1
                break
            cur = np.setxor1d(cur, col, assume_unique=True)
    return n - rank


def euler_estimate(summary: PersistenceSummary) -> int:
    """Euler characteristic estimate ``beta_0 - beta_1``.

    Exact for samples of spaces homotopy equivalent to graphs (the only kind
    this toolkit certifies); higher Betti numbers are out of scope.
    """
    return summary.euler


def loop_is_boundary(
    points: np.ndarray,
    loop: np.ndarray,
    scale: float,
    simplex_cap: int = DEFAULT_SIMPLEX_CAP,
    return_class: bool = False,
):
    """Decide whether an ordered vertex loop is a Z/2 boundary at the scale.

    ``loop`` is an ordered array of loop vertex coordinates; vertices not in
    ``points`` are appended.  Consecutive vertices (cyclically) must lie
    within the scale, else :class:`LoopNotCycle` is raised.  The verdict is
    invariant under rotation and reversal of the cycle: both leave the edge
    set unchanged.
    """
    points = np.asarray(points, dtype=float)
    loop = np.atleast_2d(np.asarray(loop, dtype=float))
    if loop.shape[0] < 3:
        raise LoopNotCycle("a loop needs at least 3 vertices")
    index_of = {tuple(np.round(p, 9)): k for k, p in enumerate(points)}
    extra: List[np.ndarray] = []
    ids: List[int] = []
    for p in loop:
        key = tuple(np.round(p, 9))
        k = index_of.get(key)
        if k is None:
            k = points.shape[0] + len(extra)
            index_of[key] = k
            extra.append(p)
        ids.append(k)
    all_points = np.vstack([points] + [np.array(extra)]) if extra else points

    cx = RipsComplex(all_points, scale, simplex_cap=simplex_cap)
    chain_parity: Dict[int, int] = {}
    m = len(ids)
    for a, b in zip(ids, ids[1:] + ids[:1]):
        if a == b:
            continue
        e = cx.edge_id(a, b)
        if e is None:
            d = float(np.linalg.norm(all_points[a] - all_points[b]))
            raise LoopNotCycle(
                f"consecutive loop vertices {a},{b} are {d:.4g} apart, over the scale {scale:.4g}"
            )
        chain_parity[e] = chain_parity.get(e, 0) ^ 1
    chain = [e for e, par in chain_parity.items() if par]
    residue = cx.reduce_chain(chain)
    verdict = residue.size == 0
    if return_class:
        return verdict, LoopClass(tuple(ids), verdict, float(scale)), cx
    return verdict


def farthest_point_subsample(points: np.ndarray, count: int) -> np.ndarray:
    """Deterministic farthest-point thinning; returns selected indices.

    Starts from the point nearest the centroid, then greedily adds the point
    farthest from the selected set.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if count >= n:
        return np.arange(n)
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    centroid = points.mean(axis=0)
    first = int(np.argmin(np.linalg.norm(points - centroid, axis=1)))
    chosen = [first]
    dist = np.linalg.norm(points - points[first], axis=1)
    for _ in range(count - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(points - points[nxt], axis=1))
    return np.array(sorted(chosen), dtype=np.int64)


# ----------------------------------------------------------------------
# persistence pairs across the edge-length filtration (diagnostics)
# ----------------------------------------------------------------------


def persistence_pairs(
    points: np.ndarray,
    scale: float,
    simplex_cap: int = DEFAULT_SIMPLEX_CAP,
) -> List[Tuple[int, float, float]]:
    """(dimension, birth, death) pairs of the Rips filtration up to ``scale``.

    H0 classes are born at 0 and die when their component merges; H1 classes
    are born at the pivot edge length and die at the killing triangle's
    longest edge; classes alive at the final scale get death = inf.
    """
    cx = RipsComplex(points, scale, simplex_cap=simplex_cap)
    out: List[Tuple[int, float, float]] = []
    uf = UnionFind(cx.n_vertices)
    cycle_edges = []
    for k, (i, j) in enumerate(cx.edges):
        if uf.union(int(i), int(j)):
            out.append((0, 0.0, float(cx.edge_lengths[k])))
        else:
            cycle_edges.append(k)
    for _ in range(uf.n_components):
        out.append((0, 0.0, float("inf")))
    pivots, pairs = cx._reduce()
    killed = {}
    for pivot_edge, tri_idx in pairs:
        death = float(cx.edge_lengths[int(cx.triangles[tri_idx, 2])])
        killed[pivot_edge] = death
    for k in cycle_edges:
        birth = float(cx.edge_lengths[k])
        out.append((1, birth, killed.get(k, float("inf"))))
    out.sort(key=lambda t: (t[0], t[1], t[2]))
    return out


def write_persistence_csv(path, pairs: Sequence[Tuple[int, float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dim", "birth", "death"])
        for dim, birth, death in pairs:
            writer.writerow([dim, repr(birth), "inf" if death == float("inf") else repr(death)])
