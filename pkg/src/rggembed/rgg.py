"""Random geometric graphs on the unit cube via a cell-list spatial index.

``sample_points`` draws n i.i.d. uniform points in [0,1]^d; ``build_graph``
buckets them into a grid of side >= r so that all neighbours of a point lie
in the 3^d surrounding buckets, and materialises the exact edge set (closed
threshold, edge iff distance <= r) only when a query first needs it.  Graph
queries (BFS orders, diameters, connectivity) run on a scipy CSR adjacency.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph


@dataclass(frozen=True)
class PointSet:
    """n points in [0,1]^d plus the seed they were drawn with."""

    d: int
    coords: np.ndarray  # (n, d) float64
    seed: object = None

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def __post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != self.d:
            raise ValueError(f"coords must have shape (n, {self.d})")
        if self.coords.size and (self.coords.min() < 0.0 or self.coords.max() > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")


def sample_points(n: int, d: int, seed) -> PointSet:
    """n i.i.d. uniform points in [0,1]^d, deterministic per seed."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return PointSet(d=d, coords=rng.random((n, d)), seed=seed)


@dataclass(frozen=True)
class ColorAssignment:
    """Independent red/blue colours; blue with probability p_blue."""

    blue: np.ndarray  # (n,) bool
    p_blue: float
    seed: object = None

    @property
    def red(self) -> np.ndarray:
        return ~self.blue

    @property
    def n_blue(self) -> int:
        return int(self.blue.sum())


def color_points(points: PointSet, p_blue: float, seed) -> ColorAssignment:
    """Bernoulli(p_blue) colour per point, independent, deterministic per seed."""
    if not 0.0 <= p_blue <= 1.0:
        raise ValueError(f"p_blue must be in [0, 1], got {p_blue}")
    rng = np.random.default_rng(seed)
    return ColorAssignment(blue=rng.random(points.n) < p_blue, p_blue=p_blue, seed=seed)


class GeometricGraph:
    """G_d(n, r): edge iff Euclidean distance <= r (closed threshold).

    The constructor only builds the bucket index; the CSR adjacency is
    assembled lazily because several consumers (the embedding algorithm in
    particular) never look at edges at all.
    """

    def __init__(self, points: PointSet, r: float):
        if r <= 0:
            raise ValueError(f"need r > 0, got {r}")
        if r > math.sqrt(points.d) + 1e-12:
            raise ValueError(f"r = {r} exceeds the cube diameter sqrt(d)")
        self.points = points
        self.r = float(r)
        n, d = points.n, points.d
        # bucket side 1/k >= r; cap k so the grid never dwarfs the point count
        k_cap = int(math.ceil(n ** (1.0 / d))) + 1
        self._grid_k = max(1, min(int(math.floor(1.0 / self.r)), k_cap))
        bucket = np.minimum(
            (points.coords * self._grid_k).astype(np.int64), self._grid_k - 1
        )
        self._bucket_id = np.ravel_multi_index(tuple(bucket.T), (self._grid_k,) * d)
        self._by_bucket = np.argsort(self._bucket_id, kind="stable")
        sorted_ids = self._bucket_id[self._by_bucket]
        self._bucket_starts = np.searchsorted(
            sorted_ids, np.arange(self._grid_k**d + 1)
        )
        self._csr: sparse.csr_matrix | None = None

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def d(self) -> int:
        return self.points.d

    def _candidate_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Point-id pairs (i, j) from same or adjacent buckets, i from the
        lexicographically smaller bucket (plus i < j within a bucket)."""
        d, k = self.d, self._grid_k
        order, starts = self._by_bucket, self._bucket_starts
        occupied = np.unique(self._bucket_id)
        grid = np.stack(np.unravel_index(occupied, (k,) * d), axis=-1)

        lefts, rights = [], []
        for offset in np.ndindex(*(3,) * d):
            off = np.array(offset) - 1
            if tuple(off) < tuple(np.zeros(d, dtype=int)):
                continue  # mirrored by the opposite offset
            nb = grid + off
            ok = np.all((nb >= 0) & (nb < k), axis=1)
            src = occupied[ok]
            dst = np.ravel_multi_index(tuple(nb[ok].T), (k,) * d)
            # keep only offsets into occupied buckets
            present = starts[dst + 1] > starts[dst]
            src, dst = src[present], dst[present]
            for b_src, b_dst in zip(src, dst):
                ids_a = order[starts[b_src] : starts[b_src + 1]]
                ids_b = order[starts[b_dst] : starts[b_dst + 1]]
                if b_src == b_dst:
                    ii, jj = np.triu_indices(len(ids_a), k=1)
                    lefts.append(ids_a[ii])
                    rights.append(ids_a[jj])
                else:
                    pair = np.broadcast_arrays(
                        ids_a[:, None], ids_b[None, :]
                    )
                    lefts.append(pair[0].ravel())
                    rights.append(pair[1].ravel())
        if not lefts:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        return np.concatenate(lefts), np.concatenate(rights)

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, sorted lexicographically."""
        i, j = self._candidate_pairs()
        if len(i) == 0:
            return np.empty((0, 2), dtype=np.int64)
        diff = self.points.coords[i] - self.points.coords[j]
        keep = np.einsum("ij,ij->i", diff, diff) <= self.r**2 + 0.0
        u, v = i[keep], j[keep]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        e = np.stack([lo, hi], axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def adjacency(self) -> sparse.csr_matrix:
        if self._csr is None:
            e = self.edges()
            n = self.n
            row = np.concatenate([e[:, 0], e[:, 1]])
            col = np.concatenate([e[:, 1], e[:, 0]])
            data = np.ones(len(row), dtype=np.int8)
            self._csr = sparse.csr_matrix((data, (row, col)), shape=(n, n))
        return self._csr

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency()
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    def n_edges(self) -> int:
        return self.adjacency().nnz // 2

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        diff = self.points.coords[u] - self.points.coords[v]
        return float(np.dot(diff, diff)) <= self.r**2

    def is_connected(self) -> bool:
        n_comp = csgraph.connected_components(self.adjacency(), directed=False)[0]
        return n_comp == 1


def build_graph(points: PointSet, r: float) -> GeometricGraph:
    """Bucket-indexed geometric graph with the exact threshold edge set."""
    return GeometricGraph(points, r)


def brute_force_edges(points: PointSet, r: float) -> np.ndarray:
    """All-pairs reference edge set; the oracle the bucket index is tested against."""
    x = points.coords
    d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)
    u, v = np.where(np.triu(d2 <= r**2, k=1))
    e = np.stack([u, v], axis=1).astype(np.int64)
    return e[np.lexsort((e[:, 1], e[:, 0]))]


@dataclass(frozen=True)
class HopDiameter:
    """Hop diameter; ``exact`` is False when the value is a certified lower
    bound from iterated double-sweep BFS."""

    value: float  # math.inf when disconnected
    exact: bool


def _bfs_distances(adj: sparse.csr_matrix, sources: np.ndarray) -> np.ndarray:
    return csgraph.dijkstra(adj, directed=False, unweighted=True, indices=sources)


def hop_diameter(
    graph: GeometricGraph, exact_cutoff: int = 20000, sweeps: int = 4
) -> HopDiameter:
    """Hop diameter of the graph.

    Exact (all-source BFS) for n <= exact_cutoff; otherwise an iterated
    double-sweep lower bound, flagged via ``exact=False``.  Disconnected
    graphs report infinity (exact either way).
    """
    adj = graph.adjacency()
    n = graph.n
    if n == 1:
        return HopDiameter(0.0, True)
    if not graph.is_connected():
        return HopDiameter(math.inf, True)

    if n <= exact_cutoff:
        best = 0.0
        chunk = max(1, min(n, 512))
        for start in range(0, n, chunk):
            dist = _bfs_distances(adj, np.arange(start, min(start + chunk, n)))
            best = max(best, float(dist.max()))
        return HopDiameter(best, True)

    # double sweep: ecc of any vertex lower-bounds the diameter; restarting
    # from the farthest vertex found usually tightens it within a few rounds
    src = 0
    best = 0.0
    for _ in range(sweeps):
        dist = _bfs_distances(adj, np.array([src]))[0]
        far = int(np.argmax(dist))
        ecc = float(dist[far])
        if ecc <= best:
            break
        best = ecc
        src = far
    return HopDiameter(best, False)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] with closed boundary."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, coords: np.ndarray) -> np.ndarray:
        return np.all((coords >= self.lo) & (coords <= self.hi), axis=1)


@dataclass(frozen=True)
class BallRegion:
    """Euclidean ball with closed boundary."""

    center: np.ndarray
    radius: float

    def contains(self, coords: np.ndarray) -> np.ndarray:
        d2 = np.sum((coords - self.center) ** 2, axis=1)
        return d2 <= self.radius**2


def count_in_region(
    points: PointSet,
    colors: ColorAssignment | None,
    region,
    color_filter: str | None = None,
) -> int:
    """Exact count of points inside a Box or BallRegion, optionally filtered
    to 'red' or 'blue'.  Boundaries are closed."""
    mask = region.contains(points.coords)
    if color_filter is not None:
        if colors is None:
            raise ValueError("color_filter given but no colors provided")
        if color_filter == "blue":
            mask &= colors.blue
        elif color_filter == "red":
            mask &= colors.red
        else:
            raise ValueError(f"unknown color filter {color_filter!r}")
    return int(mask.sum())


def save_points_csv(path, points: PointSet, colors: ColorAssignment | None = None) -> None:
    """One row per point: d coordinates, plus a color column when given."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"x{k}" for k in range(points.d)]
        if colors is not None:
            header.append("color")
        writer.writerow(header)
        for i in range(points.n):
            row = [repr(float(c)) for c in points.coords[i]]
            if colors is not None:
                row.append("blue" if colors.blue[i] else "red")
            writer.writerow(row)


def load_points_csv(path) -> tuple[PointSet, ColorAssignment | None]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        has_color = header[-1] == "color"
        d = len(header) - (1 if has_color else 0)
        coords, blue = [], []
        for row in reader:
            coords.append([float(c) for c in row[:d]])
            if has_color:
                blue.append(row[d] == "blue")
    points = PointSet(d=d, coords=np.asarray(coords, dtype=float))
    colors = (
        ColorAssignment(blue=np.asarray(blue, dtype=bool), p_blue=float("nan"))
        if has_color
        else None
    )
    return points, colors
