"""The two-step tree embedding algorithm, its validator, and the 1-d greedy.

``embed_tree`` splits the tree into parts of comparable size, then embeds
the parts one by one.  Each part picks as target the earliest cell in the
tessellation ordering that still has an unoccupied point.  A part whose
target is the central cell is embedded entirely inside it.  Otherwise
Step 1 places the vertices at anchor-distance j (j = 0..eta) on unoccupied
red points of transit ball j for that target, walking the part from the
cube centre out to the target; Step 2 places the remaining vertices on
unoccupied points of the target cell and, if those run out, on unoccupied
blue points of its adjacent successor.  Running out of points anywhere is a
structured FAILURE, not an exception.

Success implies a valid embedding: before doing anything else the algorithm
checks the two geometric facts the placement rules rely on, namely that any
two points in a cell-successor pair are within the connection radius
(2 sqrt(d)/s <= r) and that consecutive transit balls are within reach
(max ball gap <= r).  Every edge of the tree then maps to a graph edge by
construction; ``verify_embedding`` re-checks this independently with direct
distance computations.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field, asdict

import numpy as np

from .geometry import BallSystem, Tessellation
from .rgg import ColorAssignment, GeometricGraph, PointSet
from .trees import Tree
from .decompose import Decomposition, split_tree


@dataclass(frozen=True)
class EventAReport:
    """Point-supply audit for one (graph, colours, tessellation) instance.

    A1 asks every transit ball for at least d^(-d/2) (eps/(2^d 10 s))^d n/4
    red points; A2 asks every cell for at least (3/8) s^(-d) n blue points.
    The report is advisory: the embedding algorithm never consults it.
    """

    a1_ok: bool
    a2_ok: bool
    a1_threshold: float
    a2_threshold: float
    min_ball_red: int
    min_cell_blue: int
    witness_ball: tuple | None  # (target cell id, j) of first failing ball
    witness_cell: int | None    # first failing cell id


def check_event_a(
    graph: GeometricGraph,
    colors: ColorAssignment,
    tess: Tessellation,
    balls: BallSystem,
    epsilon_eff: float | None = None,
) -> EventAReport:
    """Exact red/blue counts against the two thresholds; inputs untouched."""
    if colors.p_blue != 0.5:
        raise ValueError("event-A thresholds assume colouring probability 1/2")
    eps = balls.epsilon_eff if epsilon_eff is None else epsilon_eff
    if epsilon_eff is not None and abs(eps - balls.epsilon_eff) > 1e-12:
        raise ValueError("epsilon_eff disagrees with the ball system")

    n, d, s = graph.n, tess.d, tess.s
    a1_thr = d ** (-d / 2) * (eps / (2**d * 10 * s)) ** d * n / 4.0
    a2_thr = (3.0 / 8.0) * s ** (-d) * n

    coords = graph.points.coords
    cell_of = tess.cell_of_points(coords) if n else np.empty(0, dtype=np.int64)
    by_cell = np.argsort(cell_of, kind="stable") if n else np.empty(0, dtype=np.int64)
    starts = np.searchsorted(cell_of[by_cell] if n else cell_of, np.arange(tess.n_cells + 1))

    blue_per_cell = (
        np.bincount(cell_of[colors.blue], minlength=tess.n_cells)
        if n
        else np.zeros(tess.n_cells, dtype=np.int64)
    )

    if n == 0:
        # degenerate by convention: an empty graph supplies nothing
        first_target = int(np.flatnonzero(np.arange(tess.n_cells) != tess.central_cell)[0])
        return EventAReport(
            a1_ok=False,
            a2_ok=False,
            a1_threshold=a1_thr,
            a2_threshold=a2_thr,
            min_ball_red=0,
            min_cell_blue=0,
            witness_ball=(first_target, 0),
            witness_cell=0,
        )

    red = colors.red
    ball_red_cache: dict[tuple[int, int], int] = {}

    def ball_red_count(nu: int, j: int, centre: np.ndarray, rho: float, cell: int) -> int:
        key = (nu, j)
        if key not in ball_red_cache:
            ids = by_cell[starts[cell] : starts[cell + 1]]
            if len(ids):
                diff = coords[ids] - centre
                inside = np.einsum("ij,ij->i", diff, diff) <= rho**2
                count = int(np.count_nonzero(inside & red[ids]))
            else:
                count = 0
            ball_red_cache[key] = count
        return ball_red_cache[key]

    a1_ok, witness_ball = True, None
    min_ball_red = n
    for cell in range(tess.n_cells):
        if cell == tess.central_cell:
            continue
        tb = balls.for_target(cell)
        for j in range(tb.eta + 1):
            count = ball_red_count(tb.nu_cell, j, tb.centres[j], tb.radius, int(tb.cells[j]))
            min_ball_red = min(min_ball_red, count)
            if count < a1_thr and a1_ok:
                a1_ok, witness_ball = False, (cell, j)

    a2_ok, witness_cell = True, None
    min_cell_blue = int(blue_per_cell.min())
    failing = np.flatnonzero(blue_per_cell < a2_thr)
    if len(failing):
        a2_ok, witness_cell = False, int(failing[0])

    return EventAReport(
        a1_ok=a1_ok,
        a2_ok=a2_ok,
        a1_threshold=a1_thr,
        a2_threshold=a2_thr,
        min_ball_red=int(min_ball_red),
        min_cell_blue=min_cell_blue,
        witness_ball=witness_ball,
        witness_cell=witness_cell,
    )


@dataclass(frozen=True)
class FailureInfo:
    """Where the algorithm ran out of points (or of geometric headroom)."""

    iteration: int        # part index t, 1-based; 0 for pre-loop failures
    step: int             # 0 geometry precheck, 1 ball transit, 2 cell fill
    resource: str         # "geometry" | "ball" | "cell+successor" | "central-cell"
    resource_id: tuple | int | None
    demanded: float
    available: float
    message: str


@dataclass
class Embedding:
    """Vertex -> point map (-1 while unassigned) plus failure diagnostics."""

    map: np.ndarray
    status: str                      # "success" | "failure"
    failure: FailureInfo | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "success"

    def failure_json(self) -> str:
        payload = {
            "status": self.status,
            "failure": asdict(self.failure) if self.failure else None,
            "diagnostics": {
                k: v for k, v in self.diagnostics.items() if not isinstance(v, np.ndarray)
            },
        }
        return json.dumps(payload, default=str)


class _PointPools:
    """Occupancy bookkeeping: per-cell, per-cell-blue and per-ball id pools,
    each consumed in ascending point id order."""

    def __init__(self, points: PointSet, colors: ColorAssignment, tess: Tessellation):
        n = points.n
        self.coords = points.coords
        self.blue = colors.blue
        self.cell_id = tess.cell_of_points(points.coords)
        order = np.lexsort((np.arange(n), self.cell_id))
        self.sorted_ids = order.astype(np.int64)
        self.cell_starts = np.searchsorted(
            self.cell_id[order], np.arange(tess.n_cells + 1)
        )
        self.occupied = np.zeros(n, dtype=bool)
        self.unocc = np.bincount(self.cell_id, minlength=tess.n_cells).astype(np.int64)
        self._any_ptr = self.cell_starts[:-1].copy()
        self._special: dict[tuple, list] = {}   # lazily built id lists
        self._special_ptr: dict[tuple, int] = {}

    def occupy(self, pid: int) -> None:
        self.occupied[pid] = True
        self.unocc[self.cell_id[pid]] -= 1

    def cell_slice(self, cell: int) -> np.ndarray:
        return self.sorted_ids[self.cell_starts[cell] : self.cell_starts[cell + 1]]

    def take_any_from_cell(self, cell: int, want: int) -> list[int]:
        taken: list[int] = []
        ptr = self._any_ptr[cell]
        end = self.cell_starts[cell + 1]
        ids = self.sorted_ids
        while ptr < end and len(taken) < want:
            pid = ids[ptr]
            if not self.occupied[pid]:
                taken.append(int(pid))
                self.occupy(pid)
            ptr += 1
        self._any_ptr[cell] = ptr
        return taken

    def _pool(self, key: tuple, build) -> tuple[list, int]:
        if key not in self._special:
            self._special[key] = build()
            self._special_ptr[key] = 0
        return self._special[key], self._special_ptr[key]

    def _take_special(self, key: tuple, build, want: int) -> list[int]:
        pool, ptr = self._pool(key, build)
        taken: list[int] = []
        while ptr < len(pool) and len(taken) < want:
            pid = pool[ptr]
            if not self.occupied[pid]:
                taken.append(pid)
                self.occupy(pid)
            ptr += 1
        self._special_ptr[key] = ptr
        return taken

    def take_blue_from_cell(self, cell: int, want: int) -> list[int]:
        def build():
            ids = self.cell_slice(cell)
            return [int(p) for p in ids if self.blue[p]]

        return self._take_special(("blue", cell), build, want)

    def take_red_from_ball(
        self, nu: int, j: int, centre: np.ndarray, rho: float, cell: int, want: int
    ) -> list[int]:
        def build():
            ids = self.cell_slice(cell)
            if not len(ids):
                return []
            diff = self.coords[ids] - centre
            inside = np.einsum("ij,ij->i", diff, diff) <= rho**2
            return [int(p) for p in ids[inside & ~self.blue[ids]]]

        return self._take_special(("ball", nu, j), build, want)


def _part_schedule(tree: Tree, decomp: Decomposition, anchor_set: set,
                   part_idx: int, eta: int):
    """BFS order of one part from its anchors, grouped by level.

    Returns (level_groups, tail): ``level_groups[j]`` holds the level-j
    vertices for j <= eta and ``tail`` the deeper ones, all in BFS order.
    An anchor-free part (single-part decomposition) routes everything
    through the tail.
    """
    part = decomp.parts[part_idx]
    part_of = decomp.part_of
    anchors = [v for v in part if v in anchor_set]
    anchor_free = not anchors

    sources = sorted(part[:1]) if anchor_free else sorted(anchors)
    seen = set(sources)
    order = []
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in tree.adj[u]:
            if v in seen or part_of[v] != part_idx:
                continue
            seen.add(v)
            queue.append(v)

    if anchor_free:
        return [[] for _ in range(eta + 1)], order

    groups: list[list[int]] = [[] for _ in range(eta + 1)]
    tail: list[int] = []
    levels = decomp.levels
    for v in order:
        j = int(levels[v])
        if j <= eta:
            groups[j].append(v)
        else:
            tail.append(v)
    return groups, tail


def embed_tree(
    tree: Tree,
    graph: GeometricGraph,
    colors: ColorAssignment,
    tess: Tessellation,
    balls: BallSystem,
    m: float,
    delta: int,
    weights=None,
) -> Embedding:
    """Run the two-step embedding of ``tree`` into ``graph``.

    Requires one point per vertex and tree max degree at most delta; the
    split preconditions on (weights, m, delta) must hold.  Returns a total
    injective map on success and a structured FAILURE otherwise.
    """
    n = tree.n
    if graph.n != n:
        raise ValueError(f"need one point per vertex: {graph.n} points, {n} vertices")
    if n == 1:
        return Embedding(map=np.zeros(1, dtype=np.int64), status="success")
    if tree.max_degree() > delta:
        raise ValueError(f"tree max degree {tree.max_degree()} exceeds delta={delta}")

    d, s, r = tess.d, tess.s, graph.r
    diagnostics: dict = {"s": s, "eta": tess.eta, "m": m, "epsilon_eff": balls.epsilon_eff}

    # geometric prechecks: everything the placement rules rely on to turn
    # co-location into adjacency.  Without them a "success" could contain
    # tree edges longer than r, so they fail loudly as a structured result.
    pair_reach = 2.0 * math.sqrt(d) / s
    if pair_reach > r:
        return Embedding(
            map=np.full(n, -1, dtype=np.int64),
            status="failure",
            failure=FailureInfo(
                iteration=0,
                step=0,
                resource="geometry",
                resource_id=None,
                demanded=pair_reach,
                available=r,
                message=f"cell-successor reach 2*sqrt(d)/s = {pair_reach:.6g} exceeds r = {r:.6g}",
            ),
            diagnostics=diagnostics,
        )
    max_gap = balls.max_consecutive_gap()
    diagnostics["max_ball_gap"] = max_gap
    if max_gap > r:
        return Embedding(
            map=np.full(n, -1, dtype=np.int64),
            status="failure",
            failure=FailureInfo(
                iteration=0,
                step=0,
                resource="geometry",
                resource_id=None,
                demanded=max_gap,
                available=r,
                message=f"worst consecutive ball gap {max_gap:.6g} exceeds r = {r:.6g}",
            ),
            diagnostics=diagnostics,
        )

    decomp = split_tree(tree, weights, m, delta)
    k = decomp.k
    anchor_set = set(decomp.anchors)
    diagnostics["k"] = k
    diagnostics["n_anchors"] = len(decomp.anchors)

    m_paper = n / (8 * d * s**d)
    if math.isclose(m, m_paper, rel_tol=1e-9):
        # Case-1 bound on the part count holds whenever m is the canonical value
        assert k <= 8 * d * (delta + 1) * s**d, "part count exceeded the Case-1 bound"

    pools = _PointPools(graph.points, colors, tess)
    mapping = np.full(n, -1, dtype=np.int64)
    eta = tess.eta
    central = tess.central_cell
    order = tess.order
    cursor = 0
    targets: list[int] = []
    diagnostics["targets"] = targets
    blue_overflow: dict[int, int] = {}

    def assign(vertices: list[int], pids: list[int]) -> None:
        for v, p in zip(vertices, pids):
            mapping[v] = p

    for t in range(1, k + 1):
        while cursor < tess.n_cells and pools.unocc[order[cursor]] == 0:
            cursor += 1
        assert cursor < tess.n_cells, "ran out of cells with vertices remaining"
        target = int(order[cursor])
        targets.append(target)

        groups, tail = _part_schedule(tree, decomp, anchor_set, t - 1, eta)

        if target == central:
            everyone = [v for g in groups for v in g] + tail
            got = pools.take_any_from_cell(central, len(everyone))
            assign(everyone, got)
            if len(got) < len(everyone):
                return Embedding(
                    map=mapping,
                    status="failure",
                    failure=FailureInfo(
                        iteration=t,
                        step=2,
                        resource="central-cell",
                        resource_id=central,
                        demanded=len(everyone),
                        available=len(got),
                        message="central cell exhausted",
                    ),
                    diagnostics=diagnostics,
                )
            continue

        tb = balls.for_target(target)
        for j in range(eta + 1):
            group = groups[j]
            if not group:
                continue
            got = pools.take_red_from_ball(
                tb.nu_cell, j, tb.centres[j], tb.radius, int(tb.cells[j]), len(group)
            )
            assign(group, got)
            if len(got) < len(group):
                return Embedding(
                    map=mapping,
                    status="failure",
                    failure=FailureInfo(
                        iteration=t,
                        step=1,
                        resource="ball",
                        resource_id=(target, j),
                        demanded=len(group),
                        available=len(got),
                        message=f"ball j={j} for target cell {target} ran out of red points",
                    ),
                    diagnostics=diagnostics,
                )

        if tail:
            got = pools.take_any_from_cell(target, len(tail))
            assign(tail, got)
            rest = tail[len(got) :]
            if rest:
                nu = int(tess.successor[target])
                extra = pools.take_blue_from_cell(nu, len(rest))
                assign(rest, extra)
                blue_overflow[nu] = blue_overflow.get(nu, 0) + len(extra)
                if len(extra) < len(rest):
                    return Embedding(
                        map=mapping,
                        status="failure",
                        failure=FailureInfo(
                            iteration=t,
                            step=2,
                            resource="cell+successor",
                            resource_id=(target, nu),
                            demanded=len(tail),
                            available=len(got) + len(extra),
                            message=(
                                f"cell {target} and blue points of successor {nu} "
                                "exhausted"
                            ),
                        ),
                        diagnostics=diagnostics,
                    )

    assert int(pools.occupied.sum()) == n, "occupancy does not match embedded count"
    diagnostics["max_blue_overflow"] = max(blue_overflow.values(), default=0)
    if math.isclose(m, m_paper, rel_tol=1e-9):
        # Case-2 bound: a cell is the successor of at most 2d cells
        assert diagnostics["max_blue_overflow"] <= 2 * d * m, "blue overflow exceeded Case-2 bound"
    return Embedding(map=mapping, status="success", diagnostics=diagnostics)


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    violation: tuple | None  # ("unassigned", v) | ("collision", u, v) | ("edge", u, v, dist)


def verify_embedding(tree: Tree, graph: GeometricGraph, embedding: Embedding) -> VerificationResult:
    """Independent validity check: total, injective, and every tree edge

    maps to points within distance r (direct computation, no spatial index).
    """
    mapping = embedding.map
    unassigned = np.flatnonzero(mapping < 0)
    if len(unassigned):
        return VerificationResult(False, ("unassigned", int(unassigned[0])))
    values, first_idx, counts = np.unique(mapping, return_index=True, return_counts=True)
    dup = np.flatnonzero(counts > 1)
    if len(dup):
        p = values[dup[0]]
        hits = np.flatnonzero(mapping == p)
        return VerificationResult(False, ("collision", int(hits[0]), int(hits[1])))

    coords = graph.points.coords
    r2 = graph.r**2
    for u in range(tree.n):
        for v in tree.adj[u]:
            if v < u:
                continue
            diff = coords[mapping[u]] - coords[mapping[v]]
            d2 = float(np.dot(diff, diff))
            if d2 > r2:
                return VerificationResult(False, ("edge", u, v, math.sqrt(d2)))
    return VerificationResult(True, None)


def greedy_line_embed(tree: Tree, graph: GeometricGraph) -> Embedding:
    """1-d greedy: BFS from vertex 0, each vertex onto the left-most
    unoccupied point within r of its parent's point (the root takes the
    left-most unoccupied point overall)."""
    if graph.d != 1:
        raise ValueError("greedy line embedding requires d = 1")
    n = tree.n
    if graph.n != n:
        raise ValueError(f"need one point per vertex: {graph.n} points, {n} vertices")

    xs = graph.points.coords[:, 0]
    by_x = np.lexsort((np.arange(n), xs))
    sorted_x = xs[by_x]
    r = graph.r

    # next-unoccupied-at-or-after pointer with path compression
    nxt = list(range(n + 1))

    def find(i: int) -> int:
        path = []
        while nxt[i] != i:
            path.append(i)
            i = nxt[i]
        for p in path:
            nxt[p] = i
        return i

    mapping = np.full(n, -1, dtype=np.int64)

    root_pos = find(0)
    mapping[0] = by_x[root_pos]
    nxt[root_pos] = root_pos + 1

    queue = deque([0])
    while queue:
        u = queue.popleft()
        xu = xs[mapping[u]]
        for v in tree.adj[u]:
            if mapping[v] >= 0:
                continue
            lo = int(np.searchsorted(sorted_x, xu - r, side="left"))
            hi = int(np.searchsorted(sorted_x, xu + r, side="right")) - 1
            pos = find(lo)
            if pos > hi:
                return Embedding(
                    map=mapping,
                    status="failure",
                    failure=FailureInfo(
                        iteration=0,
                        step=2,
                        resource="line-window",
                        resource_id=v,
                        demanded=1,
                        available=0,
                        message=(
                            f"no unoccupied point within r of vertex {u}'s point "
                            f"for child {v}"
                        ),
                    ),
                )
            mapping[v] = by_x[pos]
            nxt[pos] = pos + 1
            queue.append(v)
    return Embedding(map=mapping, status="success")


def embedding_to_csv(path, embedding: Embedding, points: PointSet) -> None:
    """Rows of vertex id, point id and the point's coordinates."""
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["vertex", "point"] + [f"x{k}" for k in range(points.d)])
        for v, p in enumerate(embedding.map):
            row = [v, int(p)]
            if p >= 0:
                row += [repr(float(c)) for c in points.coords[p]]
            else:
                row += [""] * points.d
            writer.writerow(row)
