"""Splitting a weighted bounded-degree tree into parts of comparable weight.

Given max degree delta, a target weight m and per-vertex weights in
(0, m0] with m0 = m/(delta+1), the tree splits into vertex-disjoint subtrees
whose weights all land in [m0, m].  The construction cuts at a weighted
centroid: if the component weighs more than m, remove the vertex minimising
the heaviest remaining component, cut the edge toward that heaviest
component, and recurse on both sides.  Both sides are guaranteed to weigh
more than m0, so the recursion maintains its own precondition; because the
heavy side holds at least a 1/(delta+1) fraction of the weight, the
recursion is balanced and the whole split costs O(n log k).

Endpoints of cut edges are *anchors*; the *level* of a vertex is its hop
distance, inside its own part, to the nearest anchor of that part.  A
decomposition with a single part has no anchors and uses level 0 everywhere
by convention.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .trees import Tree


@dataclass(frozen=True)
class Decomposition:
    """Partition of V(T) into subtree parts, with cut edges, anchors, levels."""

    parts: tuple            # tuple of tuples of vertex ids, each sorted
    part_of: np.ndarray     # (n,) part index per vertex
    cut_edges: tuple        # tuple of (u, v) with u < v
    anchors: tuple          # sorted vertex ids incident to cut edges
    levels: np.ndarray      # (n,) distance to nearest same-part anchor

    @property
    def k(self) -> int:
        return len(self.parts)


def _subtree_weights(tree: Tree, comp: list[int], w: np.ndarray, blocked: set,
                     parent: np.ndarray, sub: np.ndarray):
    """Root the component at comp[0]; fill parent[] and subtree weights sub[]
    for its vertices.  Returns (visit order, visited set)."""
    root = comp[0]
    parent[root] = -1
    order = [root]
    stack = [root]
    seen = {root}
    while stack:
        u = stack.pop()
        for v in tree.adj[u]:
            if v in seen or (u, v) in blocked or (v, u) in blocked:
                continue
            seen.add(v)
            parent[v] = u
            order.append(v)
            stack.append(v)
    for u in order:
        sub[u] = w[u]
    for u in reversed(order):
        p = parent[u]
        if p >= 0:
            sub[p] += sub[u]
    return order, seen


def _centroid_of(tree: Tree, comp: list[int], w: np.ndarray, blocked: set,
                 parent: np.ndarray, sub: np.ndarray):
    """Weighted centroid of one component plus the data needed to cut there.

    Returns (centroid, heaviest-neighbor u) where u is the neighbour of the
    centroid inside the heaviest component of comp minus the centroid.
    """
    order, seen = _subtree_weights(tree, comp, w, blocked, parent, sub)
    total = sub[comp[0]]

    # parent/sub entries are only valid for this component's vertices, so
    # every child test below must be guarded by membership in `seen`
    best_v, best_score = -1, None
    for v in order:
        score = total - sub[v]  # parent side (0 at the root)
        for c in tree.adj[v]:
            if c in seen and parent[c] == v:
                score = max(score, sub[c])
        if best_score is None or score < best_score or (score == best_score and v < best_v):
            best_v, best_score = v, score

    # heaviest component of comp \ {best_v}: largest weight, then smallest
    # root id, where the root is best_v's neighbour inside the component
    best_u, best_w = -1, -1.0
    p = parent[best_v]
    if p >= 0:
        best_u, best_w = int(p), float(total - sub[best_v])
    for c in tree.adj[best_v]:
        if c in seen and parent[c] == best_v:
            if sub[c] > best_w or (sub[c] == best_w and c < best_u):
                best_u, best_w = c, float(sub[c])
    return best_v, best_u


def weighted_centroid(tree: Tree, w=None) -> int:
    """Vertex minimising the maximum component weight of T minus that vertex;
    ties broken by smallest vertex id."""
    w = _as_weights(tree, w)
    if tree.n == 1:
        return 0
    parent = np.empty(tree.n, dtype=np.int64)
    sub = np.empty(tree.n, dtype=np.float64)
    v, _ = _centroid_of(tree, list(range(tree.n)), w, set(), parent, sub)
    return int(v)


def _as_weights(tree: Tree, w) -> np.ndarray:
    if w is None:
        return np.ones(tree.n, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (tree.n,):
        raise ValueError(f"weights must have shape ({tree.n},)")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    return w


def split_tree(tree: Tree, w, m: float, delta: int) -> Decomposition:
    """Split into parts with weights in [m0, m], m0 = m/(delta+1).

    Preconditions: the tree has max degree at most delta, every weight is at
    most m0, and the total weight is at least m0.
    """
    if delta < 2:
        raise ValueError(f"need delta >= 2, got {delta}")
    w = _as_weights(tree, w)
    m0 = m / (delta + 1)
    if tree.max_degree() > delta:
        raise ValueError(
            f"tree max degree {tree.max_degree()} exceeds delta = {delta}"
        )
    heavy = np.where(w > m0 + 1e-12)[0]
    if len(heavy):
        v = int(heavy[0])
        raise ValueError(
            f"vertex {v} has weight {w[v]:.6g} > m0 = {m0:.6g}"
        )
    total = float(w.sum())
    if total < m0 - 1e-12:
        raise ValueError(f"total weight {total:.6g} < m0 = {m0:.6g}")

    parent = np.empty(tree.n, dtype=np.int64)
    sub = np.empty(tree.n, dtype=np.float64)
    blocked: set[tuple[int, int]] = set()
    parts: list[list[int]] = []
    cut_edges: list[tuple[int, int]] = []

    pending: list[list[int]] = [list(range(tree.n))]
    while pending:
        comp = pending.pop()
        weight = float(w[comp].sum())
        if weight <= m + 1e-12:
            parts.append(sorted(comp))
            continue
        v, u = _centroid_of(tree, comp, w, blocked, parent, sub)
        cut_edges.append((min(u, v), max(u, v)))
        blocked.add((u, v))
        # component of u after removing edge (u, v)
        side_u = [u]
        stack = [u]
        seen = {u, v}
        while stack:
            x = stack.pop()
            for y in tree.adj[x]:
                if y in seen or (x, y) in blocked or (y, x) in blocked:
                    continue
                seen.add(y)
                side_u.append(y)
                stack.append(y)
        seen.discard(v)
        side_v = [x for x in comp if x not in seen]
        pending.append(side_u)
        pending.append(side_v)

    parts.sort(key=lambda p: p[0])
    part_of = np.empty(tree.n, dtype=np.int64)
    for idx, part in enumerate(parts):
        part_of[part] = idx
    anchors = sorted({x for e in cut_edges for x in e})

    decomp = Decomposition(
        parts=tuple(tuple(p) for p in parts),
        part_of=part_of,
        cut_edges=tuple(sorted(cut_edges)),
        anchors=tuple(anchors),
        levels=np.zeros(tree.n, dtype=np.int64),
    )
    levels = compute_levels(decomp, tree)
    return Decomposition(
        parts=decomp.parts,
        part_of=decomp.part_of,
        cut_edges=decomp.cut_edges,
        anchors=decomp.anchors,
        levels=levels,
    )


def compute_levels(decomposition: Decomposition, tree: Tree) -> np.ndarray:
    """Per-vertex distance, within its part, to the nearest anchor of that
    part (multi-source BFS); all zeros for an anchor-free part."""
    part_of = decomposition.part_of
    levels = np.zeros(tree.n, dtype=np.int64)
    anchors_by_part: dict[int, list[int]] = {}
    for a in decomposition.anchors:
        anchors_by_part.setdefault(int(part_of[a]), []).append(a)

    for idx, part in enumerate(decomposition.parts):
        sources = anchors_by_part.get(idx)
        if not sources:
            continue  # anchor-free part: level 0 everywhere by convention
        dist = {s: 0 for s in sources}
        queue = deque(sorted(sources))
        while queue:
            x = queue.popleft()
            for y in tree.adj[x]:
                if y in dist or part_of[y] != idx:
                    continue
                dist[y] = dist[x] + 1
                queue.append(y)
        for v, lv in dist.items():
            levels[v] = lv
    return levels


def check_decomposition(tree: Tree, w, m: float, delta: int,
                        decomp: Decomposition) -> None:
    """Raise AssertionError unless every decomposition invariant holds."""
    w = _as_weights(tree, w)
    m0 = m / (delta + 1)
    n = tree.n
    k = decomp.k

    all_vertices = sorted(v for part in decomp.parts for v in part)
    assert all_vertices == list(range(n)), "parts do not partition V(T)"

    assert len(decomp.cut_edges) == k - 1, "expected k-1 cut edges"
    assert len(decomp.anchors) <= max(0, 2 * k - 2), "too many anchors"
    assert set(decomp.anchors) == {x for e in decomp.cut_edges for x in e}

    total = float(w.sum())
    assert k <= total / m0 + 1e-9, "k exceeds w(T)/m0"

    part_of = decomp.part_of
    edge_set = {tuple(sorted(e)) for e in tree.edges()}
    for e in decomp.cut_edges:
        assert e in edge_set, f"cut edge {e} is not a tree edge"
        assert part_of[e[0]] != part_of[e[1]], f"cut edge {e} inside a part"

    for idx, part in enumerate(decomp.parts):
        weight = float(w[list(part)].sum())
        assert m0 - 1e-9 <= weight <= m + 1e-9, (
            f"part {idx} weight {weight:.6g} outside [{m0:.6g}, {m:.6g}]"
        )
        # connectivity inside the part
        part_set = set(part)
        seen = {part[0]}
        stack = [part[0]]
        while stack:
            x = stack.pop()
            for y in tree.adj[x]:
                if y in part_set and y not in seen:
                    seen.add(y)
                    stack.append(y)
        assert seen == part_set, f"part {idx} is not connected"

    # BFS levels: adjacent same-part vertices differ by at most one level;
    # every cut edge joins two level-0 vertices
    for u, v in tree.edges():
        if part_of[u] == part_of[v]:
            assert abs(int(decomp.levels[u]) - int(decomp.levels[v])) <= 1
    for u, v in decomp.cut_edges:
        assert decomp.levels[u] == 0 and decomp.levels[v] == 0
