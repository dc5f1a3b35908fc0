"""Tree type and the generators the experiments draw from.

Four families: the truncated regular tree (the diameter obstruction used by
the lower-bound experiment), uniform random labelled trees (random Pruefer
sequence decode), degree-capped random attachment trees (test load for the
embedding trials), and paths/stars as extremal shapes.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tree:
    """Unrooted tree on vertices 0..n-1 as sorted adjacency lists."""

    n: int
    adj: tuple  # tuple of tuples of neighbor ids

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adj], dtype=np.int64)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n > 1 else 0

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Tree":
        adj = [[] for _ in range(n)]
        count = 0
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            adj[u].append(v)
            adj[v].append(u)
            count += 1
        if count != n - 1:
            raise ValueError(f"a tree on {n} vertices needs {n - 1} edges, got {count}")
        tree = cls(n=n, adj=tuple(tuple(sorted(a)) for a in adj))
        if n > 1 and not tree._is_connected():
            raise ValueError("edge list is not connected")
        return tree

    def _is_connected(self) -> bool:
        seen = bytearray(self.n)
        seen[0] = 1
        stack = [0]
        reached = 1
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    reached += 1
                    stack.append(v)
        return reached == self.n


def bfs_order(tree: Tree, sources, within=None) -> tuple[list[int], dict[int, int]]:
    """BFS visit order and hop distances from a set of sources.

    ``within`` optionally restricts the walk to a vertex subset.
    """
    allowed = None if within is None else set(within)
    dist: dict[int, int] = {}
    order: list[int] = []
    queue = deque()
    for s in sorted(sources):
        dist[s] = 0
        queue.append(s)
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in tree.adj[u]:
            if v in dist or (allowed is not None and v not in allowed):
                continue
            dist[v] = dist[u] + 1
            queue.append(v)
    return order, dist


def height_h(n: int, delta: int) -> int:
    """The unique h with sum_{i<h} (delta-1)^i < n <= sum_{i<=h} (delta-1)^i."""
    if delta < 3:
        raise ValueError(f"need delta >= 3, got {delta}")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    total, power, h = 1, 1, 0
    while total < n:
        h += 1
        power *= delta - 1
        total += power
    return h


def truncated_regular_tree(n: int, delta: int) -> Tree:
    """Rooted tree with exactly (delta-1)^i vertices at depth i < h and the
    remaining vertices attached left to right at depth h."""
    h = height_h(n, delta)
    edges = []
    prev_level = [0]
    next_id = 1
    for depth in range(1, h + 1):
        want = (delta - 1) ** depth
        if depth == h:
            want = n - next_id
        level = []
        parent_idx = 0
        slots_left = delta - 1
        for _ in range(want):
            parent = prev_level[parent_idx]
            edges.append((parent, next_id))
            level.append(next_id)
            next_id += 1
            slots_left -= 1
            if slots_left == 0:
                parent_idx += 1
                slots_left = delta - 1
        prev_level = level
    return Tree.from_edges(n, edges)


def decode_prufer(seq, n: int) -> Tree:
    """Decode a Pruefer sequence over vertex labels 0..n-1 into its tree."""
    if n < 2:
        raise ValueError("Pruefer decoding needs n >= 2")
    seq = list(seq)
    if len(seq) != n - 2:
        raise ValueError(f"sequence length must be n - 2 = {n - 2}")
    degree = np.ones(n, dtype=np.int64)
    for a in seq:
        degree[a] += 1
    edges = []
    # classic pointer decode: repeatedly join the smallest current leaf
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for a in seq:
        edges.append((int(leaf), int(a)))
        degree[a] -= 1
        if degree[a] == 1 and a < ptr:
            leaf = a
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges.append((int(leaf), n - 1))
    return Tree.from_edges(n, edges)


def uniform_random_tree(n: int, seed) -> Tree:
    """Uniform over the n^(n-2) labelled trees, via a random Pruefer sequence."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if n == 2:
        return Tree.from_edges(2, [(0, 1)])
    rng = np.random.default_rng(seed)
    return decode_prufer(rng.integers(0, n, size=n - 2), n)


def random_bounded_degree_tree(n: int, delta: int, seed) -> Tree:
    """Sequential random attachment under a degree cap.

    Vertex i attaches to a uniform choice among vertices with residual
    capacity (degree < delta).  Covers many shapes but is *not* uniform over
    the degree-capped tree family.
    """
    if delta < 2:
        raise ValueError(f"need delta >= 2, got {delta}")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    edges = []
    capacity = [delta]  # residual degree slots of each open vertex
    open_ids = [0]
    for v in range(1, n):
        pick = int(rng.integers(len(open_ids)))
        u = open_ids[pick]
        edges.append((u, v))
        capacity[pick] -= 1
        if capacity[pick] == 0:
            open_ids[pick] = open_ids[-1]
            capacity[pick] = capacity[-1]
            open_ids.pop()
            capacity.pop()
        open_ids.append(v)
        capacity.append(delta - 1)
    return Tree.from_edges(n, edges)


def path_tree(n: int) -> Tree:
    if n < 1:
        raise ValueError("need n >= 1")
    if n == 1:
        return Tree(n=1, adj=((),))
    return Tree.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_tree(n: int) -> Tree:
    if n < 2:
        raise ValueError("need n >= 2")
    return Tree.from_edges(n, [(0, i) for i in range(1, n)])


def height_from(tree: Tree, v: int) -> int:
    """Eccentricity of v: the deepest BFS level reached from it."""
    _, dist = bfs_order(tree, [v])
    return max(dist.values())


def width_from(tree: Tree, v: int) -> int:
    """Largest BFS level size when the tree is rooted at v."""
    _, dist = bfs_order(tree, [v])
    counts = np.bincount(np.fromiter(dist.values(), dtype=np.int64))
    return int(counts.max())


@dataclass(frozen=True)
class TreeStats:
    max_degree: int
    diameter: int


def tree_stats(tree: Tree) -> TreeStats:
    """Max degree and exact diameter (double BFS, exact on trees)."""
    if tree.n == 1:
        return TreeStats(max_degree=0, diameter=0)
    _, dist = bfs_order(tree, [0])
    far = max(dist, key=lambda v: (dist[v], -v))
    _, dist2 = bfs_order(tree, [far])
    return TreeStats(max_degree=tree.max_degree(), diameter=max(dist2.values()))


def save_tree_csv(path, tree: Tree) -> None:
    """Edge list with a `u,v` header; a single-vertex tree writes no rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v"])
        for u, v in tree.edges():
            writer.writerow([u, v])


def load_tree_csv(path, n: int | None = None) -> Tree:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        edges = [(int(u), int(v)) for u, v in reader]
    if n is None:
        n = max((max(u, v) for u, v in edges), default=0) + 1
    return Tree.from_edges(n, edges)
