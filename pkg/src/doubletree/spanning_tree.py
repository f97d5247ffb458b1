"""Minimum spanning trees, rooting, and the degree-increasing transformation.

The MST is built with a dense O(n^2) Prim scan, which matches the complete
graph induced by a metric instance.  Ties are broken toward the
lexicographically smallest (min(a,b), max(a,b)) edge pair, so the tree is
deterministic even for degenerate inputs with duplicate points.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InternalInvariantError
from .instances import Instance, PairwiseDistances


@dataclass(frozen=True)
class TreeEdge:
    a: int
    b: int
    w: float


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Rooted tree over nodes 0..n-1 with per-node ordered child lists.

    children lists are sorted ascending by node index; ``max_children`` is the
    largest child count over all nodes (the branching bound the subset tables
    grow exponentially in).
    """

    n: int
    root: int
    parent: tuple[Optional[int], ...]
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    subtree_size: tuple[int, ...]
    max_children: int

    @staticmethod
    def from_parents(n: int, root: int, parent: Sequence[Optional[int]]) -> "RootedTree":
        """Build the derived fields from parent links (iterative, path-safe)."""
        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            p = parent[v]
            if v == root:
                if p is not None:
                    raise ValueError("root must have no parent")
                continue
            if p is None:
                raise ValueError(f"non-root node {v} has no parent")
            children[p].append(v)
        for c in children:
            c.sort()

        depth = [0] * n
        order: list[int] = []
        stack = [root]
        seen = 0
        while stack:
            u = stack.pop()
            order.append(u)
            seen += 1
            for v in children[u]:
                depth[v] = depth[u] + 1
                stack.append(v)
        if seen != n:
            raise ValueError("parent links do not form a single tree")

        size = [1] * n
        for u in reversed(order):  # children appear after their parent
            p = parent[u]
            if p is not None:
                size[p] += size[u]
        return RootedTree(
            n=n,
            root=root,
            parent=tuple(parent),
            children=tuple(tuple(c) for c in children),
            depth=tuple(depth),
            subtree_size=tuple(size),
            max_children=max((len(c) for c in children), default=0),
        )

    def postorder(self) -> list[int]:
        """Nodes with every child before its parent (iterative)."""
        out: list[int] = []
        stack: list[tuple[int, bool]] = [(self.root, False)]
        while stack:
            u, expanded = stack.pop()
            if expanded:
                out.append(u)
            else:
                stack.append((u, True))
                for v in reversed(self.children[u]):
                    stack.append((v, False))
        return out

    def subtree_nodes(self, u: int) -> list[int]:
        """All descendants of u including u itself (iterative)."""
        out: list[int] = []
        stack = [u]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return out


def minimum_spanning_tree(inst: Instance) -> list[TreeEdge]:
    """Prim's algorithm with a dense scan; deterministic under ties."""
    n = inst.n
    if n == 1:
        return []
    dist = PairwiseDistances(inst)
    INF = np.inf
    key = np.full(n, INF)
    best_parent = np.full(n, -1, dtype=np.int64)
    in_tree = np.zeros(n, dtype=bool)
    key[0] = 0.0
    edges: list[TreeEdge] = []
    for _ in range(n):
        masked = np.where(in_tree, INF, key)
        candidates = np.flatnonzero(masked == masked.min())
        # among equal-key vertices prefer the lexicographically smallest
        # (min, max) edge pair to the tree, then the smallest vertex index
        j = candidates[0]
        if len(candidates) > 1 and best_parent[j] >= 0:
            pairs = [
                (min(best_parent[c], c), max(best_parent[c], c), c) for c in candidates
            ]
            pairs.sort()
            j = pairs[0][2]
        j = int(j)
        in_tree[j] = True
        if best_parent[j] >= 0:
            edges.append(TreeEdge(int(best_parent[j]), j, float(key[j])))
        row = dist.row(j)
        out = ~in_tree
        better = out & (row < key)
        key[better] = row[better]
        best_parent[better] = j
        # ties on key: keep the edge with the smaller (min, max) pair
        tied = out & (row == key) & (best_parent != j) & (best_parent >= 0)
        if np.any(tied):
            idx = np.flatnonzero(tied)
            cur = best_parent[idx]
            new_lo = np.minimum(j, idx)
            new_hi = np.maximum(j, idx)
            cur_lo = np.minimum(cur, idx)
            cur_hi = np.maximum(cur, idx)
            prefer = (new_lo < cur_lo) | ((new_lo == cur_lo) & (new_hi < cur_hi))
            best_parent[idx[prefer]] = j
    if len(edges) != n - 1:
        raise InternalInvariantError("Prim produced a non-spanning edge set")
    return edges


def tree_weight(edges: Sequence[TreeEdge]) -> float:
    return float(sum(e.w for e in edges))


def root_tree(edges: Sequence[TreeEdge], n: int) -> RootedTree:
    """Root a spanning tree at its lowest-indexed degree-1 node."""
    if n == 1:
        if edges:
            raise ValueError("single node tree cannot have edges")
        return RootedTree.from_parents(1, 0, [None])
    if len(edges) != n - 1:
        raise ValueError(f"a spanning tree on {n} nodes needs {n - 1} edges, got {len(edges)}")
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in edges:
        if e.a == e.b or not (0 <= e.a < n and 0 <= e.b < n):
            raise ValueError(f"bad edge ({e.a}, {e.b})")
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)
    root = next((u for u in range(n) if len(adj[u]) == 1), -1)
    if root < 0:
        raise ValueError("tree has no degree-1 node; input is not a tree")

    parent: list[Optional[int]] = [None] * n
    visited = [False] * n
    visited[root] = True
    stack = [root]
    seen = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not visited[v]:
                visited[v] = True
                parent[v] = u
                seen += 1
                stack.append(v)
    if seen != n:
        raise ValueError("edges do not connect all nodes; input is not a tree")
    return RootedTree.from_parents(n, root, parent)


def tree_distance(tree: RootedTree, a: int, b: int) -> int:
    """Number of edges on the unique a-b path (walk both ends up to the LCA)."""
    da, db = tree.depth[a], tree.depth[b]
    steps = 0
    while da > db:
        a = tree.parent[a]
        da -= 1
        steps += 1
    while db > da:
        b = tree.parent[b]
        db -= 1
        steps += 1
    while a != b:
        a = tree.parent[a]
        b = tree.parent[b]
        steps += 2
    return steps


def degree_increase(tree: RootedTree, limit_D: int) -> RootedTree:
    """Breadth-first child reattachment under a child-count cap.

    Walking a FIFO queue seeded with the grandchildren of the root, each node
    v hands all of its children to its current parent (and becomes a leaf)
    whenever the parent's resulting child count, i.e. the two current child
    counts combined, stays within ``limit_D``.  Counts are evaluated against
    the current, partially transformed tree.  With limit 1 nothing ever
    moves; every tour admissible for the input tree stays admissible for the
    output tree.
    """
    if limit_D < 1:
        raise ValueError("limit_D must be >= 1")
    n = tree.n
    if n <= 2:
        return tree
    if len(tree.children[tree.root]) != 1:
        raise InternalInvariantError(
            f"expected a single root child, found {len(tree.children[tree.root])}"
        )
    parent: list[Optional[int]] = list(tree.parent)
    children: list[list[int]] = [list(c) for c in tree.children]
    r_prime = tree.children[tree.root][0]
    queue = deque(children[r_prime])
    while queue:
        v = queue.popleft()
        queue.extend(children[v])
        p = parent[v]
        if len(children[p]) + len(children[v]) <= limit_D:
            for c in children[v]:
                parent[c] = p
                children[p].append(c)
            children[v] = []
    return RootedTree.from_parents(n, tree.root, parent)
