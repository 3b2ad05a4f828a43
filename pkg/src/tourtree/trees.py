"""Oriented trees and forests: statistics, labelings, and generators.

Edges carry absolute directions: an edge (u, v) means u -> v regardless of
any rooting.  Vertices are 0..n-1.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .hforest import H_FOREST


@dataclass(frozen=True)
class OrientedForest:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        seen = set()
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (u, v) in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"bad edge ({u},{v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate underlying edge {key}")
            seen.add(key)
            ru, rv = find(u), find(v)
            if ru == rv:
                raise ValueError("underlying graph has a cycle")
            parent[ru] = rv

    @property
    def component_count(self) -> int:
        return self.n - len(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for (u, v) in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def out_neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for (u, v) in self.edges:
            adj[u].append(v)
        return adj

    def in_neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for (u, v) in self.edges:
            adj[v].append(u)
        return adj

    def components(self) -> list[list[int]]:
        adj = self.neighbors()
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            comps.append(sorted(comp))
        return comps

    def induced(self, vertices: Iterable[int]) -> "OrientedForest":
        verts = sorted(set(vertices))
        idx = {v: i for i, v in enumerate(verts)}
        edges = tuple(
            (idx[u], idx[v]) for (u, v) in self.edges if u in idx and v in idx
        )
        return OrientedForest(len(verts), edges)

    def reverse(self) -> "OrientedForest":
        return OrientedForest(self.n, tuple((v, u) for (u, v) in self.edges))

    def relabel(self, perm: dict[int, int] | list[int]) -> "OrientedForest":
        if isinstance(perm, list):
            perm = {i: p for i, p in enumerate(perm)}
        return OrientedForest(
            self.n, tuple(sorted((perm[u], perm[v]) for (u, v) in self.edges))
        )


@dataclass(frozen=True)
class OrientedTree(OrientedForest):
    def __post_init__(self):
        super().__post_init__()
        if len(self.edges) != self.n - 1:
            raise ValueError("a tree on n vertices has n-1 edges")

    def as_forest(self) -> OrientedForest:
        return OrientedForest(self.n, self.edges)


@dataclass(frozen=True)
class TreeStats:
    leaves: int
    max_degree: int
    out_leaves: int
    in_leaves: int


def tree_stats(t: OrientedForest) -> TreeStats:
    deg = [0] * t.n
    outd = [0] * t.n
    for (u, v) in t.edges:
        deg[u] += 1
        deg[v] += 1
        outd[u] += 1
    leaves = out_leaves = in_leaves = 0
    for v in range(t.n):
        if deg[v] == 1:
            leaves += 1
            # the unique edge points toward an out-leaf
            if outd[v] == 0:
                out_leaves += 1
            else:
                in_leaves += 1
    return TreeStats(leaves, max(deg) if t.n > 1 else 0, out_leaves, in_leaves)


def subtree_weight(t: OrientedTree, root: int) -> dict[int, int]:
    """w(v) = number of vertices whose path from root passes through v."""
    if not 0 <= root < t.n:
        raise ValueError("root not a vertex")
    adj = t.neighbors()
    order = []
    parent = [-1] * t.n
    seen = [False] * t.n
    stack = [root]
    seen[root] = True
    while stack:
        x = stack.pop()
        order.append(x)
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                stack.append(y)
    w = [1] * t.n
    for x in reversed(order):
        if parent[x] >= 0:
            w[parent[x]] += w[x]
    return {v: w[v] for v in range(t.n)}


def centroid(t: OrientedTree) -> int:
    """A vertex minimising the largest component of T - v (smallest index)."""
    adj = t.neighbors()
    w = subtree_weight(t, 0)
    # rerooting trick: max component of T - v given weights from root 0
    best_v, best_val = 0, t.n + 1
    parent = [-1] * t.n
    order = []
    seen = [False] * t.n
    stack = [0]
    seen[0] = True
    while stack:
        x = stack.pop()
        order.append(x)
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                stack.append(y)
    for v in range(t.n):
        parts = [w[y] for y in adj[v] if parent[y] == v]
        if parent[v] >= 0:
            parts.append(t.n - w[v])
        val = max(parts) if parts else 0
        if val < best_val:
            best_val, best_v = val, v
    return best_v


def f_leaf(t: OrientedForest, a: Iterable[int]) -> int:
    """|A| + leaves(T[A]) - 2*components(T[A]); isolated vertices count twice.

    Superadditive over disjoint vertex sets, and nonnegative.
    """
    aset = set(a)
    if not aset <= set(range(t.n)):
        raise ValueError("A is not a vertex subset")
    if not aset:
        return 0
    deg = {v: 0 for v in aset}
    m = 0
    for (u, v) in t.edges:
        if u in aset and v in aset:
            deg[u] += 1
            deg[v] += 1
            m += 1
    k = sum(1 for v in aset if deg[v] == 1) + 2 * sum(
        1 for v in aset if deg[v] == 0
    )
    s = len(aset) - m  # forest: components = vertices - edges
    return len(aset) + k - 2 * s


def split_attached_trees(
    t: OrientedTree, t0: Iterable[int]
) -> dict[int, tuple[list[int], list[int]]]:
    """For each v in T0, the vertex sets S_v+ / S_v- of the attached tree.

    S_v+ holds v plus the vertices whose path from v starts with an
    out-edge; S_v- the in-edge side.  Requires every component of T - T0
    to attach to T0 by exactly one edge.
    """
    t0set = set(t0)
    _check_attachment(t, t0set)
    adj = t.neighbors()
    outn = {u: set() for u in range(t.n)}
    for (u, v) in t.edges:
        outn[u].add(v)
    res = {v: ([v], [v]) for v in t0set}
    seen = set(t0set)
    for v in sorted(t0set):
        for y in adj[v]:
            if y in seen:
                continue
            side = 0 if y in outn[v] else 1
            stack = [y]
            seen.add(y)
            while stack:
                x = stack.pop()
                res[v][side].append(x)
                for z in adj[x]:
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)
    return {v: (sorted(p), sorted(m)) for v, (p, m) in res.items()}


def _check_attachment(t: OrientedTree, t0set: set[int]) -> None:
    if not t0set:
        raise ValueError("T0 empty")
    sub = [v for v in t0set]
    cnt = 0
    for (u, v) in t.edges:
        if u in t0set and v in t0set:
            cnt += 1
    if cnt != len(sub) - 1:
        raise ValueError("T[T0] does not induce a subtree")


def label_with_H(t: OrientedTree, t0: Iterable[int]) -> dict[int, str]:
    """The homomorphism-style labeling of T - T0 by the 18-vertex forest H.

    Vertices are classified by the first (up to three) edges of their path
    from T0; everything deeper keeps the last label, so T-edges map to
    H-edges or to equal labels (H itself has no loops).  Preimages:
    x-classes = N(T0), z+-classes = N-(N+(T0)) \\ T0,
    z--classes = N+(N-(T0)) \\ T0.
    """
    t0set = set(t0)
    _check_attachment(t, t0set)
    adj = t.neighbors()
    outn = {u: set() for u in range(t.n)}
    for (u, v) in t.edges:
        outn[u].add(v)

    def is_out(a, b):  # edge a->b present
        return b in outn[a]

    labels: dict[int, str] = {}
    # BFS per attachment vertex
    for w in sorted(t0set):
        for x in adj[w]:
            if x in t0set or x in labels:
                continue
            plus_side = is_out(w, x)  # component attached by out-edge
            d = "+" if plus_side else "-"
            ext = [y for y in adj[x] if y not in t0set]
            if plus_side:
                deeper = any(is_out(x, y) for y in ext)
            else:
                deeper = any(is_out(y, x) for y in ext)
            labels[x] = ("x" + d) if deeper else ("xb" + d)
            bar = labels[x].startswith("xb")
            stack = [x]
            while stack:
                a = stack.pop()
                la = labels[a]
                for b in adj[a]:
                    if b in t0set or b in labels:
                        continue
                    labels[b] = _next_label(la, is_out(a, b), bar)
                    stack.append(b)
    return labels


def _next_label(parent_label: str, edge_out: bool, bar: bool) -> str:
    d = parent_label[-1]
    base = parent_label[:-1]
    if d == "+":
        if base in ("x", "xb"):
            if edge_out:
                return "y+"  # x+ -> y+; xb+ has no out-children by f0 rule
            return ("zb+" if bar else "z+")
        if base in ("z", "zb"):
            if edge_out:
                return ("ub+" if bar else "u+")
            return ("wb+" if bar else "w+")
        return parent_label  # y/u/w blobs absorb everything deeper
    else:
        if base in ("x", "xb"):
            if not edge_out:
                return "y-"
            return ("zb-" if bar else "z-")
        if base in ("z", "zb"):
            if not edge_out:
                return ("ub-" if bar else "u-")
            return ("wb-" if bar else "w-")
        return parent_label


def check_h_labeling(t: OrientedTree, t0: Iterable[int], labels: dict[int, str]) -> bool:
    """Every T-edge outside T0 maps to an H-edge or joins equal labels."""
    t0set = set(t0)
    hedges = set(H_FOREST.edges)
    for (u, v) in t.edges:
        if u in t0set or v in t0set:
            continue
        lu, lv = labels[u], labels[v]
        if lu == lv:
            continue
        if (lu, lv) not in hedges:
            return False
    return True


# ---------------------------------------------------------------------------
# generators and enumeration
# ---------------------------------------------------------------------------

def random_oriented_tree(n: int, seed: int, kind: str = "prufer") -> OrientedTree:
    """Uniform labelled tree (Prufer) or random recursive tree, with each
    edge direction chosen by a fair coin."""
    rng = random.Random(seed)
    if n == 1:
        return OrientedTree(1, ())
    if kind == "prufer":
        if n == 2:
            und = [(0, 1)]
        else:
            seq = [rng.randrange(n) for _ in range(n - 2)]
            und = _prufer_decode(n, seq)
    elif kind == "recursive":
        und = [(rng.randrange(i), i) for i in range(1, n)]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    edges = tuple((u, v) if rng.random() < 0.5 else (v, u) for (u, v) in und)
    return OrientedTree(n, edges)


def _prufer_decode(n: int, seq: list[int]) -> list[tuple[int, int]]:
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    edges = []
    import heapq

    leaves = [v for v in range(n) if deg[v] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        deg[x] -= 1
        if deg[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def _free_trees(n: int) -> list[list[tuple[int, int]]]:
    """All free (unlabelled) trees on n vertices, as edge lists."""
    if n == 1:
        return [[]]
    found = {}
    for par in _parent_vectors(n):
        edges = [(par[i - 1], i) for i in range(1, n)]
        key = _tree_cert(n, edges)
        if key not in found:
            found[key] = edges
    return list(found.values())


def _parent_vectors(n: int) -> Iterator[list[int]]:
    # par[i-1] < i is the parent of vertex i: every increasing labelled tree
    # shape; the certificate dedup afterwards keeps this affordable for the
    # n <= 10 we need.
    def rec(i, par):
        if i == n:
            yield list(par)
            return
        for p in range(i):
            par.append(p)
            yield from rec(i + 1, par)
            par.pop()

    yield from rec(1, [])


def _tree_cert(n: int, edges: list[tuple[int, int]]) -> str:
    """Canonical string of an unlabelled free tree (AHU from the centroids)."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for (u, v) in edges:
        adj[u].append(v)
        adj[v].append(u)

    def encode(root, parent) -> str:
        subs = sorted(encode(y, root) for y in adj[root] if y != parent)
        return "(" + "".join(subs) + ")"

    def comp_size(start, banned):
        seen = {banned, start}
        stack, c = [start], 1
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
                    c += 1
        return c

    cents, best = [], n + 1
    for v in range(n):
        m = max((comp_size(y, v) for y in adj[v]), default=0)
        if m < best:
            best, cents = m, [v]
        elif m == best:
            cents.append(v)
    return min(encode(c, -1) for c in cents)


def _oriented_cert(t: OrientedForest) -> str:
    """Canonical certificate of an oriented forest up to isomorphism."""

    adj: list[list[tuple[int, str]]] = [[] for _ in range(t.n)]
    for (u, v) in t.edges:
        adj[u].append((v, ">"))
        adj[v].append((u, "<"))

    def encode(root, parent) -> str:
        subs = sorted(tag + encode(y, root) for (y, tag) in adj[root] if y != parent)
        return "(" + "".join(subs) + ")"

    comps = t.components()
    certs = []
    for comp in comps:
        # take min encoding over all roots in the component
        certs.append(min(encode(r, -1) for r in comp))
    return "|".join(sorted(certs))


def enumerate_oriented_trees(n: int, leaves: Optional[int] = None) -> list[OrientedTree]:
    """All oriented trees on n vertices up to isomorphism.

    Free-tree shapes times all 2^(n-1) orientations, deduplicated by a
    canonical certificate; optionally filtered by exact leaf count.
    """
    out = []
    seen = set()
    for und in _free_trees(n):
        m = len(und)
        for mask in range(1 << m):
            edges = tuple(
                und[i] if not (mask >> i) & 1 else (und[i][1], und[i][0])
                for i in range(m)
            )
            t = OrientedTree(n, edges)
            cert = _oriented_cert(t)
            if cert in seen:
                continue
            seen.add(cert)
            if leaves is None or tree_stats(t).leaves == leaves:
                out.append(t)
    return out


def enumerate_oriented_paths(n: int) -> list[OrientedTree]:
    """All oriented paths on n vertices up to isomorphism."""
    if n == 1:
        return [OrientedTree(1, ())]
    out, seen = [], set()
    und = [(i, i + 1) for i in range(n - 1)]
    for mask in range(1 << (n - 1)):
        edges = tuple(
            und[i] if not (mask >> i) & 1 else (und[i][1], und[i][0])
            for i in range(n - 1)
        )
        t = OrientedTree(n, edges)
        cert = _oriented_cert(t)
        if cert not in seen:
            seen.add(cert)
            out.append(t)
    return out


def out_star(k: int) -> OrientedTree:
    """Star on k+1 vertices, all edges out of the centre (vertex 0)."""
    return OrientedTree(k + 1, tuple((0, i) for i in range(1, k + 1)))


def in_star(k: int) -> OrientedTree:
    return OrientedTree(k + 1, tuple((i, 0) for i in range(1, k + 1)))


def directed_path(n: int) -> OrientedTree:
    return OrientedTree(n, tuple((i, i + 1) for i in range(n - 1)))
