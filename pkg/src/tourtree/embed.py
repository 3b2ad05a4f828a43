"""Exact embedding of oriented forests in tournaments.

The searcher is a complete backtracking over pattern vertices in a
component-by-component DFS order rooted at centroids, with host candidates
kept as bitmasks.  A matching-based (Hall-style) prune kicks in when
per-vertex constraints are present.  Every public entry point can have its
output re-checked with :func:`validate_embedding`, which shares no code
with the search.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from .tournament import Tournament, TheoremViolation, VertexOrder, mask_of
from .trees import OrientedForest, OrientedTree, centroid


@dataclass(frozen=True)
class Embedding:
    """Injective, direction-preserving map pattern vertex -> host vertex."""

    map: dict[int, int]

    def image(self) -> set[int]:
        return set(self.map.values())


def validate_embedding(t: OrientedForest, g: Tournament, emb: Embedding) -> bool:
    """Independent validator: injectivity plus direction preservation."""
    vals = list(emb.map.values())
    if len(set(vals)) != len(vals):
        return False
    if set(emb.map.keys()) != set(range(t.n)):
        return False
    if any(not 0 <= h < g.n for h in vals):
        return False
    for (u, v) in t.edges:
        hu, hv = emb.map[u], emb.map[v]
        if not ((g.rows[hu] >> hv) & 1):
            return False
    return True


@dataclass
class EmbeddingConstraints:
    """Per-pattern-vertex allowed host sets plus globally forbidden hosts."""

    allowed: dict[int, set[int]] = field(default_factory=dict)
    forbidden_hosts: set[int] = field(default_factory=set)

    def allowed_mask(self, v: int, g: Tournament) -> int:
        full = (1 << g.n) - 1
        m = full
        if v in self.allowed:
            m = mask_of(self.allowed[v])
        m &= ~mask_of(self.forbidden_hosts)
        return m


@lru_cache(maxsize=4096)
def _component_orders(t: OrientedForest) -> list[list[tuple[int, int, bool]]]:
    """Per component: (vertex, parent, edge_out) in a DFS order from a
    centroid-ish root; parent -1 for roots.  edge_out: parent -> vertex."""
    adj = t.neighbors()
    outn = [set(x) for x in t.out_neighbors()]
    comps = t.components()
    plans = []
    for comp in comps:
        sub = t.induced(comp)
        root_local = centroid(OrientedTree(sub.n, sub.edges)) if sub.n > 1 else 0
        root = comp[root_local]
        order = [(root, -1, False)]
        seen = {root}
        stack = [root]
        while stack:
            x = stack.pop()
            for y in sorted(adj[x], key=lambda y: -len(adj[y])):
                if y not in seen:
                    seen.add(y)
                    order.append((y, x, y in outn[x]))
                    stack.append(y)
        plans.append(order)
    # largest component first: fail fast on the hard part
    plans.sort(key=len, reverse=True)
    return plans


def _hall_prune(
    pending: list[int],
    cand_masks: dict[int, int],
    used: int,
) -> bool:
    """Feasibility of a perfect matching pending -> free hosts (Kuhn)."""
    free_masks = [cand_masks[v] & ~used for v in pending]
    if any(m == 0 for m in free_masks):
        return False
    match: dict[int, int] = {}

    def try_assign(i: int, visited: set[int]) -> bool:
        m = free_masks[i]
        while m:
            h = (m & -m).bit_length() - 1
            m &= m - 1
            if h in visited:
                continue
            visited.add(h)
            if h not in match or try_assign(match[h], visited):
                match[h] = i
                return True
        return False

    for i in range(len(pending)):
        if not try_assign(i, set()):
            return False
    return True


def find_embedding(
    t: OrientedForest,
    g: Tournament,
    constraints: Optional[EmbeddingConstraints] = None,
    hall: str = "auto",
) -> Optional[Embedding]:
    """Complete backtracking search; None iff no embedding exists."""
    if t.n > g.n:
        return None
    full = (1 << g.n) - 1
    if constraints is None:
        base = {v: full for v in range(t.n)}
        use_hall = hall == "always"
    else:
        base = {v: constraints.allowed_mask(v, g) for v in range(t.n)}
        use_hall = hall in ("auto", "always")
    plans = _component_orders(t)
    flat: list[tuple[int, int, bool]] = [step for plan in plans for step in plan]
    assignment: dict[int, int] = {}
    rows = g.rows

    def in_mask(h: int) -> int:
        return full & ~rows[h] & ~(1 << h)

    def rec(i: int, used: int) -> bool:
        if i == len(flat):
            return True
        v, parent, edge_out = flat[i]
        m = base[v] & ~used
        if parent >= 0:
            # edge_out means parent -> v, so v must land in N+(host(parent))
            hp = assignment[parent]
            m &= rows[hp] if edge_out else in_mask(hp)
        if m == 0:
            return False
        if use_hall and len(flat) - i > 2:
            pending = [w for (w, _, _) in flat[i:]]
            if not _hall_prune(pending, base, used):
                return False
        mm = m
        while mm:
            h = (mm & -mm).bit_length() - 1
            mm &= mm - 1
            assignment[v] = h
            if rec(i + 1, used | (1 << h)):
                return True
            del assignment[v]
        return False

    if rec(0, 0):
        return Embedding(dict(assignment))
    return None


def embedding_exists(t: OrientedForest, g: Tournament) -> bool:
    return find_embedding(t, g) is not None


@lru_cache(maxsize=4096)
def search_plan(t: OrientedForest) -> tuple[tuple[int, int, bool], ...]:
    """Flattened DFS plan: (vertex, plan-index of parent, edge_out)."""
    plans = _component_orders(t)
    flat = [step for plan in plans for step in plan]
    pos = {v: i for i, (v, _, _) in enumerate(flat)}
    return tuple(
        (v, pos[p] if p >= 0 else -1, eo) for (v, p, eo) in flat
    )


def embed_exists_fast(
    plan: tuple[tuple[int, int, bool], ...],
    out_rows: Sequence[int],
    in_rows: Sequence[int],
    full: int,
) -> bool:
    """Tight existence check for sweeps; plan from :func:`search_plan`."""
    k = len(plan)
    images = [0] * k
    masks = [0] * k

    i = 0
    used = 0
    # iterative backtracking over the plan
    v, p, eo = plan[0]
    masks[0] = full
    while True:
        m = masks[i]
        if m:
            h_bit = m & -m
            masks[i] = m & ~h_bit
            h = h_bit.bit_length() - 1
            images[i] = h_bit
            if i + 1 == k:
                return True
            used |= h_bit
            i += 1
            v, p, eo = plan[i]
            if p < 0:
                masks[i] = full & ~used
            else:
                hp = images[p].bit_length() - 1
                nbr = out_rows[hp] if eo else in_rows[hp]
                masks[i] = nbr & ~used
        else:
            i -= 1
            if i < 0:
                return False
            used &= ~images[i]
    return False


def embed_small_tree(
    t: OrientedTree, g: Tournament, host: Sequence[int]
) -> Embedding:
    """Embedding into G[host]; guaranteed when |host| >= 3|T| - 3.

    A failure with the precondition satisfied is escalated: it would be a
    counterexample to the linear embedding bound.
    """
    host = list(host)
    if len(host) < 3 * t.n - 3:
        raise ValueError(f"|host|={len(host)} < 3|T|-3={3 * t.n - 3}")
    sub = g.subtournament(host)
    emb = find_embedding(t.as_forest() if isinstance(t, OrientedTree) else t, sub)
    if emb is None:
        raise TheoremViolation(
            "no embedding although |host| >= 3|T|-3",
            {"tree_edges": t.edges, "host": host, "bits": sub.bits()},
        )
    return Embedding({v: host[h] for v, h in emb.map.items()})


def extend_embedding(
    t: OrientedTree,
    t_sub: Sequence[int],
    partial: Embedding,
    g: Tournament,
    u_set: Sequence[int],
) -> Embedding:
    """Extend an embedding of T[t_sub] to all of T, new vertices inside U.

    Greedy component by component: each component of T - t_sub hangs off one
    subtree vertex and is embedded into the free part of the right
    neighbourhood of its image.  Requires d+-(v, U) >= 3*|T \\ t_sub| for
    every embedded vertex (the caller's obligation; the deficient vertex is
    reported otherwise).
    """
    sub_set = set(t_sub)
    rest = [v for v in range(t.n) if v not in sub_set]
    need = 3 * len(rest)
    u_mask = mask_of(u_set)
    if set(partial.map.keys()) != sub_set:
        raise ValueError("partial embedding does not cover t_sub")
    for v, h in partial.map.items():
        if g.out_degree(h, u_mask) < need or g.in_degree(h, u_mask) < need:
            raise ValueError(
                f"vertex {v} (host {h}) lacks degree {need} into U"
            )
    if not rest:
        return partial

    adj = t.neighbors()
    outn = [set(x) for x in t.out_neighbors()]
    mapping = dict(partial.map)
    used = mask_of(mapping.values())
    comps = t.induced(rest).components()
    rest_sorted = sorted(rest)
    for comp_local in comps:
        comp = [rest_sorted[i] for i in comp_local]
        attach = None
        for v in comp:
            for w in adj[v]:
                if w in sub_set:
                    attach = (w, v, v in outn[w])
                    break
            if attach:
                break
        if attach is None:
            raise ValueError("component not attached to t_sub")
        w, v0, out_edge = attach
        hw = mapping[w]
        pool_mask = (g.rows[hw] if out_edge else g.in_mask(hw)) & u_mask & ~used
        pool = []
        mm = pool_mask
        while mm:
            h = (mm & -mm).bit_length() - 1
            pool.append(h)
            mm &= mm - 1
        ct = t.induced(comp)
        # the whole component goes inside pool, which already sits in the
        # right neighbourhood of hw, so the attachment edge is automatic
        sub_host = g.subtournament(pool)
        emb = find_embedding(ct, sub_host)
        if emb is None:
            raise TheoremViolation(
                "greedy extension failed with degree slack present",
                {"component": comp, "pool": pool},
            )
        comp_sorted = sorted(comp)
        for lv, lh in emb.map.items():
            mapping[comp_sorted[lv]] = pool[lh]
            used |= 1 << pool[lh]
    return Embedding(mapping)


def branch_embed(
    t: OrientedForest,
    phi: dict[int, int],
    clusters: dict[int, Sequence[int]],
    u_sets: dict[int, Sequence[int]],
    g: Tournament,
    forbidden: Optional[set[int]] = None,
) -> Embedding:
    """Embed T with each vertex v landing inside U_{phi(v)}.

    Component-ordering greedy backed by full backtracking: pattern vertices
    get per-vertex allowed sets U_{phi(v)} minus forbidden hosts.  The
    caller is responsible for the regular-pair hypotheses; failures are
    reported as normal misses (None is never returned: a ValueError is
    raised naming the stage).
    """
    cons = EmbeddingConstraints(
        allowed={v: set(u_sets[phi[v]]) for v in range(t.n)},
        forbidden_hosts=forbidden or set(),
    )
    emb = find_embedding(t, g, cons)
    if emb is None:
        raise ValueError("branch_embed: no embedding within the allocated U-sets")
    return emb


def connect_median_path3(
    g: Tournament,
    order: VertexOrder,
    i: int,
    j: int,
    avoid: Sequence[int],
) -> Optional[tuple[int, int, int, int]]:
    """Directed v_i -> a -> b -> v_j path avoiding `avoid` (positions i<j).

    Candidates inside the median-order interval (i, j) are tried first,
    matching the locale of the underlying median-order lemma.  Returns the
    4-tuple of host vertices, or None for heuristic orders that miss.
    """
    n = g.n
    if not (0 <= i < j < n):
        raise ValueError("need 0 <= i < j < n (positions)")
    if j - i < 7:
        raise ValueError("need j - i >= 7")
    a_set = set(avoid)
    if len(a_set) > (j - i - 7) / 6:
        raise ValueError("avoid set larger than (j-i-7)/6")
    vi, vj = order.perm[i], order.perm[j]
    if vi in a_set or vj in a_set:
        raise ValueError("endpoints inside avoid set")
    interval = [order.perm[k] for k in range(i + 1, j)]
    outside = [v for v in order.perm if v not in interval and v not in (vi, vj)]
    pool = [v for v in interval + outside if v not in a_set]
    out_vi = g.rows[vi]
    in_vj = g.in_mask(vj)
    cand_a = [a for a in pool if (out_vi >> a) & 1]
    cand_b_mask = mask_of(b for b in pool if (in_vj >> b) & 1)
    for a in cand_a:
        m = g.rows[a] & cand_b_mask & ~(1 << vi) & ~(1 << vj) & ~(1 << a)
        if m:
            b = (m & -m).bit_length() - 1
            return (vi, a, b, vj)
    return None


def find_oriented_path_between(
    g: Tournament,
    directions: Sequence[bool],
    a1: Sequence[int],
    a2: Sequence[int],
    b: Sequence[int],
) -> Optional[Embedding]:
    """A copy of the oriented path with the given edge directions
    (True = forward), first vertex in A1, last in A2, avoiding B.

    Exact search.  Paths with a direction change are searched within
    A1 u A2 first (they exist there for large enough sets); directed
    patterns search the whole host.
    """
    ell = len(directions)
    b_mask = mask_of(b)
    a1_mask = mask_of(a1) & ~b_mask
    a2_mask = mask_of(a2) & ~b_mask
    full = (1 << g.n) - 1
    anti = not (all(directions) or not any(directions))
    pools = []
    if anti:
        pools.append((a1_mask | a2_mask) & ~b_mask)
    pools.append(full & ~b_mask)

    for pool in pools:
        res = _path_search(g, directions, a1_mask, a2_mask, pool)
        if res is not None:
            return Embedding({i: v for i, v in enumerate(res)})
    return None


def _path_search(g, directions, a1_mask, a2_mask, pool) -> Optional[list[int]]:
    ell = len(directions)
    starts = a1_mask & pool
    path: list[int] = []

    def rec(v: int, k: int, used: int) -> bool:
        if k == ell:
            return bool((a2_mask >> v) & 1)
        step = g.rows[v] if directions[k] else g.in_mask(v)
        m = step & pool & ~used
        if k == ell - 1:
            m &= a2_mask
        while m:
            w = (m & -m).bit_length() - 1
            m &= m - 1
            path.append(w)
            if rec(w, k + 1, used | (1 << w)):
                return True
            path.pop()
        return False

    mm = starts
    while mm:
        s = (mm & -mm).bit_length() - 1
        mm &= mm - 1
        path.clear()
        path.append(s)
        if rec(s, 0, 1 << s):
            return list(path)
    return None
