"""Well-connected tournaments, the non-connector split, transitive
decompositions, and the final tree assignment across a decomposition.

"Directed path of length l" always means exactly l edges on distinct
vertices.  Exact well-connectedness is decided by enumerating blocker sets
and searching for an all-false a x a rectangle in the exact path relation;
search mode screens adversarial and random candidate triples.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Optional, Sequence

from .tournament import BudgetError, Tournament, TheoremViolation, mask_of, mask_to_list
from .trees import OrientedForest, OrientedTree, f_leaf

PATH_RELATION_CAP = 6
EXACT_WC_CAP = 14
EXACT_WC_B_CAP = 3


def path_exists(
    g: Tournament,
    u: int,
    v: int,
    ell: int,
    avoid_mask: int = 0,
    budget: int = 2_000_000,
) -> bool:
    """Is there a directed path u -> ... -> v with exactly ell edges and
    distinct vertices, avoiding `avoid_mask`?  Exact (pruned DFS)."""
    if ell < 0:
        return False
    if (avoid_mask >> u) & 1 or (avoid_mask >> v) & 1:
        return False
    if ell == 0:
        return u == v
    if u == v:
        return False
    # backward BFS distances to v (lower bounds for the pruning)
    n = g.n
    INF = n + 10
    dist = [INF] * n
    dist[v] = 0
    frontier = [v]
    d = 0
    while frontier and d < ell:
        d += 1
        nxt = []
        for x in frontier:
            m = g.in_mask(x) & ~avoid_mask
            while m:
                w = (m & -m).bit_length() - 1
                m &= m - 1
                if dist[w] > d:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    if dist[u] > ell:
        return False
    nodes = [0]

    def rec(x: int, k: int, used: int) -> bool:
        if k == ell:
            return x == v
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetError("path search budget exceeded")
        rem = ell - k
        m = g.rows[x] & ~avoid_mask & ~used
        cands = []
        mm = m
        while mm:
            w = (mm & -mm).bit_length() - 1
            mm &= mm - 1
            if dist[w] <= rem - 1:
                cands.append(w)
        cands.sort(key=lambda w: abs(dist[w] - (rem - 1)))
        for w in cands:
            if rec(w, k + 1, used | (1 << w)):
                return True
        return False

    return rec(u, 0, 1 << u)


def path_relation(
    g: Tournament, ell: int, avoid: Sequence[int] = ()
) -> list[list[bool]]:
    """M[u][v] iff a directed path of exactly ell edges runs u -> v
    in G - avoid."""
    if ell > PATH_RELATION_CAP:
        raise BudgetError(f"path relation capped at l={PATH_RELATION_CAP}")
    am = mask_of(avoid)
    n = g.n
    m = [[False] * n for _ in range(n)]
    for u in range(n):
        if (am >> u) & 1:
            continue
        for v in range(n):
            if u == v or (am >> v) & 1:
                continue
            m[u][v] = path_exists(g, u, v, ell, am)
    return m


@dataclass(frozen=True)
class WellConnectedVerdict:
    a: int
    b: int
    ell: int
    verdict: str  # "proven-yes" | "no-counterexample" | "no"
    witness: Optional[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]
    tested: int = 0


def _zero_rectangle(zero_masks: list[int], a: int, n: int) -> Optional[tuple[list[int], int]]:
    """Rows A1 (|A1|=a) whose common zero-column mask has >= a bits."""
    rows = sorted(range(n), key=lambda u: -bin(zero_masks[u]).count("1"))

    best: Optional[tuple[list[int], int]] = None

    def rec(idx: int, chosen: list[int], inter: int) -> Optional[tuple[list[int], int]]:
        if len(chosen) == a:
            return (list(chosen), inter)
        if idx == len(rows):
            return None
        remaining = len(rows) - idx
        if remaining < a - len(chosen):
            return None
        u = rows[idx]
        ni = inter & zero_masks[u]
        if ni.bit_count() >= a:
            chosen.append(u)
            res = rec(idx + 1, chosen, ni)
            if res:
                return res
            chosen.pop()
        return rec(idx + 1, chosen, inter)

    full = (1 << n) - 1
    return rec(0, [], full)


def is_well_connected(
    g: Tournament,
    a: int | Fraction,
    b: int | Fraction,
    ell: int,
    mode: str = "exact",
    seed: int = 0,
    trials: int = 200,
) -> WellConnectedVerdict:
    """Decide (a,b,l)-well-connectedness exactly (n <= 14) or search for
    counterexamples (any n).

    A witness (A1, A2, B) means no directed path of exactly l edges runs
    from A1 to A2 inside V(G) - B.
    """
    n = g.n
    ai = max(1, ceil(a))
    bi = int(b // 1)  # floor: |B| <= b
    if mode == "exact":
        if n > EXACT_WC_CAP:
            raise BudgetError(f"exact mode capped at n={EXACT_WC_CAP}")
        if bi > EXACT_WC_B_CAP:
            raise BudgetError(f"exact mode capped at b={EXACT_WC_B_CAP}")
        if ai > n:
            return WellConnectedVerdict(ai, bi, ell, "proven-yes", None)
        for bsize in range(bi + 1):
            for bset in itertools.combinations(range(n), bsize):
                am = mask_of(bset)
                zero = []
                for u in range(n):
                    zm = 0
                    for v in range(n):
                        ok = (
                            u != v
                            and not (am >> u) & 1
                            and not (am >> v) & 1
                            and path_exists(g, u, v, ell, am)
                        )
                        if not ok:
                            zm |= 1 << v
                    zero.append(zm)
                res = _zero_rectangle(zero, ai, n)
                if res:
                    rowsel, colmask = res
                    cols = mask_to_list(colmask)[:ai]
                    return WellConnectedVerdict(
                        ai, bi, ell, "no",
                        (tuple(rowsel), tuple(cols), tuple(bset)),
                    )
        return WellConnectedVerdict(ai, bi, ell, "proven-yes", None)

    if mode == "search":
        rng = random.Random(seed)
        tested = 0
        # adversarial: reachability-layer candidates from extremal seeds
        deg_order = sorted(range(n), key=lambda v: g.out_degree(v))
        seeds = [deg_order[:ai], deg_order[-ai:]]
        for _ in range(6):
            seeds.append(rng.sample(range(n), ai))
        for a1 in seeds:
            for btrial in range(3):
                bset = tuple(rng.sample([x for x in range(n) if x not in a1],
                                        min(bi, n - len(a1)))) if bi else ()
                am = mask_of(bset)
                reach = _reach_at_most(g, [x for x in a1 if not (am >> x) & 1], ell, am)
                tested += 1
                outside = [v for v in range(n)
                           if not (reach >> v) & 1 and not (am >> v) & 1]
                if len(outside) >= ai:
                    a2 = tuple(outside[:ai])
                    return WellConnectedVerdict(
                        ai, bi, ell, "no", (tuple(a1), a2, bset))
        for _ in range(trials):
            a1 = rng.sample(range(n), ai)
            a2 = rng.sample(range(n), ai)
            pool = [x for x in range(n) if x not in a1 and x not in a2]
            bset = tuple(rng.sample(pool, min(bi, len(pool)))) if bi else ()
            am = mask_of(bset)
            tested += 1
            if not _some_path(g, a1, a2, ell, am):
                return WellConnectedVerdict(
                    ai, bi, ell, "no", (tuple(a1), tuple(a2), bset))
        return WellConnectedVerdict(ai, bi, ell, "no-counterexample", None, tested)

    raise ValueError(f"unknown mode {mode!r}")


def _reach_at_most(g: Tournament, sources: Sequence[int], ell: int, am: int) -> int:
    """Mask of vertices reachable from sources in <= ell steps avoiding am."""
    cur = mask_of(s for s in sources if not (am >> s) & 1)
    seen = cur
    for _ in range(ell):
        nxt = 0
        m = cur
        while m:
            x = (m & -m).bit_length() - 1
            m &= m - 1
            nxt |= g.rows[x]
        nxt &= ~am & ~seen
        seen |= nxt
        cur = nxt
    return seen


def _some_path(g, a1, a2, ell, am) -> bool:
    a2set = set(a2)
    for u in a1:
        if (am >> u) & 1:
            continue
        for v in a2:
            if v != u and not (am >> v) & 1 and path_exists(g, u, v, ell, am):
                return True
    return False


def verify_no_path_witness(
    g: Tournament, witness, ell: int
) -> bool:
    """Exact audit that a claimed (A1, A2, B) witness has no qualifying path."""
    a1, a2, bset = witness
    am = mask_of(bset)
    return not _some_path(g, a1, a2, ell, am)


def split_non_connector(
    g: Tournament,
    witness: tuple[Sequence[int], Sequence[int], Sequence[int]],
    ell: int,
    n_scale: Optional[int] = None,
) -> tuple[list[int], list[int], list[int], dict]:
    """Lemma-style split of a non-well-connected tournament.

    Builds reachability layers U_0 .. U_l from A1 avoiding B0, takes the
    first small layer difference, and returns (W1, W2, B) with every edge
    between W1 and W2 directed from W1 to W2 (audited exhaustively).
    """
    a1, a2, b0 = witness
    if not verify_no_path_witness(g, witness, ell):
        raise ValueError("witness invalid: a qualifying path exists")
    n = g.n
    scale = n if n_scale is None else n_scale
    b0m = mask_of(b0)
    layers = [mask_of(x for x in a1 if not (b0m >> x) & 1)]
    for i in range(1, ell + 1):
        cur = layers[-1]
        nxt = cur
        m = cur
        while m:
            x = (m & -m).bit_length() - 1
            m &= m - 1
            nxt |= g.rows[x]
        nxt &= ~b0m
        layers.append(nxt)
    r = None
    bound = Fraction(3 * scale, ell)
    for i in range(1, ell + 1):
        if Fraction((layers[i] & ~layers[i - 1]).bit_count()) <= bound:
            r = i
            break
    if r is None:
        raise TheoremViolation(
            "no small layer difference among l layers",
            {"sizes": [l.bit_count() for l in layers]},
        )
    w2m = layers[r - 1]
    bm = b0m | (layers[r] & ~layers[r - 1])
    w1m = ((1 << n) - 1) & ~layers[r] & ~b0m
    # exhaustive edge audit W1 -> W2
    m1 = w1m
    while m1:
        x = (m1 & -m1).bit_length() - 1
        m1 &= m1 - 1
        if g.rows[x] & w2m != w2m & ~(1 << x) & g.rows[x]:
            pass
        m2 = w2m
        while m2:
            y = (m2 & -m2).bit_length() - 1
            m2 &= m2 - 1
            if not g.has_edge(x, y):
                raise TheoremViolation(
                    "split audit failed: edge not W1->W2", {"x": x, "y": y}
                )
    a2m = mask_of(a2)
    audit = {
        "r": r,
        "layer_sizes": [l.bit_count() for l in layers],
        "a2_in_layer_diff": (layers[r] & ~layers[r - 1] & a2m).bit_count(),
        "a2_bound_ell_plus_1": ell + 1,
        "b_bound": Fraction(4 * scale, ell),
        "b_size": bm.bit_count(),
    }
    return mask_to_list(w1m), mask_to_list(w2m), mask_to_list(bm), audit


@dataclass
class TransitiveDecomposition:
    blocks: list[list[int]]
    exceptional: list[int]
    certificates: dict[int, WellConnectedVerdict]
    params: dict

    def block_of(self) -> dict[int, int]:
        return {v: i for i, blk in enumerate(self.blocks) for v in blk}


def transitive_decomposition(
    g: Tournament,
    eps: Fraction,
    eta: Fraction,
    ell: int,
    mode: str = "search",
    seed: int = 0,
    n_scale: Optional[int] = None,
) -> TransitiveDecomposition:
    """Iteratively split non-well-connected blocks until every large block
    certifies; audits td1 (all forward edges), td2, and |B| <= eps*n."""
    if ell < 2:
        raise ValueError("need l >= 2")
    n = g.n
    scale = n if n_scale is None else n_scale
    blocks: list[list[int]] = [list(range(n))]
    bacc: list[int] = []
    certs: dict[int, WellConnectedVerdict] = {}
    max_iter = ceil(6 / eps)
    a_thr = eps * scale
    b_thr = eta * scale
    big = _sqrt_upper(eps) * scale
    for it in range(max_iter + 1):
        # largest uncertified big block
        cand = None
        for i, blk in enumerate(blocks):
            if len(blk) >= big and i not in certs:
                if cand is None or len(blk) > len(blocks[cand]):
                    cand = i
        if cand is None:
            break
        blk = blocks[cand]
        sub = g.subtournament(blk)
        v = is_well_connected(sub, a_thr, b_thr, ell, mode, seed + it)
        if v.verdict in ("proven-yes", "no-counterexample"):
            certs[cand] = v
            continue
        w1, w2, bpart, _ = split_non_connector(sub, v.witness, ell, scale)
        to_global = blk
        w1g = [to_global[x] for x in w1]
        w2g = [to_global[x] for x in w2]
        bg = [to_global[x] for x in bpart]
        new_blocks = blocks[:cand] + [w1g, w2g] + blocks[cand + 1 :]
        # re-key certificates past the split point
        new_certs = {}
        for k, cv in certs.items():
            new_certs[k if k < cand else k + 1] = cv
        blocks, certs = new_blocks, new_certs
        bacc.extend(bg)
    else:
        raise BudgetError("transitive decomposition iteration bound exceeded")
    blocks = [b for b in blocks if b]
    td = TransitiveDecomposition(
        blocks, bacc, certs,
        {"eps": eps, "eta": eta, "ell": ell, "mode": mode, "n_scale": scale},
    )
    audit_transitive_decomposition(g, td)
    return td


def _sqrt_upper(x: Fraction) -> Fraction:
    from math import isqrt

    scale = 10**9
    return Fraction(isqrt(int(x * scale * scale)) + 1, scale)


def audit_transitive_decomposition(g: Tournament, td: TransitiveDecomposition):
    n_scale = td.params["n_scale"]
    eps = td.params["eps"]
    big = _sqrt_upper(eps) * n_scale
    for i in range(len(td.blocks)):
        for j in range(i + 1, len(td.blocks)):
            for x in td.blocks[i]:
                m = mask_of(td.blocks[j])
                if g.rows[x] & m != m:
                    raise TheoremViolation(
                        "td1 audit failed", {"i": i, "j": j, "x": x}
                    )
    for i, blk in enumerate(td.blocks):
        if len(blk) >= big and i not in td.certificates:
            raise TheoremViolation("td2 audit failed: big block uncertified", {"i": i})
    if Fraction(len(td.exceptional)) > eps * n_scale:
        raise TheoremViolation(
            "exceptional set too large",
            {"size": len(td.exceptional), "bound": eps * n_scale},
        )


@dataclass
class ConnectorTestReport:
    trials: int
    failures: int
    params: dict


def random_connector_test(
    g: Tournament,
    p: Fraction,
    a: Fraction,
    b: Fraction,
    ell: int,
    trials: int,
    seed: int,
    n_scale: Optional[int] = None,
) -> ConnectorTestReport:
    """Sample U at rate p and probe whether G[U] stays well-connected at the
    shifted parameters (6a, b^2/n, l+6); statistical, search mode inside."""
    n = g.n
    scale = n if n_scale is None else n_scale
    if b < 4 * ell:
        raise ValueError("validity: need b >= 4*l for the statistical test")
    rng = random.Random(seed)
    fails = 0
    for t in range(trials):
        u = [v for v in range(n) if rng.random() < p]
        sub = g.subtournament(u)
        verdict = is_well_connected(
            sub, 6 * a, b * b / scale, ell + 6, "search", seed + 31 * t
        )
        if verdict.verdict == "no":
            fails += 1
    return ConnectorTestReport(
        trials, fails,
        {"p": p, "a": a, "b": b, "ell": ell, "shifted": (6 * a, b * b / scale, ell + 6)},
    )


# ---------------------------------------------------------------------------
# final tree assignment across a transitive decomposition
# ---------------------------------------------------------------------------

@dataclass
class TreeAssignment:
    per_block: dict[int, list[int]]  # block index -> tree vertices
    i_minus: list[int]
    i_mid: list[int]
    i_plus: list[int]
    remainder: list[int]
    remainder_out_leaves: int
    remainder_in_leaves: int


def assign_tree_to_decomposition(
    t: OrientedTree,
    td: TransitiveDecomposition,
    eps: Fraction,
    alpha: Fraction,
    mode: str = "leaf",
) -> TreeAssignment:
    """Peel suffix/out-leaf sets for the right blocks and prefix/in-leaf
    sets for the left blocks, then leave a middle remainder with few out-
    and in-leaves; audits the assignment invariants."""
    n_scale = td.params["n_scale"]
    host = sum(len(b) for b in td.blocks) + len(td.exceptional)

    def f(vs) -> int:
        return f_leaf(t, vs) if mode == "leaf" else len(list(vs))

    if mode == "leaf":
        if host < f(range(t.n)) + alpha * n_scale:
            raise ValueError("host too small for leaf-mode assignment")
    else:
        if host < t.n + alpha * n_scale:
            raise ValueError("host too small for size-mode assignment")
    big = _sqrt_upper(eps) * n_scale
    r = len(td.blocks)
    w = [
        (1 - alpha / 4) * len(b) if len(b) >= big else Fraction(len(b))
        for b in td.blocks
    ]
    remaining = set(range(t.n))
    per_block: dict[int, list[int]] = {}
    i_plus: list[int] = []

    def topo(rem: set[int]) -> list[int]:
        # any orientation of a forest is a DAG; Kahn order restricted to rem
        indeg = {v: 0 for v in rem}
        out = {v: [] for v in rem}
        for (u, v) in t.edges:
            if u in rem and v in rem:
                indeg[v] += 1
                out[u].append(v)
        queue = sorted([v for v in rem if indeg[v] == 0])
        order = []
        import heapq

        heapq.heapify(queue)
        while queue:
            x = heapq.heappop(queue)
            order.append(x)
            for y in out[x]:
                indeg[y] -= 1
                if indeg[y] == 0:
                    heapq.heappush(queue, y)
        return order

    def leaves_of(rem: set[int], kind: str) -> list[int]:
        deg = {v: 0 for v in rem}
        outd = {v: 0 for v in rem}
        for (u, v) in t.edges:
            if u in rem and v in rem:
                deg[u] += 1
                deg[v] += 1
                outd[u] += 1
        if kind == "out":
            return sorted(v for v in rem if deg[v] == 1 and outd[v] == 0)
        return sorted(v for v in rem if deg[v] == 1 and outd[v] == 1)

    # right side: I+
    for i in range(r - 1, -1, -1):
        if not remaining:
            break
        if len(td.blocks[i]) >= big:
            order = topo(remaining)
            suf: list[int] = []
            val = 0
            k = len(order)
            ok = False
            while k > 0:
                k -= 1
                suf.append(order[k])
                val = f(suf)
                if val > w[i]:
                    ok = False
                    break
                if val >= (1 - eps) * w[i]:
                    ok = True
                    break
            if not ok:
                break
            per_block[i] = sorted(suf)
            i_plus.append(i)
            remaining -= set(suf)
        else:
            need = int(w[i])
            outs = leaves_of(remaining, "out")
            if len(outs) < need:
                break
            sel = outs[:need]
            per_block[i] = sel
            i_plus.append(i)
            remaining -= set(sel)
    i_plus.sort()
    # left side: I-
    i_minus: list[int] = []
    for i in range(r):
        if i in per_block or not remaining:
            break
        if len(td.blocks[i]) >= big:
            order = topo(remaining)
            pre: list[int] = []
            ok = False
            for x in order:
                pre.append(x)
                val = f(pre)
                if val > w[i]:
                    ok = False
                    break
                if val >= (1 - eps) * w[i]:
                    ok = True
                    break
            if not ok:
                break
            per_block[i] = sorted(pre)
            i_minus.append(i)
            remaining -= set(pre)
        else:
            need = int(w[i])
            ins = leaves_of(remaining, "in")
            if len(ins) < need:
                break
            sel = ins[:need]
            per_block[i] = sel
            i_minus.append(i)
            remaining -= set(sel)
    mid = [i for i in range(r) if i not in per_block]
    rem_sorted = sorted(remaining)
    out_l = len(leaves_of(remaining, "out"))
    in_l = len(leaves_of(remaining, "in"))
    asg = TreeAssignment(per_block, i_minus, mid, i_plus, rem_sorted, out_l, in_l)
    audit_assignment(t, td, asg, eps, w)
    return asg


def audit_assignment(t, td, asg, eps, w):
    """Recount A1-A5 of the final-assignment invariants."""
    n_scale = td.params["n_scale"]
    big = _sqrt_upper(eps) * n_scale
    union_plus = set(v for i in asg.i_plus for v in asg.per_block[i])
    union_minus = set(v for i in asg.i_minus for v in asg.per_block[i])
    rest_plus = set(range(t.n)) - union_plus
    rest_minus = set(range(t.n)) - union_minus
    for (u, v) in t.edges:
        if u in union_plus and v in rest_plus:
            raise TheoremViolation("A2 audit: edge out of I+ union", {"edge": (u, v)})
        if u in rest_minus and v in union_minus:
            raise TheoremViolation("A3 audit: edge into I- union", {"edge": (u, v)})
    for i, vs in asg.per_block.items():
        if len(td.blocks[i]) < big:
            vset = set(vs)
            for (u, v) in t.edges:
                if u in vset and v in vset:
                    raise TheoremViolation("A4 audit: edge inside small-block set", {"i": i})
    order_index = {}
    for i, vs in asg.per_block.items():
        for v in vs:
            order_index[v] = i
    for (u, v) in t.edges:
        iu, iv = order_index.get(u), order_index.get(v)
        if iu is not None and iv is not None and iu > iv:
            raise TheoremViolation("A5 audit: backward edge across blocks", {"edge": (u, v)})
