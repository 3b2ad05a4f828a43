"""Tournaments on labelled vertices, with bitset adjacency kernels.

A tournament on n vertices is stored as a tuple of n Python ints, where bit v
of ``rows[u]`` is set iff the edge u->v is present.  This makes degree queries
popcounts and neighbourhood intersections single AND operations, which is what
the exhaustive sweeps live on.

The canonical bit encoding used in files and enumeration is upper-triangular
row-major: for each pair i<j (ordered by i, then j), the bit is 1 iff i->j.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np


class BudgetError(RuntimeError):
    """An enumeration or search exceeded its configured desk-scale budget."""


class TheoremViolation(RuntimeError):
    """A construction failed although its hypotheses were verified.

    Carries a ``payload`` dict with enough state to reproduce; a genuine
    instance would witness a disproof of the underlying statement.
    """

    def __init__(self, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.payload = payload or {}


def _check_antisymmetric(n: int, rows: tuple[int, ...]) -> None:
    full = (1 << n) - 1
    for u in range(n):
        if rows[u] & (1 << u):
            raise ValueError(f"self-loop at {u}")
    for u in range(n):
        for v in range(u + 1, n):
            uv = (rows[u] >> v) & 1
            vu = (rows[v] >> u) & 1
            if uv + vu != 1:
                raise ValueError(f"pair ({u},{v}) has {uv + vu} edges, want exactly 1")
    for u in range(n):
        if rows[u] & ~full:
            raise ValueError(f"row {u} has bits beyond n={n}")


@dataclass(frozen=True)
class Tournament:
    """Immutable tournament; safe to share across threads."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.rows) != self.n:
            raise ValueError("rows length mismatch")
        if self.n <= 64:
            _check_antisymmetric(self.n, self.rows)
        else:
            # spot-check large instances cheaply; full check is O(n^2) python
            total = sum(r.bit_count() for r in self.rows)
            if total != self.n * (self.n - 1) // 2:
                raise ValueError("edge count wrong; not a tournament")
            for u in range(self.n):
                if self.rows[u] & (1 << u):
                    raise ValueError(f"self-loop at {u}")

    # -- queries ----------------------------------------------------------
    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def out_mask(self, u: int) -> int:
        return self.rows[u]

    def in_mask(self, u: int) -> int:
        full = (1 << self.n) - 1
        return full & ~self.rows[u] & ~(1 << u)

    def out_degree(self, u: int, within: Optional[int] = None) -> int:
        m = self.rows[u]
        if within is not None:
            m &= within
        return m.bit_count()

    def in_degree(self, u: int, within: Optional[int] = None) -> int:
        m = self.in_mask(u)
        if within is not None:
            m &= within
        return m.bit_count()

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            m = self.rows[u]
            while m:
                v = (m & -m).bit_length() - 1
                yield (u, v)
                m &= m - 1

    # -- encodings ---------------------------------------------------------
    def bits(self) -> str:
        out = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                out.append("1" if self.has_edge(i, j) else "0")
        return "".join(out)

    @classmethod
    def from_bits(cls, n: int, bits: str) -> "Tournament":
        want = n * (n - 1) // 2
        if len(bits) != want:
            raise ValueError(f"bitstring length {len(bits)}, want {want}")
        rows = [0] * n
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                if bits[k] == "1":
                    rows[i] |= 1 << j
                else:
                    rows[j] |= 1 << i
                k += 1
        return cls(n, tuple(rows))

    @classmethod
    def from_code(cls, n: int, code: int) -> "Tournament":
        """Tournament from the integer whose binary digits are the bitstring.

        Bit 0 of ``code`` is the *first* character of the bitstring.
        """
        rows = [0] * n
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                if (code >> k) & 1:
                    rows[i] |= 1 << j
                else:
                    rows[j] |= 1 << i
                k += 1
        return cls(n, tuple(rows))

    def code(self) -> int:
        c = 0
        k = 0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.has_edge(i, j):
                    c |= 1 << k
                k += 1
        return c

    # -- transforms ---------------------------------------------------------
    def relabel(self, perm: tuple[int, ...]) -> "Tournament":
        """Image under the map old vertex u -> new vertex perm[u]."""
        rows = [0] * self.n
        for u in range(self.n):
            m = self.rows[u]
            acc = 0
            while m:
                v = (m & -m).bit_length() - 1
                acc |= 1 << perm[v]
                m &= m - 1
            rows[perm[u]] = acc
        return Tournament(self.n, tuple(rows))

    def reverse(self) -> "Tournament":
        rows = [self.in_mask(u) for u in range(self.n)]
        return Tournament(self.n, tuple(rows))

    def subtournament(self, vertices: list[int]) -> "Tournament":
        """Induced tournament, vertex i of the result = vertices[i]."""
        idx = {v: i for i, v in enumerate(vertices)}
        k = len(vertices)
        rows = [0] * k
        for i, u in enumerate(vertices):
            for j, v in enumerate(vertices):
                if i != j and self.has_edge(u, v):
                    rows[i] |= 1 << j
        return Tournament(k, tuple(rows))

    def adjacency(self) -> np.ndarray:
        """Dense boolean adjacency matrix (row u, col v: u->v)."""
        a = np.zeros((self.n, self.n), dtype=bool)
        for u in range(self.n):
            m = self.rows[u]
            while m:
                v = (m & -m).bit_length() - 1
                a[u, v] = True
                m &= m - 1
        return a

    @classmethod
    def from_adjacency(cls, a: np.ndarray) -> "Tournament":
        n = a.shape[0]
        rows = []
        for u in range(n):
            acc = 0
            for v in np.flatnonzero(a[u]):
                acc |= 1 << int(v)
            rows.append(acc)
        return cls(n, tuple(rows))


@dataclass(frozen=True)
class VertexOrder:
    """A permutation of the host's vertices with its forward-edge count."""

    perm: tuple[int, ...]
    forward_count: int

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise ValueError("perm is not a bijection on [n]")

    @classmethod
    def of(cls, g: Tournament, perm: tuple[int, ...]) -> "VertexOrder":
        return cls(tuple(perm), count_forward(g, perm))


def count_forward(g: Tournament, perm) -> int:
    seen = 0
    back = 0
    for v in perm:
        back += (g.rows[v] & seen).bit_count()
        seen |= 1 << v
    return g.n * (g.n - 1) // 2 - back


@dataclass(frozen=True)
class AlmostTournament:
    """Oriented graph with at most eps*n non-adjacencies per vertex."""

    n: int
    rows: tuple[int, ...]
    epsilon: Fraction

    def __post_init__(self):
        for u in range(self.n):
            if self.rows[u] & (1 << u):
                raise ValueError(f"self-loop at {u}")
        budget = self.epsilon * self.n
        for u in range(self.n):
            missing = 0
            for v in range(self.n):
                if v == u:
                    continue
                uv = (self.rows[u] >> v) & 1
                vu = (self.rows[v] >> u) & 1
                if uv and vu:
                    raise ValueError(f"double edge on pair ({u},{v})")
                if not uv and not vu:
                    missing += 1
            if missing > budget:
                raise ValueError(
                    f"vertex {u} misses {missing} adjacencies > eps*n = {budget}"
                )

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def out_degree(self, u: int) -> int:
        return self.rows[u].bit_count()

    def in_degree(self, u: int) -> int:
        d = 0
        for v in range(self.n):
            if v != u and (self.rows[v] >> u) & 1:
                d += 1
        return d

    def out_set(self, u: int) -> list[int]:
        return [v for v in range(self.n) if (self.rows[u] >> v) & 1]

    def in_set(self, u: int) -> list[int]:
        return [v for v in range(self.n) if v != u and (self.rows[v] >> u) & 1]

    @classmethod
    def from_tournament(cls, g: Tournament) -> "AlmostTournament":
        return cls(g.n, g.rows, Fraction(0))


# ---------------------------------------------------------------------------
# construction and enumeration
# ---------------------------------------------------------------------------

def build_tournament(
    n: int,
    *,
    bits: Optional[str] = None,
    seed: Optional[int] = None,
    named: Optional[str] = None,
) -> Tournament:
    """Build a tournament from a bitstring, a seed, or a named family.

    named: "transitive" (i->j for i<j), "rotational" (i -> i+1..i+(n-1)/2
    mod n; requires odd n), "regular" (alias of rotational).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    given = sum(x is not None for x in (bits, seed, named))
    if given != 1:
        raise ValueError("specify exactly one of bits=, seed=, named=")
    if bits is not None:
        return Tournament.from_bits(n, bits)
    if named is not None:
        if named == "transitive":
            return Tournament.from_bits(n, "1" * (n * (n - 1) // 2))
        if named in ("rotational", "regular"):
            if n % 2 == 0:
                raise ValueError("rotational tournament needs odd n")
            rows = [0] * n
            for u in range(n):
                for k in range(1, (n - 1) // 2 + 1):
                    rows[u] |= 1 << ((u + k) % n)
            return Tournament(n, tuple(rows))
        raise ValueError(f"unknown named tournament {named!r}")
    rng = random.Random(seed)
    m = n * (n - 1) // 2
    b = "".join("1" if rng.random() < 0.5 else "0" for _ in range(m))
    return Tournament.from_bits(n, b)


def random_tournament(n: int, seed: int) -> Tournament:
    """Uniform random tournament; fast path via numpy for large n."""
    if n <= 64:
        return build_tournament(n, seed=seed)
    rng = np.random.default_rng(seed)
    upper = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
    a = np.triu(upper, 1)
    a = (a + np.tril(1 - upper.T, -1)).astype(bool)
    np.fill_diagonal(a, False)
    return Tournament.from_adjacency(a)


RAW_ENUM_CAP = 8
CANONICAL_ENUM_CAP = 9


def enumerate_tournaments(
    n: int, mode: str = "raw", force: bool = False
) -> Iterator[Tournament]:
    if mode == "raw":
        if n > RAW_ENUM_CAP and not force:
            raise BudgetError(f"raw enumeration capped at n={RAW_ENUM_CAP}; use force")
        m = n * (n - 1) // 2
        for code in range(1 << m):
            yield Tournament.from_code(n, code)
    elif mode == "canonical":
        if n > CANONICAL_ENUM_CAP and not force:
            raise BudgetError(
                f"canonical enumeration capped at n={CANONICAL_ENUM_CAP}; use force"
            )
        seen: set[int] = set()
        m = n * (n - 1) // 2
        perms = list(itertools.permutations(range(n)))
        for code in range(1 << m):
            t = Tournament.from_code(n, code)
            canon = min(t.relabel(p).code() for p in perms)
            if canon == code and canon not in seen:
                seen.add(canon)
                yield t
    else:
        raise ValueError(f"unknown mode {mode!r}")


def canonical_code(g: Tournament) -> int:
    """Minimum bit-encoding over all relabelings (n <= 9)."""
    if g.n > CANONICAL_ENUM_CAP:
        raise BudgetError(f"canonical form capped at n={CANONICAL_ENUM_CAP}")
    return min(g.relabel(p).code() for p in itertools.permutations(range(g.n)))


# ---------------------------------------------------------------------------
# median orders
# ---------------------------------------------------------------------------

MEDIAN_EXACT_CAP = 20


def median_order(
    g: Tournament,
    mode: str = "exact",
    seed: int = 0,
    restarts: int = 3,
) -> VertexOrder:
    """Vertex order maximising forward edges (exactly, or a local optimum).

    Exact mode: subset DP over prefixes, ties broken toward the
    lexicographically smallest permutation.  Local search: best-improvement
    single-vertex reinsertion to a fixpoint, over several seeded restarts;
    the better of each fixpoint and its reversal is kept, so the result
    always has at least half of the maximum possible forward count.
    """
    if mode == "exact":
        if g.n > MEDIAN_EXACT_CAP:
            raise BudgetError(f"exact median order capped at n={MEDIAN_EXACT_CAP}")
        return _median_exact(g)
    if mode == "local_search":
        return _median_local(g, seed, restarts)
    raise ValueError(f"unknown mode {mode!r}")


def _median_exact(g: Tournament) -> VertexOrder:
    n = g.n
    size = 1 << n
    # f[S] = max forward edges inside S over orderings of S, with S a prefix
    # block: recurrence picks the first vertex v of S.
    f = np.zeros(size, dtype=np.int32)
    masks = np.arange(size, dtype=np.uint32)
    pop = np.bitwise_count(masks).astype(np.int8)
    rows = np.array(g.rows, dtype=np.uint32)
    order_by_pop = [np.flatnonzero(pop == k).astype(np.uint32) for k in range(n + 1)]
    for k in range(2, n + 1):
        level = order_by_pop[k]
        best = np.full(level.shape, -1, dtype=np.int32)
        for v in range(n):
            bit = np.uint32(1 << v)
            has = (level & bit) != 0
            sub = level[has] & ~bit
            gain = np.bitwise_count(rows[v] & sub).astype(np.int32)
            cand = f[sub] + gain
            cur = best[has]
            np.maximum(cur, cand, out=cur)
            best[has] = cur
        f[level] = best
    # lexicographically smallest reconstruction
    S = size - 1
    perm = []
    for _ in range(n):
        target = int(f[S])
        for v in range(n):
            if not (S >> v) & 1:
                continue
            rest = S & ~(1 << v)
            gain = (g.rows[v] & rest).bit_count()
            if gain + int(f[rest]) == target:
                perm.append(v)
                S = rest
                break
    return VertexOrder(tuple(perm), int(f[size - 1]))


def _median_local(g: Tournament, seed: int, restarts: int) -> VertexOrder:
    n = g.n
    rng = random.Random(seed)
    best_perm: Optional[list[int]] = None
    best_fc = -1
    for _ in range(max(1, restarts)):
        perm = list(range(n))
        rng.shuffle(perm)
        fc = count_forward(g, perm)
        improved = True
        while improved:
            improved = False
            for v in list(perm):
                i = perm.index(v)
                # delta of moving v to each position, by scanning outward
                without = perm[:i] + perm[i + 1 :]
                # forward edges involving v at position j:
                #   v -> those after, those before -> v
                pre = 0  # edges w->v for w before position
                best_j, best_delta = i, 0
                cur = sum(1 for w in without[:i] if g.has_edge(w, v)) + sum(
                    1 for w in without[i:] if g.has_edge(v, w)
                )
                for j in range(len(without) + 1):
                    val = sum(1 for w in without[:j] if g.has_edge(w, v)) + sum(
                        1 for w in without[j:] if g.has_edge(v, w)
                    )
                    if val - cur > best_delta:
                        best_delta = val - cur
                        best_j = j
                if best_delta > 0:
                    without.insert(best_j, v)
                    perm = without
                    fc += best_delta
                    improved = True
        rev = list(reversed(perm))
        fc_rev = count_forward(g, rev)
        if fc_rev > fc:
            perm, fc = rev, fc_rev
        if fc > best_fc:
            best_fc, best_perm = fc, perm
    assert best_perm is not None
    return VertexOrder(tuple(best_perm), best_fc)


# ---------------------------------------------------------------------------
# almost-tournament utilities
# ---------------------------------------------------------------------------

def balanced_vertex(r: AlmostTournament) -> int:
    """A vertex v with min(d+(v), d-(v)) >= (n-1)/4 - eps*n.

    Existence is guaranteed; failure to find one is escalated since it
    would witness a disproof.
    """
    n = r.n
    bound = Fraction(n - 1, 4) - r.epsilon * n
    best_v, best_val = -1, Fraction(-1)
    for v in range(n):
        val = Fraction(min(r.out_degree(v), r.in_degree(v)))
        if val > best_val:
            best_val, best_v = val, v
    if best_val < bound:
        raise TheoremViolation(
            "no vertex with min degree >= (n-1)/4 - eps*n",
            {"n": n, "epsilon": r.epsilon, "best": (best_v, best_val)},
        )
    return best_v


def sample_subset_and_good_vertices(
    g: Tournament,
    p: Fraction,
    seed: int,
    n_scale: Optional[int] = None,
) -> tuple[set[int], set[int], dict[int, tuple[int, int]]]:
    """Sample U vertexwise at rate p; return (U, V', degree annotations).

    V' is the set of v outside U with both degrees into U at least
    p^2 * n_scale.  n_scale defaults to |G| and should satisfy
    n_scale <= |G| <= 3*n_scale for the high-probability guarantees.
    """
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    n = g.n
    scale = n if n_scale is None else n_scale
    rng = random.Random(seed)
    u_set = {v for v in range(n) if rng.random() < p}
    u_mask = 0
    for v in u_set:
        u_mask |= 1 << v
    thresh = p * p * scale
    good = set()
    ann: dict[int, tuple[int, int]] = {}
    for v in range(n):
        if v in u_set:
            continue
        dp = g.out_degree(v, u_mask)
        dm = g.in_degree(v, u_mask)
        ann[v] = (dp, dm)
        if dp >= thresh and dm >= thresh:
            good.add(v)
    return u_set, good, ann


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def mask_to_list(mask: int) -> list[int]:
    out = []
    while mask:
        v = (mask & -mask).bit_length() - 1
        out.append(v)
        mask &= mask - 1
    return out
