"""Directed densities, epsilon-regular pairs/partitions, and reduced digraphs.

Densities and weights are exact rationals end-to-end; the exhaustive pair
check works on integer cross-multiplied inequalities so no float ever enters
a verdict.  The partition refiner makes no Szemeredi-style guarantee: its
contract is the audited report it returns.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, isqrt
from typing import Optional, Sequence

import numpy as np

from .tournament import BudgetError, Tournament

EXHAUSTIVE_PAIR_CAP = 12


def density(g: Tournament, a: Sequence[int], b: Sequence[int]) -> Fraction:
    """Exact directed density |E(A->B)| / (|A||B|) for disjoint A, B."""
    aset, bset = set(a), set(b)
    if not aset or not bset:
        raise ValueError("A and B must be nonempty")
    if aset & bset:
        raise ValueError("A and B must be disjoint")
    bm = 0
    for v in bset:
        bm |= 1 << v
    e = sum((g.rows[u] & bm).bit_count() for u in aset)
    return Fraction(e, len(aset) * len(bset))


@dataclass(frozen=True)
class RegularPairReport:
    density: Fraction
    regular: bool
    witness: Optional[tuple[tuple[int, ...], tuple[int, ...]]]
    mode: str
    samples: int = 0


def check_regular_pair(
    g: Tournament,
    a: Sequence[int],
    b: Sequence[int],
    eps: Fraction,
    mode: str = "exhaustive",
    samples: int = 2000,
    seed: int = 0,
    adj: Optional[np.ndarray] = None,
) -> RegularPairReport:
    """Is (A,B) an eps-regular pair?

    Exhaustive mode decides exactly over all X in A, Y in B with
    |X| >= eps|A|, |Y| >= eps|B| (|A|,|B| <= 12).  Sampled mode tests
    uniformly sampled sub-pairs at the threshold sizes and reports
    no-counterexample-found.
    """
    a = list(a)
    b = list(b)
    d_ab = density(g, a, b)
    if mode == "exhaustive":
        if len(a) > EXHAUSTIVE_PAIR_CAP or len(b) > EXHAUSTIVE_PAIR_CAP:
            raise BudgetError(
                f"exhaustive pair check capped at {EXHAUSTIVE_PAIR_CAP}"
            )
        wit = _exhaustive_pair_witness(g, a, b, eps, d_ab)
        return RegularPairReport(d_ab, wit is None, wit, "exhaustive")
    if mode == "sampled":
        wit = _sampled_pair_witness(g, a, b, eps, d_ab, samples, seed, adj)
        return RegularPairReport(d_ab, wit is None, wit, "sampled", samples)
    raise ValueError(f"unknown mode {mode!r}")


def _exhaustive_pair_witness(g, a, b, eps, d_ab):
    na, nb = len(a), len(b)
    # edge counts E[X][Y] for all subsets via two zeta transforms
    adj_ab = np.zeros((na, nb), dtype=np.int16)
    for i, u in enumerate(a):
        for j, v in enumerate(b):
            if g.has_edge(u, v):
                adj_ab[i, j] = 1
    c = np.zeros((1 << na, nb), dtype=np.int16)
    for x in range(1, 1 << na):
        low = x & -x
        c[x] = c[x ^ low] + adj_ab[low.bit_length() - 1]
    popa = np.bitwise_count(np.arange(1 << na, dtype=np.uint32)).astype(np.int64)
    popb = np.bitwise_count(np.arange(1 << nb, dtype=np.uint32)).astype(np.int64)
    p, q = eps.numerator, eps.denominator
    e_ab = int(d_ab * na * nb)
    ok_x = popa * q >= p * na  # |X| >= eps*|A|
    ok_y = popb * q >= p * nb
    ymasks = np.flatnonzero(ok_y)
    ysizes = popb[ymasks]
    # E(X,Y) per X-chunk: subset-sum over Y of c[X]
    chunk = 256
    for x0 in range(0, 1 << na, chunk):
        xs = np.arange(x0, min(x0 + chunk, 1 << na))
        xs = xs[ok_x[xs]]
        if len(xs) == 0:
            continue
        e = np.zeros((len(xs), 1 << nb), dtype=np.int32)
        cx = c[xs].astype(np.int32)
        for y in range(1, 1 << nb):
            low = y & -y
            e[:, y] = e[:, y ^ low] + cx[:, low.bit_length() - 1]
        ey = e[:, ymasks].astype(np.int64)
        sx = popa[xs][:, None]
        sy = ysizes[None, :]
        lhs = np.abs(ey * (na * nb) - e_ab * sx * sy) * q
        rhs = p * sx * sy * (na * nb)
        viol = lhs > rhs
        if viol.any():
            i, j = np.argwhere(viol)[0]
            xm, ym = int(xs[i]), int(ymasks[j])
            wx = tuple(a[k] for k in range(na) if (xm >> k) & 1)
            wy = tuple(b[k] for k in range(nb) if (ym >> k) & 1)
            return (wx, wy)
    return None


def _sampled_pair_witness(g, a, b, eps, d_ab, samples, seed, adj):
    rng = np.random.default_rng(seed)
    if adj is None:
        adj = g.adjacency()
    na, nb = len(a), len(b)
    sx = max(1, ceil(eps * na))
    sy = max(1, ceil(eps * nb))
    a_arr, b_arr = np.array(a), np.array(b)
    sub = adj[np.ix_(a_arr, b_arr)].astype(np.int64)
    p, q = eps.numerator, eps.denominator
    e_ab = int(d_ab * na * nb)
    for _ in range(samples):
        xi = rng.choice(na, size=sx, replace=False)
        yi = rng.choice(nb, size=sy, replace=False)
        e = int(sub[np.ix_(xi, yi)].sum())
        if abs(e * na * nb - e_ab * sx * sy) * q > p * sx * sy * na * nb:
            return (
                tuple(int(a_arr[i]) for i in xi),
                tuple(int(b_arr[i]) for i in yi),
            )
    return None


@dataclass(frozen=True)
class ClusterPartition:
    clusters: tuple[tuple[int, ...], ...]
    exceptional: tuple[int, ...]

    def __post_init__(self):
        sizes = {len(c) for c in self.clusters}
        if len(sizes) > 1:
            raise ValueError("clusters must have equal sizes")
        allv = [v for c in self.clusters for v in c] + list(self.exceptional)
        if len(allv) != len(set(allv)):
            raise ValueError("clusters and exceptional set overlap")

    @property
    def r(self) -> int:
        return len(self.clusters)

    @property
    def m(self) -> int:
        return len(self.clusters[0]) if self.clusters else 0


@dataclass
class PartitionReport:
    mode: str
    per_cluster_irregular: list[int]
    threshold: Fraction
    passes: bool
    pair_reports: dict[tuple[int, int], RegularPairReport] = field(
        default_factory=dict
    )


def check_regular_partition(
    g: Tournament,
    part: ClusterPartition,
    eps: Fraction,
    mode: str = "sampled",
    samples: int = 200,
    seed: int = 0,
) -> PartitionReport:
    """Per fixed i, count j with (V_i, V_j) irregular; pass iff every count
    is at most sqrt(eps) * r."""
    r = part.r
    adj = g.adjacency() if mode == "sampled" else None
    reports: dict[tuple[int, int], RegularPairReport] = {}
    for i in range(r):
        for j in range(i + 1, r):
            rep = check_regular_pair(
                g, part.clusters[i], part.clusters[j], eps, mode,
                samples=samples, seed=seed + 7919 * i + j, adj=adj,
            )
            reports[(i, j)] = rep
    counts = [0] * r
    for (i, j), rep in reports.items():
        if not rep.regular:
            counts[i] += 1
            counts[j] += 1
    thr = _sqrt_fraction_upper(eps) * r
    passes = all(Fraction(c) <= thr for c in counts)
    return PartitionReport(mode, counts, thr, passes, reports)


def _sqrt_fraction_upper(x: Fraction) -> Fraction:
    """A close rational upper bound for sqrt(x)."""
    scale = 10**12
    v = isqrt(int(x * scale * scale)) + 1
    return Fraction(v, scale)


def refine_partition(
    g: Tournament,
    eps: Fraction,
    r1: int,
    r2: int,
    seed: int = 0,
    mode: str = "sampled",
    samples: int = 60,
    max_rounds: int = 4,
) -> tuple[ClusterPartition, PartitionReport]:
    """Heuristic witness-driven refinement; no regularity-lemma guarantee.

    Starts from consecutive blocks of the out-degree order (which already
    works for transitive-like hosts), then repeatedly splits clusters along
    sampled irregularity witnesses until the sampled irregular fraction is
    small or the budget runs out.  The attached report is the contract.
    """
    n = g.n
    if n < r1:
        raise ValueError(f"|G|={n} < r1={r1}")
    rng = random.Random(seed)
    order = sorted(range(n), key=lambda v: (g.out_degree(v), rng.random()))
    r = r1
    while True:
        m = n // r
        clusters = [tuple(order[i * m : (i + 1) * m]) for i in range(r)]
        exceptional = tuple(order[r * m :])
        part = ClusterPartition(tuple(clusters), exceptional)
        report = check_regular_partition(g, part, eps, mode, samples, seed)
        if report.passes or 2 * r > r2 or max_rounds <= 0:
            return part, report
        max_rounds -= 1
        # split along witnesses: inside each cluster, put witness vertices
        # first, then re-cut the concatenated order at twice the cluster count
        new_order: list[int] = []
        for i, cl in enumerate(part.clusters):
            wit: set[int] = set()
            for (a, b), rep in report.pair_reports.items():
                if rep.witness is None:
                    continue
                wx, wy = rep.witness
                if a == i:
                    wit.update(wx)
                if b == i:
                    wit.update(wy)
            first = [v for v in cl if v in wit]
            second = [v for v in cl if v not in wit]
            new_order.extend(first + second)
        new_order.extend(exceptional)
        order = new_order
        r = 2 * r


def clean_partition(
    g: Tournament,
    part: ClusterPartition,
    eps: Fraction,
    mode: str = "sampled",
    samples: int = 60,
    seed: int = 0,
    inner_factor: Fraction = Fraction(1, 2),
) -> tuple[ClusterPartition, PartitionReport, dict]:
    """Drop clusters with too many irregular partners (the reordering
    argument behind passing from the regularity lemma's output to an
    eps-regular partition).

    Keeps clusters whose irregular-pair count is at most
    inner_factor * sqrt(eps) * r_bar, re-checks the survivors, and audits
    the removed fraction against (eps + 2 sqrt(eps)) |G|.
    """
    rbar = part.r
    pre = check_regular_partition(g, part, eps, mode, samples, seed)
    inner_thr = inner_factor * _sqrt_fraction_upper(eps) * rbar
    keep = [i for i in range(rbar) if Fraction(pre.per_cluster_irregular[i]) <= inner_thr]
    dropped = [i for i in range(rbar) if i not in keep]
    new_clusters = tuple(part.clusters[i] for i in keep)
    new_exc = tuple(
        list(part.exceptional)
        + [v for i in dropped for v in part.clusters[i]]
    )
    if not new_clusters:
        raise ValueError("all clusters dropped; cannot achieve bound")
    newpart = ClusterPartition(new_clusters, new_exc)
    post = check_regular_partition(g, newpart, eps, mode, samples, seed + 1)
    removed = len(new_exc)
    bound = (eps + 2 * _sqrt_fraction_upper(eps)) * g.n
    audit = {
        "removed": removed,
        "bound": bound,
        "within_bound": Fraction(removed) <= bound,
        "dropped_clusters": dropped,
    }
    return newpart, post, audit


# ---------------------------------------------------------------------------
# weighted looped digraphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedLoopedDigraph:
    """r x r rational weight matrix with unit loops, stored as an integer
    numerator matrix over a common denominator."""

    r: int
    num: np.ndarray
    den: int

    def __post_init__(self):
        if self.num.shape != (self.r, self.r):
            raise ValueError("matrix shape mismatch")
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        if (self.num < 0).any() or (self.num > self.den).any():
            raise ValueError("weights must lie in [0,1]")
        if not (np.diag(self.num) == self.den).all():
            raise ValueError("loops must all be 1")

    def d(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.num[i, j]), self.den)

    def positive(self, i: int, j: int) -> bool:
        return bool(self.num[i, j] > 0)

    def is_one(self, i: int, j: int) -> bool:
        return bool(self.num[i, j] == self.den)

    def out_weight(self, i: int) -> Fraction:
        return Fraction(int(self.num[i].sum()) - self.den, self.den)

    def reverse(self) -> "WeightedLoopedDigraph":
        return WeightedLoopedDigraph(self.r, self.num.T.copy(), self.den)

    def restrict(self, idx: Sequence[int]) -> "WeightedLoopedDigraph":
        ii = np.array(list(idx))
        return WeightedLoopedDigraph(
            len(ii), self.num[np.ix_(ii, ii)].copy(), self.den
        )

    @classmethod
    def from_fractions(cls, rows: list[list[Fraction]]) -> "WeightedLoopedDigraph":
        r = len(rows)
        den = 1
        for row in rows:
            for x in row:
                den = den * x.denominator // np.gcd(den, x.denominator)
        num = np.array(
            [[int(x * den) for x in row] for row in rows], dtype=np.int64
        )
        return cls(r, num, int(den))


@dataclass
class CompletenessReport:
    epsilon: Fraction
    passes: bool
    per_vertex_bad: list[int]
    violations: list[tuple[int, int]]


def check_epsilon_complete(
    d: WeightedLoopedDigraph, eps: Fraction
) -> CompletenessReport:
    """Property: unit loops, and per j at most eps*r indices i with
    d(i,j) + d(j,i) != 1."""
    r = d.r
    s = d.num + d.num.T
    bad = (s != d.den)
    np.fill_diagonal(bad, False)
    per_vertex = bad.sum(axis=0).tolist()
    viols = [(int(i), int(j)) for i, j in np.argwhere(np.triu(bad, 1))]
    passes = all(Fraction(c) <= eps * r for c in per_vertex)
    return CompletenessReport(eps, passes, per_vertex, viols)


def audited_epsilon(d: WeightedLoopedDigraph) -> Fraction:
    """The smallest eps' for which the matrix is eps'-complete."""
    rep = check_epsilon_complete(d, Fraction(1))
    worst = max(rep.per_vertex_bad) if rep.per_vertex_bad else 0
    return Fraction(worst, d.r)


def reduced_digraph(
    g: Tournament,
    part: ClusterPartition,
    eps: Fraction,
    mu: Fraction,
    mode: str = "sampled",
    samples: int = 60,
    seed: int = 0,
) -> tuple[WeightedLoopedDigraph, CompletenessReport, PartitionReport]:
    """Cluster-level weights: 0 for irregular or sub-mu pairs, 1 above
    1 - mu, the exact density in between, unit loops."""
    r = part.r
    pr = check_regular_partition(g, part, eps, mode, samples, seed)
    dens: dict[tuple[int, int], Fraction] = {}
    for i in range(r):
        for j in range(i + 1, r):
            dens[(i, j)] = density(g, part.clusters[i], part.clusters[j])
    rows: list[list[Fraction]] = [
        [Fraction(0)] * r for _ in range(r)
    ]
    for i in range(r):
        rows[i][i] = Fraction(1)
    for (i, j), rep in pr.pair_reports.items():
        dij = dens[(i, j)]
        dji = 1 - dij
        if not rep.regular:
            continue  # both directions stay 0
        rows[i][j] = _threshold(dij, mu)
        rows[j][i] = _threshold(dji, mu)
    d = WeightedLoopedDigraph.from_fractions(rows)
    audit = check_epsilon_complete(d, audited_epsilon(d))
    return d, audit, pr


def _threshold(x: Fraction, mu: Fraction) -> Fraction:
    if x > 1 - mu:
        return Fraction(1)
    if x < mu:
        return Fraction(0)
    return x


def typical_vertices(
    g: Tournament,
    v0: Sequence[int],
    clusters: Sequence[Sequence[int]],
    u_set: Sequence[int],
    eps: Fraction,
    mu: Fraction,
) -> tuple[set[int], dict]:
    """Vertices of V0 with at least (mu - eps)(|U| - eps*r*m) out-neighbours
    in U; the complement size is reported against eps*m."""
    r = len(clusters)
    m = len(v0)
    u_mask = 0
    for v in u_set:
        u_mask |= 1 << v
    bound = (mu - eps) * (len(list(u_set)) - eps * r * m)
    good = {v for v in v0 if g.out_degree(v, u_mask) >= bound}
    report = {
        "bound": bound,
        "complement": m - len(good),
        "budget": eps * m,
        "within": Fraction(m - len(good)) <= eps * m,
    }
    return good, report


def random_epsilon_complete(
    r: int,
    seed: int,
    den: int = 100,
    exceptions_per_vertex: int = 0,
) -> WeightedLoopedDigraph:
    """Random matrix with d(i,j)+d(j,i)=1 except on a few planted pairs."""
    rng = np.random.default_rng(seed)
    num = np.zeros((r, r), dtype=np.int64)
    np.fill_diagonal(num, den)
    for i in range(r):
        for j in range(i + 1, r):
            x = int(rng.integers(0, den + 1))
            num[i, j] = x
            num[j, i] = den - x
    if exceptions_per_vertex:
        used = np.zeros(r, dtype=int)
        pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
        rng.shuffle(pairs)
        for (i, j) in pairs:
            if used[i] < exceptions_per_vertex and used[j] < exceptions_per_vertex:
                num[i, j] = 0
                num[j, i] = 0
                used[i] += 1
                used[j] += 1
    return WeightedLoopedDigraph(r, num, den)
