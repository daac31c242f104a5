"""Copy counts of a fixed pattern graph in random host graphs.

The copy count is a positive multilinear polynomial in the C(n,2) edge
indicators: one unit monomial per distinct edge subset isomorphic to the
pattern.  The tail machine needs two combinatorial quantities computed
here by exhaustive search: the packing number N(n, m, H) (the largest
number of H-copies any host with n vertices and m edges can hold) and the
derived scale M*_G(n, p), the largest m for which every nonempty edge
subpattern H of G satisfies N(n, m, H) <= n^{v_H} p^{e_H}.

Pattern file format (JSON)::

    {"vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}

Built-in patterns: k2, k3, k4, p3 (path on three vertices), c4.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Optional, Sequence, Union

import numpy as np

from .distributions import ExactDistribution, Number, is_exact, product_bernoulli
from .errors import ResourceLimitError
from .growth import McTail, _Z99, check_growth_bounded, GrowthCheck
from .polynomials import (
    MarginalProfile,
    PositivePolynomial,
    check_almost_independent,
    expectation,
    monomial_value_distribution,
)
from .rng import derive_seed

ENUM_BUDGET = 10**6


@dataclass(frozen=True)
class Pattern:
    """A fixed graph without isolated vertices, vertices labeled 0..v-1."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.vertex_count < 2:
            raise ValueError("patterns need at least 2 vertices")
        seen = set()
        norm = []
        covered = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            e = (min(u, v), max(u, v))
            if not 0 <= e[0] < e[1] < self.vertex_count:
                raise ValueError(f"edge {e} out of range")
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
            covered.update(e)
        if covered != set(range(self.vertex_count)):
            raise ValueError("pattern must not have isolated vertices")
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)


BUILTIN_PATTERNS = {
    "k2": Pattern(2, ((0, 1),)),
    "k3": Pattern(3, ((0, 1), (0, 2), (1, 2))),
    "k4": Pattern(4, tuple(itertools.combinations(range(4), 2))),
    "p3": Pattern(3, ((0, 1), (1, 2))),
    "c4": Pattern(4, ((0, 1), (1, 2), (2, 3), (0, 3))),
}


def automorphism_count(pattern: Pattern) -> int:
    """Number of vertex permutations preserving the edge set (v <= 8)."""
    if pattern.vertex_count > 8:
        raise ResourceLimitError("automorphism brute force limited to 8 vertices")
    edge_set = set(pattern.edges)
    count = 0
    for perm in itertools.permutations(range(pattern.vertex_count)):
        if all(
            (min(perm[u], perm[v]), max(perm[u], perm[v])) in edge_set
            for u, v in pattern.edges
        ):
            count += 1
    return count


def all_edges(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.combinations(range(n), 2))


def edge_index(n: int, u: int, v: int) -> int:
    """Position of edge {u,v} in the lexicographic edge list of K_n."""
    a, b = min(u, v), max(u, v)
    return a * (2 * n - a - 1) // 2 + (b - a - 1)


@dataclass(frozen=True)
class EdgeAssignment:
    """Indicator of present edges among the C(n,2) unordered pairs."""

    n: int
    mask: int

    @staticmethod
    def from_pairs(n: int, pairs: Sequence[tuple[int, int]]) -> "EdgeAssignment":
        mask = 0
        for u, v in pairs:
            mask |= 1 << edge_index(n, u, v)
        return EdgeAssignment(n, mask)

    @staticmethod
    def complete(n: int) -> "EdgeAssignment":
        return EdgeAssignment(n, (1 << comb(n, 2)) - 1)

    @staticmethod
    def from_indicator(n: int, bits: Sequence[int]) -> "EdgeAssignment":
        if len(bits) != comb(n, 2):
            raise ValueError("indicator has wrong length")
        return EdgeAssignment(n, sum(1 << i for i, b in enumerate(bits) if b))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.mask >> edge_index(self.n, u, v) & 1)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(e for i, e in enumerate(all_edges(self.n)) if self.mask >> i & 1)


@lru_cache(maxsize=None)
def copies_in_complete(pattern: Pattern, n: int) -> tuple[int, ...]:
    """Edge-index bitmasks of all distinct copies of the pattern in K_n."""
    if n < pattern.vertex_count:
        return ()
    masks = set()
    for verts in itertools.permutations(range(n), pattern.vertex_count):
        mask = 0
        for u, v in pattern.edges:
            mask |= 1 << edge_index(n, verts[u], verts[v])
        masks.add(mask)
    return tuple(sorted(masks))


def copy_polynomial(pattern: Pattern, n: int) -> PositivePolynomial:
    """Copy count as a polynomial in the C(n,2) edge indicators."""
    if n < pattern.vertex_count:
        raise ValueError(f"host size {n} below pattern size {pattern.vertex_count}")
    monos = []
    for mask in copies_in_complete(pattern, n):
        support = tuple(i for i in range(comb(n, 2)) if mask >> i & 1)
        monos.append((1, support))
    return PositivePolynomial(comb(n, 2), tuple(monos))


def count_copies(pattern: Pattern, assignment: EdgeAssignment) -> int:
    """Number of edge subsets of the host isomorphic to the pattern."""
    if assignment.n < pattern.vertex_count:
        return 0
    host = assignment.mask
    return sum(1 for c in copies_in_complete(pattern, assignment.n) if c & host == c)


# ---------------------------------------------------------------------------
# packing numbers and the M* scale

@dataclass(frozen=True)
class PackingResult:
    value: int
    exhaustive: bool

    def __int__(self) -> int:
        return self.value


def packing_number(
    n: int, m: int, pattern: Pattern, budget: int = ENUM_BUDGET
) -> PackingResult:
    """Largest copy count over hosts with exactly n vertices and m edges.

    Copies may share vertices and edges.  Within budget the search is an
    exhaustive scan over edge subsets; beyond it a deterministic greedy
    host gives a certified lower bound flagged non-exhaustive.
    """
    E = comb(n, 2)
    if not 0 <= m <= E:
        raise ValueError(f"need 0 <= m <= C(n,2) = {E}")
    if n < pattern.vertex_count or m < pattern.edge_count:
        return PackingResult(0, True)
    copies = copies_in_complete(pattern, n)
    total = comb(E, m)
    if total <= budget:
        best = 0
        for subset in itertools.combinations(range(E), m):
            host = 0
            for i in subset:
                host |= 1 << i
            cnt = sum(1 for c in copies if c & host == c)
            if cnt > best:
                best = cnt
        return PackingResult(best, True)
    host = _greedy_dense_host(n, m)
    cnt = sum(1 for c in copies if c & host == c)
    return PackingResult(cnt, False)


def _greedy_dense_host(n: int, m: int) -> int:
    """Edges of the densest-prefix host: fill a clique vertex by vertex."""
    mask = 0
    added = 0
    for b in range(1, n):
        for a in range(b):
            if added == m:
                return mask
            mask |= 1 << edge_index(n, a, b)
            added += 1
    return mask


@lru_cache(maxsize=None)
def subpatterns(pattern: Pattern) -> tuple[Pattern, ...]:
    """Nonempty edge subsets up to isomorphism, isolated vertices dropped."""
    seen: dict[tuple, Pattern] = {}
    for r in range(1, pattern.edge_count + 1):
        for subset in itertools.combinations(pattern.edges, r):
            verts = sorted({v for e in subset for v in e})
            relabel = {v: i for i, v in enumerate(verts)}
            edges = tuple(
                (relabel[u], relabel[v]) for u, v in subset
            )
            sub = Pattern(len(verts), edges)
            key = _canonical_form(sub)
            if key not in seen:
                seen[key] = sub
    return tuple(seen[k] for k in sorted(seen))


def _canonical_form(pattern: Pattern) -> tuple:
    best = None
    for perm in itertools.permutations(range(pattern.vertex_count)):
        edges = tuple(
            sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in pattern.edges)
        )
        if best is None or edges < best:
            best = edges
    return (pattern.vertex_count, best)


def m_star(n: int, p: Number, pattern: Pattern, budget: int = ENUM_BUDGET) -> int:
    """Largest m <= C(n,2) with N(n, m, H) <= n^{v_H} p^{e_H} for every
    nonempty edge subpattern H; 0 when even m = 1 fails."""
    if n < pattern.vertex_count:
        raise ValueError("host size below pattern size")
    if p < 0:
        raise ValueError("p must be >= 0")
    subs = subpatterns(pattern)
    E = comb(n, 2)
    best = 0
    for m in range(1, E + 1):
        ok = True
        for H in subs:
            res = packing_number(n, m, H, budget)
            if not res.exhaustive:
                raise ResourceLimitError(
                    f"packing number N({n},{m},H) not exact within budget"
                )
            if res.value > n ** H.vertex_count * p**H.edge_count:
                ok = False
                break
        if not ok:
            break
        best = m
    return best


@dataclass(frozen=True)
class PackingInequality:
    """Minimal admissible constant for one (m1, m2) packing comparison."""

    witness: Optional[Fraction]
    n1: int
    n2: int


def check_packing_inequality(
    pattern: Pattern, n: int, m1: int, m2: int, budget: int = ENUM_BUDGET
) -> PackingInequality:
    """N(n,m1,H) * m2 / (m1 * N(n,m2,H)): the smallest C making
    N(n,m1,H) <= C * (m1/m2) * N(n,m2,H) hold; None when m1*N(n,m2,H)=0
    (no constraint)."""
    if pattern.edge_count == 0:
        raise ValueError("pattern must have edges")
    if n < pattern.vertex_count:
        raise ValueError("host size below pattern size")
    E = comb(n, 2)
    if not 0 <= m1 <= m2 <= E:
        raise ValueError(f"need 0 <= m1 <= m2 <= C(n,2) = {E}")
    n1 = packing_number(n, m1, pattern, budget).value
    n2 = packing_number(n, m2, pattern, budget).value
    if m1 * n2 == 0:
        return PackingInequality(None, n1, n2)
    return PackingInequality(Fraction(n1 * m2, m1 * n2), n1, n2)


# ---------------------------------------------------------------------------
# random graph models

@dataclass(frozen=True)
class RandomGraphModel:
    kind: str  # "gnp" | "gnm" | "exact"
    n: int
    p: Optional[Number] = None
    m_edges: Optional[int] = None
    dist: Optional[ExactDistribution] = None

    def __post_init__(self) -> None:
        if self.kind == "gnp":
            if self.p is None or not 0 <= self.p <= 1:
                raise ValueError("gnp model needs p in [0, 1]")
        elif self.kind == "gnm":
            if self.m_edges is None or not 0 <= self.m_edges <= comb(self.n, 2):
                raise ValueError("gnm model needs 0 <= m <= C(n,2)")
        elif self.kind == "exact":
            if self.dist is None or self.dist.n != comb(self.n, 2):
                raise ValueError("exact model needs a distribution over C(n,2) indicators")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")


def gnp(n: int, p: Number) -> RandomGraphModel:
    return RandomGraphModel("gnp", n, p=p)


def gnm(n: int, m_edges: int) -> RandomGraphModel:
    return RandomGraphModel("gnm", n, m_edges=m_edges)


def exact_model(n: int, dist: ExactDistribution) -> RandomGraphModel:
    return RandomGraphModel("exact", n, dist=dist)


def edge_distribution(model: RandomGraphModel, budget: int = ENUM_BUDGET) -> ExactDistribution:
    """Exact law of the edge-indicator vector (enumerable models only)."""
    E = comb(model.n, 2)
    if model.kind == "exact":
        return model.dist
    if model.kind == "gnp":
        if 2**E > budget:
            raise ResourceLimitError(f"2^{E} hosts exceed budget {budget}")
        return product_bernoulli(E, model.p)
    total = comb(E, model.m_edges)
    if total > budget:
        raise ResourceLimitError(f"C({E},{model.m_edges}) hosts exceed budget {budget}")
    w = Fraction(1, total)
    entries = []
    for subset in itertools.combinations(range(E), model.m_edges):
        x = [0] * E
        for i in subset:
            x[i] = 1
        entries.append((w, tuple(x)))
    return ExactDistribution(E, tuple(entries))


def max_edge_marginal(dist: ExactDistribution) -> Number:
    """Largest per-edge marginal probability of an edge distribution."""
    best: Number = 0
    for j in range(dist.n):
        total: Number = 0
        for p, x in dist.support:
            total = total + p * x[j]
        if total > best:
            best = total
    return best


def expected_copies_independent(pattern: Pattern, n: int, p: Number) -> Number:
    """(1/d) p^{e_G} prod_{i<v_G} (n - i): the independent-model mean."""
    d = automorphism_count(pattern)
    falling = 1
    for i in range(pattern.vertex_count):
        falling *= n - i
    return Fraction(falling, d) * p**pattern.edge_count if is_exact(p) else (
        falling / d
    ) * float(p) ** pattern.edge_count


# ---------------------------------------------------------------------------
# growth-boundedness certification and bounds

@dataclass(frozen=True)
class GraphGrowthCheck:
    premise_ok: bool
    ai_ok: bool
    gb: Optional[GrowthCheck]
    delta_double: Optional[Number]
    mu: Number
    mu_star: Number
    p: Number

    @property
    def certified(self) -> bool:
        return self.premise_ok and self.ai_ok and self.gb is not None and self.gb.holds


def graph_gb_check(
    pattern: Pattern,
    model: RandomGraphModel,
    delta: Number,
    delta_prime: Number,
    m: int,
    budget: int = ENUM_BUDGET,
) -> GraphGrowthCheck:
    """Packing premise + almost independence => copy-value growth boundedness.

    Premise: N(n, m, H) <= delta n^{v_H} p^{e_H} / (2^{e_G} v_G^{v_G}) for
    every nonempty edge subpattern H, with p the largest edge marginal.
    When the model is additionally (delta', e_G*m)-almost independent the
    copy values are (delta'', m)-growth bounded with
    1 + delta'' = (1+delta')^{e_G} (1+delta) mu*/mu, verified exactly.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    n = model.n
    dist = edge_distribution(model, budget)
    p = max_edge_marginal(dist)
    scale = Fraction(1, 2**pattern.edge_count * pattern.vertex_count**pattern.vertex_count)
    premise_ok = True
    for H in subpatterns(pattern):
        res = packing_number(n, m, H, budget)
        if not res.exhaustive:
            raise ResourceLimitError("packing number not exact within budget")
        if res.value > delta * scale * n**H.vertex_count * p**H.edge_count:
            premise_ok = False
            break
    ai = check_almost_independent(dist, delta_prime, pattern.edge_count * m, budget)
    poly = copy_polynomial(pattern, n)
    mu = expectation(poly, dist)
    mu_star_val = expected_copies_independent(pattern, n, p)
    gb = None
    delta_double = None
    if premise_ok and ai.holds and mu > 0:
        one_plus = (1 + delta_prime) ** pattern.edge_count * (1 + delta) * mu_star_val / mu
        delta_double = one_plus - 1
        values = monomial_value_distribution(poly, dist)
        gb = check_growth_bounded(values, delta_double, m)
    return GraphGrowthCheck(premise_ok, ai.holds, gb, delta_double, mu, mu_star_val, p)


def jor_tail_bound(pattern: Pattern, n: int, p: Number, eps: Number, c_g: Number) -> float:
    """exp(-c_G eps^2 M*_G(n, p)) with a caller-supplied constant c_G."""
    if not 0 <= eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in [0, 1/2], got {eps}")
    if p <= 0:
        raise ValueError("p must be > 0")
    if n < pattern.vertex_count:
        raise ValueError("host size below pattern size")
    if c_g <= 0:
        raise ValueError("c_g must be > 0")
    return math.exp(-float(c_g) * float(eps) ** 2 * m_star(n, p, pattern))


@dataclass(frozen=True)
class GnmTailBound:
    value: float
    p_used: Fraction
    p_marginal: Fraction
    correction: float
    correction_ok: bool


def gnm_tail_bound(
    pattern: Pattern, n: int, m_edges: int, eps: Number, c_g: Number
) -> GnmTailBound:
    """Uniform-edge-count variant: exp(-c_G eps^2 M*_G(n, m/n)).

    The scale parameter is p := m/n (not the per-edge marginal
    m/C(n,2); both are reported).  Requires m >= 9 e_G^2 / eps, which
    caps the independent-vs-exact mean correction
    (1 + e_G/(m - e_G))^{e_G} at 1 + eps/4.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if c_g <= 0:
        raise ValueError("c_g must be > 0")
    e_g = pattern.edge_count
    if m_edges < 9 * e_g**2 / eps:
        raise ValueError(
            f"need m >= 9 e_G^2 / eps = {float(9 * e_g ** 2 / eps)}, got {m_edges}"
        )
    p_used = Fraction(m_edges, n)
    p_marginal = Fraction(m_edges, comb(n, 2))
    value = math.exp(-float(c_g) * float(eps) ** 2 * m_star(n, p_used, pattern))
    correction = (1 + e_g / (m_edges - e_g)) ** e_g
    correction_ok = correction <= 1 + float(eps) / 4
    assert correction_ok, "correction factor exceeded 1 + eps/4 despite m threshold"
    return GnmTailBound(value, p_used, p_marginal, correction, correction_ok)


def subgraph_tail(
    model: RandomGraphModel,
    pattern: Pattern,
    threshold: Number,
    mode: str = "exact",
    trials: int = 10000,
    seed: int = 0,
    budget: int = ENUM_BUDGET,
) -> Union[Number, McTail]:
    """Pr[copy count >= threshold], exact by enumeration or seeded MC."""
    if mode == "exact":
        dist = edge_distribution(model, budget)
        copies = copies_in_complete(pattern, model.n)
        total: Number = 0
        for p, x in dist.support:
            host = sum(1 << i for i, b in enumerate(x) if b)
            cnt = sum(1 for c in copies if c & host == c)
            if cnt >= threshold:
                total = total + p
        return total
    if mode != "mc":
        raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if model.kind == "gnp" and _is_triangle(pattern):
        return _triangle_tail_mc(model.n, float(model.p), threshold, trials, seed)
    copies = copies_in_complete(pattern, model.n)
    E = comb(model.n, 2)
    hits = 0
    for i in range(trials):
        rng = random.Random(derive_seed(seed, i))
        if model.kind == "gnp":
            pf = float(model.p)
            host = 0
            for b in range(E):
                if rng.random() < pf:
                    host |= 1 << b
        elif model.kind == "gnm":
            host = 0
            for b in rng.sample(range(E), model.m_edges):
                host |= 1 << b
        else:
            raise ValueError("mc mode supports gnp and gnm models")
        cnt = sum(1 for c in copies if c & host == c)
        if cnt >= threshold:
            hits += 1
    est = hits / trials
    return McTail(est, _Z99 * math.sqrt(est * (1 - est) / trials), trials)


def _is_triangle(pattern: Pattern) -> bool:
    return pattern.vertex_count == 3 and pattern.edge_count == 3


def _triangle_tail_mc(
    n: int, p: float, threshold: Number, trials: int, seed: int
) -> McTail:
    """Batched triangle-count tail: count = trace(A^3)/6 per sample."""
    hits = 0
    chunk = 512
    done = 0
    idx = np.triu_indices(n, k=1)
    batch_no = 0
    while done < trials:
        b = min(chunk, trials - done)
        rng = np.random.default_rng(derive_seed(seed, batch_no))
        flips = rng.random((b, idx[0].size)) < p
        adj = np.zeros((b, n, n))
        adj[:, idx[0], idx[1]] = flips
        adj += adj.transpose(0, 2, 1)
        cubes = np.einsum("bij,bjk,bki->b", adj, adj, adj)
        counts = cubes / 6.0
        hits += int(np.sum(counts >= float(threshold) - 1e-9))
        done += b
        batch_no += 1
    est = hits / trials
    return McTail(est, _Z99 * math.sqrt(est * (1 - est) / trials), trials)


def gnm_ai_worst_ratio(n: int, m_edges: int) -> Fraction:
    """Largest joint-moment / marginal-product ratio of the m-edge model.

    Both sides depend only on the number r of distinct indexed edges:
    the joint moment is prod_{i<r} (m-i)/(E-i) and the product is
    (m/E)^r, so the exhaustive multiset check collapses to r = 1..E.
    Almost independence with delta = 0 holds iff the result is <= 1.
    """
    E = comb(n, 2)
    if not 1 <= m_edges <= E:
        raise ValueError("need 1 <= m <= C(n,2)")
    worst = Fraction(0)
    for r in range(1, E + 1):
        if r > m_edges:
            joint = Fraction(0)
        else:
            joint = Fraction(1)
            for i in range(r):
                joint *= Fraction(m_edges - i, E - i)
        prod = Fraction(m_edges, E) ** r
        ratio = joint / prod
        if ratio > worst:
            worst = ratio
    return worst


# ---------------------------------------------------------------------------
# file I/O

def pattern_to_dict(pattern: Pattern) -> dict:
    return {"vertices": pattern.vertex_count, "edges": [list(e) for e in pattern.edges]}


def pattern_from_dict(obj: dict) -> Pattern:
    return Pattern(int(obj["vertices"]), tuple(tuple(e) for e in obj["edges"]))


def save_pattern(pattern: Pattern, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pattern_to_dict(pattern), fh)


def load_pattern(path: str) -> Pattern:
    with open(path, "r", encoding="utf-8") as fh:
        return pattern_from_dict(json.load(fh))
