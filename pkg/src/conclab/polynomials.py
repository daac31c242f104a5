"""Upper tails of positive polynomials of [0,1]-valued variables.

A polynomial here is a weighted sum of monomials with multiset supports,
p(v) = sum_i w_i * prod_{j in s_i} v_j.  The tail machinery rests on two
statistics families: the derivative-style truncations Delta_K (monomials
containing every variable of K, those variables set to 1) maximized over
|K| = i under the independent companion distribution, and an
almost-independence certificate bounding joint moments by marginal
products up to (1+delta)^m.  Together they certify growth boundedness of
the monomial values, from which the Markov-step bounds follow.

Polynomial file format (JSON)::

    {"l": 6, "monomials": [{"w": 1.0, "vars": [0, 3, 3]}, ...]}

Variable indices are 0-based and may repeat inside ``vars``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Sequence, Union

from .distributions import ExactDistribution, Number, is_exact
from .errors import ResourceLimitError
from .growth import binomial_tail, floor_snap

ENUM_BUDGET = 10**6


@dataclass(frozen=True)
class PositivePolynomial:
    """Weighted monomials with nonnegative weights over variables 0..l-1.

    Derivative-style operations produce constant monomials (empty
    supports); externally loaded polynomials must have nonempty supports.
    """

    variable_count: int
    monomials: tuple[tuple[Number, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        if self.variable_count < 1:
            raise ValueError("variable count must be >= 1")
        norm = []
        for w, support in self.monomials:
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if any(not 0 <= j < self.variable_count for j in support):
                raise ValueError(f"variable index out of range in {support!r}")
            norm.append((w, tuple(sorted(support))))
        object.__setattr__(self, "monomials", tuple(norm))

    @property
    def degree(self) -> int:
        return max((len(s) for _, s in self.monomials), default=0)

    @property
    def variables(self) -> tuple[int, ...]:
        seen = sorted({j for _, s in self.monomials for j in s})
        return tuple(seen)


class MarginalProfile:
    """Per-variable moment table E[v_j^c] of an independent companion."""

    def __init__(self, variable_count: int, moment: Callable[[int, int], Number]):
        self.variable_count = variable_count
        self._moment = moment

    def moment(self, j: int, c: int) -> Number:
        if not 0 <= j < self.variable_count:
            raise ValueError(f"variable {j} out of range")
        if c < 0:
            raise ValueError("moment order must be >= 0")
        if c == 0:
            return Fraction(1)
        return self._moment(j, c)

    @staticmethod
    def bernoulli(variable_count: int, p: Number) -> "MarginalProfile":
        return MarginalProfile(variable_count, lambda j, c: p)

    @staticmethod
    def from_distribution(dist: ExactDistribution) -> "MarginalProfile":
        cache: dict[tuple[int, int], Number] = {}

        def moment(j: int, c: int) -> Number:
            key = (j, c)
            if key not in cache:
                total: Number = 0
                for p, x in dist.support:
                    total = total + p * x[j] ** c
                cache[key] = total
            return cache[key]

        return MarginalProfile(dist.n, moment)


@dataclass(frozen=True)
class PolyStats:
    """The tail-bound statistics: mean and truncation maxima."""

    mu0_star: Number
    mu_star: tuple[Number, ...]
    mu_prime: Number
    mu: Number


def evaluate(poly: PositivePolynomial, point: Sequence[Number]) -> Number:
    """p(v) at a point of the unit cube."""
    if len(point) != poly.variable_count:
        raise ValueError("point has wrong dimension")
    if any(v < 0 or v > 1 for v in point):
        raise ValueError("point must lie in [0, 1]^l")
    total: Number = 0
    for w, support in poly.monomials:
        term = w
        for j in support:
            term = term * point[j]
        total = total + term
    return total


def delta_k(poly: PositivePolynomial, variables: Iterable[int]) -> PositivePolynomial:
    """Monomials containing every variable of K, with K's variables set to 1.

    Coincides with the iterated partial derivative for multilinear
    polynomials; K = empty set returns the polynomial unchanged.
    """
    K = set(variables)
    if any(not 0 <= j < poly.variable_count for j in K):
        raise ValueError("K contains out-of-range variables")
    kept = []
    for w, support in poly.monomials:
        if K <= set(support):
            kept.append((w, tuple(j for j in support if j not in K)))
    return PositivePolynomial(poly.variable_count, tuple(kept))


def delta_expectation(
    poly: PositivePolynomial, marginals: MarginalProfile, variables: Iterable[int]
) -> Number:
    """E[Delta_K p] under the independent companion marginals."""
    K = set(variables)
    total: Number = 0
    for w, support in poly.monomials:
        if not K <= set(support):
            continue
        term = w
        for j in sorted(set(support) - K):
            term = term * marginals.moment(j, support.count(j))
        total = total + term
    return total


def mu_star(
    poly: PositivePolynomial,
    marginals: MarginalProfile,
    i: int,
    budget: int = ENUM_BUDGET,
) -> Number:
    """max over |K| = i of E[Delta_K p] under the companion marginals.

    Only K drawn from variables occurring in p can contribute; all other
    K give the zero polynomial.
    """
    if not 0 <= i <= poly.degree:
        raise ValueError(f"need 0 <= i <= degree={poly.degree}")
    if i == 0:
        return delta_expectation(poly, marginals, ())
    vars_ = poly.variables
    if i > len(vars_):
        return 0
    if comb(len(vars_), i) > budget:
        raise ResourceLimitError(
            f"C({len(vars_)},{i}) subsets exceed budget {budget}"
        )
    return max(
        delta_expectation(poly, marginals, K)
        for K in itertools.combinations(vars_, i)
    )


def poly_stats(
    poly: PositivePolynomial,
    marginals: MarginalProfile,
    mu: Number,
    budget: int = ENUM_BUDGET,
) -> PolyStats:
    k = poly.degree
    stars = tuple(mu_star(poly, marginals, i, budget) for i in range(1, k + 1))
    return PolyStats(
        mu0_star=mu_star(poly, marginals, 0),
        mu_star=stars,
        mu_prime=max(stars),
        mu=mu,
    )


def expectation(poly: PositivePolynomial, dist: ExactDistribution) -> Number:
    """E[p(v)] under an exact joint distribution."""
    total: Number = 0
    for p, x in dist.support:
        total = total + p * evaluate(poly, x)
    return total


def poly_tail_exact(
    poly: PositivePolynomial, dist: ExactDistribution, threshold: Number
) -> Number:
    """Pr[p(v) >= threshold] under an exact joint distribution."""
    total: Number = 0
    for p, x in dist.support:
        if evaluate(poly, x) >= threshold:
            total = total + p
    return total


def monomial_value_distribution(
    poly: PositivePolynomial, dist: ExactDistribution
) -> ExactDistribution:
    """Joint law of the per-monomial values (w_i * prod v_j); their sum is p(v)."""
    agg: dict[tuple[Number, ...], Number] = {}
    for p, x in dist.support:
        outcome = []
        for w, support in poly.monomials:
            term = w
            for j in support:
                term = term * x[j]
            outcome.append(term)
        key = tuple(outcome)
        agg[key] = agg.get(key, 0) + p
    return ExactDistribution(len(poly.monomials), tuple((p, x) for x, p in agg.items()))


# ---------------------------------------------------------------------------
# almost independence

@dataclass(frozen=True)
class AlmostIndependence:
    holds: bool
    worst_tuple: tuple[int, ...]
    worst_lhs: Number
    worst_rhs: Number

    def __bool__(self) -> bool:
        return self.holds


def check_almost_independent(
    dist: ExactDistribution, delta: Number, m: int, budget: int = ENUM_BUDGET
) -> AlmostIndependence:
    """Joint moments against (1+delta)^m times the marginal-product target.

    Checks every index multiset of size s <= m (order is irrelevant to
    both sides).  Binary distributions need only distinct index sets,
    since repeated indices change neither side.  Returns the maximally
    violating tuple, or the tightest compliant one when the check holds.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if not 1 <= m <= dist.n:
        raise ValueError(f"need 1 <= m <= l, got m={m}, l={dist.n}")
    factor = (1 + delta) ** m
    marginals = MarginalProfile.from_distribution(dist)
    binary = dist.is_binary
    worst: tuple[Number, Number, tuple[int, ...]] | None = None

    if binary:
        masks = [
            (p, sum(1 << j for j, v in enumerate(x) if v == 1)) for p, x in dist.support
        ]
        count = sum(comb(dist.n, s) for s in range(1, m + 1))
        if count > budget:
            raise ResourceLimitError(f"{count} index sets exceed budget {budget}")
        for s in range(1, m + 1):
            for subset in itertools.combinations(range(dist.n), s):
                smask = sum(1 << j for j in subset)
                lhs: Number = 0
                for p, mask in masks:
                    if mask & smask == smask:
                        lhs = lhs + p
                rhs = factor
                for j in subset:
                    rhs = rhs * marginals.moment(j, 1)
                if worst is None or _violation_key(lhs, rhs) > _violation_key(*worst[:2]):
                    worst = (lhs, rhs, subset)
        lhs, rhs, tup = worst
        return AlmostIndependence(lhs <= rhs, tup, lhs, rhs)

    count = sum(comb(dist.n + s - 1, s) for s in range(1, m + 1))
    if count * len(dist.support) > budget:
        raise ResourceLimitError(
            f"{count} multisets x {len(dist.support)} outcomes exceed budget {budget}"
        )
    for s in range(1, m + 1):
        for multiset in itertools.combinations_with_replacement(range(dist.n), s):
            lhs = 0
            for p, x in dist.support:
                term = p
                for j in multiset:
                    term = term * x[j]
                lhs = lhs + term
            rhs = factor
            for j in set(multiset):
                rhs = rhs * marginals.moment(j, multiset.count(j))
            if worst is None or _violation_key(lhs, rhs) > _violation_key(*worst[:2]):
                worst = (lhs, rhs, multiset)
    lhs, rhs, tup = worst
    return AlmostIndependence(lhs <= rhs, tup, lhs, rhs)


def _violation_key(lhs: Number, rhs: Number) -> float:
    return float(lhs) - float(rhs)


# ---------------------------------------------------------------------------
# the bounds

def kv_bound(stats: PolyStats, delta: Number, eps: Number, m: int, k: int) -> Number:
    """((1+delta)^k (1 + sum_i C(km, i) mu*_i / mu*_0) / (1+eps))^m."""
    if stats.mu0_star <= 0:
        raise ValueError("mu0_star must be > 0")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    if k > len(stats.mu_star):
        raise ValueError(f"stats carry mu*_1..mu*_{len(stats.mu_star)}, need k={k}")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    weighted = sum(comb(k * m, i) * stats.mu_star[i - 1] for i in range(1, k + 1))
    bracket = (1 + delta) ** k * (1 + weighted / stats.mu0_star)
    return (bracket / (1 + eps)) ** m


def kv_simple_bound(
    mu0_star: Number, mu_prime: Number, delta: Number, eps: Number, m: int, k: int
) -> Number:
    """Relaxation with (km)^k mu' in place of the binomial-weighted sum."""
    if mu0_star <= 0:
        raise ValueError("mu0_star must be > 0")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    bracket = (1 + delta) ** k * (1 + (k * m) ** k * mu_prime / mu0_star)
    return (bracket / (1 + eps)) ** m


@dataclass(frozen=True)
class IndependentPolyBound:
    value: float
    m: int
    vacuous: bool
    in_theorem_range: bool


def independent_poly_bound(
    mu: Number, mu_prime: Number, eps: Number, k: int
) -> IndependentPolyBound:
    """2 exp(-eps/(6k) (eps mu / mu')^(1/k)) for independent variables.

    The proof route picks m := floor((1/k)(eps mu / 3 mu')^(1/k)); when
    that m is 0 the certificate is empty, so the value degrades to the
    flagged vacuous bound 2.  The theorem statement covers eps <= 1/2;
    larger eps still evaluates, flagged in_theorem_range=False.
    """
    if mu <= 0 or mu_prime <= 0:
        raise ValueError("mu and mu' must be > 0")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if k < 1:
        raise ValueError("k must be >= 1")
    in_range = eps <= Fraction(1, 2) if is_exact(eps) else eps <= 0.5
    m = floor_snap((1 / k) * (float(eps) * float(mu) / (3 * float(mu_prime))) ** (1 / k))
    if m == 0:
        return IndependentPolyBound(2.0, 0, True, in_range)
    value = 2 * math.exp(
        -float(eps) / (6 * k) * (float(eps) * float(mu) / float(mu_prime)) ** (1 / k)
    )
    return IndependentPolyBound(value, m, False, in_range)


# ---------------------------------------------------------------------------
# elementary symmetric polynomials

def elementary_symmetric(l: int, k: int) -> PositivePolynomial:
    """Sum of all C(l, k) square-free degree-k monomials, unit weights."""
    if not 1 <= k <= l:
        raise ValueError(f"need 1 <= k <= l, got k={k}, l={l}")
    return PositivePolynomial(
        l, tuple((1, s) for s in itertools.combinations(range(l), k))
    )


def es_tail_exact(l: int, p: Number, k: int, threshold: Number) -> Number:
    """Pr[e_k(v) >= threshold] for i.i.d. Bernoulli(p) variables.

    e_k(v) = C(sum v, k) exactly, so the event is an ordinary binomial
    tail at the least s with C(s, k) >= threshold.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if not 1 <= k <= l:
        raise ValueError(f"need 1 <= k <= l, got k={k}, l={l}")
    if threshold <= 0:
        return Fraction(1) if is_exact(p) else 1.0
    s_star = None
    for s in range(k, l + 1):
        if comb(s, k) >= threshold:
            s_star = s
            break
    if s_star is None:
        return Fraction(0) if is_exact(p) else 0.0
    return binomial_tail(l, p, s_star)


def reverse_chernoff_floor(p: Number, l: int, eps: Number) -> float:
    """exp(-9 eps^2 p l): a floor under the binomial upper tail.

    Requires eps in (0, 1/2], p <= 1/2 and eps^2 p l >= 3.
    """
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2], got {eps}")
    if not 0 < p <= Fraction(1, 2):
        raise ValueError(f"p must lie in (0, 1/2], got {p}")
    if eps * eps * p * l < 3:
        raise ValueError(f"need eps^2 p l >= 3, got {float(eps * eps * p * l)}")
    return math.exp(-9 * float(eps) ** 2 * float(p) * l)


def es_lower_floor(p: Number, l: int, eps: Number, k: int) -> float:
    """exp(-36 eps^2 p l): a floor under Pr[e_k >= p^k C(l,k) (1+eps)].

    Requires eps in (0, 1/4], p <= 1/2, eps p l >= k and eps^2 p l >= 3/4.
    """
    if not 0 < eps <= Fraction(1, 4):
        raise ValueError(f"eps must lie in (0, 1/4], got {eps}")
    if not 0 < p <= Fraction(1, 2):
        raise ValueError(f"p must lie in (0, 1/2], got {p}")
    if eps * p * l < k:
        raise ValueError(f"need eps p l >= k, got {float(eps * p * l)} < {k}")
    if eps * eps * p * l < Fraction(3, 4):
        raise ValueError(f"need eps^2 p l >= 3/4, got {float(eps * eps * p * l)}")
    return math.exp(-36 * float(eps) ** 2 * float(p) * l)


def permutation_indicator_distribution(N: int) -> ExactDistribution:
    """Uniform law of the N x N permutation indicator matrix, flattened.

    Coordinate x*N + y is 1 when the permutation maps x to y; marginals
    are all 1/N while distinct cells are strongly negatively dependent.
    """
    if not 1 <= N <= 6:
        raise ValueError("N must lie in 1..6 (N! outcomes are enumerated)")
    w = Fraction(1, math.factorial(N))
    entries = []
    for perm in itertools.permutations(range(N)):
        x = [0] * (N * N)
        for a, b in enumerate(perm):
            x[a * N + b] = 1
        entries.append((w, tuple(x)))
    return ExactDistribution(N * N, tuple(entries))


# ---------------------------------------------------------------------------
# file I/O

def polynomial_to_dict(poly: PositivePolynomial) -> dict:
    return {
        "l": poly.variable_count,
        "monomials": [
            {"w": float(w) if not isinstance(w, int) else w, "vars": list(s)}
            for w, s in poly.monomials
        ],
    }


def polynomial_from_dict(obj: dict) -> PositivePolynomial:
    l = int(obj["l"])
    monos = []
    for entry in obj["monomials"]:
        w = entry["w"]
        support = tuple(int(j) for j in entry["vars"])
        if not support:
            raise ValueError("monomial supports must be nonempty")
        monos.append((Fraction(w) if isinstance(w, (int, str)) else float(w), support))
    poly = PositivePolynomial(l, tuple(monos))
    if poly.degree < 1:
        raise ValueError("polynomial degree must be >= 1")
    return poly


def save_polynomial(poly: PositivePolynomial, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(polynomial_to_dict(poly), fh)


def load_polynomial(path: str) -> PositivePolynomial:
    with open(path, "r", encoding="utf-8") as fh:
        return polynomial_from_dict(json.load(fh))
