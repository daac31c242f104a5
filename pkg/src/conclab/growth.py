"""Growth-boundedness checks and the master moment-method tail bounds.

A distribution over nonnegative vectors with per-coordinate mean ``mu`` is
(delta, m)-growth bounded when

    E[(x_1 + ... + x_n)^m]  <=  (mu * n)^m * (1 + delta)^m,

and the Markov step on the m-th power then caps the multiplicative upper
tail at ((1+delta)/(1+eps))^m.  The without-repetition variant replaces
i.i.d. index tuples by uniform size-m index subsets.  All checks here are
exact whenever the distribution carries rational probabilities; bound
evaluators return raw values (possibly above 1) and leave clamping to the
report layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Union

from .distributions import ExactDistribution, Number, SampledDistribution, is_exact
from .rng import derive_seed

_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


@dataclass(frozen=True)
class GrowthCheck:
    """Outcome of a growth-boundedness test with its witness ratio.

    ``ratio`` is the moment (or subset probability) divided by its
    unperturbed target, so the check holds iff ratio <= (1+delta)^m.
    """

    holds: bool
    ratio: Number
    threshold: Number

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class WorBound:
    """Without-repetition tail bound with the integer exponent it used."""

    value: Number
    m: int
    vacuous: bool


@dataclass(frozen=True)
class McTail:
    estimate: float
    ci99: float
    trials: int


def coordinate_mean(dist: ExactDistribution) -> Number:
    """Mean of a uniformly chosen coordinate: E[x_i] averaged over i."""
    total: Number = 0
    for p, x in dist.support:
        total = total + p * sum(x)
    return total / dist.n if isinstance(total, (int, Fraction)) else float(total) / dist.n


def moment_power_sum(dist: ExactDistribution, m: int) -> Number:
    """E[(sum_i x_i)^m] for integer m >= 1, exact on rational support."""
    _require_positive_int(m, "m")
    total: Number = 0
    for p, x in dist.support:
        total = total + p * sum(x) ** m
    return total


def check_growth_bounded(dist: ExactDistribution, delta: Number, m: int) -> GrowthCheck:
    """Test E[(sum x)^m] <= (mu n)^m (1+delta)^m; reports the ratio either way."""
    _require_positive_int(m, "m")
    mu = coordinate_mean(dist)
    if mu <= 0:
        raise ValueError("growth boundedness needs mu > 0")
    moment = moment_power_sum(dist, m)
    ratio = moment / (mu * dist.n) ** m
    threshold = (1 + delta) ** m
    return GrowthCheck(ratio <= threshold, ratio, threshold)


def check_gb_without_repetition(
    dist: ExactDistribution, delta: Number, m: int
) -> GrowthCheck:
    """Subset variant: Pr over x and uniform size-m index sets of all-ones.

    Requires binary outcomes and 1 <= m <= n; the probability is computed
    exactly as sum_x p(x) * C(ones(x), m) / C(n, m).
    """
    _require_positive_int(m, "m")
    if m > dist.n:
        raise ValueError(f"m={m} exceeds coordinate count n={dist.n}")
    if not dist.is_binary:
        raise ValueError("without-repetition check requires {0,1} outcomes")
    mu = coordinate_mean(dist)
    if mu <= 0:
        raise ValueError("growth boundedness needs mu > 0")
    denom = comb(dist.n, m)
    prob: Number = 0
    for p, x in dist.support:
        ones = sum(1 for v in x if v == 1)
        if ones >= m:
            prob = prob + p * Fraction(comb(ones, m), denom)
    ratio = prob / mu**m
    threshold = (1 + delta) ** m
    return GrowthCheck(ratio <= threshold, ratio, threshold)


def markov_tail_bound(delta: Number, eps: Number, m: Number) -> Number:
    """((1+delta)/(1+eps))^m, the master tail bound; raw, never clamped."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if delta < -1:
        raise ValueError("delta must be >= -1")
    if m <= 0:
        raise ValueError("m must be > 0")
    ratio = (1 + delta) / (1 + eps)
    if _is_integral(m):
        return ratio ** int(m)
    return float(ratio) ** float(m)


_COROLLARY_CASES = {
    "small-eps": ("eps in [0, 1/2]", lambda e: 0 <= e <= Fraction(1, 2)),
    "mid-eps": ("eps >= 1/2", lambda e: e >= Fraction(1, 2)),
    "large-eps": ("eps >= 3", lambda e: e >= 3),
    "wor": ("eps in [0, 4/5]", lambda e: 0 <= e <= Fraction(4, 5)),
}


def corollary_bound(eps: Number, m: Number, case: str) -> float:
    """Closed-form relaxations of the master bound at delta = eps/3.

    small-eps: exp(-eps*m/2); mid-eps: (4/5)^m; large-eps: 2^-m;
    wor: exp(-eps*m/3) (subset-index variant).
    """
    if case not in _COROLLARY_CASES:
        raise ValueError(f"unknown case {case!r}; one of {sorted(_COROLLARY_CASES)}")
    desc, ok = _COROLLARY_CASES[case]
    if not ok(eps):
        raise ValueError(f"case {case!r} requires {desc}, got eps={eps}")
    if m <= 0:
        raise ValueError("m must be > 0")
    e, mm = float(eps), float(m)
    if case == "small-eps":
        return math.exp(-e * mm / 2)
    if case == "mid-eps":
        return 0.8**mm
    if case == "large-eps":
        return 2.0**-mm
    return math.exp(-e * mm / 3)


def wor_tail_bound(
    delta: Number, eps: Number, c: Number, mu: Number, n: int
) -> WorBound:
    """((1+delta)/(1+(1-c)eps))^m with m := floor(c*eps*mu*n).

    m = 0 yields the vacuous bound 1 (flagged).
    """
    if not 0 <= c <= 1:
        raise ValueError("c must lie in [0, 1]")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if mu <= 0:
        raise ValueError("mu must be > 0")
    if delta < -1:
        raise ValueError("delta must be >= -1")
    m = floor_snap(c * eps * mu * n)
    if m == 0:
        return WorBound(value=1, m=0, vacuous=True)
    ratio = (1 + delta) / (1 + (1 - c) * eps)
    return WorBound(value=ratio**m, m=m, vacuous=False)


def exact_tail(dist: ExactDistribution, threshold: Number) -> Number:
    """Pr[sum_i x_i >= threshold], exact on rational support."""
    total: Number = 0
    for p, x in dist.support:
        if sum(x) >= threshold:
            total = total + p
    return total


def toy_chernoff_bound(n: int, eps: Number) -> float:
    """exp(-eps^2 n / 6) for fair coins, valid for eps in [0, 1/2]."""
    if not 0 <= eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in [0, 1/2], got {eps}")
    return math.exp(-float(eps) ** 2 * n / 6)


def bernoulli_chernoff_bound(mu: Number, n: int, eps: Number) -> float:
    """exp(-eps^2 mu n / 6) for independent Bernoulli(mu) coordinates."""
    if not 0 <= eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in [0, 1/2], got {eps}")
    if not 0 < mu <= 1:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    return math.exp(-float(eps) ** 2 * float(mu) * n / 6)


def monte_carlo_tail(
    dist: SampledDistribution, threshold: Number, trials: int, seed: int
) -> McTail:
    """Empirical tail frequency with a 99% normal-approximation CI.

    Trial i draws from ``dist.sampler(derive_seed(seed, i))``, so the
    estimate is identical under any parallel execution order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    for i in range(trials):
        if sum(dist.sampler(derive_seed(seed, i))) >= threshold:
            hits += 1
    est = hits / trials
    half = _Z99 * math.sqrt(est * (1 - est) / trials)
    return McTail(estimate=est, ci99=half, trials=trials)


def binomial_tail(n: int, p: Number, k: int) -> Number:
    """Pr[Bin(n, p) >= k], exact when p is rational."""
    if n < 0:
        raise ValueError("n must be >= 0")
    k = max(k, 0)
    if k > n:
        return 0 * p
    return sum(comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1))


def iid_tuple_all_ones_probability(dist: ExactDistribution, m: int) -> Number:
    """Pr over x and an i.i.d. index m-tuple that all indexed coordinates are 1.

    Evaluated through the surjection decomposition over index-image sets
    (sum_s surj(m, s) * C(ones, s) / n^m), which is an independent route
    from the m-th moment it must reproduce (times n^-m) on binary support.
    """
    _require_positive_int(m, "m")
    if not dist.is_binary:
        raise ValueError("index-tuple probability requires {0,1} outcomes")
    surj = [_surjections(m, s) for s in range(m + 1)]
    total: Number = 0
    for p, x in dist.support:
        ones = sum(1 for v in x if v == 1)
        ways = sum(surj[s] * comb(ones, s) for s in range(1, min(m, ones) + 1))
        total = total + p * ways
    return total / Fraction(dist.n) ** m


def _surjections(m: int, s: int) -> int:
    return sum((-1) ** j * comb(s, j) * (s - j) ** m for j in range(s + 1))


def floor_snap(v: Number) -> int:
    """floor with a 1e-9 upward snap for floats (exact on rationals)."""
    if isinstance(v, (int, Fraction)):
        return math.floor(v)
    return math.floor(v + 1e-9)


def ceil_snap(v: Number) -> int:
    """ceil with a 1e-9 downward snap for floats (exact on rationals)."""
    if isinstance(v, (int, Fraction)):
        return math.ceil(v)
    return math.ceil(v - 1e-9)


def _is_integral(x: Number) -> bool:
    if isinstance(x, int):
        return True
    if isinstance(x, Fraction):
        return x.denominator == 1
    return float(x).is_integer()


def _require_positive_int(m, name: str) -> None:
    if not _is_integral(m) or m < 1:
        raise ValueError(f"{name} must be a positive integer, got {m!r}")
