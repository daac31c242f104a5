"""Gap law of a uniform index subset and its coupling with i.i.d. variables.

Sorting a uniform size-m subset of [ell] and taking first differences
yields the gap tuple (d_1, ..., d_m), uniform over positive tuples with
sum <= ell.  This law couples with i.i.d. gaps (e_1, ..., e_m*) such that
e_i <= d_i surely while Pr[e_i = k] = beta := m / (ell - alpha*m*) for
every k <= alpha, the leftover mass sitting on floor(alpha) + 1.

The coupling is built inductively: at each step the pair (first gap,
fresh e) is drawn comonotonically from a shared uniform, then the residual
tuple is rebuilt through the two conditional-law identities (condition on
the first gap's value, or subtract floor(alpha) from it when it is
larger).  ``coupled_gaps_joint_law`` exhausts the construction into an
exact rational joint law so the marginal and domination statements become
exact assertions.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Union

from .errors import ResourceLimitError

Rational = Union[int, Fraction]

ENUM_BUDGET = 10**6


@dataclass(frozen=True)
class GapTuple:
    """Gaps of a size-m subset of [horizon]; positive with sum <= horizon."""

    gaps: tuple[int, ...]
    horizon: int

    def __post_init__(self) -> None:
        if any(d < 1 for d in self.gaps):
            raise ValueError("gaps must be positive integers")
        if sum(self.gaps) > self.horizon:
            raise ValueError("gaps must sum to at most the horizon")


@dataclass(frozen=True)
class CoupledGaps:
    """A joint draw (d, e) with e_i <= d_i and e_i <= floor(alpha) + 1."""

    d: GapTuple
    e: tuple[int, ...]
    alpha: Rational
    beta: Fraction

    def __post_init__(self) -> None:
        if len(self.e) > len(self.d.gaps):
            raise ValueError("e cannot be longer than d")
        cap = math.floor(self.alpha) + 1
        for ei, di in zip(self.e, self.d.gaps):
            if ei > di:
                raise ValueError(f"domination violated: e={ei} > d={di}")
            if ei > cap:
                raise ValueError(f"e={ei} exceeds floor(alpha)+1={cap}")


def sample_subset_gaps(m: int, ell: int, seed: int) -> GapTuple:
    """Gaps of a uniformly random size-m subset of {1, ..., ell}."""
    _check_m_ell(m, ell)
    rng = random.Random(seed)
    return _draw_gaps(m, ell, rng)


def _draw_gaps(m: int, ell: int, rng: random.Random) -> GapTuple:
    picks = sorted(rng.sample(range(1, ell + 1), m))
    gaps = [picks[0]] + [b - a for a, b in zip(picks, picks[1:])]
    return GapTuple(tuple(gaps), ell)


def gap_distribution_exact(
    m: int, ell: int, budget: int = ENUM_BUDGET
) -> dict[tuple[int, ...], Fraction]:
    """The full gap law: every admissible tuple mapped to 1 / C(ell, m)."""
    if m == 0:
        return {(): Fraction(1)}
    _check_m_ell(m, ell)
    total = comb(ell, m)
    if total > budget:
        raise ResourceLimitError(f"C({ell},{m}) = {total} exceeds budget {budget}")
    weight = Fraction(1, total)
    law: dict[tuple[int, ...], Fraction] = {}
    for picks in itertools.combinations(range(1, ell + 1), m):
        gaps = (picks[0],) + tuple(b - a for a, b in zip(picks, picks[1:]))
        law[gaps] = weight
    return law


def first_gap_pmf(m: int, ell: int) -> dict[int, Fraction]:
    """Marginal of the first gap: Pr[d_1 = k] = C(ell-k, m-1) / C(ell, m)."""
    _check_m_ell(m, ell)
    total = comb(ell, m)
    return {
        k: Fraction(comb(ell - k, m - 1), total) for k in range(1, ell - m + 2)
    }


@dataclass(frozen=True)
class ClaimReport:
    claim: str
    params: dict
    max_discrepancy: Fraction

    def to_json_dict(self) -> dict:
        return {
            "claim": self.claim,
            "params": self.params,
            "max_discrepancy": str(self.max_discrepancy),
        }


def verify_conditional_claims(m: int, ell: int, k: int) -> list[ClaimReport]:
    """Exhaustively check both conditional-law identities of the gap law.

    Conditioned on d_1 = k the remaining gaps follow the (m-1, ell-k) law;
    conditioned on d_1 > k the tuple (d_2, ..., d_m, d_1 - k) follows the
    (m, ell-k) law.  Discrepancies are exact rationals and must be zero.
    """
    _check_m_ell(m, ell)
    if k < 1:
        raise ValueError("k must be >= 1")
    eq_ok = k + m - 1 <= ell
    gt_ok = k + m <= ell
    if not eq_ok and not gt_ok:
        raise ValueError(f"neither claim applies: k={k} too large for (m={m}, ell={ell})")
    base = gap_distribution_exact(m, ell)
    reports = []
    if eq_ok:
        cond: dict[tuple[int, ...], Fraction] = {}
        mass = Fraction(0)
        for d, p in base.items():
            if d[0] == k:
                cond[d[1:]] = cond.get(d[1:], Fraction(0)) + p
                mass += p
        cond = {key: p / mass for key, p in cond.items()}
        target = gap_distribution_exact(m - 1, ell - k)
        reports.append(
            ClaimReport(
                "first-gap-equals",
                {"m": m, "ell": ell, "k": k},
                _max_discrepancy(cond, target),
            )
        )
    if gt_ok:
        cond = {}
        mass = Fraction(0)
        for d, p in base.items():
            if d[0] > k:
                key = d[1:] + (d[0] - k,)
                cond[key] = cond.get(key, Fraction(0)) + p
                mass += p
        cond = {key: p / mass for key, p in cond.items()}
        target = gap_distribution_exact(m, ell - k)
        reports.append(
            ClaimReport(
                "first-gap-exceeds",
                {"m": m, "ell": ell, "k": k},
                _max_discrepancy(cond, target),
            )
        )
    return reports


def _max_discrepancy(
    a: dict[tuple[int, ...], Fraction], b: dict[tuple[int, ...], Fraction]
) -> Fraction:
    keys = set(a) | set(b)
    return max(
        (abs(a.get(key, Fraction(0)) - b.get(key, Fraction(0))) for key in keys),
        default=Fraction(0),
    )


# ---------------------------------------------------------------------------
# the coupling itself

def coupling_parameters(m: int, m_star: int, ell: int, alpha: Rational) -> Fraction:
    """Validate (m, m*, ell, alpha) and return beta = m / (ell - alpha*m*)."""
    if not 1 <= m_star <= m <= ell:
        raise ValueError(f"need 1 <= m*={m_star} <= m={m} <= ell={ell}")
    alpha = Fraction(alpha)
    if alpha < 1:
        raise ValueError(f"alpha={alpha} violates alpha >= 1")
    if alpha * (m + m_star) > ell:
        raise ValueError(
            f"alpha={alpha} violates alpha <= ell/(m+m*) = {Fraction(ell, m + m_star)}"
        )
    beta = Fraction(m) / (ell - alpha * m_star)
    if beta * alpha > 1:
        raise ValueError(f"beta={beta} violates beta <= 1/alpha = {1 / alpha}")
    return beta


def _e_pmf(beta: Fraction, floor_alpha: int) -> dict[int, Fraction]:
    pmf = {k: beta for k in range(1, floor_alpha + 1)}
    rest = 1 - floor_alpha * beta
    if rest > 0:
        pmf[floor_alpha + 1] = rest
    return pmf


def _comonotone_atoms(
    pmf_a: dict[int, Fraction], pmf_b: dict[int, Fraction]
) -> list[tuple[int, int, Fraction]]:
    """Atoms (a, b, mass) of the shared-uniform inverse-CDF coupling."""
    atoms = []
    items_a = sorted(pmf_a.items())
    items_b = sorted(pmf_b.items())
    ia = ib = 0
    lo = Fraction(0)
    hi_a = items_a[0][1]
    hi_b = items_b[0][1]
    while ia < len(items_a) and ib < len(items_b):
        hi = min(hi_a, hi_b)
        if hi > lo:
            atoms.append((items_a[ia][0], items_b[ib][0], hi - lo))
        lo = hi
        if hi_a == hi:
            ia += 1
            if ia < len(items_a):
                hi_a = hi_a + items_a[ia][1]
        if hi_b == hi:
            ib += 1
            if ib < len(items_b):
                hi_b = hi_b + items_b[ib][1]
    return atoms


def _step_atoms(
    m: int, ell: int, beta: Fraction, floor_alpha: int
) -> list[tuple[object, int, Fraction]]:
    """First-step atoms: (d1, e1, mass) for d1 <= floor(alpha), else ("gt", e1, mass).

    Comonotonicity requires the e-CDF to dominate the d1-CDF below alpha,
    which holds because Pr[d1 <= k] <= k*m/ell <= k*beta; asserted here.
    """
    d_pmf = first_gap_pmf(m, ell)
    e_pmf = _e_pmf(beta, floor_alpha)
    cdf_d = Fraction(0)
    for k in range(1, floor_alpha + 1):
        cdf_d += d_pmf.get(k, Fraction(0))
        assert cdf_d <= k * beta, "comonotone domination premise failed"
    grouped: dict[tuple[object, int], Fraction] = {}
    for d1, e1, mass in _comonotone_atoms(d_pmf, e_pmf):
        key = (d1, e1) if d1 <= floor_alpha else ("gt", e1)
        if key[0] != "gt" and e1 > d1:
            raise AssertionError("comonotone coupling produced e1 > d1")
        grouped[key] = grouped.get(key, Fraction(0)) + mass
    return [(d, e, p) for (d, e), p in grouped.items()]


def sample_coupled_gaps(
    m: int, m_star: int, ell: int, alpha: Rational, seed: int
) -> CoupledGaps:
    """One seeded draw from the coupled law over (d, e)."""
    beta = coupling_parameters(m, m_star, ell, alpha)
    alpha = Fraction(alpha)
    rng = random.Random(seed)
    d, e = _sample_rec(m, m_star, ell, beta, math.floor(alpha), rng)
    return CoupledGaps(GapTuple(d, ell), e, alpha, beta)


def _sample_rec(
    m: int, m_star: int, ell: int, beta: Fraction, fa: int, rng: random.Random
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if m == 0:
        return (), ()
    if m_star == 0:
        return _draw_gaps(m, ell, rng).gaps, ()
    atoms = _step_atoms(m, ell, beta, fa)
    u = rng.random()
    acc = Fraction(0)
    head, e1 = atoms[-1][0], atoms[-1][1]
    for d1, e, mass in atoms:
        acc += mass
        if u < acc:
            head, e1 = d1, e
            break
    if head == "gt":
        g, e_rest = _sample_rec(m, m_star - 1, ell - fa, beta, fa, rng)
        d = (g[-1] + fa,) + g[:-1]
    else:
        d_rest, e_rest = _sample_rec(m - 1, m_star - 1, ell - head, beta, fa, rng)
        d = (head,) + d_rest
    return d, (e1,) + e_rest


def coupled_gaps_joint_law(
    m: int, m_star: int, ell: int, alpha: Rational, budget: int = ENUM_BUDGET
) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
    """Exact joint law of (d, e) obtained by exhausting the construction."""
    beta = coupling_parameters(m, m_star, ell, alpha)
    fa = math.floor(Fraction(alpha))
    cache: dict = {}

    def rec(mm: int, ms: int, el: int):
        key = (mm, ms, el)
        if key in cache:
            return cache[key]
        if mm == 0:
            law = {((), ()): Fraction(1)}
        elif ms == 0:
            law = {
                (d, ()): p for d, p in gap_distribution_exact(mm, el, budget).items()
            }
        else:
            law = {}
            for d1, e1, mass in _step_atoms(mm, el, beta, fa):
                if d1 == "gt":
                    sub = rec(mm, ms - 1, el - fa)
                    for (g, e_rest), q in sub.items():
                        full = ((g[-1] + fa,) + g[:-1], (e1,) + e_rest)
                        law[full] = law.get(full, Fraction(0)) + mass * q
                else:
                    sub = rec(mm - 1, ms - 1, el - d1)
                    for (d_rest, e_rest), q in sub.items():
                        full = ((d1,) + d_rest, (e1,) + e_rest)
                        law[full] = law.get(full, Fraction(0)) + mass * q
            if len(law) > budget:
                raise ResourceLimitError(
                    f"joint support exceeds budget {budget} at {key}"
                )
        cache[key] = law
        return law

    return rec(m, m_star, ell)


def joint_law_d_marginal(
    law: dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]
) -> dict[tuple[int, ...], Fraction]:
    out: dict[tuple[int, ...], Fraction] = {}
    for (d, _e), p in law.items():
        out[d] = out.get(d, Fraction(0)) + p
    return out


def joint_law_e_marginal(
    law: dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]
) -> dict[tuple[int, ...], Fraction]:
    out: dict[tuple[int, ...], Fraction] = {}
    for (_d, e), p in law.items():
        out[e] = out.get(e, Fraction(0)) + p
    return out


def _check_m_ell(m: int, ell: int) -> None:
    if not isinstance(m, int) or not isinstance(ell, int):
        raise ValueError("m and ell must be integers")
    if not 1 <= m <= ell:
        raise ValueError(f"need 1 <= m <= ell, got m={m}, ell={ell}")
