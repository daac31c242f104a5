"""Random walks on symmetric doubly stochastic matrices and their tail bounds.

A walk starts at a uniform vertex and follows the rows of a symmetric
doubly stochastic transition matrix; step i sets an indicator when the
walk sits inside a target vertex set W of density mu.  The module holds
the spectral helpers (second-largest absolute eigenvalue, restricted
spectral norms), the exact stay/occupation oracles (matrix products and
count DPs), the closed-form tail bounds driven by the spectral gap, and
the lambda*I + (1-lambda)/n*J construction on which those bounds are
provably tight, together with its explicit lower-bound certificate.

Matrix file format (JSON)::

    {"n": 4, "rows": [[...], ...], "W": [0, 1], "steps": 12}

Entries given as "num/den" strings parse as exact rationals, which the
exact trajectory oracle requires; "W" and "steps" are optional.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence, Union

import numpy as np

from .distributions import ExactDistribution, Number, is_exact
from .errors import ResourceLimitError
from .growth import McTail, _Z99, ceil_snap, floor_snap
from .rng import derive_seed

ENUM_BUDGET = 10**6
DP_BUDGET = 10**7

_SYM_TOL = 1e-12
_EIG_TOL = 1e-10


@dataclass(frozen=True)
class TransitionMatrix:
    """Symmetric, entrywise nonnegative matrix with unit row sums."""

    n: int
    rows: tuple[tuple[Number, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 1 or len(self.rows) != self.n:
            raise ValueError("matrix must be n x n with n >= 1")
        exact = self.is_exact
        for i, row in enumerate(self.rows):
            if len(row) != self.n:
                raise ValueError("matrix must be square")
            if any(v < 0 for v in row):
                raise ValueError("entries must be nonnegative")
            s = sum(row)
            if exact:
                if s != 1:
                    raise ValueError(f"row {i} sums to {s}, not 1")
            elif abs(float(s) - 1.0) > _SYM_TOL:
                raise ValueError(f"row {i} sums to {float(s)}, not 1 within {_SYM_TOL}")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                a, b = self.rows[i][j], self.rows[j][i]
                if exact:
                    if a != b:
                        raise ValueError("matrix must be symmetric")
                elif abs(float(a) - float(b)) > _SYM_TOL:
                    raise ValueError("matrix must be symmetric")

    @property
    def is_exact(self) -> bool:
        return all(is_exact(v) for row in self.rows for v in row)

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.rows])


@dataclass(frozen=True)
class WalkSpec:
    """A walk: transition matrix, target vertex set W, and step count."""

    matrix: TransitionMatrix
    target: tuple[int, ...]
    steps: int

    def __post_init__(self) -> None:
        n = self.matrix.n
        if sorted(set(self.target)) != list(self.target):
            raise ValueError("target must be a sorted tuple of distinct vertices")
        if any(not 0 <= v < n for v in self.target):
            raise ValueError("target vertices out of range")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    @property
    def mu(self) -> Fraction:
        return Fraction(len(self.target), self.matrix.n)


def spectral_lambda(matrix: TransitionMatrix) -> float:
    """Second-largest absolute eigenvalue; 0 for the 1-vertex matrix."""
    if matrix.n == 1:
        return 0.0
    vals = np.linalg.eigvalsh(matrix.as_array())
    mags = np.sort(np.abs(vals))[::-1]
    lam = float(mags[1])
    if lam < _EIG_TOL:
        return 0.0
    return min(lam, 1.0)


def build_jn_construction(lam: Number, n: int) -> TransitionMatrix:
    """lam * I + (1 - lam)/n * J: every off-diagonal eigenvalue equals lam.

    Rational ``lam`` gives exact rational entries, which keeps the exact
    trajectory oracle applicable.
    """
    if not 0 <= lam < 1:
        raise ValueError(f"lam must lie in [0, 1), got {lam}")
    if n < 1:
        raise ValueError("n must be >= 1")
    off = Fraction(1 - lam) / n if is_exact(lam) else (1.0 - lam) / n
    diag = lam + off
    rows = tuple(
        tuple(diag if i == j else off for j in range(n)) for i in range(n)
    )
    return TransitionMatrix(n, rows)


# ---------------------------------------------------------------------------
# stay probabilities

def _masked_uniform(spec: WalkSpec) -> np.ndarray:
    v = np.zeros(spec.matrix.n)
    v[list(spec.target)] = 1.0 / spec.matrix.n
    return v


def _matrix_powers(arr: np.ndarray, max_power: int) -> list[np.ndarray]:
    powers = [np.eye(arr.shape[0])]
    for _ in range(max_power):
        powers.append(powers[-1] @ arr)
    return powers


def _stay_prob(spec: WalkSpec, gaps: Sequence[int], powers: list[np.ndarray]) -> float:
    mask = list(spec.target)
    vec = _masked_uniform(spec)
    for gap in gaps[1:]:
        vec = vec @ powers[gap]
        keep = np.zeros_like(vec)
        keep[mask] = vec[mask]
        vec = keep
    return float(vec.sum())


def stay_prob_exact(spec: WalkSpec, steps_in: Sequence[int]) -> float:
    """Pr[walk is in W at every step of ``steps_in``] (1-based step indices).

    The uniform start is stationary, so only the gaps between the chosen
    steps matter; the value is a masked matrix-product evaluation.
    """
    steps = sorted(set(steps_in))
    if not steps:
        raise ValueError("steps_in must be nonempty")
    if steps[0] < 1 or steps[-1] > spec.steps:
        raise ValueError("steps_in must lie within 1..steps")
    gaps = [steps[0]] + [b - a for a, b in zip(steps, steps[1:])]
    powers = _matrix_powers(spec.matrix.as_array(), max(gaps))
    return _stay_prob(spec, gaps, powers)


def avg_stay_prob(
    spec: WalkSpec,
    m: int,
    mode: str = "exact",
    trials: int = 10000,
    seed: int = 0,
    budget: int = ENUM_BUDGET,
):
    """Average stay probability over a uniform size-m set of steps.

    Exact mode enumerates all C(steps, m) subsets (within budget) and
    returns a float; mc mode samples subsets and returns an McTail.
    """
    ell = spec.steps
    if not 1 <= m <= ell:
        raise ValueError(f"need 1 <= m <= steps, got m={m}, steps={ell}")
    powers = _matrix_powers(spec.matrix.as_array(), ell)
    if mode == "exact":
        total = comb(ell, m)
        if total > budget:
            raise ResourceLimitError(
                f"C({ell},{m}) = {total} subsets exceed budget {budget}"
            )
        acc = 0.0
        for picks in itertools.combinations(range(1, ell + 1), m):
            gaps = (picks[0],) + tuple(b - a for a, b in zip(picks, picks[1:]))
            acc += _stay_prob(spec, gaps, powers)
        return acc / total
    if mode == "mc":
        vals = []
        for i in range(trials):
            rng = random.Random(derive_seed(seed, i))
            picks = sorted(rng.sample(range(1, ell + 1), m))
            gaps = (picks[0],) + tuple(b - a for a, b in zip(picks, picks[1:]))
            vals.append(_stay_prob(spec, gaps, powers))
        est = sum(vals) / trials
        var = sum((v - est) ** 2 for v in vals) / max(trials - 1, 1)
        return McTail(est, _Z99 * math.sqrt(var / trials), trials)
    raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")


@dataclass(frozen=True)
class NormClaim:
    lhs: float
    rhs: float
    lam: float
    holds: bool


def norm_claim_check(matrix: TransitionMatrix, target: Sequence[int], k: int) -> NormClaim:
    """Spectral norm of P_W A^k P_W against mu + (1 - mu) * lambda^k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    spec = WalkSpec(matrix, tuple(sorted(set(target))), steps=1)
    arr = matrix.as_array()
    power = np.linalg.matrix_power(arr, k)
    mask = np.zeros((matrix.n, matrix.n))
    idx = list(spec.target)
    mask[idx, idx] = 1.0
    restricted = mask @ power @ mask
    lhs = float(np.max(np.abs(np.linalg.eigvalsh((restricted + restricted.T) / 2))))
    mu = float(spec.mu)
    lam = spectral_lambda(matrix)
    rhs = mu + (1 - mu) * lam**k
    return NormClaim(lhs, rhs, lam, lhs <= rhs + 1e-9)


# ---------------------------------------------------------------------------
# closed-form bounds

@dataclass(frozen=True)
class HittingBound:
    value: Number
    supported: bool
    m_max: float


def hitting_bound(mu: Number, eps: Number, m: int, lam: Number, ell: int) -> HittingBound:
    """(mu (1 + eps))^m, supported when m <= min(1/2, (1-lam)/lam * eps*mu/2) * ell.

    lam = 0 makes the spectral term infinite, so only m <= ell/2 remains.
    An unsupported m still yields the value, flagged.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if not 0 <= lam <= 1:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    if not 1 <= m <= ell:
        raise ValueError(f"need 1 <= m <= ell, got m={m}, ell={ell}")
    value = (mu * (1 + eps)) ** m
    if lam == 0:
        cap = 0.5
    else:
        cap = min(0.5, float((1 - lam) / lam) * float(eps) * float(mu) / 2)
    m_max = cap * ell
    return HittingBound(value, m <= m_max + 1e-12, m_max)


def hitting_bound_tight(mu: Number, lam: Number, m: int, ell: int, alpha: Number) -> float:
    """(mu + (1-mu) * (m/(ell - alpha m) * lam/(1-lam) + lam^alpha))^m."""
    if not 0 <= lam < 1:
        raise ValueError(f"lam must lie in [0, 1), got {lam}")
    if not 1 <= m <= ell:
        raise ValueError(f"need 1 <= m <= ell, got m={m}, ell={ell}")
    if not 1 <= alpha <= Fraction(ell, 2 * m):
        raise ValueError(f"alpha must lie in [1, ell/(2m)] = [1, {Fraction(ell, 2*m)}]")
    mu_f, lam_f, a_f = float(mu), float(lam), float(alpha)
    correction = (m / (ell - a_f * m)) * (lam_f / (1 - lam_f)) if lam_f else 0.0
    tail_term = lam_f**a_f
    return (mu_f + (1 - mu_f) * (correction + tail_term)) ** m


@dataclass(frozen=True)
class TailBound:
    value: float
    vacuous: bool


def main_tail_bound(mu: Number, lam: Number, eps: Number, ell: int) -> TailBound:
    """2 exp(-(1 - lam) eps^2 mu ell / 18) for eps in [0, 4/5]."""
    if not 0 <= eps <= Fraction(4, 5):
        raise ValueError(f"eps must lie in [0, 4/5], got {eps}")
    if mu <= 0:
        raise ValueError("mu must be > 0")
    if not 0 <= lam <= 1:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    value = 2 * math.exp(-(1 - float(lam)) * float(eps) ** 2 * float(mu) * ell / 18)
    return TailBound(value, value >= 1)


@dataclass(frozen=True)
class TightTailBound:
    value: float
    vacuous: bool
    remark_valid: bool
    c_mu: float


def tight_tail_bound(mu: Number, lam: Number, eps: Number, ell: int) -> TightTailBound:
    """Sharp-exponent tail bound with the explicit cubic correction term.

    Value: 2 exp(-(1-lam)/(1+lam) * mu/(1-mu) * eps^2 ell / 2
                 + c_mu eps^3 ln(1/eps) ell) with c_mu = 4/(1-mu)^2.
    The constant is certified only for
    eps <= min(1/3, mu, -(1-mu)/(3 ln eps)); outside that region the value
    is still returned, flagged remark_valid=False.
    """
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2], got {eps}")
    if not 0 < mu < 1:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    if not 0 <= lam <= 1:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    mu_f, lam_f, e = float(mu), float(lam), float(eps)
    c_mu = 4 / (1 - mu_f) ** 2
    leading = (1 - lam_f) / (1 + lam_f) * mu_f / (1 - mu_f) * e**2 * ell / 2
    correction = c_mu * e**3 * math.log(1 / e) * ell
    value = 2 * math.exp(-leading + correction)
    remark_valid = e <= min(1.0 / 3, mu_f, -(1 - mu_f) / (3 * math.log(e)))
    return TightTailBound(value, value >= 1, remark_valid, c_mu)


# ---------------------------------------------------------------------------
# exact occupation-count oracles

def tail_threshold(mu: Number, ell: int, eps: Number) -> int:
    """Smallest integer count in the event {sum of indicators >= mu*ell*(1+eps)}."""
    return ceil_snap(mu * ell * (1 + eps))


def walk_tail_exact(spec: WalkSpec, eps: Number, budget: int = DP_BUDGET) -> float:
    """Pr[number of steps in W >= ceil(mu*ell*(1+eps))] by count DP."""
    return walk_count_tail(spec, tail_threshold(spec.mu, spec.steps, eps), budget)


def walk_count_tail(spec: WalkSpec, threshold: int, budget: int = DP_BUDGET) -> float:
    """Pr[occupation count >= threshold] over (vertex, count) states."""
    n, ell = spec.matrix.n, spec.steps
    if threshold <= 0:
        return 1.0
    if threshold > ell:
        return 0.0
    if n * ell * ell > budget:
        raise ResourceLimitError(f"DP needs {n * ell * ell} cells, budget {budget}")
    arr = spec.matrix.as_array()
    in_w = np.zeros(n, dtype=bool)
    in_w[list(spec.target)] = True
    cap = threshold
    f = np.zeros((n, cap + 1))
    f[in_w, 1] = 1.0 / n
    f[~in_w, 0] = 1.0 / n
    for _ in range(ell - 1):
        h = arr.T @ f
        g = np.empty_like(h)
        g[~in_w] = h[~in_w]
        g[in_w, 1:cap] = h[in_w, 0 : cap - 1]
        g[in_w, 0] = 0.0
        g[in_w, cap] = h[in_w, cap - 1] + h[in_w, cap]
        f = g
    return float(f[:, cap].sum())


def jn_walk_tail_exact(lam: Number, mu: Number, ell: int, eps: Number) -> float:
    """Occupation tail on the lambda*I + (1-lambda)/n*J walk via the 2-state chain.

    Inside/outside W is a Markov chain with stay probabilities
    a = lam + mu - lam*mu and b = 1 - mu + lam*mu, so the DP runs over
    (side, count) regardless of n.
    """
    if not 0 <= lam < 1:
        raise ValueError(f"lam must lie in [0, 1), got {lam}")
    if not 0 < mu < 1:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    threshold = tail_threshold(mu, ell, eps)
    if threshold <= 0:
        return 1.0
    if threshold > ell:
        return 0.0
    a = float(lam + mu - lam * mu)
    b = float(1 - mu + lam * mu)
    cap = threshold
    f_in = np.zeros(cap + 1)
    f_out = np.zeros(cap + 1)
    f_in[1] = float(mu)
    f_out[0] = 1.0 - float(mu)
    for _ in range(ell - 1):
        h_in = a * f_in + (1 - b) * f_out
        h_out = (1 - a) * f_in + b * f_out
        g_in = np.zeros(cap + 1)
        g_in[1:cap] = h_in[0 : cap - 1]
        g_in[cap] = h_in[cap - 1] + h_in[cap]
        f_in, f_out = g_in, h_out
    return float(f_in[cap] + f_out[cap])


def walk_indicator_distribution(
    spec: WalkSpec, budget: int = ENUM_BUDGET
) -> ExactDistribution:
    """Exact law of the indicator vector (x_1, ..., x_ell); rational matrices only."""
    if not spec.matrix.is_exact:
        raise ValueError("exact walk enumeration requires rational matrix entries")
    n, ell = spec.matrix.n, spec.steps
    if (2**ell) * n > budget:
        raise ResourceLimitError(f"2^{ell} * {n} states exceed budget {budget}")
    in_w = [v in set(spec.target) for v in range(n)]
    start = Fraction(1, n)
    states: dict[tuple[tuple[int, ...], int], Fraction] = {}
    for v in range(n):
        pattern = (1,) if in_w[v] else (0,)
        states[(pattern, v)] = states.get((pattern, v), Fraction(0)) + start
    for _ in range(ell - 1):
        nxt: dict[tuple[tuple[int, ...], int], Fraction] = {}
        for (pattern, v), p in states.items():
            row = spec.matrix.rows[v]
            for u in range(n):
                q = row[u]
                if q == 0:
                    continue
                key = (pattern + ((1,) if in_w[u] else (0,)), u)
                nxt[key] = nxt.get(key, Fraction(0)) + p * Fraction(q)
        states = nxt
    agg: dict[tuple[int, ...], Fraction] = {}
    for (pattern, _v), p in states.items():
        agg[pattern] = agg.get(pattern, Fraction(0)) + p
    return ExactDistribution(ell, tuple((p, pat) for pat, p in sorted(agg.items())))


def walk_sample(spec: WalkSpec, seed: int) -> tuple[int, ...]:
    """One seeded walk; returns the indicator sequence x_1..x_ell."""
    rng = random.Random(seed)
    n = spec.matrix.n
    rows = [list(itertools.accumulate(float(v) for v in row)) for row in spec.matrix.rows]
    in_w = set(spec.target)
    v = rng.randrange(n)
    out = [1 if v in in_w else 0]
    for _ in range(spec.steps - 1):
        u = rng.random()
        row = rows[v]
        v = next(i for i, c in enumerate(row) if u < c or i == n - 1)
        out.append(1 if v in in_w else 0)
    return tuple(out)


# ---------------------------------------------------------------------------
# optimality certificate for the J-construction

@dataclass(frozen=True)
class OptimalityCertificate:
    value: float
    log_value: float
    count_in: int
    runs: int
    floored: bool
    degenerate: bool


def _optimality_counts(lam, mu, eps, ell):
    if not (0 < lam < 1 and 0 < mu < 1):
        raise ValueError("lam and mu must lie in (0, 1)")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    k_real = mu * ell * (1 + eps)
    x = (1 - lam) * mu * (1 - mu) + (1 - lam) * mu * (1 - 2 * mu) * eps / (1 + lam)
    r_real = x * ell
    count_in = ceil_snap(k_real)
    runs = floor_snap(r_real)
    if count_in < 1:
        raise ValueError(f"in-W count floors to {count_in} < 1")
    if runs < 1:
        raise ValueError(f"run count floors to {runs} < 1")
    floored = not (_close_to_int(k_real) and _close_to_int(r_real))
    a = lam + mu - lam * mu
    b = 1 - mu + lam * mu
    return count_in, runs, a, b, floored


def _close_to_int(v) -> bool:
    if isinstance(v, (int, Fraction)):
        return v == int(v)
    return abs(v - round(v)) <= 1e-9


def optimality_lower_bound(lam: Number, mu: Number, eps: Number, ell: int) -> OptimalityCertificate:
    """Certified lower bound on the occupation tail of the J-construction walk.

    Counts trajectories with exactly ``runs`` alternating visit runs whose
    in-W steps number exactly the tail threshold; with a := lam+mu-lam*mu
    and b := 1-mu+lam*mu the counted mass is

        C(k-1, r-1) C(ell-k-1, r-1) a^(k-r) b^(ell-k-r) (1-a)^r (1-b)^r,

    evaluated in log space.  The in-W count uses the tail threshold
    ceil(mu*ell*(1+eps)) so the counted event stays inside the tail; the
    run count floors x*ell.  Non-integer inputs are flagged ``floored``.
    """
    count_in, runs, a, b, floored = _optimality_counts(lam, mu, eps, ell)
    if count_in >= ell or runs > min(count_in, ell - count_in):
        return OptimalityCertificate(0.0, -math.inf, count_in, runs, floored, True)
    log_value = (
        _log_comb(count_in - 1, runs - 1)
        + _log_comb(ell - count_in - 1, runs - 1)
        + (count_in - runs) * math.log(float(a))
        + (ell - count_in - runs) * math.log(float(b))
        + runs * (math.log(1 - float(a)) + math.log(1 - float(b)))
    )
    return OptimalityCertificate(
        math.exp(log_value), log_value, count_in, runs, floored, False
    )


def optimality_lower_bound_exact(
    lam: Fraction, mu: Fraction, eps: Fraction, ell: int
) -> Fraction:
    """Exact rational evaluation of the same certificate (small ell)."""
    lam, mu, eps = Fraction(lam), Fraction(mu), Fraction(eps)
    count_in, runs, a, b, _ = _optimality_counts(lam, mu, eps, ell)
    if count_in >= ell or runs > min(count_in, ell - count_in):
        return Fraction(0)
    return (
        comb(count_in - 1, runs - 1)
        * comb(ell - count_in - 1, runs - 1)
        * a ** (count_in - runs)
        * b ** (ell - count_in - runs)
        * (1 - a) ** runs
        * (1 - b) ** runs
    )


def _log_comb(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


# ---------------------------------------------------------------------------
# test corpus helper and file I/O

def random_symmetric_stochastic(n: int, seed: int, mixes: int = 6) -> TransitionMatrix:
    """Random symmetric doubly stochastic matrix: a mixture of (P + P^T)/2."""
    rng = random.Random(seed)
    weights = [rng.random() for _ in range(mixes)]
    total = sum(weights)
    arr = np.zeros((n, n))
    for w in weights:
        perm = list(range(n))
        rng.shuffle(perm)
        mat = np.zeros((n, n))
        mat[range(n), perm] = 1.0
        arr += (w / total) * (mat + mat.T) / 2
    rows = tuple(tuple(float(v) for v in row) for row in arr)
    return TransitionMatrix(n, rows)


def _parse_entry(raw) -> Number:
    if isinstance(raw, str):
        return Fraction(raw)
    if isinstance(raw, int):
        return Fraction(raw)
    return float(raw)


def matrix_from_dict(obj: dict) -> TransitionMatrix:
    n = int(obj["n"])
    rows = tuple(tuple(_parse_entry(v) for v in row) for row in obj["rows"])
    return TransitionMatrix(n, rows)


def load_matrix(path: str) -> TransitionMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return matrix_from_dict(json.load(fh))


def load_walk_spec(path: str) -> WalkSpec:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    matrix = matrix_from_dict(obj)
    if "W" not in obj or "steps" not in obj:
        raise ValueError("walk spec file needs 'W' and 'steps'")
    return WalkSpec(matrix, tuple(sorted(int(v) for v in obj["W"])), int(obj["steps"]))


def save_matrix(matrix: TransitionMatrix, path: str, target=None, steps=None) -> None:
    obj: dict = {
        "n": matrix.n,
        "rows": [
            [str(Fraction(v)) if is_exact(v) else float(v) for v in row]
            for row in matrix.rows
        ],
    }
    if target is not None:
        obj["W"] = sorted(int(v) for v in target)
    if steps is not None:
        obj["steps"] = int(steps)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
