"""Finite distributions over nonnegative outcome vectors.

``ExactDistribution`` is the ground-truth substrate for every dominance
check: a finite support of (probability, outcome) pairs.  Probabilities
given as ``fractions.Fraction`` (or int) make every downstream oracle an
exact rational computation; float probabilities degrade gracefully to
float arithmetic with a 1e-12 normalization tolerance.

File format (JSON)::

    {"n": 4, "entries": [{"p": "1/16", "x": [0, 1, 0, 1]}, ...]}

Probabilities encoded as strings parse as exact rationals; plain numbers
stay floats (ints stay exact).
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

Number = Union[int, Fraction, float]

_FLOAT_TOL = 1e-12


def is_exact(x: Number) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class ExactDistribution:
    """Finite distribution over length-``n`` vectors of nonnegative reals."""

    n: int
    support: tuple[tuple[Number, tuple[Number, ...]], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("coordinate count n must be >= 1")
        if not self.support:
            raise ValueError("malformed input: empty support")
        total: Number = 0
        exact = True
        for prob, outcome in self.support:
            if len(outcome) != self.n:
                raise ValueError(f"outcome {outcome!r} does not have length {self.n}")
            if prob < 0:
                raise ValueError("probabilities must be nonnegative")
            if any(v < 0 for v in outcome):
                raise ValueError("outcome entries must be nonnegative")
            exact = exact and is_exact(prob)
            total = total + prob
        if exact:
            if total != 1:
                raise ValueError(f"exact probabilities sum to {total}, not 1")
        elif abs(float(total) - 1.0) > _FLOAT_TOL:
            raise ValueError(f"probabilities sum to {float(total)}, not 1 within {_FLOAT_TOL}")

    @property
    def is_exact(self) -> bool:
        return all(
            is_exact(p) and all(is_exact(v) for v in x) for p, x in self.support
        )

    @property
    def is_binary(self) -> bool:
        return all(v == 0 or v == 1 for _, x in self.support for v in x)


@dataclass(frozen=True)
class SampledDistribution:
    """Distribution given by a deterministic seed -> outcome sampler."""

    n: int
    sampler: Callable[[int], tuple[Number, ...]]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("coordinate count n must be >= 1")


# ---------------------------------------------------------------------------
# constructors

def point_mass(outcome: Sequence[Number]) -> ExactDistribution:
    return ExactDistribution(len(outcome), ((Fraction(1), tuple(outcome)),))


def product_bernoulli(n: int, p: Number) -> ExactDistribution:
    """n independent {0,1} coordinates, each 1 with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    q = 1 - p
    entries = []
    for bits in itertools.product((0, 1), repeat=n):
        ones = sum(bits)
        entries.append((p**ones * q ** (n - ones), bits))
    return ExactDistribution(n, tuple(entries))


def iid_fair_coins(n: int) -> ExactDistribution:
    return product_bernoulli(n, Fraction(1, 2))


def all_equal_coins(n: int, p: Number) -> ExactDistribution:
    """All n coordinates equal a single coin that is 1 with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return ExactDistribution(n, ((1 - p, (0,) * n), (p, (1,) * n)))


def fixed_ones_uniform(n: int, k: int) -> ExactDistribution:
    """Uniform over {0,1}^n vectors with exactly k ones."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    combos = list(itertools.combinations(range(n), k))
    w = Fraction(1, len(combos))
    entries = []
    for combo in combos:
        x = [0] * n
        for i in combo:
            x[i] = 1
        entries.append((w, tuple(x)))
    return ExactDistribution(n, tuple(entries))


def independent_blocks(*parts: ExactDistribution) -> ExactDistribution:
    """Concatenate independent distributions coordinate-wise."""
    if not parts:
        raise ValueError("need at least one block")
    n = sum(d.n for d in parts)
    entries = [(Fraction(1), ())]
    for d in parts:
        entries = [
            (p * q, x + y) for p, x in entries for q, y in d.support
        ]
    return ExactDistribution(n, tuple(entries))


def sampled_bernoulli(n: int, p: float) -> SampledDistribution:
    """Seeded i.i.d. {0,1} sampler with success probability p."""
    pf = float(p)

    def sample(seed: int) -> tuple[int, ...]:
        rng = random.Random(seed)
        return tuple(1 if rng.random() < pf else 0 for _ in range(n))

    return SampledDistribution(n, sample)


# ---------------------------------------------------------------------------
# JSON interchange

def _parse_probability(raw) -> Number:
    if isinstance(raw, str):
        return Fraction(raw)
    if isinstance(raw, bool):
        raise ValueError(f"invalid probability {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    raise ValueError(f"invalid probability {raw!r}")


def distribution_to_dict(dist: ExactDistribution) -> dict:
    entries = []
    for p, x in dist.support:
        entries.append(
            {
                "p": str(Fraction(p)) if is_exact(p) else float(p),
                "x": [v if isinstance(v, int) else float(v) for v in x],
            }
        )
    return {"n": dist.n, "entries": entries}


def distribution_from_dict(obj: dict) -> ExactDistribution:
    try:
        n = int(obj["n"])
        raw_entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed distribution object: {exc}") from exc
    entries = []
    for entry in raw_entries:
        p = _parse_probability(entry["p"])
        x = tuple(entry["x"])
        entries.append((p, x))
    return ExactDistribution(n, tuple(entries))


def save_distribution(dist: ExactDistribution, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(distribution_to_dict(dist), fh)


def load_distribution(path: str) -> ExactDistribution:
    with open(path, "r", encoding="utf-8") as fh:
        return distribution_from_dict(json.load(fh))
