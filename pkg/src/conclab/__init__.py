"""conclab: tail bounds with exact ground-truth oracles at desk scale."""

from .distributions import (
    ExactDistribution,
    SampledDistribution,
    all_equal_coins,
    iid_fair_coins,
    load_distribution,
    point_mass,
    product_bernoulli,
    save_distribution,
)
from .errors import ResourceLimitError
from .rng import DEFAULT_SEED, derive_seed, splitmix64

__all__ = [
    "ExactDistribution",
    "SampledDistribution",
    "ResourceLimitError",
    "DEFAULT_SEED",
    "derive_seed",
    "splitmix64",
    "all_equal_coins",
    "iid_fair_coins",
    "load_distribution",
    "point_mass",
    "product_bernoulli",
    "save_distribution",
]

__version__ = "0.1.0"
