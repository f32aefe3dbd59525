"""Monte-Carlo engine: seeding, estimation, suite runner and CLI."""

from .estimate import Estimate, EstimateError, MomentAccumulator, accumulate, effective_count, estimate
from .seeding import GENERATOR_ID, NORMAL_METHOD, derive_seed, derive_seeds

__all__ = [
    "Estimate",
    "EstimateError",
    "MomentAccumulator",
    "accumulate",
    "effective_count",
    "estimate",
    "GENERATOR_ID",
    "NORMAL_METHOD",
    "derive_seed",
    "derive_seeds",
]
