"""Deterministic random-stream derivation.

Every stochastic routine in the package draws from a counter-based Philox
generator keyed by ``(seed, *stream)``.  Distinct stream tuples give
statistically independent streams, and the mapping is pure, so trials, time
points and restarts can run in any order (or concurrently) with identical
results.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ValidationError

_MAX_SEED = 2**64


def check_seed(seed) -> int:
    if isinstance(seed, (bool, float)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ValidationError(f"seed must be an integer, got {seed!r}") from None
    if not 0 <= seed < _MAX_SEED:
        raise ValidationError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def derive_rng(seed, *stream: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``(seed, *stream)``."""
    seed = check_seed(seed)
    entropy = [seed] + [int(s) for s in stream]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed, *stream: int) -> int:
    """A 64-bit integer seed derived from the sub-stream key (for APIs that want one)."""
    seed = check_seed(seed)
    entropy = [seed] + [int(s) for s in stream]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
