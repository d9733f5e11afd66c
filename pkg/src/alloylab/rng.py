"""Deterministic random streams keyed by (seed, site) or (seed, trial).

Every Monte Carlo quantity in this package is a pure function of its seed:
per-site draws use a stream derived from the site coordinates, per-trial
draws use a stream derived from the trial index.  Results are therefore
independent of evaluation order and of how work is distributed over threads.
"""

from __future__ import annotations

import numpy as np

__all__ = ["site_stream", "trial_stream", "zigzag"]


def zigzag(n: int) -> int:
    """Map an integer to a non-negative integer, injectively (0,-1,1,-2,2 -> 0,1,2,3,4)."""
    return 2 * n if n >= 0 else -2 * n - 1


def site_stream(seed: int, site: tuple[int, ...]) -> np.random.Generator:
    """Generator keyed by (seed, site); identical arguments give identical streams."""
    # leading 0 tags site streams, keeping them disjoint from trial streams
    entropy = [np.uint64(zigzag(int(seed))), np.uint64(0), np.uint64(len(site))]
    entropy += [np.uint64(zigzag(int(c))) for c in site]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Generator keyed by (seed, trial index), for independent MC trials."""
    # the constant 1 tags trial streams so they never collide with site streams
    entropy = [np.uint64(zigzag(int(seed))), np.uint64(1), np.uint64(trial)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
