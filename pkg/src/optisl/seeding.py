"""Seed discipline: one run seed fans out into named substreams.

Every source of randomness in the artifact draws from one of these
streams, so a (config, seed) pair pins down every sampled quantity.
"""

from __future__ import annotations

import numpy as np

STREAM_NAMES = (
    "snapshot",
    "congestion",
    "rl-init",
    "rl-explore",
    "replay",
    "heldout",
)


def substreams(seed: int) -> dict[str, np.random.SeedSequence]:
    """Named child SeedSequences derived from the run seed."""
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(STREAM_NAMES))
    return dict(zip(STREAM_NAMES, children))


def generator(stream: np.random.SeedSequence) -> np.random.Generator:
    return np.random.default_rng(stream)
