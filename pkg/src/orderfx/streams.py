"""Counter-based uniform streams with fixed per-replicate budgets.

Replicate ``k`` of a run owns a contiguous, block-aligned window of a Philox
counter space, so its draws can be regenerated in isolation and Monte-Carlo
results cannot depend on how replicates are batched across workers.

Layout
------
A logical stream is Philox keyed by ``SeedSequence(seed, spawn_key=(salt,))``.
numpy's Philox advances in blocks of 4 uint64 outputs, and
``Generator.random()`` consumes exactly one uint64 per double, so budgets are
padded up to whole blocks and replicate ``k`` starts at block
``k * blocks_for(budget)``.

Salts: ``SAMPLE_SALT`` for model draws, ``POSTERIOR_SALT`` for posterior draws
inside predictors.  Keeping them on separate streams means predictors that
consume extra randomness never perturb the common random numbers shared by
every predictor evaluated on the same scenario seed.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SAMPLE_SALT", "POSTERIOR_SALT", "blocks_for", "stream", "replicate_stream"]

SAMPLE_SALT = 0
POSTERIOR_SALT = 1

_PHILOX_BLOCK = 4  # uint64 outputs (= uniform doubles) per counter increment
_SEED_MASK = 2**64 - 1


def blocks_for(budget: int) -> int:
    """Philox blocks reserved for a replicate consuming ``budget`` uniforms."""
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    return (budget + _PHILOX_BLOCK - 1) // _PHILOX_BLOCK


def stream(seed: int, salt: int, block_offset: int = 0) -> np.random.Generator:
    """Generator over the (seed, salt) stream, positioned at ``block_offset``."""
    ss = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK, spawn_key=(int(salt),))
    bg = np.random.Philox(ss)
    if block_offset:
        bg.advance(int(block_offset))
    return np.random.Generator(bg)


def replicate_stream(seed: int, salt: int, replicate: int, budget: int) -> np.random.Generator:
    """Stream positioned at the start of replicate ``replicate``'s window."""
    if replicate < 0:
        raise ValueError(f"replicate must be >= 0, got {replicate}")
    return stream(seed, salt, replicate * blocks_for(budget))
