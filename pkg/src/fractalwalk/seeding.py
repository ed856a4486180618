"""Deterministic seed derivation.

Every stochastic entry point accepts either an explicit ``numpy.random.Generator``
or derives one from an integer seed.  Sweep cells derive their seeds by hashing
the master seed together with the cell coordinates, so adding or reordering
cells never perturbs the randomness of existing cells.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["make_rng", "derive_seed", "derive_rng"]


def make_rng(seed_or_rng: int | np.random.Generator | None) -> np.random.Generator:
    """Return a Generator, passing through one that is already constructed."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def derive_seed(master_seed: int, *coordinates: object) -> int:
    """Hash ``master_seed`` with a coordinate tuple into a stable 64-bit seed.

    Coordinates are rendered with ``repr`` so that e.g. ``0.1`` and ``"0.1"``
    stay distinct.  The digest is independent of the order in which other
    cells are enumerated.
    """
    key = "|".join([str(int(master_seed))] + [repr(c) for c in coordinates])
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(master_seed: int, *coordinates: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *coordinates))
