"""Deterministic seed derivation.

Every randomized routine in the package takes an explicit integer seed.
Sub-tasks (rounds of a sign search, starts of an optimizer, cells of a
sweep) derive their own seeds by hashing the master seed together with the
task coordinates, so results are identical across platforms, re-runs and
parallel schedules.

The derivation is a fixed algorithm: BLAKE2b-64 over a type-tagged
little-endian encoding of the coordinates.
"""

import hashlib
import struct

import numpy as np


def _encode(part) -> bytes:
    if isinstance(part, (bool, np.bool_)):
        part = int(part)
    if isinstance(part, (int, np.integer)):
        return b"i" + int(part).to_bytes(16, "little", signed=True)
    if isinstance(part, float):
        return b"f" + struct.pack("<d", part)
    if isinstance(part, str):
        raw = part.encode("utf-8")
        return b"s" + len(raw).to_bytes(4, "little") + raw
    raise TypeError(f"cannot hash seed coordinate of type {type(part).__name__}")


def derive_seed(master: int, *coords) -> int:
    """Stable 64-bit seed for the sub-task identified by ``coords``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(_encode(master))
    for part in coords:
        h.update(_encode(part))
    return int.from_bytes(h.digest(), "little")


def rng_for(master: int, *coords) -> np.random.Generator:
    """NumPy generator seeded from ``derive_seed(master, *coords)``."""
    return np.random.default_rng(derive_seed(master, *coords))
