"""Deterministic random streams derived from one master seed.

Every consumer asks for a stream by a tuple of keys (``generation``,
``member``, a stage name, ...). The stream seed is a BLAKE2b hash of the
master seed and the keys, so streams are independent of the order in which
they are requested.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSpec:
    master_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.master_seed, (int, np.integer)):
            raise TypeError("master_seed must be an integer")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)

    def seed_for(self, *keys: object) -> int:
        h = hashlib.blake2b(digest_size=8)
        h.update(str(self.master_seed).encode())
        for k in keys:
            h.update(b"\x1f")
            h.update(str(k).encode())
        return int.from_bytes(h.digest(), "little")

    def stream(self, generation: int, member: int) -> random.Random:
        """Scalar stream for ``(generation, member)``; used by the GA."""
        return random.Random(self.seed_for("ga", generation, member))

    def py(self, *keys: object) -> random.Random:
        return random.Random(self.seed_for(*keys))

    def numpy(self, *keys: object) -> np.random.Generator:
        return np.random.default_rng(self.seed_for(*keys))

    def child(self, *keys: object) -> "RngSpec":
        """A new spec whose master seed is derived from this one."""
        return RngSpec(self.seed_for("child", *keys))


def as_rng(rng: RngSpec | int | None) -> RngSpec:
    if rng is None:
        return RngSpec(0)
    if isinstance(rng, RngSpec):
        return rng
    return RngSpec(int(rng))
