"""
Seeded, order-independent random substreams.

Every random decision of a run draws from a generator derived from the master
seed and a key describing what the draws are for (a transition, an event
position, ...). The same key always yields the same stream, regardless of
which other streams were used before or on which thread.
"""
import hashlib
from typing import Hashable, Tuple

import numpy as np

from anonymization.exceptions import PrivacyConfigError

MAX_SEED = 2**63 - 1


class RandomStreams:
    """Factory of numpy generators keyed by (purpose, key...)."""

    def __init__(self, seed: int):
        if not 0 <= seed <= MAX_SEED:
            raise PrivacyConfigError(f"Seed must be between 0 and {MAX_SEED}, got {seed}", field='seed')
        self.seed = int(seed)

    def __repr__(self) -> str:
        return f"RandomStreams(seed={self.seed})"

    @staticmethod
    def spawn_key(purpose: str, *key: Hashable) -> Tuple[int, ...]:
        digest = hashlib.blake2b(repr((purpose,) + key).encode('utf-8'), digest_size=16).digest()
        return tuple(int.from_bytes(digest[i:i + 4], 'little') for i in range(0, len(digest), 4))

    def stream(self, purpose: str, *key: Hashable) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key(purpose, *key))
        return np.random.Generator(np.random.PCG64(sequence))
