"""Per-record RNG derivation so parallel and serial pipeline runs agree."""

from __future__ import annotations

import hashlib
import random

__all__ = ["record_rng"]


def record_rng(seed: int, record_id: str) -> random.Random:
    """Independent RNG stream for one record under a global seed.

    Hashing (seed, record id) keeps streams uncorrelated and independent
    of processing order; callers should prefix record_id with a purpose
    tag (e.g. "decoy:") so different transforms on the same record do
    not share a stream.
    """
    digest = hashlib.sha256(f"{seed}:{record_id}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))
