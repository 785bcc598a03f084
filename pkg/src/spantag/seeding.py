"""Deterministic derivation of per-purpose seeds from one master seed.

Every source of randomness in the toolkit (weight init, batch shuffling,
fold assignment, hash embeddings, fixture generation) draws its own seed
via ``derive_seed(master, purpose)``. The scheme is frozen: the low 63
bits of ``blake2b(b"{master}:{purpose}")``. One master seed therefore
pins an entire run, and changing one consumer's purpose string cannot
perturb another's stream.
"""

from __future__ import annotations

import hashlib


def derive_seed(master: int, purpose: str) -> int:
    payload = f"{master}:{purpose}".encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1
