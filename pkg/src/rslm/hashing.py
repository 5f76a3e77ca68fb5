"""Deterministic hashing helpers shared across the pipeline.

Everything here must be stable across processes and platforms: per-frame
seeds, token bucketing, config hashes, and artifact integrity checks all
flow through these functions.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 mixer; maps any 64-bit int to a well-mixed one."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def mix_seed(*parts: int) -> int:
    """Combine integer seed components into one 64-bit seed, order-sensitively."""
    acc = 0x243F6A8885A308D3
    for p in parts:
        acc = splitmix64((acc ^ (p & _MASK64)) & _MASK64)
    return acc


def stable_token_hash(token: str) -> int:
    """Stable 64-bit hash of a string (not Python's randomized hash())."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def canonical_json(obj) -> str:
    """Key-order-independent JSON serialization used for config hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj, indent=2) -> None:
    Path(path).write_text(json.dumps(obj, indent=indent, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
