"""Hashed bag-of-words tokenizer."""

from __future__ import annotations

import re

from ..hashing import stable_token_hash

VOCAB_SIZE = 4096
_SPLIT = re.compile(r"[^a-z0-9]+")


def tokenize(text: str, vocab_size: int = VOCAB_SIZE) -> list:
    """Lowercase, split on non-alphanumeric runs, hash each token into a bucket."""
    return [
        stable_token_hash(tok) % vocab_size
        for tok in _SPLIT.split(text.lower())
        if tok
    ]
