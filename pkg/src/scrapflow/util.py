"""Shared helpers: labeled RNG streams, hashing, rounding."""
from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np


def stream_key(label: str) -> int:
    """Stable 32-bit key for a stream label (endianness- and version-independent)."""
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:4], "little")


def derive_seed_sequence(master_seed: int, *labels: str) -> np.random.SeedSequence:
    """Deterministic child SeedSequence for a named substream of a master seed.

    Streams for distinct label tuples are statistically independent, and the
    mapping does not depend on the order in which streams are created, so
    stages and per-country work can run in parallel without changing results.
    """
    return np.random.SeedSequence(master_seed, spawn_key=tuple(stream_key(lab) for lab in labels))


def derive_rng(master_seed: int, *labels: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(master_seed, *labels)))


def derive_seed(master_seed: int, *labels: str) -> int:
    """Deterministic integer seed for a named substream (for APIs taking ints)."""
    return int(derive_seed_sequence(master_seed, *labels).generate_state(1)[0])


def round_half_up(x: float) -> int:
    """Round to nearest integer, halves away from zero (2.5 -> 3, not banker's 2)."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def sha256_file(path: Path | str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
