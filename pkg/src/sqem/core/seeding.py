"""Labelled seed derivation from a single root seed."""

import hashlib

import numpy as np


def derive_seed(root: int, *labels) -> int:
    """Deterministically derive a 63-bit child seed from ``root`` and labels."""
    text = "|".join([str(int(root))] + [str(x) for x in labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
