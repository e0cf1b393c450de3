"""
Seed derivation helpers.

A single master seed fans out to independent, reproducible seeds for every
pipeline stage and every per-column fit.
"""

import hashlib


def derive_seed(master_seed: int, label: str) -> int:
    """
    Derive a stable 32-bit seed from a master seed and a label.

    Args:
        master_seed: Seed given by the user
        label: Stage or column name, e.g. "kmeans" or "column-7"

    Returns:
        Non-negative integer below 2**32
    """
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).hexdigest()
    return int(digest[:8], 16)
