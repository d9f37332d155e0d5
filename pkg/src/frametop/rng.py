"""Seeded randomness.

All randomness flows from a 64-bit run seed combined with a task label through a
counter-based Philox generator, so parallel trials are reproducible regardless of
scheduling order.
"""
from __future__ import annotations

import zlib

import numpy as np

SeedLike = "int | np.random.Generator | None"


def derive_rng(seed: int, label: str = "") -> np.random.Generator:
    """Generator for `(seed, label)`; distinct labels give independent streams."""
    words = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF, zlib.crc32(label.encode())]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return derive_rng(0 if seed is None else seed)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_unitary(k: int, seed) -> np.ndarray:
    """Haar-distributed k x k unitary (QR of a Ginibre matrix with phase fix)."""
    rng = as_rng(seed)
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    q, r = np.linalg.qr(complex_gaussian(rng, (k, k)))
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph[np.newaxis, :]
