"""Exact linear algebra over a prime field, for rank decisions float64 cannot make.

Residues live in int64 arrays. The prime stays below 2**31 so a product of
two residues plus one more residue never leaves int64.
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from p6_ia.channel import SystemConfig, entry_generator
from p6_ia.enums import ChannelVariation
from p6_ia.errors import ConfigError, ResampleAdvisedError

LOGGER = logging.getLogger(__name__)

FIELD_PRIME = 2_147_483_647
_PRIME_LIMIT = 1 << 31
_FIELD_SALT = 0xF1E1D


def _require_prime_size(prime: int) -> None:
    if not 2 < prime < _PRIME_LIMIT:
        raise ConfigError(f"prime must lie in (2, 2**31), got {prime}")


def mod_pow(values: np.ndarray, exponent: int, prime: int = FIELD_PRIME) -> np.ndarray:
    """Return values**exponent mod prime elementwise by repeated squaring."""
    _require_prime_size(prime)
    if exponent < 0:
        raise ValueError(f"exponent must be non-negative, got {exponent}")
    base = np.asarray(values, dtype=np.int64) % prime
    result = np.ones_like(base)
    while exponent:
        if exponent & 1:
            result = result * base % prime
        base = base * base % prime
        exponent >>= 1
    return result


def mod_inverse(values: np.ndarray, prime: int = FIELD_PRIME) -> np.ndarray:
    """Return the elementwise inverse mod prime (Fermat); zero has none."""
    residues = np.asarray(values, dtype=np.int64) % prime
    if not np.all(residues):
        raise ZeroDivisionError("zero has no inverse modulo a prime")
    return mod_pow(residues, prime - 2, prime)


def sample_field_channels(config: SystemConfig, slots: int, prime: int = FIELD_PRIME) -> np.ndarray:
    """Draw H[k, j](t) with entries uniform over the nonzero residues, shape (T, K, K, N, M).

    Uses the same counter-based (k, j, t) streams as the complex sampler under
    its own salt; constant channels replicate slot 0.
    """
    _require_prime_size(prime)
    if slots < 1:
        raise ConfigError(f"slots must be at least 1, got {slots}")
    K, N, M = config.K, config.N, config.M
    sample_slots = 1 if config.variation is ChannelVariation.CONSTANT else slots
    drawn = np.empty((sample_slots, K, K, N, M), dtype=np.int64)
    for t in range(sample_slots):
        for k in range(K):
            for j in range(K):
                rng = entry_generator(config.seed, k, j, t, salt=_FIELD_SALT)
                drawn[t, k, j] = rng.integers(1, prime, size=(N, M), dtype=np.int64)
    if sample_slots != slots:
        drawn = np.repeat(drawn, slots, axis=0)
    LOGGER.debug("Sampled field channels", extra={"K": K, "N": N, "M": M, "slots": slots, "prime": prime})
    return drawn


def field_solve(stack: np.ndarray, rhs: np.ndarray, prime: int = FIELD_PRIME) -> np.ndarray:
    """Solve stack[b] x[b] = rhs[b] for every batch entry b by Gauss-Jordan elimination.

    ``stack`` is (B, R, R) and ``rhs`` is (B, R, C). A zero pivot in any
    batch entry is a degenerate draw and asks for a resample.
    """
    _require_prime_size(prime)
    size = stack.shape[1]
    augmented = np.concatenate([np.asarray(stack, dtype=np.int64), np.asarray(rhs, dtype=np.int64)], axis=2) % prime
    for col in range(size):
        pivots = augmented[:, col, col]
        if not np.all(pivots):
            zeros = np.flatnonzero(pivots == 0)
            raise ResampleAdvisedError(f"stack is singular modulo {prime} at batch entries {zeros[:5].tolist()}")
        augmented[:, col, :] = augmented[:, col, :] * mod_inverse(pivots, prime)[:, np.newaxis] % prime
        for row in range(size):
            if row == col:
                continue
            factors = augmented[:, row, col][:, np.newaxis]
            augmented[:, row, :] = (augmented[:, row, :] - factors * augmented[:, col, :]) % prime
    return augmented[:, :, size:]


def pivot_columns(matrix: np.ndarray, prime: int = FIELD_PRIME) -> Tuple[int, ...]:
    """Return the pivot columns of the row echelon form of ``matrix`` modulo ``prime``.

    The number of pivots among the first c columns is the rank of those c
    columns, so one elimination ranks every leading block at once.
    """
    _require_prime_size(prime)
    work = np.array(matrix, dtype=np.int64) % prime
    rows, cols = work.shape
    pivots = []
    for col in range(cols):
        rank = len(pivots)
        if rank == rows:
            break
        candidates = np.flatnonzero(work[rank:, col])
        if candidates.size == 0:
            continue
        pivot = rank + int(candidates[0])
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        inverse = pow(int(work[rank, col]), prime - 2, prime)
        work[rank, col:] = work[rank, col:] * inverse % prime
        if rank + 1 < rows:
            factors = work[rank + 1 :, col]
            work[rank + 1 :, col:] = (work[rank + 1 :, col:] - np.outer(factors, work[rank, col:])) % prime
        pivots.append(col)
    return tuple(pivots)


def field_rank(matrix: np.ndarray, prime: int = FIELD_PRIME) -> int:
    """Return the exact rank of ``matrix`` modulo ``prime``."""
    if matrix.size == 0:
        return 0
    return len(pivot_columns(matrix, prime))


__all__ = [
    "FIELD_PRIME",
    "field_rank",
    "field_solve",
    "mod_inverse",
    "mod_pow",
    "pivot_columns",
    "sample_field_channels",
]
