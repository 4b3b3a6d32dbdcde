"""Alignment over constant channels: the eigenvector scheme, the extension chain and zero forcing.

Both aligned schemes work with R+2 users, M transmit and RM receive antennas.
At each receiver one transmitter's contribution is written in the basis of
the R other interferers by a T matrix, T = [H[k, u1] ... H[k, uR]]^-1 H[k, a],
and the precoder blocks of the stacked users are chosen as the matching
blocks of T times the aligned precoder.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eig, solve

from p6_ia.channel import ChannelSet, ExtendedChannel, draw_complex, entry_generator, extend_channel
from p6_ia.enums import ChannelVariation, Scheme
from p6_ia.errors import ConfigError, ResampleAdvisedError
from p6_ia.linalg import max_principal_angle, numeric_rank, unit_columns
from p6_ia.models import PrecoderSet, theorem4_index_map, theorem5_index_map

LOGGER = logging.getLogger(__name__)

DEFAULT_CONDITION_LIMIT = 1e8
MAX_PADDING_ATTEMPTS = 8
ZERO_FORCING_FALLBACK = "zero_forcing_fallback"
_PADDING_SALT = 2
_SEED_SALT = 3
_ZERO_FLOOR = 1e-12

BlockKey = Tuple[int, int]


def _require_constant(channels: ChannelSet, K: int, M: int, N: int) -> None:
    cfg = channels.config
    if cfg.variation is not ChannelVariation.CONSTANT:
        raise ConfigError("constant-channel schemes need variation=constant")
    if (cfg.K, cfg.M, cfg.N) != (K, M, N):
        raise ConfigError(f"expected K={K}, M={M}, N={N}; channel has K={cfg.K}, M={cfg.M}, N={cfg.N}")


def _distribute_last_first(allocation: List[int], surplus: int, cap: int) -> None:
    """Hand out surplus streams one at a time from the last user down."""
    if surplus > sum(cap - streams for streams in allocation):
        raise ValueError("surplus exceeds the per-user caps")
    while surplus > 0:
        for user in reversed(range(len(allocation))):
            if surplus == 0:
                break
            if allocation[user] < cap:
                allocation[user] += 1
                surplus -= 1


def eigen_block_count(R: int, M: int) -> int:
    """Return f = floor(RM / (R^2 + 2R - 1))."""
    return (R * M) // (R * R + 2 * R - 1)


def extension_length(R: int, M: int) -> int:
    """Return E = ceil((R + 2) / M)."""
    return math.ceil((R + 2) / M)


def allocate_dof_theorem4(R: int, M: int) -> Tuple[int, ...]:
    """Allocate RM + f streams, each user between R*f and M."""
    if R < 2:
        raise ConfigError(f"R must be at least 2, got {R}")
    if M < R + 2:
        raise ConfigError(f"the eigenvector scheme needs M >= R + 2, got M={M}, R={R}")
    f = eigen_block_count(R, M)
    allocation = [R * f] * (R + 2)
    total = R * M + f
    if not sum(allocation) <= total <= (R + 2) * M:
        raise AssertionError(f"infeasible allocation for R={R}, M={M}")
    _distribute_last_first(allocation, total - sum(allocation), cap=M)
    return tuple(allocation)


def allocate_dof_theorem5(R: int, M: int, extra_user: int = 2) -> Tuple[int, ...]:
    """Allocate RME + 1 streams: R each, R+1 for ``extra_user``, padding under the cap ME."""
    if R < 2:
        raise ConfigError(f"R must be at least 2, got {R}")
    if not 1 < M < R + 2:
        raise ConfigError(f"the extension chain needs 1 < M < R + 2, got M={M}, R={R}")
    E = extension_length(R, M)
    allocation = [R] * (R + 2)
    allocation[extra_user - 1] = R + 1
    _distribute_last_first(allocation, R * M * E + 1 - sum(allocation), cap=M * E)
    return tuple(allocation)


def _t_blocks(
    ext: ExtendedChannel,
    receiver: int,
    stack_users: Sequence[int],
    aligned_user: int,
    condition_limit: float,
) -> List[np.ndarray]:
    """Return the blocks of [H[k, u1] ... H[k, uR]]^-1 H[k, a], one per stacked user."""
    stack = ext.stacked(receiver, stack_users)
    condition = float(np.linalg.cond(stack))
    if condition > condition_limit:
        raise ResampleAdvisedError(f"receiver {receiver} stack has condition number {condition:.3e}")
    t_matrix = solve(stack, ext.matrix(receiver, aligned_user))
    width = ext.cols
    return [t_matrix[b * width : (b + 1) * width] for b in range(len(stack_users))]


def _eigen_seed(t1: np.ndarray, t2: np.ndarray, f: int, condition_limit: float) -> np.ndarray:
    """Return f eigenvectors of t2^-1 t1, largest |eigenvalue| first, ties by phase then index."""
    values, vectors = eig(solve(t2, t1))
    if np.linalg.cond(vectors) > condition_limit:
        raise ResampleAdvisedError("eigenvector matrix is (nearly) defective")
    order = sorted(
        range(len(values)),
        key=lambda index: (-round(abs(values[index]), 12), round(float(np.angle(values[index])), 12), index),
    )
    return vectors[:, order[:f]]


def _assign(blocks: Dict[BlockKey, np.ndarray], key: BlockKey, value: np.ndarray) -> None:
    if key in blocks:
        raise AssertionError(f"precoder block {key} assigned twice")
    blocks[key] = value


def _pad_precoder(
    columns: np.ndarray,
    streams: int,
    channels: ChannelSet,
    user: int,
    require_nonzero: bool,
) -> np.ndarray:
    """Append random columns up to ``streams`` and check full column rank, redrawing on failure."""
    cfg = channels.config
    missing = streams - columns.shape[1]
    for attempt in range(MAX_PADDING_ATTEMPTS):
        rng = entry_generator(cfg.seed, user, attempt, 0, salt=_PADDING_SALT)
        padding = draw_complex(rng, (columns.shape[0], missing), cfg.magnitude_bounds)
        candidate = unit_columns(np.hstack([columns, padding]))
        if numeric_rank(candidate) != streams:
            LOGGER.warning("Precoder rank deficient, redrawing", extra={"user": user, "attempt": attempt})
            continue
        if require_nonzero and float(np.min(np.abs(candidate))) < _ZERO_FLOOR:
            LOGGER.warning("Precoder has a zero entry, redrawing", extra={"user": user, "attempt": attempt})
            continue
        return candidate
    raise ResampleAdvisedError(f"user {user} precoder failed after {MAX_PADDING_ATTEMPTS} draws")


def _theorem4_precoders(
    channels: ChannelSet,
    R: int,
    M: int,
    scheme: Scheme,
    condition_limit: float,
) -> PrecoderSet:
    K = R + 2
    _require_constant(channels, K=K, M=M, N=R * M)
    allocation = allocate_dof_theorem4(R, M)
    f = eigen_block_count(R, M)
    ext = extend_channel(channels, 1)

    t1 = _t_blocks(ext, 1, range(2, R + 2), K, condition_limit)
    t2 = _t_blocks(ext, 2, [1, *range(3, R + 2)], K, condition_limit)
    seed = _eigen_seed(t1[R - 1], t2[R - 1], f, condition_limit)
    angle = max_principal_angle(t1[R - 1] @ seed, t2[R - 1] @ seed)

    blocks: Dict[BlockKey, np.ndarray] = {}
    _assign(blocks, (K, 1), seed)
    for b in range(1, R):
        _assign(blocks, (b + 1, 1), t1[b - 1] @ seed)
    _assign(blocks, (R + 1, 1), t1[R - 1] @ seed)
    _assign(blocks, (1, 1), t2[0] @ seed)
    for b in range(2, R):
        _assign(blocks, (b + 1, 2), t2[b - 1] @ seed)

    index_map = theorem4_index_map(R)
    for j in range(3, R + 2):
        stack = [user for user in range(1, K + 1) if user not in (j, j - 1)]
        tj = _t_blocks(ext, j, stack, j - 1, condition_limit)
        for b, user in enumerate(stack):
            _assign(blocks, (user, index_map(user, j)), tj[b] @ blocks[(j - 1, 1)])

    stack = list(range(2, R + 2))
    t_last = _t_blocks(ext, K, stack, 1, condition_limit)
    for b, user in enumerate(stack):
        _assign(blocks, (user, R), t_last[b] @ blocks[(1, 1)])

    precoders = []
    for user in range(1, K + 1):
        aligned = np.hstack([blocks[(user, b)] for b in range(1, R + 1)])
        precoders.append(_pad_precoder(aligned, allocation[user - 1], channels, user, require_nonzero=False))
    LOGGER.info(
        "Built eigenvector alignment",
        extra={"scheme": scheme.value, "R": R, "M": M, "allocation": allocation, "eigen_angle": angle},
    )
    return PrecoderSet(
        precoders=tuple(precoders),
        allocation=allocation,
        scheme=scheme,
        channel=ext,
        diagnostics={"eigen_principal_angle": angle, "eigen_blocks": float(f)},
    )


def build_theorem4(
    channels: ChannelSet,
    R: int,
    M: int,
    allow_fallback: bool = False,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> PrecoderSet:
    """Eigenvector alignment for R+2 users with M >= R+2.

    With ``allow_fallback`` and M < R+2 the first R users are served by zero
    forcing instead and the result carries the fallback flag.
    """
    if M < R + 2 and allow_fallback:
        LOGGER.warning("Eigenvector scheme unavailable, using zero forcing", extra={"R": R, "M": M})
        fallback = build_zero_forcing(channels, R)
        return PrecoderSet(
            precoders=fallback.precoders,
            allocation=fallback.allocation,
            scheme=fallback.scheme,
            channel=fallback.channel,
            flags=(ZERO_FORCING_FALLBACK,),
        )
    return _theorem4_precoders(channels, R, M, Scheme.THEOREM4, condition_limit)


def build_example1(channels: ChannelSet, condition_limit: float = DEFAULT_CONDITION_LIMIT) -> PrecoderSet:
    """Four users with 4 transmit and 8 receive antennas, 9 streams: (2, 2, 2, 3)."""
    return _theorem4_precoders(channels, 2, 4, Scheme.EXAMPLE1, condition_limit)


def _chain_precoders(
    channels: ChannelSet,
    R: int,
    M: int,
    roles: Tuple[int, ...],
    scheme: Scheme,
    condition_limit: float,
) -> PrecoderSet:
    """Propagate one random seed vector through the receivers' T matrices.

    ``roles[r - 1]`` is the user playing role r; role 2 holds the seed and the
    extra stream. Receiver role 1 aligns role 2, receiver role j (2..R+1)
    aligns role j+1, receiver role R+2 aligns role 1.
    """
    K = R + 2
    _require_constant(channels, K=K, M=M, N=R * M)
    E = extension_length(R, M)
    ext = extend_channel(channels, E)
    allocation = allocate_dof_theorem5(R, M, extra_user=roles[1])
    index_map = theorem5_index_map(R)
    cfg = channels.config

    equations: List[Tuple[int, int, List[int], List[BlockKey]]] = []
    stack = list(range(3, K + 1))
    equations.append((1, 2, stack, [(role, 1) for role in stack]))
    for j in range(2, R + 2):
        stack = [role for role in range(1, K + 1) if role not in (j, j + 1)]
        equations.append((j, j + 1, stack, [(role, index_map(role, j)) for role in stack]))
    stack = list(range(2, R + 2))
    equations.append((K, 1, stack, [(2, R + 1)] + [(role, R) for role in range(3, R + 2)]))

    rng = entry_generator(cfg.seed, 0, 0, 0, salt=_SEED_SALT)
    vectors: Dict[BlockKey, np.ndarray] = {(2, 1): draw_complex(rng, (ext.cols,), cfg.magnitude_bounds)}
    residual = 0.0
    for receiver_role, aligned_role, stack_roles, targets in equations:
        receiver = roles[receiver_role - 1]
        stack_users = [roles[role - 1] for role in stack_roles]
        t_blocks = _t_blocks(ext, receiver, stack_users, roles[aligned_role - 1], condition_limit)
        source = vectors[(aligned_role, 1)]
        outputs = [block @ source for block in t_blocks]
        for key, output in zip(targets, outputs):
            _assign(vectors, key, output)
        aligned_image = ext.matrix(receiver, roles[aligned_role - 1]) @ source
        rebuilt = sum(ext.matrix(receiver, user) @ output for user, output in zip(stack_users, outputs))
        scale = np.linalg.norm(ext.matrix(receiver, roles[aligned_role - 1]), 2) * np.linalg.norm(source)
        residual = max(residual, float(np.linalg.norm(aligned_image - rebuilt) / scale))

    precoders: List[Optional[np.ndarray]] = [None] * K
    for role in range(1, K + 1):
        user = roles[role - 1]
        count = R + 1 if role == 2 else R
        chain = np.column_stack([vectors[(role, b)] for b in range(1, count + 1)])
        precoders[user - 1] = _pad_precoder(chain, allocation[user - 1], channels, user, require_nonzero=True)
    LOGGER.info(
        "Built extension chain alignment",
        extra={"scheme": scheme.value, "R": R, "M": M, "E": E, "allocation": allocation, "residual": residual},
    )
    flags: Tuple[str, ...] = ("extension_exceeds_antennas",) if E > M else ()
    return PrecoderSet(
        precoders=tuple(p for p in precoders if p is not None),
        allocation=allocation,
        scheme=scheme,
        channel=ext,
        flags=flags,
        diagnostics={"chain_residual": residual},
    )


def build_theorem5(channels: ChannelSet, R: int, M: int, condition_limit: float = DEFAULT_CONDITION_LIMIT) -> PrecoderSet:
    """RME + 1 streams over an E = ceil((R+2)/M) extension; user 2 carries R+1."""
    return _chain_precoders(channels, R, M, tuple(range(1, R + 3)), Scheme.THEOREM5, condition_limit)


def build_example2(channels: ChannelSet, condition_limit: float = DEFAULT_CONDITION_LIMIT) -> PrecoderSet:
    """Four users with 2 transmit and 4 receive antennas over two symbols, 9 streams: (2, 2, 2, 3).

    The chain is seeded at user 4: receiver 3 aligns user 4, receiver 4 aligns
    user 1, receiver 1 aligns user 2 and receiver 2 aligns user 3.
    """
    return _chain_precoders(channels, 2, 2, (3, 4, 1, 2), Scheme.EXAMPLE2, condition_limit)


def build_zero_forcing(channels: ChannelSet, K: int) -> PrecoderSet:
    """Serve users 1..K with M random streams each; users beyond K stay silent."""
    cfg = channels.config
    if cfg.M > cfg.N:
        raise ConfigError("receive zero forcing needs M <= N; use the bounds for the swapped orientation")
    if not 1 <= K <= min(cfg.R, cfg.K):
        raise ConfigError(f"zero forcing needs 1 <= K <= R={cfg.R} and K <= {cfg.K}, got K={K}")
    if K * cfg.M > cfg.N:
        raise AssertionError("interference does not fit beside the desired streams")
    ext = extend_channel(channels, 1)
    empty = np.zeros((ext.cols, 0), dtype=np.complex128)
    precoders = tuple(
        _pad_precoder(empty, cfg.M, channels, user, require_nonzero=False) if user <= K else empty
        for user in range(1, cfg.K + 1)
    )
    allocation = tuple(cfg.M if user <= K else 0 for user in range(1, cfg.K + 1))
    LOGGER.info("Built zero forcing", extra={"K": K, "M": cfg.M, "N": cfg.N})
    return PrecoderSet(precoders=precoders, allocation=allocation, scheme=Scheme.ZERO_FORCING, channel=ext)
