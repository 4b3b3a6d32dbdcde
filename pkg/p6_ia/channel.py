"""Channel sampling, storage and symbol extension."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from p6_ia.enums import ChannelVariation
from p6_ia.errors import ConfigError

LOGGER = logging.getLogger(__name__)

DEFAULT_MAGNITUDE_BOUNDS: Tuple[float, float] = (0.5, 2.0)
_SEED_LIMIT = 1 << 64
_MAGNITUDE_SLACK = 1e-12


@dataclass(slots=True, frozen=True)
class SystemConfig:
    """K-user interference channel with M transmit and N receive antennas per user."""

    K: int
    M: int
    N: int
    variation: ChannelVariation = ChannelVariation.TIME_VARYING
    seed: int = 0
    magnitude_bounds: Tuple[float, float] = DEFAULT_MAGNITUDE_BOUNDS

    def __post_init__(self) -> None:
        """Validate antenna counts, seed and magnitude bounds."""
        if self.K < 2:
            raise ConfigError(f"K must be at least 2, got {self.K}")
        if self.M < 1:
            raise ConfigError(f"M must be at least 1, got {self.M}")
        if self.N < 1:
            raise ConfigError(f"N must be at least 1, got {self.N}")
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        lo, hi = self.magnitude_bounds
        if not 0 < lo < hi < float("inf"):
            raise ConfigError(f"magnitude bounds must satisfy 0 < lo < hi < inf, got {self.magnitude_bounds}")

    @property
    def R(self) -> int:
        """Return floor(max(M, N) / min(M, N))."""
        return max(self.M, self.N) // min(self.M, self.N)


def entry_generator(seed: int, k: int, j: int, t: int, salt: int = 0) -> np.random.Generator:
    """Return the counter-based stream for channel (k, j) at slot t.

    The Philox key carries the seed (and a salt for resampled draws) while the
    counter encodes (k, j, t), so every matrix has its own stream and the
    order in which matrices are sampled never changes their values.
    """
    counter = (k << 192) | (j << 128) | (t << 64)
    return np.random.Generator(np.random.Philox(key=seed | (salt << 64), counter=counter))


def draw_complex(rng: np.random.Generator, shape: Sequence[int], bounds: Tuple[float, float]) -> np.ndarray:
    """Draw r * exp(i theta) entries, r uniform in bounds and theta uniform in [0, 2 pi)."""
    lo, hi = bounds
    magnitude = rng.uniform(lo, hi, size=tuple(shape))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=tuple(shape))
    return magnitude * np.exp(1j * phase)


@dataclass(slots=True, frozen=True, eq=False)
class ChannelSet:
    """Per-slot channel matrices H[k, j](t), stored as an array of shape (T, K, K, N, M).

    User indices in the accessors are 1-based; slots are 0-based.
    """

    config: SystemConfig
    slots: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        """Validate array shape and magnitudes, then freeze a private copy of the array."""
        object.__setattr__(self, "entries", np.array(self.entries, dtype=np.complex128, copy=True))
        cfg = self.config
        expected = (self.slots, cfg.K, cfg.K, cfg.N, cfg.M)
        if self.slots < 1:
            raise ConfigError(f"slots must be at least 1, got {self.slots}")
        if self.entries.shape != expected:
            raise ConfigError(f"channel entries must have shape {expected}, got {self.entries.shape}")
        lo, hi = cfg.magnitude_bounds
        magnitudes = np.abs(self.entries)
        if magnitudes.min() < lo - _MAGNITUDE_SLACK or magnitudes.max() > hi + _MAGNITUDE_SLACK:
            raise ConfigError(f"channel magnitudes must lie in [{lo}, {hi}]")
        self.entries.setflags(write=False)

    def matrix(self, k: int, j: int, t: int = 0) -> np.ndarray:
        """Return the N x M channel from transmitter j to receiver k at slot t."""
        return self.entries[t, k - 1, j - 1]

    def with_direct_resampled(self, salt: int = 1) -> ChannelSet:
        """Return a copy whose direct channels H[i, i] are drawn from fresh streams."""
        if salt < 1:
            raise ValueError(f"salt must be positive, got {salt}")
        cfg = self.config
        entries = np.array(self.entries)
        sample_slots = 1 if cfg.variation is ChannelVariation.CONSTANT else self.slots
        for t in range(sample_slots):
            for i in range(cfg.K):
                rng = entry_generator(cfg.seed, i, i, t, salt=salt)
                entries[t, i, i] = draw_complex(rng, (cfg.N, cfg.M), cfg.magnitude_bounds)
        if cfg.variation is ChannelVariation.CONSTANT:
            entries[1:] = entries[0]
        LOGGER.debug("Resampled direct channels", extra={"seed": cfg.seed, "salt": salt})
        return ChannelSet(config=cfg, slots=self.slots, entries=entries)


def sample_channels(config: SystemConfig, slots: int) -> ChannelSet:
    """Sample a ChannelSet; constant channels replicate the slot-0 draw."""
    if slots < 1:
        raise ConfigError(f"slots must be at least 1, got {slots}")
    K, N, M = config.K, config.N, config.M
    sample_slots = 1 if config.variation is ChannelVariation.CONSTANT else slots
    drawn = np.empty((sample_slots, K, K, N, M), dtype=np.complex128)
    for t in range(sample_slots):
        for k in range(K):
            for j in range(K):
                drawn[t, k, j] = draw_complex(entry_generator(config.seed, k, j, t), (N, M), config.magnitude_bounds)
    if sample_slots != slots:
        drawn = np.repeat(drawn, slots, axis=0)
    LOGGER.debug(
        "Sampled channels",
        extra={"K": K, "M": M, "N": N, "slots": slots, "variation": config.variation.value, "seed": config.seed},
    )
    return ChannelSet(config=config, slots=slots, entries=drawn)


def reduce_to_simo(channels: ChannelSet) -> ChannelSet:
    """View a K-user M x N channel (M <= N) as a KM-user SIMO channel with R receive antennas.

    Receiver k keeps its first R*M antennas; virtual user (k, m) owns transmit
    antenna m of user k and receive rows m*R .. (m+1)*R - 1 of receiver k.
    """
    cfg = channels.config
    if cfg.M > cfg.N:
        raise ConfigError("SIMO reduction needs M <= N; swap transmit and receive roles first")
    R, M = cfg.R, cfg.M
    users = cfg.K * M
    entries = np.empty((channels.slots, users, users, R, 1), dtype=np.complex128)
    for k in range(cfg.K):
        for m in range(M):
            rows = slice(m * R, (m + 1) * R)
            for j in range(cfg.K):
                for m_tx in range(M):
                    entries[:, k * M + m, j * M + m_tx, :, 0] = channels.entries[:, k, j, rows, m_tx]
    reduced = SystemConfig(
        K=users,
        M=1,
        N=R,
        variation=cfg.variation,
        seed=cfg.seed,
        magnitude_bounds=cfg.magnitude_bounds,
    )
    return ChannelSet(config=reduced, slots=channels.slots, entries=entries)


@dataclass(slots=True, frozen=True, eq=False)
class ExtendedChannel:
    """Symbol extension of length mu: block b of H[k, j] is the base channel at slot mu*t + b.

    Blocks are kept as an array of shape (K, K, mu, N, M); dense block-diagonal
    matrices are only materialized on request.
    """

    base: ChannelSet
    mu: int
    t: int
    blocks: np.ndarray

    @property
    def K(self) -> int:
        """Return the user count."""
        return self.base.config.K

    @property
    def rows(self) -> int:
        """Return N * mu, the receive signal-space dimension."""
        return self.base.config.N * self.mu

    @property
    def cols(self) -> int:
        """Return M * mu, the transmit signal-space dimension."""
        return self.base.config.M * self.mu

    def block(self, k: int, j: int, b: int) -> np.ndarray:
        """Return diagonal block b of H[k, j]."""
        return self.blocks[k - 1, j - 1, b]

    def matrix(self, k: int, j: int) -> np.ndarray:
        """Return the dense (N*mu) x (M*mu) block-diagonal matrix of H[k, j]."""
        return block_diag(*self.blocks[k - 1, j - 1])

    def stacked(self, k: int, users: Sequence[int]) -> np.ndarray:
        """Return [H[k, u1] H[k, u2] ...] as one dense matrix."""
        return np.hstack([self.matrix(k, u) for u in users])

    def apply(self, k: int, j: int, precoder: np.ndarray) -> np.ndarray:
        """Return H[k, j] @ precoder without forming the dense matrix."""
        cfg = self.base.config
        columns = precoder.shape[1]
        per_slot = precoder.reshape(self.mu, cfg.M, columns)
        product = np.einsum("bnm,bmc->bnc", self.blocks[k - 1, j - 1], per_slot)
        return product.reshape(self.rows, columns)


def extend_channel(channels: ChannelSet, mu: int, t: int = 0) -> ExtendedChannel:
    """Build the mu-symbol extension number t (slots mu*t .. mu*(t+1) - 1)."""
    if mu < 1:
        raise ConfigError(f"mu must be at least 1, got {mu}")
    if t < 0:
        raise ConfigError(f"t must be non-negative, got {t}")
    needed = mu * (t + 1)
    if channels.slots < needed:
        raise ConfigError(f"extension needs {needed} slots, channel set holds {channels.slots}")
    window = channels.entries[mu * t : needed]
    blocks = np.ascontiguousarray(np.transpose(window, (1, 2, 0, 3, 4)))
    blocks.setflags(write=False)
    return ExtendedChannel(base=channels, mu=mu, t=t, blocks=blocks)
