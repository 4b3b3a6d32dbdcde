"""Zero-forcing receive filters, analytic sum rates and high-SNR slope estimates."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from p6_ia.channel import ExtendedChannel
from p6_ia.enums import Scheme
from p6_ia.errors import SeparabilityError
from p6_ia.linalg import DEFAULT_RANK_TOLERANCE, complement_basis
from p6_ia.models import PrecoderSet
from p6_ia.verify import AlignmentReport, desired_matrix, interference_matrix, verify_precoders

LOGGER = logging.getLogger(__name__)

DEFAULT_SNR_GRID_DB: Tuple[float, ...] = (30.0, 40.0, 50.0, 60.0, 70.0)
MIN_GRID_POINTS = 4
MIN_TOP_SNR_DB = 50.0


@dataclass(slots=True, frozen=True, eq=False)
class ReceiverFilter:
    """d x rows filter for one receiver with W H[k, k] V[k] = I."""

    receiver: int
    filter: np.ndarray
    leakage: float

    @property
    def noise_gain(self) -> np.ndarray:
        """Return ||w_m||^2 for every stream m (unit-variance noise after filtering)."""
        return np.sum(np.abs(self.filter) ** 2, axis=1)


def zero_forcing_filter(desired: np.ndarray, interference: np.ndarray, interference_rank: int) -> np.ndarray:
    """Return W with W @ interference = 0 and W @ desired = I.

    With no interference this is the pseudo-inverse of the desired channel.
    """
    basis = complement_basis(interference, interference_rank)
    projected = basis.conj().T @ desired
    return np.linalg.pinv(projected) @ basis.conj().T


def _leakage(filter_matrix: np.ndarray, interference: np.ndarray) -> float:
    if interference.shape[1] == 0 or filter_matrix.shape[0] == 0:
        return 0.0
    row_norms = np.linalg.norm(filter_matrix, axis=1)[:, np.newaxis]
    column_norms = np.linalg.norm(interference, axis=0)[np.newaxis, :]
    return float(np.max(np.abs(filter_matrix @ interference) / (row_norms * column_norms)))


def zf_filters(
    precoders: PrecoderSet,
    channel: Optional[ExtendedChannel] = None,
    report: Optional[AlignmentReport] = None,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> Tuple[ReceiverFilter, ...]:
    """Return one filter bank per active receiver; refuse when separability fails."""
    ext = channel or precoders.channel
    if report is None:
        report = verify_precoders(precoders, tolerance, ext)
    if not report.passed:
        raise SeparabilityError(f"alignment failed at receivers {report.failures}")
    filters = []
    for receiver_report in report.receivers:
        receiver = receiver_report.receiver
        interference = interference_matrix(precoders, receiver, ext)
        filter_matrix = zero_forcing_filter(
            desired_matrix(precoders, receiver, ext), interference, receiver_report.interference_rank
        )
        filters.append(
            ReceiverFilter(receiver=receiver, filter=filter_matrix, leakage=_leakage(filter_matrix, interference))
        )
    LOGGER.debug("Built ZF filters", extra={"receivers": len(filters), "max_leakage": max(f.leakage for f in filters)})
    return tuple(filters)


def sum_rate(precoders: PrecoderSet, filters: Sequence[ReceiverFilter], snr_db: float) -> float:
    """Return bits per channel use with power rho/K per transmitter split evenly over its streams."""
    rho = 10.0 ** (snr_db / 10.0)
    total = 0.0
    for receiver_filter in filters:
        streams = precoders.allocation[receiver_filter.receiver - 1]
        power = rho / (precoders.K * streams)
        total += float(np.sum(np.log2(1.0 + power / receiver_filter.noise_gain)))
    return total / precoders.extension


@dataclass(slots=True, frozen=True)
class SweepResult:
    """Sum rate over an SNR grid and the fitted high-SNR slope."""

    snr_grid_db: Tuple[float, ...]
    sum_rate_bits: Tuple[float, ...]
    slope_estimate: float
    predicted_dof: Fraction
    scheme: Scheme
    seed: int

    def __post_init__(self) -> None:
        """Validate list lengths."""
        if len(self.snr_grid_db) != len(self.sum_rate_bits):
            raise ValueError("grid and sum-rate lists must have equal length")


def validate_grid(snr_grid_db: Sequence[float]) -> Tuple[float, ...]:
    """Return the grid as a tuple after checking order, size and reach."""
    grid = tuple(float(value) for value in snr_grid_db)
    if len(grid) < MIN_GRID_POINTS:
        raise ValueError(f"SNR grid needs at least {MIN_GRID_POINTS} points, got {len(grid)}")
    if any(later <= earlier for earlier, later in zip(grid, grid[1:])):
        raise ValueError("SNR grid must be strictly ascending")
    if grid[-1] < MIN_TOP_SNR_DB:
        raise ValueError(f"SNR grid must reach {MIN_TOP_SNR_DB} dB, tops out at {grid[-1]}")
    return grid


def fit_slope(snr_grid_db: Sequence[float], rates: Sequence[float]) -> float:
    """Least-squares slope of rate against log2(SNR) over the upper half of the grid."""
    start = len(snr_grid_db) // 2
    x = np.asarray(snr_grid_db[start:], dtype=np.float64) * math.log2(10.0) / 10.0
    y = np.asarray(rates[start:], dtype=np.float64)
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def dof_slope(
    precoders: PrecoderSet,
    snr_grid_db: Sequence[float] = DEFAULT_SNR_GRID_DB,
    filters: Optional[Sequence[ReceiverFilter]] = None,
) -> SweepResult:
    """Sweep the grid and fit the DoF slope; the prediction is the scheme's streams per channel use."""
    grid = validate_grid(snr_grid_db)
    banks = filters if filters is not None else zf_filters(precoders)
    rates = tuple(sum_rate(precoders, banks, snr) for snr in grid)
    result = SweepResult(
        snr_grid_db=grid,
        sum_rate_bits=rates,
        slope_estimate=fit_slope(grid, rates),
        predicted_dof=precoders.total_dof,
        scheme=precoders.scheme,
        seed=precoders.channel.base.config.seed,
    )
    LOGGER.info(
        "DoF sweep finished",
        extra={"scheme": result.scheme.value, "slope": result.slope_estimate, "predicted": str(result.predicted_dof)},
    )
    return result
