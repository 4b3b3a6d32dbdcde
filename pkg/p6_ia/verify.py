"""Receiver-side rank checks: interference dimension and separability."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from p6_ia.channel import ExtendedChannel
from p6_ia.enums import Scheme
from p6_ia.linalg import DEFAULT_RANK_TOLERANCE, numeric_rank
from p6_ia.models import PrecoderSet

LOGGER = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class ReceiverReport:
    """Rank figures at one receiver."""

    receiver: int
    streams: int
    interference_count: int
    interference_rank: int
    interference_bound: int
    desired_rank: int
    joint_rank: int

    @property
    def aligned(self) -> int:
        """Return how many interference vectors collapsed onto others."""
        return self.interference_count - self.interference_rank

    @property
    def interference_ok(self) -> bool:
        """Return True when interference fits in its allotted dimensions."""
        return self.interference_rank <= self.interference_bound

    @property
    def separable(self) -> bool:
        """Return True when desired streams are independent of the interference."""
        return self.desired_rank == self.streams and self.joint_rank == self.streams + self.interference_rank

    @property
    def passed(self) -> bool:
        """Return True when both checks hold."""
        return self.interference_ok and self.separable


@dataclass(slots=True, frozen=True)
class AlignmentReport:
    """Per-receiver verdicts for one precoder set."""

    scheme: Scheme
    receivers: Tuple[ReceiverReport, ...]
    tolerance: float

    @property
    def passed(self) -> bool:
        """Return True when every receiver passes."""
        return all(report.passed for report in self.receivers)

    @property
    def failures(self) -> Tuple[int, ...]:
        """Return the indices of failing receivers."""
        return tuple(report.receiver for report in self.receivers if not report.passed)


def interference_matrix(precoders: PrecoderSet, receiver: int, channel: Optional[ExtendedChannel] = None) -> np.ndarray:
    """Stack H[k, j] V[j] for every active j != k."""
    ext = channel or precoders.channel
    blocks = [
        ext.apply(receiver, user, precoders.precoder(user))
        for user in range(1, precoders.K + 1)
        if user != receiver and precoders.allocation[user - 1] > 0
    ]
    if not blocks:
        return np.zeros((ext.rows, 0), dtype=np.complex128)
    return np.hstack(blocks)


def desired_matrix(precoders: PrecoderSet, receiver: int, channel: Optional[ExtendedChannel] = None) -> np.ndarray:
    """Return H[k, k] V[k]."""
    ext = channel or precoders.channel
    return ext.apply(receiver, receiver, precoders.precoder(receiver))


def verify_receiver(
    precoders: PrecoderSet,
    receiver: int,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
    channel: Optional[ExtendedChannel] = None,
) -> ReceiverReport:
    """Compute interference, desired and joint ranks at one receiver."""
    ext = channel or precoders.channel
    streams = precoders.allocation[receiver - 1]
    interference = interference_matrix(precoders, receiver, ext)
    desired = desired_matrix(precoders, receiver, ext)
    interference_rank = numeric_rank(interference, tolerance)
    report = ReceiverReport(
        receiver=receiver,
        streams=streams,
        interference_count=interference.shape[1],
        interference_rank=interference_rank,
        interference_bound=ext.rows - streams,
        desired_rank=numeric_rank(desired, tolerance),
        joint_rank=numeric_rank(np.hstack([desired, interference]), tolerance),
    )
    LOGGER.debug(
        "Receiver checked",
        extra={
            "receiver": receiver,
            "interference_rank": report.interference_rank,
            "interference_count": report.interference_count,
            "joint_rank": report.joint_rank,
        },
    )
    return report


def verify_precoders(
    precoders: PrecoderSet,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
    channel: Optional[ExtendedChannel] = None,
) -> AlignmentReport:
    """Check every receiver that carries at least one stream.

    ``channel`` replaces the precoders' own channel, e.g. one whose direct
    links were redrawn.
    """
    receivers = tuple(
        verify_receiver(precoders, receiver, tolerance, channel)
        for receiver in range(1, precoders.K + 1)
        if precoders.allocation[receiver - 1] > 0
    )
    report = AlignmentReport(scheme=precoders.scheme, receivers=receivers, tolerance=tolerance)
    LOGGER.info(
        "Alignment verified",
        extra={"scheme": precoders.scheme.value, "passed": report.passed, "failures": report.failures},
    )
    return report
