"""Tests for receiver rank checks."""

from __future__ import annotations

import numpy as np

from p6_ia.channel import SystemConfig, extend_channel, sample_channels
from p6_ia.enums import ChannelVariation, Scheme
from p6_ia.models import PrecoderSet
from p6_ia.verify import ReceiverReport, interference_matrix, verify_precoders


def _random_precoders(allocation: tuple[int, ...], seed: int = 3) -> PrecoderSet:
    config = SystemConfig(K=len(allocation), M=2, N=2, variation=ChannelVariation.CONSTANT, seed=seed)
    ext = extend_channel(sample_channels(config, 1), 1)
    rng = np.random.default_rng(seed)
    matrices = tuple(
        rng.standard_normal((ext.cols, d)) + 1j * rng.standard_normal((ext.cols, d)) for d in allocation
    )
    return PrecoderSet(precoders=matrices, allocation=allocation, scheme=Scheme.ZERO_FORCING, channel=ext)


def test_receiver_report_properties() -> None:
    """Aligned count and verdicts should follow from the ranks."""
    report = ReceiverReport(
        receiver=1,
        streams=2,
        interference_count=7,
        interference_rank=6,
        interference_bound=6,
        desired_rank=2,
        joint_rank=8,
    )
    assert report.aligned == 1
    assert report.interference_ok
    assert report.separable
    assert report.passed
    assert not ReceiverReport(1, 2, 7, 6, 6, 2, 7).separable


def test_unaligned_interference_fails() -> None:
    """Three single-stream users on two antennas leave interference of rank two."""
    report = verify_precoders(_random_precoders((1, 1, 1)))
    assert not report.passed
    assert report.failures == (1, 2, 3)
    assert all(receiver.interference_rank == 2 for receiver in report.receivers)


def test_single_interferer_passes() -> None:
    """Two single-stream users on two antennas should separate."""
    report = verify_precoders(_random_precoders((1, 1)))
    assert report.passed
    assert [receiver.joint_rank for receiver in report.receivers] == [2, 2]


def test_silent_users_are_skipped() -> None:
    """Users without streams add no interference and get no report."""
    precoders = _random_precoders((1, 0, 1))
    assert interference_matrix(precoders, 1).shape == (2, 1)
    report = verify_precoders(precoders)
    assert [receiver.receiver for receiver in report.receivers] == [1, 3]
    assert report.passed
