"""Tests for report and channel dump encodings."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Callable, Dict

import numpy as np
import pytest

from p6_ia.bounds import characterize
from p6_ia.channel import SystemConfig, sample_channels
from p6_ia.codec import (
    CSV_HEADER,
    bounds_to_dict,
    channels_from_json,
    channels_to_json,
    complex_from_json,
    complex_to_json,
    dumps,
    fraction_from_str,
    fraction_to_str,
    sweep_to_csv,
)
from p6_ia.enums import ChannelVariation, Scheme
from p6_ia.errors import ChannelDumpError
from p6_ia.zf import SweepResult


def test_fraction_strings() -> None:
    """Rationals should be written as p/q, integers included."""
    assert fraction_to_str(Fraction(8, 3)) == "8/3"
    assert fraction_to_str(Fraction(3)) == "3/1"
    assert fraction_from_str("16/3") == Fraction(16, 3)
    with pytest.raises(ValueError, match="p/q"):
        fraction_from_str("3")


def test_complex_pairs() -> None:
    """Complex entries should be [re, im] pairs."""
    matrix = np.array([[1 + 2j, -0.5j]])
    assert complex_to_json(matrix) == [[[1.0, 2.0], [0.0, -0.5]]]
    assert np.array_equal(complex_from_json(complex_to_json(matrix)), matrix)
    with pytest.raises(ValueError, match="pairs"):
        complex_from_json([1.0, 2.0, 3.0])


def test_bounds_document() -> None:
    """Tight bounds should also report the exact value."""
    document = bounds_to_dict(characterize(4, 1, 2))
    assert document["outer"] == "8/3"
    assert document["tight"] is True
    assert document["exact"] == "8/3"
    assert "exact" not in bounds_to_dict(characterize(4, 2, 3))


def test_dumps_is_stable() -> None:
    """Key order should not change the bytes."""
    assert dumps({"b": 1, "a": 2}) == dumps({"a": 2, "b": 1})
    assert dumps({"a": 1}).endswith("\n")


class TestChannelDump:
    """Test suite for channel dumps."""

    def test_round_trip(self) -> None:
        """A dump should rebuild the same channels through JSON text."""
        channels = sample_channels(SystemConfig(K=4, M=2, N=4, variation=ChannelVariation.CONSTANT, seed=8), 2)
        restored = channels_from_json(json.loads(dumps(channels_to_json(channels))))
        assert restored.config == channels.config
        assert restored.slots == 2
        assert np.array_equal(restored.entries, channels.entries)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda doc: doc.pop("entries"),
            lambda doc: doc["config"].update(K=5),
            lambda doc: doc["config"].update(variation="sometimes"),
            lambda doc: doc.update(entries=[[1.0, 2.0, 3.0]]),
        ],
    )
    def test_malformed_dump(self, mutate: Callable[[Dict[str, Any]], object]) -> None:
        """Missing keys, bad shapes and unknown variations should raise ChannelDumpError."""
        channels = sample_channels(SystemConfig(K=4, M=1, N=2, seed=1), 1)
        document = json.loads(dumps(channels_to_json(channels)))
        mutate(document)
        with pytest.raises(ChannelDumpError):
            channels_from_json(document)

    def test_constant_dump_with_differing_slots(self) -> None:
        """A constant dump whose later slots drift from slot 0 should be refused."""
        channels = sample_channels(SystemConfig(K=3, M=1, N=2, variation=ChannelVariation.CONSTANT, seed=4), 3)
        document = json.loads(dumps(channels_to_json(channels)))
        document["entries"][2][0][1][0][0] = [1.0, 0.0]
        with pytest.raises(ChannelDumpError, match=r"differs from slot 0 at slots \[2\]"):
            channels_from_json(document)

    def test_rejects_non_object(self) -> None:
        """A JSON list is not a dump."""
        with pytest.raises(ChannelDumpError, match="object"):
            channels_from_json([1, 2])


def test_sweep_csv() -> None:
    """CSV output should start with the fixed header and hold one row per SNR."""
    result = SweepResult(
        snr_grid_db=(30.0, 40.0),
        sum_rate_bits=(10.0, 16.5),
        slope_estimate=2.0,
        scheme=Scheme.ZERO_FORCING,
        predicted_dof=Fraction(2),
        seed=7,
    )
    lines = sweep_to_csv(result).splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "30.0,10.0,zero_forcing,7"
    assert len(lines) == 3
