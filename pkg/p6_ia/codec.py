"""JSON and CSV encodings for reports, sweeps and channel dumps.

Rationals are written as "p/q" strings and complex numbers as [re, im] pairs.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping

import numpy as np

from p6_ia.bounds import DofBounds
from p6_ia.channel import ChannelSet, SystemConfig
from p6_ia.enums import ChannelVariation
from p6_ia.errors import ChannelDumpError
from p6_ia.models import PrecoderSet
from p6_ia.simo import SymbolicCertificate
from p6_ia.verify import AlignmentReport
from p6_ia.zf import SweepResult

CSV_HEADER = ("snr_db", "sum_rate_bits", "scheme", "seed")


def fraction_to_str(value: Fraction) -> str:
    """Return value as "p/q", integers included ("3/1")."""
    return f"{value.numerator}/{value.denominator}"


def fraction_from_str(text: str) -> Fraction:
    """Parse a "p/q" string."""
    numerator, sep, denominator = text.partition("/")
    if not sep:
        raise ValueError(f"expected p/q, got {text!r}")
    return Fraction(int(numerator), int(denominator))


def complex_to_json(matrix: np.ndarray) -> List[Any]:
    """Return a nested list with every complex entry as [re, im]."""
    pairs = np.stack([matrix.real, matrix.imag], axis=-1)
    return pairs.tolist()


def complex_from_json(data: Any) -> np.ndarray:
    """Inverse of complex_to_json."""
    array = np.asarray(data, dtype=np.float64)
    if array.ndim == 0 or array.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return array[..., 0] + 1j * array[..., 1]


def dumps(document: Mapping[str, Any]) -> str:
    """Serialize with sorted keys so equal documents give equal bytes."""
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def bounds_to_dict(bounds: DofBounds) -> Dict[str, Any]:
    """Return the bounds document."""
    document: Dict[str, Any] = {
        "inner": fraction_to_str(bounds.inner),
        "outer": fraction_to_str(bounds.outer),
        "tight": bounds.tight,
        "R": bounds.R,
        "regime": bounds.regime.value,
    }
    if bounds.exact is not None:
        document["exact"] = fraction_to_str(bounds.exact)
    return document


def report_to_dict(report: AlignmentReport) -> Dict[str, Any]:
    """Return the alignment report document."""
    return {
        "scheme": report.scheme.value,
        "passed": report.passed,
        "tolerance": report.tolerance,
        "failures": list(report.failures),
        "receivers": [
            {
                "receiver": receiver.receiver,
                "streams": receiver.streams,
                "interference_count": receiver.interference_count,
                "interference_rank": receiver.interference_rank,
                "interference_bound": receiver.interference_bound,
                "aligned": receiver.aligned,
                "desired_rank": receiver.desired_rank,
                "joint_rank": receiver.joint_rank,
                "passed": receiver.passed,
            }
            for receiver in report.receivers
        ],
    }


def precoders_to_dict(precoders: PrecoderSet) -> Dict[str, Any]:
    """Return a summary of a precoder set (shapes, allocation, diagnostics)."""
    return {
        "scheme": precoders.scheme.value,
        "allocation": list(precoders.allocation),
        "extension": precoders.extension,
        "total_streams": precoders.total_streams,
        "total_dof": fraction_to_str(precoders.total_dof),
        "shapes": [list(matrix.shape) for matrix in precoders.precoders],
        "flags": list(precoders.flags),
        "diagnostics": {key: float(value) for key, value in sorted(precoders.diagnostics.items())},
    }


def certificate_to_dict(certificate: SymbolicCertificate) -> Dict[str, Any]:
    """Return the symbolic certificate document."""
    return {
        "K": certificate.K,
        "R": certificate.R,
        "n": certificate.n,
        "passed": certificate.passed,
        "increments_checked": certificate.increments_checked,
        "v1_u_slot": list(certificate.v1_u_slot),
        "slot": list(certificate.slot) if certificate.slot else None,
        "violating": list(certificate.violating.values) if certificate.violating else None,
        "source": list(certificate.source.values) if certificate.source else None,
    }


def sweep_to_dict(result: SweepResult) -> Dict[str, Any]:
    """Return the sweep summary document."""
    return {
        "scheme": result.scheme.value,
        "seed": result.seed,
        "snr_grid_db": list(result.snr_grid_db),
        "sum_rate_bits": list(result.sum_rate_bits),
        "slope": result.slope_estimate,
        "predicted_dof": fraction_to_str(result.predicted_dof),
    }


def sweep_to_csv(result: SweepResult) -> str:
    """Return the sweep as CSV with the fixed header."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for snr, rate in zip(result.snr_grid_db, result.sum_rate_bits):
        writer.writerow((repr(snr), repr(rate), result.scheme.value, result.seed))
    return buffer.getvalue()


def channels_to_json(channels: ChannelSet) -> Dict[str, Any]:
    """Return a channel dump: config plus entries[t][k][j] as N x M [re, im] arrays."""
    cfg = channels.config
    return {
        "config": {
            "K": cfg.K,
            "M": cfg.M,
            "N": cfg.N,
            "variation": cfg.variation.value,
            "seed": cfg.seed,
            "magnitude_bounds": list(cfg.magnitude_bounds),
        },
        "slots": channels.slots,
        "entries": complex_to_json(channels.entries),
    }


def channels_from_json(document: Any) -> ChannelSet:
    """Rebuild a ChannelSet from a dump, raising ChannelDumpError on any inconsistency."""
    if not isinstance(document, dict):
        raise ChannelDumpError("channel dump must be a JSON object")
    try:
        raw = document["config"]
        config = SystemConfig(
            K=int(raw["K"]),
            M=int(raw["M"]),
            N=int(raw["N"]),
            variation=ChannelVariation(raw["variation"]),
            seed=int(raw["seed"]),
            magnitude_bounds=(float(raw["magnitude_bounds"][0]), float(raw["magnitude_bounds"][1])),
        )
        slots = int(document["slots"])
        entries = complex_from_json(document["entries"])
        channels = ChannelSet(config=config, slots=slots, entries=entries)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        if isinstance(exc, ChannelDumpError):
            raise
        raise ChannelDumpError(f"invalid channel dump: {exc}") from exc
    if config.variation is ChannelVariation.CONSTANT:
        changed = [t for t in range(1, slots) if not np.array_equal(channels.entries[t], channels.entries[0])]
        if changed:
            raise ChannelDumpError(f"constant channel dump differs from slot 0 at slots {changed}")
    return channels


__all__ = [
    "CSV_HEADER",
    "bounds_to_dict",
    "certificate_to_dict",
    "channels_from_json",
    "channels_to_json",
    "complex_from_json",
    "complex_to_json",
    "dumps",
    "fraction_from_str",
    "fraction_to_str",
    "precoders_to_dict",
    "report_to_dict",
    "sweep_to_csv",
    "sweep_to_dict",
]
