"""Enumerations for channel models, schemes and output formats."""

from __future__ import annotations

import enum


class ChannelVariation(enum.Enum):
    """How channel coefficients evolve across slots."""

    TIME_VARYING = "time_varying"
    CONSTANT = "constant"


class Regime(enum.Enum):
    """Which side of the K versus R threshold a configuration sits on."""

    K_LE_R = "k_le_r"
    K_GT_R = "k_gt_r"


class Scheme(enum.Enum):
    """Precoder construction that produced a PrecoderSet."""

    ZERO_FORCING = "zero_forcing"
    THEOREM4 = "theorem4"
    THEOREM5 = "theorem5"
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    SIMO = "simo"


class InnerScheme(enum.Enum):
    """Achievability argument that attains the inner bound."""

    ZERO_FORCING = "zero_forcing"
    DISCARD_ONE_USER = "discard_one_user"
    SIMO_REDUCTION = "simo_reduction"


class OutputFormat(enum.Enum):
    """Serialization format for CLI reports."""

    JSON = "json"
    CSV = "csv"
