"""Degrees-of-freedom bounds and interference alignment for the K-user MIMO interference channel."""

from p6_ia.bounds import (
    DofBounds,
    characterize,
    innerbound,
    innerbound_scheme,
    outerbound,
    ratio,
    two_user_mimo_dof,
)
from p6_ia.channel import (
    ChannelSet,
    ExtendedChannel,
    SystemConfig,
    extend_channel,
    reduce_to_simo,
    sample_channels,
)
from p6_ia.codec import channels_from_json, channels_to_json
from p6_ia.constant import (
    allocate_dof_theorem4,
    allocate_dof_theorem5,
    build_example1,
    build_example2,
    build_theorem4,
    build_theorem5,
    build_zero_forcing,
)
from p6_ia.enums import ChannelVariation, InnerScheme, OutputFormat, Regime, Scheme
from p6_ia.errors import (
    CapExceededError,
    ChannelDumpError,
    ConfigError,
    IaError,
    ResampleAdvisedError,
    SeparabilityError,
)
from p6_ia.exponents import ExponentBox, ExponentFamily, ExponentTuple
from p6_ia.field import FIELD_PRIME, field_rank, sample_field_channels
from p6_ia.models import IndexMap, JobResult, PrecoderSet, theorem4_index_map, theorem5_index_map
from p6_ia.render import render_report, render_summary
from p6_ia.runner import RunConfig, build_run_config, default_jobs, load_config, run
from p6_ia.simo import (
    AlignmentIndexSet,
    SimoPrecoders,
    SymbolicCertificate,
    TMatrixFamily,
    achieved_dof,
    build_index_set,
    build_precoders,
    build_t_family,
    column_match_residual,
    epsilon_n,
    gamma_mu,
    per_user_dof,
    verify_alignment_exact,
    verify_alignment_numeric,
    verify_alignment_symbolic,
)
from p6_ia.verify import AlignmentReport, ReceiverReport, verify_precoders
from p6_ia.zf import SweepResult, dof_slope, sum_rate, zf_filters

__all__ = [
    "AlignmentIndexSet",
    "AlignmentReport",
    "CapExceededError",
    "ChannelDumpError",
    "ChannelSet",
    "ChannelVariation",
    "ConfigError",
    "DofBounds",
    "ExponentBox",
    "ExponentFamily",
    "ExponentTuple",
    "ExtendedChannel",
    "FIELD_PRIME",
    "IaError",
    "IndexMap",
    "InnerScheme",
    "JobResult",
    "OutputFormat",
    "PrecoderSet",
    "ReceiverReport",
    "Regime",
    "ResampleAdvisedError",
    "RunConfig",
    "Scheme",
    "SeparabilityError",
    "SimoPrecoders",
    "SweepResult",
    "SymbolicCertificate",
    "SystemConfig",
    "TMatrixFamily",
    "achieved_dof",
    "allocate_dof_theorem4",
    "allocate_dof_theorem5",
    "build_example1",
    "build_example2",
    "build_index_set",
    "build_precoders",
    "build_run_config",
    "build_t_family",
    "build_theorem4",
    "build_theorem5",
    "build_zero_forcing",
    "channels_from_json",
    "channels_to_json",
    "characterize",
    "column_match_residual",
    "default_jobs",
    "dof_slope",
    "epsilon_n",
    "extend_channel",
    "field_rank",
    "gamma_mu",
    "innerbound",
    "innerbound_scheme",
    "load_config",
    "outerbound",
    "per_user_dof",
    "ratio",
    "reduce_to_simo",
    "render_report",
    "render_summary",
    "run",
    "sample_channels",
    "sample_field_channels",
    "sum_rate",
    "theorem4_index_map",
    "theorem5_index_map",
    "two_user_mimo_dof",
    "verify_alignment_exact",
    "verify_alignment_numeric",
    "verify_alignment_symbolic",
    "verify_precoders",
    "zf_filters",
]
