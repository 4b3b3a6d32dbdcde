"""Run configuration, subcommands and the batch verifier behind the CLI."""

from __future__ import annotations

import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from p6_ia.bounds import characterize, innerbound, innerbound_scheme, outerbound, ratio, two_user_mimo_dof
from p6_ia.channel import ChannelSet, ExtendedChannel, SystemConfig, extend_channel, sample_channels
from p6_ia.codec import (
    bounds_to_dict,
    certificate_to_dict,
    channels_from_json,
    channels_to_json,
    dumps,
    fraction_to_str,
    precoders_to_dict,
    report_to_dict,
    sweep_to_csv,
    sweep_to_dict,
)
from p6_ia.constant import (
    build_example1,
    build_example2,
    build_theorem4,
    build_theorem5,
    build_zero_forcing,
    extension_length,
)
from p6_ia.enums import ChannelVariation, OutputFormat
from p6_ia.errors import CapExceededError, ChannelDumpError, ConfigError, IaError
from p6_ia.linalg import DEFAULT_RANK_TOLERANCE
from p6_ia.models import JobResult, PrecoderSet
from p6_ia.render import render_report, render_summary
from p6_ia.simo import (
    DEFAULT_MU_CAP,
    SimoPrecoders,
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
from p6_ia.verify import verify_precoders
from p6_ia.zf import DEFAULT_SNR_GRID_DB, dof_slope, validate_grid, zf_filters

LOGGER = logging.getLogger(__name__)

DEFAULT_SEED = 20240101
ENV_PREFIX = "P6_IA_"
COMMANDS = ("bounds", "simo-align", "mimo-align", "dof-sweep", "verify-all")
MIMO_SCHEMES = ("theorem4", "theorem5", "example1", "example2", "zf")
SWEEP_SCHEMES = MIMO_SCHEMES + ("simo",)
LEAKAGE_LIMIT = 1e-8
COLUMN_MATCH_LIMIT = 1e-9
CHAIN_RESIDUAL_LIMIT = 1e-9
EIGEN_ANGLE_LIMIT = 1e-7
SIMO_SNR_GRID_DB = (100.0, 120.0, 140.0, 160.0, 180.0, 200.0)
_SETTINGS = ("seed", "out", "format", "mu_cap", "tolerance", "workers", "deterministic")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


@dataclass(slots=True, frozen=True)
class RunConfig:
    """Everything one CLI invocation needs; ``params`` holds the subcommand's own options."""

    command: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    fmt: OutputFormat = OutputFormat.JSON
    mu_cap: int = DEFAULT_MU_CAP
    tolerance: float = DEFAULT_RANK_TOLERANCE
    workers: int = 1
    deterministic: bool = False

    def __post_init__(self) -> None:
        """Validate the command and numeric settings."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.mu_cap < 1:
            raise ConfigError("mu_cap must be positive")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.fmt is OutputFormat.CSV and self.command != "dof-sweep":
            raise ConfigError("csv output is only available for dof-sweep")

    def to_dict(self) -> Dict[str, Any]:
        """Return a JSON-ready mapping that from_dict turns back into an equal config."""
        return {
            "command": self.command,
            "params": dict(self.params),
            "seed": self.seed,
            "out": self.out,
            "format": self.fmt.value,
            "mu_cap": self.mu_cap,
            "tolerance": self.tolerance,
            "workers": self.workers,
            "deterministic": self.deterministic,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        """Build a config from a to_dict mapping."""
        params = data.get("params") or {}
        if not isinstance(params, Mapping):
            raise ConfigError("params must be an object")
        return cls(
            command=str(data.get("command", "")),
            params=dict(params),
            seed=_require_int(data.get("seed", DEFAULT_SEED), "seed", minimum=0),
            out=_optional_str(data.get("out")),
            fmt=_parse_format(data.get("format", OutputFormat.JSON.value)),
            mu_cap=_require_int(data.get("mu_cap", DEFAULT_MU_CAP), "mu_cap", minimum=1),
            tolerance=_require_float(data.get("tolerance", DEFAULT_RANK_TOLERANCE), "tolerance"),
            workers=_require_int(data.get("workers", 1), "workers", minimum=1),
            deterministic=_parse_bool(data.get("deterministic", False), "deterministic"),
        )


@dataclass(slots=True, frozen=True)
class CommandResult:
    """Document to emit plus the overall verdict; ``text`` goes to stderr."""

    document: Mapping[str, Any]
    passed: bool
    csv: Optional[str] = None
    text: Optional[str] = None


@dataclass(slots=True, frozen=True)
class Job:
    """One entry of the verification matrix."""

    name: str
    kind: str
    params: Mapping[str, Any]
    grid: Optional[Tuple[float, ...]] = None
    band: Optional[float] = None


def load_config(path: str) -> Dict[str, Any]:
    """Load JSON configuration from disk; a missing file is an empty config."""
    if not path:
        raise ConfigError("Config path is required")
    config_path = Path(path)
    if not config_path.exists():
        return {}
    try:
        data = json.loads(config_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"Failed to read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Invalid JSON config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object")
    return data


def env_overrides(environ: Mapping[str, str]) -> Dict[str, str]:
    """Return the settings present as P6_IA_* variables, unparsed."""
    overrides = {}
    for key in _SETTINGS:
        name = ENV_PREFIX + key.upper()
        if name in environ:
            overrides[key] = environ[name]
    return overrides


def build_run_config(
    command: str,
    params: Optional[Mapping[str, Any]] = None,
    file_config: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
    flags: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Merge defaults, config file, environment and flags, later sources winning.

    Top-level file keys are settings; a file section named after the command
    supplies default params. ``None`` values in params or flags mean "not given".
    """
    file_config = dict(file_config or {})
    merged: Dict[str, Any] = {key: file_config[key] for key in _SETTINGS if key in file_config}
    merged.update(env_overrides(environ or {}))
    merged.update({key: value for key, value in (flags or {}).items() if value is not None})
    section = file_config.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config section {command!r} must be an object")
    merged_params = dict(section)
    merged_params.update({key: value for key, value in (params or {}).items() if value is not None})
    return RunConfig.from_dict({"command": command, "params": merged_params, **merged})


def cmd_bounds(config: RunConfig) -> CommandResult:
    """Evaluate the inner and outer bounds for (K, M, N)."""
    K = _int_param(config.params, "K", minimum=1)
    M = _int_param(config.params, "M", minimum=1)
    N = _int_param(config.params, "N", minimum=1)
    document: Dict[str, Any] = {"command": "bounds", "K": K, "M": M, "N": N}
    document.update(bounds_to_dict(characterize(K, M, N)))
    document["inner_scheme"] = innerbound_scheme(K, M, N).value
    return CommandResult(document=document, passed=True)


def _build_simo(K: int, R: int, n: int, seed: int, mu_cap: int) -> Tuple[SimoPrecoders, TMatrixFamily, ExtendedChannel]:
    """Sample a time-varying SIMO channel and build its precoders."""
    _, mu = gamma_mu(K, R, n, mu_cap=mu_cap)
    channels = sample_channels(SystemConfig(K=K, M=1, N=R, seed=seed), mu)
    ext = extend_channel(channels, mu)
    idx = build_index_set(K, R)
    t_family = build_t_family(ext, idx)
    return build_precoders(t_family, idx, n), t_family, ext


def cmd_simo_align(config: RunConfig) -> CommandResult:
    """Run the symbolic check, plus the numeric one when asked and the extension fits the cap."""
    K = _int_param(config.params, "K", minimum=2)
    R = _int_param(config.params, "R", minimum=1)
    n = _int_param(config.params, "n", minimum=1, default=1)
    numeric = _parse_bool(config.params.get("numeric", False), "numeric")
    certificate = verify_alignment_symbolic(K, R, n)
    gamma, mu = gamma_mu(K, R, n, mu_cap=None)
    document: Dict[str, Any] = {
        "command": "simo-align",
        "K": K,
        "R": R,
        "n": n,
        "gamma": gamma,
        "mu": mu,
        "achieved_dof": fraction_to_str(achieved_dof(K, R, n)),
        "epsilon_n": fraction_to_str(epsilon_n(K, R, n)),
        "per_user_dof": list(per_user_dof(K, R, n)),
        "symbolic": certificate_to_dict(certificate),
        "numeric": None,
    }
    passed = certificate.passed
    status = _verdict(passed)
    text = None
    if numeric and mu > config.mu_cap:
        LOGGER.warning("Extension above cap, numeric check skipped", extra={"mu": mu, "mu_cap": config.mu_cap})
        status = f"symbolic-only: {status}"
    elif numeric:
        precoders, t_family, ext = _build_simo(K, R, n, config.seed, config.mu_cap)
        residual = column_match_residual(precoders, t_family)
        report = verify_alignment_numeric(precoders, ext, config.tolerance)
        exact = verify_alignment_exact(K, R, n, seed=config.seed, mu_cap=config.mu_cap)
        if not report.passed:
            LOGGER.warning(
                "Float64 ranks fall short, verdict rests on the exact check",
                extra={"mu": mu, "failures": list(report.failures)},
            )
        document["numeric"] = {
            "v1_columns": precoders.V1.shape[1],
            "v2_columns": precoders.V2.shape[1],
            "column_match_residual": residual,
            "max_condition": t_family.max_condition,
            "float_certified": report.passed,
            "report": report_to_dict(report),
            "exact": report_to_dict(exact),
        }
        passed = passed and exact.passed and residual < COLUMN_MATCH_LIMIT
        status = _verdict(passed)
        text = render_report(exact)
    document["status"] = status
    return CommandResult(document=document, passed=passed, text=text)


def _mimo_system(scheme: str, R: int, M: int, users: int, seed: int) -> Tuple[SystemConfig, int]:
    """Return the channel configuration and slot count a MIMO scheme runs on."""
    if scheme == "zf":
        return SystemConfig(K=max(R, users, 2), M=M, N=R * M, variation=ChannelVariation.CONSTANT, seed=seed), 1
    slots = extension_length(R, M) if scheme in ("theorem5", "example2") else 1
    return SystemConfig(K=R + 2, M=M, N=R * M, variation=ChannelVariation.CONSTANT, seed=seed), slots


def _load_channels(path: str, expected: SystemConfig, slots: int) -> ChannelSet:
    """Read a channel dump and check it fits the requested scheme."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ChannelDumpError(f"cannot read channel dump {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ChannelDumpError(f"channel dump {path} is not JSON: {exc}") from exc
    channels = channels_from_json(document)
    cfg = channels.config
    if (cfg.K, cfg.M, cfg.N, cfg.variation) != (expected.K, expected.M, expected.N, expected.variation):
        raise ChannelDumpError(
            f"channel dump holds K={cfg.K}, M={cfg.M}, N={cfg.N}, {cfg.variation.value}; "
            f"expected K={expected.K}, M={expected.M}, N={expected.N}, {expected.variation.value}"
        )
    if channels.slots < slots:
        raise ChannelDumpError(f"channel dump holds {channels.slots} slots, scheme needs {slots}")
    return channels


def _build_mimo(scheme: str, channels: ChannelSet, R: int, M: int, users: int) -> PrecoderSet:
    builders: Dict[str, Callable[[], PrecoderSet]] = {
        "theorem4": lambda: build_theorem4(channels, R, M, allow_fallback=True),
        "theorem5": lambda: build_theorem5(channels, R, M),
        "example1": lambda: build_example1(channels),
        "example2": lambda: build_example2(channels),
        "zf": lambda: build_zero_forcing(channels, users),
    }
    return builders[scheme]()


def _mimo_params(
    params: Mapping[str, Any], schemes: Sequence[str], default: str = "theorem4"
) -> Tuple[str, int, int, int]:
    """Return (scheme, R, M, users) with the fixed example1 and example2 shapes filled in."""
    scheme = str(params.get("scheme", default)).strip().lower()
    if scheme not in schemes:
        raise ConfigError(f"unknown scheme {scheme!r}; choose from {', '.join(schemes)}")
    defaults = {"example1": (2, 4), "example2": (2, 2)}
    if scheme in defaults:
        R, M = defaults[scheme]
    else:
        R = _int_param(params, "R", minimum=1, default=2)
        M = _int_param(params, "M", minimum=1, default=R + 2)
    users = _int_param(params, "K", minimum=1, default=R)
    return scheme, R, M, users


def _prepare_mimo(config: RunConfig, default: str = "theorem4") -> Tuple[str, PrecoderSet]:
    scheme, R, M, users = _mimo_params(config.params, MIMO_SCHEMES, default)
    system, slots = _mimo_system(scheme, R, M, users, config.seed)
    channels_path = config.params.get("channels")
    if channels_path:
        channels = _load_channels(str(channels_path), system, slots)
    else:
        channels = sample_channels(system, slots)
    dump_path = config.params.get("dump_channels")
    if dump_path:
        Path(str(dump_path)).write_text(dumps(channels_to_json(channels)), encoding="utf-8")
        LOGGER.info("Wrote channel dump", extra={"path": str(dump_path)})
    return scheme, _build_mimo(scheme, channels, R, M, users)


def cmd_mimo_align(config: RunConfig) -> CommandResult:
    """Build one constant-channel scheme and rank-check every receiver."""
    _, precoders = _prepare_mimo(config)
    report = verify_precoders(precoders, config.tolerance)
    document: Dict[str, Any] = {
        "command": "mimo-align",
        "precoders": precoders_to_dict(precoders),
        "report": report_to_dict(report),
    }
    if report.passed:
        filters = zf_filters(precoders, report=report)
        document["max_leakage"] = max(f.leakage for f in filters)
    return CommandResult(document=document, passed=report.passed, text=render_report(report))


def _grid_param(value: Any) -> Tuple[float, ...]:
    """Accept a list of dB values or a "start:stop:step" string (stop inclusive)."""
    if value is None:
        return DEFAULT_SNR_GRID_DB
    if isinstance(value, str):
        try:
            start, stop, step = (float(part) for part in value.split(":"))
        except ValueError as exc:
            raise ConfigError(f"grid must be start:stop:step, got {value!r}") from exc
        if step <= 0:
            raise ConfigError("grid step must be positive")
        return tuple(float(v) for v in np.arange(start, stop + step / 2, step))
    if isinstance(value, (list, tuple)):
        return tuple(_require_float(v, "grid point", positive=False) for v in value)
    raise ConfigError(f"grid must be a list or start:stop:step, got {value!r}")


def cmd_dof_sweep(config: RunConfig) -> CommandResult:
    """Sweep the sum rate of one scheme and fit the high-SNR slope.

    SIMO sweeps default to a higher grid: the monomial precoders have a large
    noise gain, so the slope only settles well above 60 dB.
    """
    scheme = str(config.params.get("scheme", "zf")).strip().lower()
    if scheme not in SWEEP_SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; choose from {', '.join(SWEEP_SCHEMES)}")
    raw_grid = config.params.get("grid")
    if raw_grid is None and scheme == "simo":
        raw_grid = list(SIMO_SNR_GRID_DB)
    try:
        grid = validate_grid(_grid_param(raw_grid))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if scheme == "simo":
        K = _int_param(config.params, "K", minimum=2, default=3)
        R = _int_param(config.params, "R", minimum=1, default=1)
        n = _int_param(config.params, "n", minimum=1, default=1)
        simo, _, ext = _build_simo(K, R, n, config.seed, config.mu_cap)
        precoders = simo.as_precoder_set(ext)
    else:
        _, precoders = _prepare_mimo(config, default="zf")
    result = dof_slope(precoders, grid)
    document: Dict[str, Any] = {"command": "dof-sweep", "allocation": list(precoders.allocation)}
    document.update(sweep_to_dict(result))
    return CommandResult(document=document, passed=True, csv=sweep_to_csv(result))


def _bound_checks() -> List[Tuple[str, bool]]:
    """Closed-form values and the bound invariants over the small exhaustive grid."""
    checks = [
        ("outerbound(4,1,2)=8/3", outerbound(4, 1, 2) == Fraction(8, 3)),
        ("outerbound(3,2,2)=3", outerbound(3, 2, 2) == 3),
        ("innerbound(3,2,1)=2", innerbound(3, 2, 1) == 2),
    ]
    merged_ok = all(
        two_user_mimo_dof(ratio(M, N) * M, ratio(M, N) * N, M, N) == max(M, N)
        for M in range(1, 5)
        for N in range(1, 5)
        if ratio(M, N) in (2, 3, 4)
    )
    checks.append(("two_user_mimo_dof(RM,RN,M,N)=max(M,N)", merged_ok))
    ordered = symmetric = True
    for K in range(1, 13):
        for M in range(1, 9):
            for N in range(1, 9):
                ordered = ordered and innerbound(K, M, N) <= outerbound(K, M, N)
                symmetric = symmetric and (
                    innerbound(K, M, N) == innerbound(K, N, M) and outerbound(K, M, N) == outerbound(K, N, M)
                )
    checks.append(("inner<=outer", ordered))
    checks.append(("antenna-swap symmetry", symmetric))
    return checks


def default_jobs(sweep: bool = False) -> Tuple[Job, ...]:
    """Return the acceptance matrix; ``sweep`` adds slope checks to the ZF and example jobs."""
    jobs: List[Job] = [Job(name="bounds", kind="bounds", params={})]
    for R in range(1, 4):
        for K in range(R + 2, R + 5):
            for n in range(1, 4):
                jobs.append(Job(name=f"simo-symbolic K={K} R={R} n={n}", kind="simo", params={"K": K, "R": R, "n": n}))
    jobs.append(
        Job(
            name="simo-numeric K=3 R=1 n=1",
            kind="simo",
            params={"K": 3, "R": 1, "n": 1, "numeric": True},
            grid=SIMO_SNR_GRID_DB if sweep else None,
            band=0.3,
        )
    )
    jobs.append(Job(name="simo-exact K=4 R=2 n=1", kind="simo", params={"K": 4, "R": 2, "n": 1, "exact": True}))
    jobs.append(Job(name="simo-numeric K=5 R=2 n=1", kind="simo", params={"K": 5, "R": 2, "n": 1, "numeric": True}))
    grid = DEFAULT_SNR_GRID_DB if sweep else None
    mimo = [
        ("theorem4 R=2 M=4", {"scheme": "theorem4", "R": 2, "M": 4}, None, None),
        ("theorem4 R=3 M=5", {"scheme": "theorem4", "R": 3, "M": 5}, None, None),
        ("example1", {"scheme": "example1"}, grid, 0.3),
        ("theorem5 R=2 M=2", {"scheme": "theorem5", "R": 2, "M": 2}, None, None),
        ("theorem5 R=2 M=3", {"scheme": "theorem5", "R": 2, "M": 3}, None, None),
        ("example2", {"scheme": "example2"}, grid, 0.2),
        ("zf K=2 M=1 N=2", {"scheme": "zf", "R": 2, "M": 1, "K": 2}, grid, 0.1),
    ]
    for name, params, grid, band in mimo:
        jobs.append(Job(name=name, kind="mimo", params=params, grid=grid, band=band))
    return tuple(jobs)


def _diagnostics_ok(precoders: PrecoderSet) -> bool:
    limits = {"eigen_principal_angle": EIGEN_ANGLE_LIMIT, "chain_residual": CHAIN_RESIDUAL_LIMIT}
    return all(precoders.diagnostics.get(key, 0.0) < limit for key, limit in limits.items())


def _check_precoders(job: Job, precoders: PrecoderSet, config: RunConfig, details: Dict[str, Any]) -> bool:
    """Rank-check, build ZF filters, and sweep when the job carries a grid."""
    report = verify_precoders(precoders, config.tolerance)
    details["allocation"] = list(precoders.allocation)
    details["total_dof"] = fraction_to_str(precoders.total_dof)
    details["failures"] = list(report.failures)
    details["flags"] = list(precoders.flags)
    details.update({key: float(value) for key, value in precoders.diagnostics.items()})
    passed = report.passed and _diagnostics_ok(precoders)
    if not passed:
        return False
    filters = zf_filters(precoders, report=report)
    leakage = max(f.leakage for f in filters)
    details["max_leakage"] = leakage
    passed = leakage < LEAKAGE_LIMIT
    if passed and job.grid is not None:
        result = dof_slope(precoders, job.grid, filters)
        details["slope"] = result.slope_estimate
        details["predicted_dof"] = fraction_to_str(result.predicted_dof)
        passed = abs(result.slope_estimate - float(result.predicted_dof)) <= (job.band or 0.0)
    return passed


def _run_simo_job(job: Job, config: RunConfig) -> JobResult:
    K, R, n = (int(job.params[key]) for key in ("K", "R", "n"))
    certificate = verify_alignment_symbolic(K, R, n)
    details: Dict[str, Any] = {"increments_checked": certificate.increments_checked}
    passed = certificate.passed
    exact = bool(job.params.get("exact"))
    if not (job.params.get("numeric") or exact):
        return JobResult(name=job.name, passed=passed, status=_verdict(passed), details=details)
    try:
        simo, t_family, ext = _build_simo(K, R, n, config.seed, config.mu_cap)
    except CapExceededError as exc:
        details["mu"] = exc.mu
        return JobResult(name=job.name, passed=passed, status=f"symbolic-only: {_verdict(passed)}", details=details)
    residual = column_match_residual(simo, t_family)
    details["column_match_residual"] = residual
    details["achieved_dof"] = fraction_to_str(achieved_dof(K, R, n))
    passed = passed and residual < COLUMN_MATCH_LIMIT
    if exact:
        report = verify_alignment_exact(K, R, n, seed=config.seed, mu_cap=config.mu_cap)
        details["failures"] = list(report.failures)
        details["joint_ranks"] = [receiver.joint_rank for receiver in report.receivers]
        passed = passed and report.passed
    else:
        passed = _check_precoders(job, simo.as_precoder_set(ext), config, details) and passed
    return JobResult(name=job.name, passed=passed, status=_verdict(passed), details=details)


def _run_mimo_job(job: Job, config: RunConfig) -> JobResult:
    scheme, R, M, users = _mimo_params(job.params, MIMO_SCHEMES)
    system, slots = _mimo_system(scheme, R, M, users, config.seed)
    precoders = _build_mimo(scheme, sample_channels(system, slots), R, M, users)
    details: Dict[str, Any] = {}
    passed = _check_precoders(job, precoders, config, details)
    return JobResult(name=job.name, passed=passed, status=_verdict(passed), details=details)


def run_job(job: Job, config: RunConfig) -> JobResult:
    """Run one job; module errors become a failed result carrying the job's context."""
    try:
        if job.kind == "bounds":
            checks = _bound_checks()
            failed = [label for label, ok in checks if not ok]
            details = {"checks": len(checks), "failed": failed}
            return JobResult(name=job.name, passed=not failed, status=_verdict(not failed), details=details)
        if job.kind == "simo":
            return _run_simo_job(job, config)
        if job.kind == "mimo":
            return _run_mimo_job(job, config)
        raise ConfigError(f"unknown job kind {job.kind!r}")
    except (IaError, ValueError, np.linalg.LinAlgError) as exc:
        LOGGER.error("Job %s failed: %s", job.name, exc)
        return JobResult(name=job.name, passed=False, status="error", details=dict(job.params), error=str(exc))


def run_jobs(jobs: Sequence[Job], config: RunConfig) -> List[JobResult]:
    """Run jobs on a bounded pool; results come back in submission order."""
    if config.workers == 1:
        return [run_job(job, config) for job in jobs]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda job: run_job(job, config), jobs))


def cmd_verify_all(config: RunConfig) -> CommandResult:
    """Run the acceptance matrix and summarize."""
    jobs = default_jobs(sweep=_parse_bool(config.params.get("sweep", False), "sweep"))
    results = run_jobs(jobs, config)
    passed = all(result.passed for result in results)
    document = {
        "command": "verify-all",
        "passed": passed,
        "jobs": [
            {
                "name": result.name,
                "passed": result.passed,
                "status": result.status,
                "details": dict(result.details),
                "error": result.error,
            }
            for result in results
        ],
    }
    LOGGER.info("Verification matrix finished", extra={"jobs": len(results), "passed": passed})
    return CommandResult(document=document, passed=passed, text=render_summary(results))


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "bounds": cmd_bounds,
    "simo-align": cmd_simo_align,
    "mimo-align": cmd_mimo_align,
    "dof-sweep": cmd_dof_sweep,
    "verify-all": cmd_verify_all,
}


def render_output(config: RunConfig, result: CommandResult) -> str:
    """Return the text written to --out or stdout."""
    if config.fmt is OutputFormat.CSV and result.csv is not None:
        return result.csv
    document = dict(result.document)
    document["run"] = config.to_dict()
    document["passed"] = result.passed
    if not config.deterministic:
        document["timestamp"] = datetime.now(timezone.utc).isoformat()
    return dumps(document)


def run(config: RunConfig) -> int:
    """Execute the configured command, write its output and return the exit code."""
    LOGGER.info("Starting run", extra={"command": config.command, "seed": config.seed, "workers": config.workers})
    result = COMMAND_HANDLERS[config.command](config)
    output = render_output(config, result)
    if config.out:
        Path(config.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    if result.text:
        sys.stderr.write(result.text + "\n")
    return 0 if result.passed else 1


def _verdict(passed: bool) -> str:
    return "pass" if passed else "fail"


def _int_param(params: Mapping[str, Any], key: str, minimum: int, default: Optional[int] = None) -> int:
    """Return an integer subcommand parameter, falling back to ``default``."""
    value = params.get(key)
    if value is None:
        if default is None:
            raise ConfigError(f"--{key} is required")
        return default
    return _require_int(value, key, minimum)


def _require_int(value: Any, label: str, minimum: int) -> int:
    """Return an int >= minimum or raise."""
    if isinstance(value, bool):
        raise ConfigError(f"{label} must be an integer")
    try:
        parsed = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label} must be an integer") from exc
    if parsed < minimum:
        raise ConfigError(f"{label} must be >= {minimum}")
    return parsed


def _require_float(value: Any, label: str, positive: bool = True) -> float:
    """Return a float (positive unless told otherwise) or raise."""
    try:
        parsed = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label} must be a number") from exc
    if positive and not parsed > 0:
        raise ConfigError(f"{label} must be positive")
    return parsed


def _parse_bool(value: Any, label: str) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ConfigError(f"{label} must be a boolean, got {value!r}")


def _parse_format(value: Any) -> OutputFormat:
    if isinstance(value, OutputFormat):
        return value
    try:
        return OutputFormat(str(value).strip().lower())
    except ValueError as exc:
        raise ConfigError(f"format must be json or csv, got {value!r}") from exc


def _optional_str(value: Any) -> Optional[str]:
    if value is None or value == "":
        return None
    return str(value)
