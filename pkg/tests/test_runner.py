"""Tests for run configuration, subcommands and the batch verifier."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from p6_ia.channel import SystemConfig, sample_channels
from p6_ia.codec import channels_to_json, dumps
from p6_ia.enums import ChannelVariation, OutputFormat
from p6_ia.errors import ChannelDumpError, ConfigError
from p6_ia.runner import (
    DEFAULT_SEED,
    Job,
    RunConfig,
    build_run_config,
    cmd_bounds,
    cmd_dof_sweep,
    cmd_mimo_align,
    cmd_simo_align,
    default_jobs,
    env_overrides,
    load_config,
    run,
    run_job,
    run_jobs,
)


class TestRunConfig:
    """Test suite for run configuration merging."""

    def test_defaults(self) -> None:
        """A bare command should pick up the documented defaults."""
        config = build_run_config("bounds")
        assert config.seed == DEFAULT_SEED
        assert config.fmt is OutputFormat.JSON
        assert config.workers == 1
        assert not config.deterministic

    def test_precedence(self) -> None:
        """Flags beat the environment, which beats the config file."""
        config = build_run_config(
            "bounds",
            params={"K": 4, "M": None},
            file_config={"seed": 1, "workers": 2, "tolerance": 1e-9, "bounds": {"K": 3, "M": 1}},
            environ={"P6_IA_SEED": "2", "P6_IA_WORKERS": "3", "P6_IA_DETERMINISTIC": "yes"},
            flags={"seed": "5", "workers": None},
        )
        assert config.seed == 5
        assert config.workers == 3
        assert config.tolerance == 1e-9
        assert config.deterministic
        assert dict(config.params) == {"K": 4, "M": 1}

    def test_round_trip(self) -> None:
        """to_dict and from_dict should give back an equal config."""
        config = RunConfig(command="dof-sweep", params={"scheme": "zf"}, seed=3, fmt=OutputFormat.CSV, workers=2)
        assert RunConfig.from_dict(config.to_dict()) == config

    @pytest.mark.parametrize(
        ("flags", "message"),
        [
            ({"format": "csv"}, "csv output"),
            ({"format": "xml"}, "json or csv"),
            ({"workers": "0"}, "workers"),
            ({"seed": "-1"}, "seed"),
            ({"tolerance": "0"}, "tolerance"),
            ({"deterministic": "maybe"}, "boolean"),
        ],
    )
    def test_invalid_settings(self, flags: dict[str, str], message: str) -> None:
        """Bad settings should raise ConfigError naming the setting."""
        with pytest.raises(ConfigError, match=message):
            build_run_config("bounds", flags=flags)

    def test_unknown_command(self) -> None:
        """Only the five subcommands are accepted."""
        with pytest.raises(ConfigError, match="unknown command"):
            RunConfig(command="align")

    def test_env_overrides_ignore_other_variables(self) -> None:
        """Only prefixed settings should be picked up."""
        assert env_overrides({"P6_IA_SEED": "9", "SEED": "1", "P6_IA_OTHER": "x"}) == {"seed": "9"}


class TestLoadConfig:
    """Test suite for config file loading."""

    def test_missing_file_is_empty(self, tmp_path: Path) -> None:
        """A missing config file should behave like an empty one."""
        assert load_config(str(tmp_path / "absent.json")) == {}

    def test_invalid_json(self, tmp_path: Path) -> None:
        """Broken JSON should raise ConfigError."""
        path = tmp_path / "config.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError, match="Invalid JSON"):
            load_config(str(path))

    def test_non_object(self, tmp_path: Path) -> None:
        """A JSON list is not a config."""
        path = tmp_path / "config.json"
        path.write_text("[1]", encoding="utf-8")
        with pytest.raises(ConfigError, match="object"):
            load_config(str(path))


def test_cmd_bounds() -> None:
    """Bounds should come back as p/q strings with the inner scheme."""
    result = cmd_bounds(build_run_config("bounds", params={"K": 4, "M": 1, "N": 2}))
    assert result.passed
    assert result.document["outer"] == "8/3"
    assert result.document["inner"] == "8/3"
    assert result.document["tight"] is True
    assert result.document["inner_scheme"] == "simo_reduction"


def test_cmd_bounds_requires_all_dimensions() -> None:
    """A missing dimension should be a configuration error."""
    with pytest.raises(ConfigError, match="--N is required"):
        cmd_bounds(build_run_config("bounds", params={"K": 4, "M": 1}))


class TestSimoAlign:
    """Test suite for the simo-align command."""

    def test_symbolic_only_above_cap(self) -> None:
        """A numeric request above the cap should fall back to the symbolic verdict."""
        config = build_run_config("simo-align", params={"K": 4, "R": 2, "numeric": True}, flags={"mu_cap": 100})
        result = cmd_simo_align(config)
        assert result.passed
        assert result.document["status"] == "symbolic-only: pass"
        assert result.document["numeric"] is None
        assert result.document["mu"] == 768

    def test_numeric_small_instance(self) -> None:
        """K=3, R=1 should pass both checks and render a report."""
        config = build_run_config("simo-align", params={"K": 3, "R": 1, "n": 1, "numeric": True})
        result = cmd_simo_align(config)
        assert result.passed
        assert result.document["status"] == "pass"
        assert result.document["numeric"]["v1_columns"] == 8
        assert result.document["numeric"]["float_certified"] is True
        assert result.document["numeric"]["exact"]["passed"] is True
        assert result.document["numeric"]["exact"]["tolerance"] == 0.0
        assert result.text is not None and result.text.startswith("[simo] pass (exact)")

    def test_symbolic_default(self) -> None:
        """Without --numeric only the certificate is produced."""
        result = cmd_simo_align(build_run_config("simo-align", params={"K": 5, "R": 2, "n": 2}))
        assert result.passed
        assert result.document["gamma"] == 20
        assert result.document["mu"] == 3 * 3**20
        assert result.document["symbolic"]["passed"] is True
        assert result.text is None


class TestMimoAlign:
    """Test suite for the mimo-align command."""

    def test_example1(self) -> None:
        """Example 1 should pass with negligible leakage."""
        result = cmd_mimo_align(build_run_config("mimo-align", params={"scheme": "example1"}))
        assert result.passed
        assert result.document["precoders"]["allocation"] == [2, 2, 2, 3]
        assert result.document["max_leakage"] < 1e-8

    def test_dump_then_load(self, tmp_path: Path) -> None:
        """Loading a dump should reproduce the run that wrote it."""
        path = tmp_path / "channels.json"
        first = cmd_mimo_align(
            build_run_config("mimo-align", params={"scheme": "example2", "dump_channels": str(path)}, flags={"seed": 4})
        )
        second = cmd_mimo_align(
            build_run_config("mimo-align", params={"scheme": "example2", "channels": str(path)}, flags={"seed": 99})
        )
        assert first.document["report"] == second.document["report"]
        assert first.document["precoders"]["diagnostics"] == second.document["precoders"]["diagnostics"]

    def test_corrupted_dump(self, tmp_path: Path) -> None:
        """A truncated dump should raise ChannelDumpError."""
        path = tmp_path / "channels.json"
        path.write_text('{"config": {"K": 4', encoding="utf-8")
        with pytest.raises(ChannelDumpError, match="not JSON"):
            cmd_mimo_align(build_run_config("mimo-align", params={"scheme": "example1", "channels": str(path)}))

    def test_mismatched_dump(self, tmp_path: Path) -> None:
        """A dump for another system should be refused."""
        path = tmp_path / "channels.json"
        channels = sample_channels(SystemConfig(K=4, M=2, N=4, variation=ChannelVariation.CONSTANT, seed=1), 2)
        path.write_text(dumps(channels_to_json(channels)), encoding="utf-8")
        with pytest.raises(ChannelDumpError, match="expected K=4, M=4, N=8"):
            cmd_mimo_align(build_run_config("mimo-align", params={"scheme": "example1", "channels": str(path)}))

    def test_unknown_scheme(self) -> None:
        """An unknown scheme name should be a configuration error."""
        with pytest.raises(ConfigError, match="unknown scheme"):
            cmd_mimo_align(build_run_config("mimo-align", params={"scheme": "simo"}))


class TestDofSweep:
    """Test suite for the dof-sweep command."""

    def test_default_zero_forcing(self) -> None:
        """The default sweep should zero force two users and produce CSV."""
        result = cmd_dof_sweep(build_run_config("dof-sweep", params={"R": 2, "M": 1}))
        assert result.document["scheme"] == "zero_forcing"
        assert abs(result.document["slope"] - 2.0) <= 0.1
        assert result.csv is not None
        assert result.csv.splitlines()[0] == "snr_db,sum_rate_bits,scheme,seed"

    def test_grid_string(self) -> None:
        """A start:stop:step grid should include its stop value."""
        config = build_run_config("dof-sweep", params={"R": 2, "M": 1, "grid": "40:70:10"})
        assert cmd_dof_sweep(config).document["snr_grid_db"] == [40.0, 50.0, 60.0, 70.0]

    def test_simo_defaults_to_high_grid(self) -> None:
        """A SIMO sweep without a grid should use the high grid and land near 17/16."""
        result = cmd_dof_sweep(build_run_config("dof-sweep", params={"scheme": "simo"}))
        assert result.document["snr_grid_db"] == [100.0, 120.0, 140.0, 160.0, 180.0, 200.0]
        assert result.document["predicted_dof"] == "17/16"
        assert abs(result.document["slope"] - 17 / 16) <= 0.3

    @pytest.mark.parametrize("grid", ["30:40:10", "1:2", "60:100:-5"])
    def test_bad_grid(self, grid: str) -> None:
        """Short, malformed or descending grids should be rejected."""
        with pytest.raises(ConfigError):
            cmd_dof_sweep(build_run_config("dof-sweep", params={"grid": grid}))


class TestBatch:
    """Test suite for the verification matrix."""

    def test_default_matrix_contents(self) -> None:
        """The matrix should hold the bounds job, 27 symbolic jobs and the numeric checks."""
        jobs = default_jobs()
        names = [job.name for job in jobs]
        assert names[0] == "bounds"
        assert sum(1 for name in names if name.startswith("simo-symbolic")) == 27
        assert "example1" in names and "example2" in names
        assert all(job.grid is None for job in jobs)
        assert any(job.grid is not None for job in default_jobs(sweep=True))

    def test_bounds_job_passes(self) -> None:
        """The closed-form and exhaustive bound checks should all hold."""
        result = run_job(Job(name="bounds", kind="bounds", params={}), build_run_config("verify-all"))
        assert result.passed
        assert result.details["failed"] == []

    def test_capped_numeric_job(self) -> None:
        """The K=5 SIMO job should report a symbolic-only pass."""
        job = next(job for job in default_jobs() if job.name == "simo-numeric K=5 R=2 n=1")
        result = run_job(job, build_run_config("verify-all"))
        assert result.passed
        assert result.status == "symbolic-only: pass"

    def test_every_default_job_passes(self) -> None:
        """The whole acceptance matrix, slope checks included, should pass."""
        results = run_jobs(default_jobs(sweep=True), build_run_config("verify-all", flags={"workers": 2}))
        failed = [(result.name, result.status, result.error) for result in results if not result.passed]
        assert failed == []
        exact = next(result for result in results if result.name == "simo-exact K=4 R=2 n=1")
        assert exact.details["failures"] == []
        assert exact.details["joint_ranks"] == [1536, 1536, 1536, 1536]

    def test_errors_become_results(self) -> None:
        """A job that raises should come back as an error result with its params."""
        job = Job(name="bad", kind="mimo", params={"scheme": "theorem5", "R": 2, "M": 4})
        result = run_job(job, build_run_config("verify-all"))
        assert not result.passed
        assert result.status == "error"
        assert result.error
        assert result.details["M"] == 4

    def test_order_independent_of_workers(self) -> None:
        """Results should come back in submission order for any pool size."""
        jobs = [job for job in default_jobs() if job.kind != "simo" or not {"numeric", "exact"} & set(job.params)][:8]
        jobs.append(Job(name="zf", kind="mimo", params={"scheme": "zf", "R": 2, "M": 1, "K": 2}))
        serial = run_jobs(jobs, build_run_config("verify-all", flags={"workers": 1}))
        pooled = run_jobs(jobs, build_run_config("verify-all", flags={"workers": 2}))
        assert [r.name for r in pooled] == [job.name for job in jobs]
        assert [(r.name, r.passed, r.status) for r in serial] == [(r.name, r.passed, r.status) for r in pooled]


class TestRun:
    """Test suite for command execution and output."""

    def test_deterministic_output(self, tmp_path: Path) -> None:
        """Two deterministic runs should write identical bytes."""
        outputs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            config = build_run_config(
                "bounds",
                params={"K": 4, "M": 2, "N": 3},
                flags={"deterministic": True, "out": str(path)},
            )
            assert run(config) == 0
            outputs.append(path.read_bytes())
        first = json.loads(outputs[0])
        assert outputs[0] != b""
        assert "timestamp" not in first
        assert first["passed"] is True
        assert first["tight"] is False
        assert first["inner"] == "4/1"
        assert first["outer"] == "6/1"

    def test_timestamp_without_deterministic(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Non-deterministic runs should stamp the output."""
        assert run(build_run_config("bounds", params={"K": 2, "M": 1, "N": 1})) == 0
        document = json.loads(capsys.readouterr().out)
        assert "timestamp" in document
        assert document["run"]["command"] == "bounds"

    def test_csv_to_stdout(self, capsys: pytest.CaptureFixture[str]) -> None:
        """CSV sweeps should print only the table on stdout."""
        config = build_run_config("dof-sweep", params={"R": 2, "M": 1}, flags={"format": "csv"})
        assert run(config) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "snr_db,sum_rate_bits,scheme,seed"
        assert len(lines) == 6
