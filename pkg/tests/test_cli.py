"""Tests for the command-line entrypoint and its exit codes."""

from __future__ import annotations

import importlib.util
import json
from pathlib import Path
from types import ModuleType

import docopt
import pytest

SCRIPT = Path(__file__).resolve().parents[1] / "bin" / "script.py"


@pytest.fixture(scope="module")
def script() -> ModuleType:
    """Load bin/script.py as a module."""
    spec = importlib.util.spec_from_file_location("p6_ia_script", SCRIPT)
    assert spec is not None and spec.loader is not None
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture(autouse=True)
def isolated(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Run from an empty directory with no P6_IA_* variables set."""
    monkeypatch.chdir(tmp_path)
    for name in ("SEED", "OUT", "FORMAT", "MU_CAP", "TOLERANCE", "WORKERS", "DETERMINISTIC"):
        monkeypatch.delenv(f"P6_IA_{name}", raising=False)
    return tmp_path


def _main(script: ModuleType, argv: list[str]) -> int:
    return script.main(docopt.docopt(script.USAGE, argv=argv))


def test_bounds_writes_report(script: ModuleType, isolated: Path) -> None:
    """A bounds run should exit 0 and write the document."""
    out = isolated / "bounds.json"
    code = _main(script, ["bounds", "--K", "4", "--M", "1", "--N", "2", "--out", str(out), "--deterministic"])
    assert code == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["outer"] == "8/3"
    assert document["run"]["params"] == {"K": "4", "M": "1", "N": "2"}


def test_config_file_supplies_params(script: ModuleType, isolated: Path) -> None:
    """A command section in the config file should fill in missing options."""
    (isolated / "config.json").write_text(json.dumps({"bounds": {"M": 2, "N": 3}, "seed": 7}), encoding="utf-8")
    out = isolated / "bounds.json"
    assert _main(script, ["bounds", "--K", "4", "--M", "2", "--N", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["run"]["seed"] == 7


def test_csv_for_bounds_is_usage_error(script: ModuleType) -> None:
    """CSV is reserved for dof-sweep."""
    assert _main(script, ["bounds", "--K", "4", "--M", "1", "--N", "2", "--format", "csv"]) == 2


def test_invalid_config_file(script: ModuleType, isolated: Path) -> None:
    """Broken JSON in --config should exit 2."""
    path = isolated / "broken.json"
    path.write_text("{", encoding="utf-8")
    assert _main(script, ["bounds", "--K", "4", "--M", "1", "--N", "2", "--config", str(path)]) == 2


def test_invalid_environment(script: ModuleType, monkeypatch: pytest.MonkeyPatch) -> None:
    """A bad P6_IA_* value should exit 2."""
    monkeypatch.setenv("P6_IA_WORKERS", "0")
    assert _main(script, ["bounds", "--K", "4", "--M", "1", "--N", "2"]) == 2


def test_bad_parameter_value(script: ModuleType) -> None:
    """A non-integer dimension should exit 2."""
    assert _main(script, ["bounds", "--K", "four", "--M", "1", "--N", "2"]) == 2


def test_corrupted_channel_dump(script: ModuleType, isolated: Path) -> None:
    """An unreadable channel dump is a run failure, exit 1."""
    path = isolated / "channels.json"
    path.write_text("not json", encoding="utf-8")
    assert _main(script, ["mimo-align", "--scheme", "example1", "--channels", str(path)]) == 1


def test_simo_symbolic_only(script: ModuleType, isolated: Path) -> None:
    """A capped numeric request should still pass on the symbolic check."""
    out = isolated / "simo.json"
    code = _main(script, ["simo-align", "--K", "4", "--R", "2", "--numeric", "--mu-cap", "10", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8"))["status"] == "symbolic-only: pass"


def test_usage_error_from_docopt(script: ModuleType) -> None:
    """A missing required option should be rejected by the parser."""
    with pytest.raises(docopt.DocoptExit):
        docopt.docopt(script.USAGE, argv=["bounds", "--K", "4"])
