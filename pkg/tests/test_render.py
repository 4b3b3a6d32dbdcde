"""Tests for terminal rendering."""

from __future__ import annotations

from p6_ia.enums import Scheme
from p6_ia.models import JobResult
from p6_ia.render import render_report, render_summary
from p6_ia.verify import AlignmentReport, ReceiverReport


def _receiver(receiver: int, joint_rank: int) -> ReceiverReport:
    return ReceiverReport(
        receiver=receiver,
        streams=2,
        interference_count=7,
        interference_rank=6,
        interference_bound=6,
        desired_rank=2,
        joint_rank=joint_rank,
    )


def test_render_report_lists_receivers() -> None:
    """Rendered reports should carry the scheme, verdict and rank figures."""
    report = AlignmentReport(scheme=Scheme.EXAMPLE1, receivers=(_receiver(1, 8), _receiver(2, 8)), tolerance=1e-10)
    output = render_report(report)
    assert output.splitlines()[0] == "[example1] pass (tol 1e-10)"
    assert "rx 1" in output
    assert "interf 6/6 (1 aligned)" in output
    assert "joint 8" in output


def test_render_exact_report() -> None:
    """A zero tolerance marks a report ranked without round-off."""
    report = AlignmentReport(scheme=Scheme.SIMO, receivers=(_receiver(1, 8),), tolerance=0.0)
    assert render_report(report).splitlines()[0] == "[simo] pass (exact)"


def test_render_report_marks_failures() -> None:
    """A rank-deficient receiver should show FAIL on its row and the header."""
    report = AlignmentReport(scheme=Scheme.THEOREM4, receivers=(_receiver(1, 8), _receiver(2, 7)), tolerance=1e-10)
    lines = render_report(report).splitlines()
    assert "FAIL" in lines[0]
    assert lines[2].endswith("FAIL")
    assert lines[1].endswith("pass")


def test_render_summary_counts_passes() -> None:
    """The summary should show every job and the pass count."""
    results = [
        JobResult(name="bounds", passed=True, status="pass"),
        JobResult(name="example2", passed=False, status="error", error="singular"),
    ]
    output = render_summary(results)
    assert "bounds" in output
    assert "error: singular" in output
    assert output.splitlines()[-1] == "passed 1/2"
