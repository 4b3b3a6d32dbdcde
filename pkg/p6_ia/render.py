"""Terminal rendering for alignment reports and batch summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from p6_ia.models import JobResult
from p6_ia.verify import AlignmentReport, ReceiverReport


@dataclass(slots=True, frozen=True)
class TableRow:
    """Single row of a rendered table."""

    label: str
    values: Sequence[str]


def _verdict(passed: bool) -> str:
    return "pass" if passed else "FAIL"


def _format_receiver(report: ReceiverReport) -> TableRow:
    """Format one receiver's rank figures."""
    return TableRow(
        f"rx {report.receiver}",
        [
            f"d={report.streams}",
            f"interf {report.interference_rank}/{report.interference_bound} ({report.aligned} aligned)",
            f"desired {report.desired_rank}",
            f"joint {report.joint_rank}",
            _verdict(report.passed),
        ],
    )


def render_report(report: AlignmentReport) -> str:
    """Render an alignment report as a human-readable table string."""
    precision = "exact" if report.tolerance == 0.0 else f"tol {report.tolerance:g}"
    lines = [f"[{report.scheme.value}] {_verdict(report.passed)} ({precision})"]
    lines.extend(_render_rows(_format_receiver(receiver) for receiver in report.receivers))
    return "\n".join(lines)


def render_summary(results: Sequence[JobResult]) -> str:
    """Render one line per job followed by the pass count."""
    rows = [
        TableRow(result.name, [result.status if result.error is None else f"{result.status}: {result.error}"])
        for result in results
    ]
    passed = sum(1 for result in results if result.passed)
    lines = _render_rows(rows, width=28)
    lines.append(f"passed {passed}/{len(results)}")
    return "\n".join(lines)


def _render_rows(rows: Iterable[TableRow], width: int = 10) -> list[str]:
    """Render a list of rows using padded columns."""
    rendered = []
    for row in rows:
        values = " | ".join(row.values)
        rendered.append(f"{row.label:<{width}} {values}")
    return rendered
