"""Reports: cost tables and checker verdicts, as rich text or JSON."""

import io
from collections.abc import Iterable
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field
from rich.console import Console
from rich.table import Table

from .experiment import ExperimentResult, ExperimentSummary, SweepPoint
from .register.state import ProtocolKind

REPORT_SCHEMA = "ratreg.report/1"

ReportFormat = Literal["table", "machine"]


class CostRow(BaseModel):
    """One row of the protocol cost comparison."""

    protocol: ProtocolKind
    detection: bool = Field(False, description="Row measured on the run where a misbehaving server forces detection")
    runs: int = 1
    messages_total: float = 0
    notifications: float = 0
    check_messages: float = 0
    fingerprint_ops: float = 0
    passed: int = 0


class Report(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_: Literal["ratreg.report/1"] = Field(REPORT_SCHEMA, alias="schema")
    title: str = ""
    summaries: list[ExperimentSummary] = Field(default_factory=list)
    costs: list[CostRow] = Field(default_factory=list)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def experiment_report(result: ExperimentResult, title: str | None = None) -> Report:
    summary = result.summary
    verdicts = result.verdicts
    n = max(len(verdicts), 1)
    row = CostRow(
        protocol=summary.protocol,
        detection=summary.detections > 0,
        runs=len(verdicts),
        messages_total=sum(v.cost.messages_total for v in verdicts) / n,
        notifications=sum(v.cost.notifications for v in verdicts) / n,
        check_messages=sum(v.cost.check_messages for v in verdicts) / n,
        fingerprint_ops=sum(v.cost.fingerprint_ops for v in verdicts) / n,
        passed=summary.passed,
    )
    return Report(title=title or summary.scenario, summaries=[summary], costs=[row])


def sweep_report(points: Iterable[SweepPoint], title: str = "protocol sweep") -> Report:
    rows = [
        CostRow(
            protocol=p.protocol,
            detection=p.attacked,
            messages_total=p.verdict.cost.messages_total,
            notifications=p.verdict.cost.notifications,
            check_messages=p.verdict.cost.check_messages,
            fingerprint_ops=p.verdict.cost.fingerprint_ops,
            passed=int(p.verdict.passed),
        )
        for p in points
    ]
    return Report(title=title, costs=rows)


def parse_report(text: str) -> Report:
    return Report.model_validate_json(text)


def _number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.2f}"


def _render_tables(report: Report, console: Console) -> None:
    if report.title:
        console.print(f"[bold]{report.title}[/bold]")
    if report.costs:
        table = Table(title="Cost per protocol", show_header=True, header_style="bold cyan")
        table.add_column("Protocol", style="cyan")
        table.add_column("Detection", justify="center")
        table.add_column("Runs", justify="right")
        table.add_column("Messages", justify="right")
        table.add_column("DETECTED", justify="right")
        table.add_column("Check msgs", justify="right")
        table.add_column("Fingerprints", justify="right")
        table.add_column("Passed", justify="right")
        for row in report.costs:
            table.add_row(
                row.protocol.value,
                "yes" if row.detection else "no",
                str(row.runs),
                _number(row.messages_total),
                _number(row.notifications),
                _number(row.check_messages),
                _number(row.fingerprint_ops),
                f"{row.passed}/{row.runs}",
            )
        console.print(table)

    for summary in report.summaries:
        table = Table(title=f"Checks: {summary.scenario} ({summary.protocol.value})", show_header=True, header_style="bold cyan")
        table.add_column("Check", style="cyan")
        table.add_column("Passed", justify="right")
        for name, passes in summary.check_passes.items():
            style = "green" if passes == summary.runs else "red"
            table.add_row(name, f"[{style}]{passes}/{summary.runs}[/{style}]")
        console.print(table)

        stats = Table(show_header=False, box=None)
        stats.add_column("Metric", style="bold")
        stats.add_column("Value", justify="right")
        stats.add_row("Runs passed", f"{summary.passed}/{summary.runs}")
        stats.add_row("Reads", str(summary.reads))
        stats.add_row("Aborts", str(summary.aborts))
        stats.add_row("Invalid reads", str(summary.invalid_reads))
        stats.add_row("Detections", str(summary.detections))
        stats.add_row("False positives", str(summary.false_positives))
        stats.add_row("Missed detections", str(summary.missed_detections))
        stats.add_row("Corrupted messages", str(summary.corrupted_messages))
        if summary.coin_flips:
            stats.add_row("Coin heads", f"{summary.coin_heads}/{summary.coin_flips} ({summary.coin_rate:.3f})")
        console.print(stats)


def emit_report(report: Report, fmt: ReportFormat = "table") -> str:
    """Render ``report``; the same report always renders to the same text."""
    if fmt == "machine":
        return report.to_json() + "\n"
    console = Console(record=True, width=120, file=io.StringIO(), color_system=None)
    _render_tables(report, console)
    return console.export_text()
