"""Command line interface for ratreg."""

import sys
from datetime import UTC, datetime
from pathlib import Path
from typing import NoReturn

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from . import __version__
from .checker.verdict import ALL_CHECKS, evaluate
from .config import RatregSettings
from .errors import RatregError, ScenarioError
from .experiment import run_experiment, sweep, sweep_base
from .game.payoffs import Belief, PayoffParams, Strategy, attack_threshold, best_response, expected_gain, loss_outweighs_gains
from .my_logging import setup_debug_logging
from .register.state import ProtocolKind
from .report import emit_report, experiment_report, sweep_report
from .run_history import RunHistory
from .scenario import Scenario, load_scenario, validate_scenario
from .simnet.trace import Trace

console = Console()

PROTOCOLS = [p.value for p in ProtocolKind]


def _fail(error: Exception) -> NoReturn:
    console.print(f"[red]Error: {error}[/red]")
    sys.exit(1)


def _open_history(settings: RatregSettings) -> RunHistory:
    path = settings.history_path
    if path != ":memory:":
        Path(path).parent.mkdir(parents=True, exist_ok=True)
    return RunHistory.open(path)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """ratreg - regular register emulation with rational malicious servers."""
    setup_debug_logging()


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--protocol", "-p", type=click.Choice(PROTOCOLS), help="Override the scenario protocol")
@click.option("--seed", "-s", type=int, help="Override the first seed")
@click.option("--runs", "-r", type=int, help="Override the number of seeded runs")
@click.option("--output-dir", "-o", type=click.Path(file_okay=False, path_type=Path), help="Write traces and verdicts here")
@click.option("--check", "checks", multiple=True, type=click.Choice(list(ALL_CHECKS)), help="Enable only these checks (repeatable)")
@click.option("--format", "fmt", type=click.Choice(["table", "machine"]), default="table", help="Report format")
@click.option("--workers", "-w", default=1, type=int, help="Run seeds in this many processes")
def run(
    scenario_path: Path,
    protocol: str | None,
    seed: int | None,
    runs: int | None,
    output_dir: Path | None,
    checks: tuple[str, ...],
    fmt: str,
    workers: int,
) -> None:
    """Run a scenario for a batch of seeds and check every run."""
    settings = RatregSettings.from_env()
    history: RunHistory | None = None
    try:
        scenario = load_scenario(scenario_path).with_overrides(
            protocol=protocol,
            seed=seed,
            runs=runs,
            output_dir=str(output_dir) if output_dir else None,
            checks=list(checks) or None,
        )
        history = _open_history(settings)
        out = Path(scenario.output_dir) if scenario.output_dir else settings.output_dir
        result = run_experiment(scenario, history=history, output_dir=out, keep_traces=False, workers=workers)
        click.echo(emit_report(experiment_report(result), "machine" if fmt == "machine" else "table"), nl=False)
    except RatregError as e:
        _fail(e)
    finally:
        if history is not None:
            history.close()
    if result.summary.passed < result.summary.runs:
        sys.exit(1)


@main.command("sweep")
@click.argument("scenario_path", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--servers", "-n", default=10, help="Servers in the default sweep scenario")
@click.option("--clients", "-c", default=1000, help="Clients in the default sweep scenario")
@click.option("--no-attack", is_flag=True, help="Skip the run that forces detection")
@click.option("--seed", "-s", type=int, help="Seed for every run")
@click.option("--format", "fmt", type=click.Choice(["table", "machine"]), default="table", help="Report format")
def sweep_command(scenario_path: Path | None, servers: int, clients: int, no_attack: bool, seed: int | None, fmt: str) -> None:
    """Compare message and fingerprint costs of p, pcv and phash."""
    try:
        base = load_scenario(scenario_path) if scenario_path else sweep_base(servers, clients)
        points = sweep(base, with_attack=not no_attack, seed=seed)
        click.echo(emit_report(sweep_report(points, title=base.name), "machine" if fmt == "machine" else "table"), nl=False)
    except RatregError as e:
        _fail(e)


@main.command()
@click.option("--gs", default=1.0, type=float, help="Server gain of an undetected attack (G_s)")
@click.option("--ds", default=1.0, type=float, help="Server loss when detected (D_s)")
@click.option("--gc", default=1.0, type=float, help="Client gain (G_c)")
@click.option("--dc", default=1.0, type=float, help="Client gain from a detection (D_c)")
@click.option("--theta", type=float, help="Belief that a request is risky")
@click.option("--clients", type=int, help="Estimated client count; theta = 1/clients")
def game(gs: float, ds: float, gc: float, dc: float, theta: float | None, clients: int | None) -> None:
    """Explore the game: expected gains, threshold and best response."""
    try:
        if theta is None and clients is None:
            raise ScenarioError("give --theta or --clients")
        payoffs = PayoffParams(gc, dc, gs, ds)
        belief = Belief(theta) if theta is not None else Belief.from_client_count(clients or 1)
        choice = best_response(belief, payoffs)

        table = Table(show_header=True, header_style="bold cyan")
        table.add_column("Strategy", style="cyan")
        table.add_column("Expected gain", justify="right")
        for strategy in Strategy:
            marker = " [green]← best[/green]" if strategy is choice else ""
            table.add_row(f"{strategy.value}{marker}", f"{expected_gain(strategy, belief, payoffs):.6f}")

        info = Text()
        info.append("theta: ", style="bold")
        info.append(f"{belief.theta:.6f}\n")
        info.append("attack threshold: ", style="bold")
        info.append(f"{attack_threshold(payoffs):.6f}\n")
        info.append("best response: ", style="bold")
        info.append(choice.value, style="red" if choice is Strategy.ATTACK else "green")
        if clients is not None:
            info.append("\nD_s > c*G_s: ", style="bold")
            info.append(str(loss_outweighs_gains(payoffs, clients)))
        console.print(Panel(info, title="Game", border_style="cyan"))
        console.print(table)
    except RatregError as e:
        _fail(e)


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["table", "machine"]), default="table", help="Verdict format")
def check(trace_path: Path, fmt: str) -> None:
    """Re-run every checker on a trace file."""
    try:
        trace = Trace.read(trace_path)
    except (OSError, ValueError) as e:
        _fail(e)
    try:
        if "scenario" not in trace.meta:
            raise ScenarioError("trace header carries no scenario")
        scenario: Scenario = validate_scenario(trace.meta["scenario"])
        verdict = evaluate(
            trace,
            timing=scenario.timing_params(),
            protocol=scenario.protocol,
            profiles=scenario.profile_map(),
            scenario=scenario.name,
            seed=int(trace.meta.get("seed", scenario.seed)),
            checks=tuple(scenario.checks),
        )
    except RatregError as e:
        _fail(e)

    if fmt == "machine":
        click.echo(verdict.to_json())
    else:
        table = Table(show_header=True, header_style="bold cyan", title=f"{scenario.name} seed {verdict.seed}")
        table.add_column("Check", style="cyan")
        table.add_column("Result", justify="center")
        table.add_column("Details")
        for result in verdict.checks:
            status = "[green]✓[/green]" if result.passed else "[red]✗[/red]"
            table.add_row(result.name, status, "\n".join(result.violations + result.notes) or "-")
        console.print(table)
    if not verdict.passed:
        sys.exit(1)


@main.group()
def history() -> None:
    """Manage run history."""
    pass


@history.command("recent")
@click.option("--limit", "-n", default=10, help="Number of runs to show")
@click.option("--protocol", "-p", type=click.Choice(PROTOCOLS), help="Filter by protocol")
@click.option("--status", "-s", type=click.Choice(["PASSED", "FAILED"]), help="Filter by status")
def history_recent(limit: int, protocol: str | None, status: str | None) -> None:
    """Show recent runs."""
    history = _open_history(RatregSettings.from_env())
    try:
        records = history.search(protocol=protocol, status=status, limit=limit) if protocol or status else history.get_recent(limit=limit)
        if not records:
            console.print("[yellow]No run history found[/yellow]")
            return

        table = Table(show_header=True, header_style="bold cyan")
        table.add_column("Run ID", style="dim")
        table.add_column("Timestamp", style="dim")
        table.add_column("Status", justify="center")
        table.add_column("Scenario", style="cyan")
        table.add_column("Protocol")
        table.add_column("Seed", justify="right")
        table.add_column("Aborts", justify="right")
        table.add_column("Detections", justify="right")
        table.add_column("Messages", justify="right")
        for record in records:
            status_display = "[green]✓[/green]" if record.status == "PASSED" else "[red]✗[/red]"
            table.add_row(
                record.run_id[:8],
                record.timestamp.strftime("%Y-%m-%d %H:%M:%S"),
                status_display,
                record.scenario,
                record.protocol,
                str(record.seed),
                str(record.aborts),
                str(record.detections),
                str(record.messages_total),
            )
        console.print(table)
        console.print(f"\n[dim]Showing {len(records)} most recent runs[/dim]")
    except Exception as e:
        console.print(f"[red]Error reading history: {e}[/red]")
    finally:
        history.close()


@history.command("show")
@click.argument("run_id")
def history_show(run_id: str) -> None:
    """Show the verdict of one run."""
    history = _open_history(RatregSettings.from_env())
    try:
        record = history.get_by_id(run_id)
        if not record:
            console.print(f"[red]Run with ID '{run_id}' not found[/red]")
            return

        info = Text()
        info.append("Run ID: ", style="bold")
        info.append(f"{record.run_id}\n")
        info.append("Scenario: ", style="bold")
        info.append(f"{record.scenario} ({record.protocol}, seed {record.seed})\n")
        info.append("Status: ", style="bold")
        info.append(record.status, style="green" if record.status == "PASSED" else "red")
        info.append("\nReads / writes: ", style="bold")
        info.append(f"{record.reads} / {record.writes}\n")
        info.append("Aborts: ", style="bold")
        info.append(f"{record.aborts}\n")
        info.append("Detections: ", style="bold")
        info.append(f"{record.detections} ({record.false_positives} false positives)\n")
        info.append("Messages: ", style="bold")
        info.append(f"{record.messages_total}\n")
        console.print(Panel(info, title="Run Details", border_style="blue"))

        for result in (record.verdict or {}).get("checks", []):
            if result["violations"]:
                console.print(f"\n[bold red]{result['name']}[/bold red]")
                for line in result["violations"]:
                    console.print(f"  {line}")
    except Exception as e:
        console.print(f"[red]Error showing run: {e}[/red]")
    finally:
        history.close()


@history.command("stats")
def history_stats() -> None:
    """Show run statistics."""
    history = _open_history(RatregSettings.from_env())
    try:
        stats = history.get_statistics()
        overview = Text()
        overview.append("Total Runs: ", style="bold")
        overview.append(f"{stats.total_runs}\n")
        overview.append("Passed: ", style="bold")
        overview.append(f"{stats.passed_runs}", style="green")
        overview.append(f" ({stats.pass_rate * 100:.1f}%)\n")
        overview.append("Failed: ", style="bold")
        overview.append(f"{stats.failed_runs}\n", style="red")
        overview.append("Aborts: ", style="bold")
        overview.append(f"{stats.total_aborts}\n")
        overview.append("Detections: ", style="bold")
        overview.append(f"{stats.total_detections} ({stats.total_false_positives} false positives)\n")
        console.print(Panel(overview, title="Run Statistics", border_style="cyan"))

        if stats.runs_by_protocol:
            table = Table(show_header=True, header_style="bold cyan")
            table.add_column("Protocol", style="cyan")
            table.add_column("Runs", justify="right")
            table.add_column("Avg messages", justify="right")
            for protocol, count in stats.runs_by_protocol.items():
                table.add_row(protocol, str(count), f"{stats.messages_by_protocol.get(protocol, 0.0):.1f}")
            console.print(table)
    except Exception as e:
        console.print(f"[red]Error getting statistics: {e}[/red]")
    finally:
        history.close()


@history.command("clear")
@click.option("--before", "-b", help="Clear runs before this date (YYYY-MM-DD)")
@click.option("--force", "-f", is_flag=True, help="Skip confirmation")
def history_clear(before: str | None, force: bool) -> None:
    """Clear run history."""
    history = _open_history(RatregSettings.from_env())
    try:
        before_date = None
        if before:
            try:
                before_date = datetime.strptime(before, "%Y-%m-%d").replace(tzinfo=UTC)
            except ValueError:
                console.print("[red]Invalid date format. Use YYYY-MM-DD[/red]")
                return

        if not force:
            prompt = f"Clear all runs before {before}?" if before_date else "Clear ALL run history? This cannot be undone!"
            if not click.confirm(prompt):
                console.print("[yellow]Cancelled[/yellow]")
                return

        count = history.clear_history(before_date)
        if before_date:
            console.print(f"[green]✓ Cleared {count} runs before {before}[/green]")
        else:
            console.print(f"[green]✓ Cleared all {count} runs from history[/green]")
    except Exception as e:
        console.print(f"[red]Error clearing history: {e}[/red]")
    finally:
        history.close()


@history.command("export")
@click.option("--output", "-o", required=True, help="Output file path")
@click.option("--protocol", "-p", type=click.Choice(PROTOCOLS), help="Filter by protocol")
def history_export(output: str, protocol: str | None) -> None:
    """Export run history to JSON."""
    history = _open_history(RatregSettings.from_env())
    try:
        history.export_json(output, {"protocol": protocol} if protocol else None)
        console.print(f"[green]✓ Exported run history to {output}[/green]")
    except Exception as e:
        console.print(f"[red]Error exporting history: {e}[/red]")
    finally:
        history.close()


if __name__ == "__main__":
    main()
