# runners/reporting.py
"""
Reporter - terminal output of the runners

Formats status lines, result panels and summary tables with rich, and keeps
every status line in `logs` so callers (and tests) can inspect what was shown.
"""

import math
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table
from rich.tree import Tree

from fsi.errors import ReboundLabError
from schema import AssumptionCheck, AuditReport, CheckStatus, SuiteReport, SweepSummaryRow, VerdictReport

STYLES = {
    "info": ("ℹ️", "cyan"),
    "success": ("✅", "green"),
    "error": ("❌", "red"),
    "warning": ("⚠️", "yellow"),
    "debug": ("🔍", "dim"),
}

CHECK_STYLES = {
    CheckStatus.PASS: "[green]PASS[/green]",
    CheckStatus.FAIL: "[red]FAIL[/red]",
    CheckStatus.SKIPPED: "[dim]SKIPPED[/dim]",
}


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6g}"
    return str(value)


class Reporter:
    """Rich output shared by the runners"""

    def __init__(self, console: Optional[Console] = None, quiet: bool = False):
        self.console = console or Console()
        self.quiet = quiet
        self.logs: List[Dict[str, Any]] = []

    def log(self, message: str, level: str = "info"):
        timestamp = datetime.now().strftime("%H:%M:%S")
        self.logs.append({"timestamp": timestamp, "level": level, "message": message})
        if self.quiet and level not in ("error", "warning"):
            return
        icon, style = STYLES.get(level, ("•", "white"))
        self.console.print(f"[{timestamp}] {icon} {message}", style=style, markup=False)

    def step(self, runner_name: str, step: str, status: str = "running"):
        icon = {"running": "⚙️", "completed": "✅", "failed": "❌", "pending": "⏳"}.get(status, "•")
        self.console.print(f"  {icon} [{runner_name}] {step}", style="bold" if status == "running" else "", markup=False)

    # ==================== Panels ====================

    def result_panel(self, title: str, fields: Dict[str, Any], success: bool = True):
        header = "[bold green]✅ Done[/bold green]" if success else "[bold red]❌ Failed[/bold red]"
        body = "\n".join(f"  • {key}: {_fmt(value)}" for key, value in fields.items())
        self.console.print(
            Panel(f"{header}\n\n{body}", title=title, border_style="green" if success else "red", padding=(1, 2))
        )

    def error_panel(self, error: Union[ReboundLabError, str], runner_name: str = "System"):
        if isinstance(error, ReboundLabError):
            text = f"[bold]{error.code}[/bold]: {error.message}"
            if error.context:
                text += "\n\n" + "\n".join(f"  {key} = {value!r}" for key, value in error.context.items())
        else:
            text = str(error)
        self.console.print(
            Panel(f"[bold red]Error in {runner_name}:[/bold red]\n\n{text}", border_style="red", padding=(1, 2))
        )

    def print_banner(self, title: str, subtitle: str = ""):
        banner = f"[bold cyan]{title}[/bold cyan]"
        if subtitle:
            banner += f"\n[dim]{subtitle}[/dim]"
        self.console.print(Panel(banner, border_style="cyan", padding=(1, 2)))

    # ==================== Tables ====================

    def show_sweep_summary(self, rows: Sequence[SweepSummaryRow], verdict: Optional[VerdictReport] = None):
        table = Table(title="📋 Sweep Summary", show_header=True)
        for column in ("mu", "h_min", "t_min", "rebound", "dev_h", "dev_xi", "residual"):
            table.add_column(column, justify="right")
        for row in rows:
            table.add_row(
                _fmt(row.mu), _fmt(row.h_min), _fmt(row.t_min), _fmt(row.rebound_height),
                _fmt(row.dev_h), _fmt(row.dev_xi), _fmt(row.energy_residual),
            )
        self.console.print(table)
        if verdict is not None:
            style = {"physical": "green", "not_physical": "yellow"}.get(verdict.verdict.value, "red")
            self.console.print(f"Verdict: [{style}]{verdict.verdict.value}[/{style}] [dim]({verdict.note})[/dim]")

    def show_checks(self, title: str, checks: Iterable[AssumptionCheck]):
        table = Table(title=title, show_header=True)
        table.add_column("Check", style="cyan")
        table.add_column("Status")
        table.add_column("Detail")
        table.add_column("Witness", style="dim")
        for check in checks:
            witness = ", ".join(f"{key}={_fmt(value)}" for key, value in (check.witness or {}).items())
            table.add_row(check.name, CHECK_STYLES[check.status], check.detail, witness)
        self.console.print(table)

    def show_audit(self, report: AuditReport):
        self.show_checks(f"🔎 Assumption audit: {report.law}", report.checks)

    def show_suite(self, report: SuiteReport):
        table = Table(title="🧪 Property suite" + (" (quick)" if report.quick else ""), show_header=True)
        table.add_column("#", style="cyan", justify="right")
        table.add_column("Property")
        table.add_column("Status")
        table.add_column("Detail")
        table.add_column("Time", style="dim", justify="right")
        for result in report.results:
            status = "[green]PASS[/green]" if result.passed else "[red]FAIL[/red]"
            table.add_row(str(result.id), result.name, status, result.detail, f"{result.duration:.1f}s")
        self.console.print(table)

    def show_drag_table(self, rows: Sequence[Dict[str, Any]], limit: int = 10):
        table = Table(title="Lubrication drag", show_header=True)
        for column in ("h", "D_lub", "D_analytic", "exponent"):
            table.add_column(column, justify="right")
        for row in rows[:limit]:
            table.add_row(_fmt(row["h"]), _fmt(row["D_lub"]), _fmt(row["D_analytic"]), str(row["exponent"]))
        if len(rows) > limit:
            table.caption = f"... and {len(rows) - limit} more rows"
        self.console.print(table)

    def show_task_summary(self, responses: Sequence[Dict[str, Any]]):
        if not responses:
            self.console.print("[yellow]No tasks to display[/yellow]")
            return
        table = Table(title="📋 Task Summary", show_header=True)
        table.add_column("ID", style="cyan", width=8)
        table.add_column("Runner", style="blue")
        table.add_column("Status", width=12)
        table.add_column("Exit", justify="right")
        table.add_column("Duration", style="dim", width=10)
        for response in responses:
            status = "[green]✅ Done[/green]" if response.get("success") else "[red]❌ Failed[/red]"
            duration = response.get("duration")
            table.add_row(
                response.get("task_id", "N/A"),
                response.get("runner_name", "N/A"),
                status,
                str(response.get("exit_code", "-")),
                f"{duration:.2f}s" if duration else "-",
            )
        self.console.print(table)

    def show_runner_tree(self, runners: Sequence[Dict[str, Any]]):
        tree = Tree("🧲 [bold]Rebound Lab[/bold]")
        for runner in runners:
            branch = tree.add(f"[cyan]{runner['name']}[/cyan] - {runner.get('status', 'idle')}")
            if runner.get("description"):
                branch.add(f"[dim]{runner['description']}[/dim]")
        self.console.print(tree)

    def progress(self) -> Progress:
        """Progress bar context manager on this console"""
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
            console=self.console,
            disable=self.quiet,
        )
