from rich.console import Console
from rich.progress import (
    Progress, BarColumn, MofNCompleteColumn, TextColumn,
    TimeElapsedColumn, TimeRemainingColumn, SpinnerColumn
)
from rich.table import Table
from rich.theme import Theme

theme = Theme({
    "info": "cyan",
    "success": "green",
    "warning": "yellow",
    "error": "bold red",
    "variant": "bold cyan",
    "phase": "bold blue",
})

console = Console(theme=theme, highlight=False)


def success(msg):
    console.print("[success]✓[/] {}".format(msg))


def error(msg):
    console.print("[error]✗ {}[/]".format(msg))


def warning(msg):
    console.print("[warning]! {}[/]".format(msg))


def info(msg):
    console.print("[info]●[/] {}".format(msg))


def phase(msg):
    console.print("  [phase]▸ {}[/]".format(msg))


def verbose(msg):
    console.print("  [dim]$ {}[/]".format(msg))


def variant(name):
    return "[variant]{}[/]".format(name)


def status(msg):
    return console.status("[bold]{}[/]".format(msg), spinner="dots")


def create_progress():
    return Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}"),
        BarColumn(bar_width=40),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        TimeRemainingColumn(),
        console=console,
        transient=True,
    )


def rate_table(frame, title=None):
    """Render a long-format experiment table as (cell, test) rows by alpha."""
    table = Table(title=title, box=None, padding=(0, 2))
    table.add_column("cell", style="bold cyan")
    table.add_column("mode")
    table.add_column("test")
    alphas = sorted(frame['alpha'].unique(), reverse=True)
    for alpha in alphas:
        table.add_column("{:g}".format(alpha), justify="right")
    for (cell, mode, test), rows in frame.groupby(['cell', 'mode', 'test'], sort=False):
        rates = dict(zip(rows['alpha'], rows['rate']))
        table.add_row(str(cell), mode, test, *["{:.5f}".format(rates[a]) if a in rates else "-" for a in alphas])
    return table
