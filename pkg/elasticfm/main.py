import logging
import os

import rich.console
import rich.theme
import typer
from rich.logging import RichHandler

from . import __version__, commands
from .internal import internal
from .rich_wrapper import MyTyper

LOG_THEME = rich.theme.Theme(
    {
        "logging.level.done": "green",
        "logging.level.debug": "dim",
        "logging.level.warning": "yellow",
    }
)

# plain Typer while shell completion is being generated
if os.environ.get("_ELASTICFM_COMPLETE") is not None:
    app = typer.Typer()
else:
    app = MyTyper()

for command in (commands.forward, commands.reconstruct, commands.pipeline, commands.selftest):
    app.command()(command)  # type: ignore
app.add_typer(internal.app, name="internal")


def configure_logging(verbose: bool) -> None:
    """Send every log record to standard error through Rich; files only hold data."""
    console = rich.console.Console(stderr=True, theme=LOG_THEME)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, markup=True, console=console)],
        force=True,
    )


def version_callback(value: bool):
    if value:
        typer.echo(f"elasticfm {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        callback=version_callback,
        is_eager=True,
        help="Show the version and exit.",
    ),
    verbose: bool = typer.Option(False, "--verbose", help="Log solver and eigenvalue details."),
):
    """
    Reconstruct rigid obstacles from elastic near-field data with the factorization method.
    """
    configure_logging(verbose)


if __name__ == "__main__":
    app(prog_name="elasticfm")
