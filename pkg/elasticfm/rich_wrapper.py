"""Help rendering for the CLI and the DONE log level used to close every stage."""
import logging

import rich_click as click
import typer
from click_didyoumean import DYMGroup
from rich_click import RichCommand, RichGroup

DONE = logging.INFO + 5

click.rich_click.USE_MARKDOWN = True
click.rich_click.MAX_WIDTH = 120
click.rich_click.STYLE_HELPTEXT = ""
click.rich_click.STYLE_FOOTER_TEXT = "dim"

click.rich_click.COMMAND_GROUPS = {
    "elasticfm": [
        {"name": "Easy Workflows ([green]recommended[/])", "commands": ["pipeline"]},
        {"name": "Pipeline Steps ([yellow]advanced[/])", "commands": ["forward", "reconstruct"]},
        {"name": "Verification", "commands": ["selftest"]},
        {"name": "Internal ([red]unstable[/])", "commands": ["internal"]},
    ]
}
click.rich_click.ERRORS_EPILOGUE = (
    "[dim]Exit codes: 2 configuration error, 3 forward solver failure, 4 numerical failure.\n"
)
click.rich_click.FOOTER_TEXT = (
    "Run [cyan]elasticfm pipeline 1[/] to reproduce the kite reconstruction, "
    "or [cyan]elasticfm selftest[/] to check the numerics.\n"
)


class MyRichGroup(RichGroup, DYMGroup):
    """Rich help plus "did you mean" suggestions for misspelled commands."""


class MyTyper(typer.Typer):
    """Typer app whose groups and commands render through rich-click."""

    def __init__(self, *args, cls=MyRichGroup, **kwargs) -> None:
        super().__init__(*args, cls=cls, **kwargs)

    def command(self, *args, cls=RichCommand, **kwargs):
        return super().command(*args, cls=cls, **kwargs)


def add_logging_level(name: str, level: int) -> None:
    """
    Register `level` under `name` and expose `logging.<name.lower()>(...)`,
    both on the module and on every logger.

    Calling it twice with the same name and level is a no-op; reusing a name
    for a different level raises `AttributeError`.
    """
    method = name.lower()
    existing = getattr(logging, name, None)
    if existing is not None:
        if existing != level:
            raise AttributeError(f"logging.{name} is already defined as {existing}")
        return

    def log_on_logger(self, message, *args, **kwargs):
        if self.isEnabledFor(level):
            self._log(level, message, args, **kwargs)

    def log_on_root(message, *args, **kwargs):
        logging.log(level, message, *args, **kwargs)

    logging.addLevelName(level, name)
    setattr(logging, name, level)
    setattr(logging.getLoggerClass(), method, log_on_logger)
    setattr(logging, method, log_on_root)


add_logging_level("DONE", DONE)
