from pathlib import Path
from typing import Optional

import typer

Config: Optional[Path] = typer.Option(
    None,
    "--config",
    help="Path to a JSON run configuration. Flags given on the command line override its values.",
    exists=True,
    file_okay=True,
    dir_okay=False,
    readable=True,
)

Noise: Optional[float] = typer.Option(
    None,
    "--noise",
    help="Relative noise level δ applied as u(1 + δ·rand), rand uniform in [-1, 1].",
    min=0.0,
)

Seed: Optional[int] = typer.Option(
    None, "--seed", help="Seed of the noise generator. Same seed, same data."
)

Alpha: Optional[str] = typer.Option(
    None,
    "--alpha",
    help="Comma-separated polarization angles in radians, e.g. `0,pi/2,2pi/3`.",
)

PaperExact: bool = typer.Option(
    False,
    "--paper-exact",
    help="Use the published truncation M1=40 even though it aliases on 64 points.",
)

Grid: Optional[str] = typer.Option(
    None, "--grid", help="Indicator grid resolution as NX,NY (default 101,101)."
)

OutDir: Optional[Path] = typer.Option(
    None,
    "--out",
    help="Directory to write results to.",
    file_okay=False,
    dir_okay=True,
)
