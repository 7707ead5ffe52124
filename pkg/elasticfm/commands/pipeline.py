import logging
from pathlib import Path
from typing import Optional

import typer

from elasticfm.commands.forward import CONFIG_FILE, NFM_FILE, forward
from elasticfm.commands.reconstruct import reconstruct
from elasticfm.config import example_config
from elasticfm.factorization import IndicatorGrid, threshold_components
from elasticfm.types import Alpha, Grid, Noise, OutDir, PaperExact, Seed
from elasticfm.utils import exit_on_error, run_config, typer_unpacker

THRESHOLD = 0.3


def summarize(grid: IndicatorGrid, level: float = THRESHOLD) -> None:
    components = threshold_components(grid, level)
    logging.info(f"W ≥ {level:.0%} of its maximum on {len(components)} connected region(s):")
    for k, component in enumerate(components):
        x, y = component.centroid
        logging.info(f"  region {k + 1}: {component.area} nodes, centroid ({x:.3f}, {y:.3f})")


@typer_unpacker
def pipeline(
    example: int = typer.Argument(
        ...,
        help="Scene to reproduce: 1 kite, 2 star, 3 star + small kite.",
    ),
    noise: Optional[float] = Noise,
    seed: Optional[int] = Seed,
    alpha: Optional[str] = Alpha,
    paper_exact: bool = PaperExact,
    grid: Optional[str] = Grid,
    out: Optional[Path] = OutDir,
) -> IndicatorGrid:
    """
    Simulate and reconstruct one of the reference scenes end to end.


    ## Pipeline description

    1. Resolve the preset scene for the example and apply the command-line overrides
    2. Simulate the near-field matrix and add the requested noise (`forward`)
    3. Build the OtI operator and F♯, then scan the indicator over the grid (`reconstruct`)
    4. Summarize the regions where W exceeds 30% of its maximum

    All scenes use λ=2, μ=1, ω=10 and 64 points on the circle of radius 4.
    Example 3 defaults to 2% noise and the angles 0, π/2 and 2π/3.
    """
    with exit_on_error("Pipeline"):
        preset = example_config(example)
    cfg = run_config(
        base=preset,
        noise=noise,
        seed=seed,
        alpha=alpha,
        paper_exact=paper_exact,
        grid=grid,
        out=out,
    )
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    config_path = outdir / CONFIG_FILE
    config_path.write_text(cfg.to_json())
    logging.info(f"Running example {example} into {outdir}...")

    forward(config=config_path)
    result = reconstruct(outdir / NFM_FILE, config=config_path)
    summarize(result)

    logging.done(f"Example {example} finished. Results are in {outdir}.")  # type: ignore
    return result
