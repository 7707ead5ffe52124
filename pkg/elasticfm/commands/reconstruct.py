import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import typer

from elasticfm.config import RunConfig
from elasticfm.factorization import EigenSystem, IndicatorGrid, f_sharp, indicator_scan
from elasticfm.io import read_nfm, read_nfm_header, write_grid, write_pgm
from elasticfm.oti import assemble_oti
from elasticfm.types import Alpha, Config, Grid, OutDir, PaperExact
from elasticfm.utils import (
    EXIT_CONFIG,
    PipelineException,
    exit_on_error,
    run_config,
    typer_unpacker,
)

GRID_FILE = "W.csv"
IMAGE_FILE = "W.pgm"
SPECTRUM_SUMMARY = 10


def metadata_mismatches(header: dict, cfg: RunConfig) -> List[str]:
    """Fields of an nfm header that disagree with the run configuration."""
    expected = {
        "m2": cfg.m2,
        "R": cfg.radius,
        "lambda": cfg.lam,
        "mu": cfg.mu,
        "omega": cfg.omega,
    }
    diff = []
    for key, value in expected.items():
        found = float(header[key])
        if not np.isclose(found, float(value), rtol=1e-12, atol=0):
            diff.append(f"{key}: file has {header[key]}, configuration has {value}")
    return diff


def log_spectrum(eigs: EigenSystem, count: int = SPECTRUM_SUMMARY) -> None:
    top = np.abs(eigs.values[:count])
    logging.info(
        f"F♯ spectrum: top {len(top)} |λ| = " + ", ".join(f"{v:.3e}" for v in top)
    )
    logging.debug(f"Smallest |λ| = {np.abs(eigs.values[-1]):.3e}")


def _write_panel(grid: IndicatorGrid, outdir: Path, stem: str) -> None:
    write_grid(grid, outdir / f"{stem}.csv")
    write_pgm(grid, outdir / f"{stem}.pgm")


@typer_unpacker
def reconstruct(
    nfm: Path = typer.Argument(
        ...,
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        help="Near-field matrix file written by `elasticfm forward`.",
    ),
    config: Optional[Path] = Config,
    alpha: Optional[str] = Alpha,
    paper_exact: bool = PaperExact,
    grid: Optional[str] = Grid,
    out: Optional[Path] = OutDir,
) -> IndicatorGrid:
    """
    Reconstruct obstacles from a near-field matrix with the factorization method.

    The OtI operator T turns the near-field matrix into F = T N, whose F♯ = |Re F| + |Im F|
    is positive. The indicator W(z) is the reciprocal of the truncated Picard series of
    the test function φ_z^a against the eigensystem of F♯; it is large inside the
    obstacles and small outside. Several polarization angles are combined by
    W = (Σ 1/W^α)^(-1).

    ## Outputs

    - `W.csv`, `W.pgm`: the combined indicator (`x,y,W`, nodes outside the circle are `nan`)
    - `W_alpha<k>.csv`, `W_alpha<k>.pgm`: one panel per angle when several are given

    ## Notes

    The data file must have been simulated with the same m2, R and medium as the
    configuration; any difference is reported field by field.
    """
    cfg = run_config(config, alpha=alpha, paper_exact=paper_exact, grid=grid, out=out)
    outdir = Path(cfg.out_dir)

    # region: load and check the data
    with exit_on_error("Reconstruct"):
        diff = metadata_mismatches(read_nfm_header(nfm), cfg)
        if diff:
            for line in diff:
                logging.error(f"Metadata mismatch in {nfm}: {line}")
            raise PipelineException(
                f"{nfm} was not simulated with this configuration:\n  " + "\n  ".join(diff),
                EXIT_CONFIG,
            )
        N = read_nfm(nfm)
    logging.debug(f"Loaded {N.matrix.shape[0]}x{N.matrix.shape[1]} near-field matrix from {nfm}")
    # endregion

    # region: spectral decomposition
    with exit_on_error("Reconstruct"):
        T = assemble_oti(N.medium, cfg.resolved_m1, N.circle, allow_aliasing=cfg.paper_exact)
        _, eigs = f_sharp(T, N)
    log_spectrum(eigs)
    # endregion

    # region: indicator scan
    J = cfg.resolved_truncation
    logging.info(
        f"Scanning {cfg.grid.nx}x{cfg.grid.ny} grid with M1 = {cfg.resolved_m1}, J = {J} "
        f"and {len(cfg.alphas)} polarization angle(s)..."
    )
    outdir.mkdir(parents=True, exist_ok=True)
    with exit_on_error("Reconstruct"):
        combined = indicator_scan(eigs, N.medium, N.circle, cfg.grid, cfg.alphas, J)
        if len(cfg.alphas) > 1:
            for k, a in enumerate(cfg.alphas):
                panel = indicator_scan(eigs, N.medium, N.circle, cfg.grid, [a], J)
                _write_panel(panel, outdir, f"W_alpha{k}")
                logging.debug(f"Wrote single-angle panel for α = {a:.4f}")
    _write_panel(combined, outdir, "W")
    # endregion

    logging.done(f"Wrote indicator grid to {outdir / GRID_FILE} and {outdir / IMAGE_FILE}.")  # type: ignore
    return combined
