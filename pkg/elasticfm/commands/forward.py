import logging
from pathlib import Path
from typing import Optional

import typer

from elasticfm.factorization import NearFieldMatrix, add_noise, assemble_n
from elasticfm.io import write_nfm
from elasticfm.types import Config, Noise, OutDir, Seed
from elasticfm.utils import exit_on_error, run_config, typer_unpacker

NFM_FILE = "nfm.csv"
CONFIG_FILE = "config.json"


@typer_unpacker
def forward(
    config: Optional[Path] = Config,
    noise: Optional[float] = Noise,
    seed: Optional[int] = Seed,
    solver: Optional[str] = typer.Option(
        None,
        "--solver",
        help="Forward solver: `mfs` (any scene) or `series` (a single disk at the origin).",
    ),
    out: Optional[Path] = OutDir,
) -> NearFieldMatrix:
    """
    Simulate the near-field matrix for the configured scene.

    Every receiver on the measurement circle doubles as a point source, fired once
    per polarization e1 and e2, so the result is a (2·m2) x (2·m2) complex matrix.
    Relative noise is applied to the stored matrix before it is written.

    ## Outputs

    - `nfm.csv`: `# nfm v1` metadata line followed by `row,col,re,im` rows
    - `config.json`: the fully resolved run configuration
    """
    cfg = run_config(config, noise=noise, seed=seed, out=out, solver=solver)
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    names = ", ".join(g["name"] for g in cfg.geometry) or "no obstacles"
    logging.info(
        f"Simulating near-field data for {names} with {2 * cfg.m2} point sources "
        f"({cfg.solver} solver)..."
    )
    with exit_on_error("Forward"):
        clean = assemble_n(cfg.scene(), solver=cfg.solver, **cfg.solver_options())
        N = add_noise(clean, cfg.noise, cfg.seed)
    if cfg.noise > 0:
        logging.info(f"Added {cfg.noise:.1%} relative noise (seed {cfg.seed}).")

    write_nfm(N, outdir / NFM_FILE)
    (outdir / CONFIG_FILE).write_text(cfg.to_json())
    logging.done(f"Wrote {N.matrix.shape[0]}x{N.matrix.shape[1]} near-field matrix to {outdir / NFM_FILE}.")  # type: ignore
    return N
