import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
import typer

from elasticfm.factorization import f_sharp
from elasticfm.io import FLOAT_FORMAT, read_nfm, write_matrix_csv
from elasticfm.oti import a_n_matrix, assemble_oti, equilibrated_condition
from elasticfm.rich_wrapper import MyTyper
from elasticfm.types import Config, PaperExact
from elasticfm.utils import exit_on_error, run_config, typer_unpacker

app = MyTyper(hidden=True)


@app.callback()
def internal():
    """
    Unstable inspection commands for the intermediate operators.

    Output formats may change between versions.
    """


@app.command("dump-oti")
@typer_unpacker
def dump_oti(
    outfile: Path = typer.Argument(
        ..., dir_okay=False, file_okay=True, help="CSV file to write (`row,col,re,im`)."
    ),
    config: Optional[Path] = Config,
    paper_exact: bool = PaperExact,
    m1: Optional[int] = typer.Option(None, "--m1", help="Override the truncation order M1."),
    unweighted: bool = typer.Option(
        False, "--unweighted", help="Leave out the quadrature weight 2πR/m2."
    ),
):
    """
    Write the discrete OtI matrix of the configured circle and medium.
    """
    cfg = run_config(config, paper_exact=paper_exact)
    M1 = cfg.resolved_m1 if m1 is None else m1
    with exit_on_error("dump-oti"):
        orders = np.arange(-M1, M1 + 1)
        condition = equilibrated_condition(a_n_matrix(cfg.medium(), orders, cfg.radius))
        logging.debug(f"Worst modal condition number {np.max(condition):.3e}")
        T = assemble_oti(
            cfg.medium(),
            M1,
            cfg.circle(),
            weighted=not unweighted,
            allow_aliasing=cfg.paper_exact,
        )
    write_matrix_csv(T.matrix, outfile)
    logging.done(f"Wrote {T.matrix.shape[0]}x{T.matrix.shape[1]} OtI matrix (M1 = {M1}) to {outfile}.")  # type: ignore
    return T


@app.command()
@typer_unpacker
def spectrum(
    nfm: Path = typer.Argument(
        ...,
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        help="Near-field matrix file.",
    ),
    config: Optional[Path] = Config,
    paper_exact: bool = PaperExact,
    count: int = typer.Option(20, "--count", "-n", help="Number of eigenvalues to list."),
    outfile: Optional[Path] = typer.Option(
        None,
        "--outfile",
        "-o",
        dir_okay=False,
        file_okay=True,
        help="Path to output file",
    ),
):
    """
    List the largest eigenvalues of F♯ for a near-field matrix.

    If no output file is specified, nothing is written to disk.
    """
    cfg = run_config(config, paper_exact=paper_exact)
    with exit_on_error("spectrum"):
        N = read_nfm(nfm)
        T = assemble_oti(N.medium, cfg.resolved_m1, N.circle, allow_aliasing=cfg.paper_exact)
        _, eigs = f_sharp(T, N)
    values = eigs.values[:count]
    df = pd.DataFrame({"j": np.arange(1, len(values) + 1), "eigenvalue": values, "abs": np.abs(values)})
    for row in df.itertuples():
        logging.info(f"λ_{row.j} = {row.eigenvalue:.6e}")
    if outfile is not None:
        df.to_csv(outfile, sep="\t", index=False, float_format=FLOAT_FORMAT)
        logging.done(f"Wrote {len(df)} eigenvalues to {outfile}.")  # type: ignore
    return df
