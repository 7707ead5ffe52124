"""
File formats.

- near-field matrix: `# nfm v1 ...` metadata line, then a `row,col,re,im` CSV
- matrix dumps (OtI): the same `row,col,re,im` CSV without metadata
- indicator grid: `x,y,W` CSV plus an 8-bit plain PGM (P2) image
"""
import logging
import re
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd

from elasticfm.errors import ParameterError
from elasticfm.factorization import IndicatorGrid, NearFieldMatrix, NoiseDescriptor
from elasticfm.geometry import MeasurementCircle, make_medium

FLOAT_FORMAT = "%.17g"
HEADER_FIELDS = ("m2", "R", "lambda", "mu", "omega", "delta", "seed")
_HEADER = re.compile(r"^# nfm v1 (?P<fields>.*)$")


def _matrix_frame(matrix: np.ndarray) -> pd.DataFrame:
    rows, cols = np.indices(matrix.shape)
    return pd.DataFrame(
        {
            "row": rows.ravel(),
            "col": cols.ravel(),
            "re": matrix.real.ravel(),
            "im": matrix.imag.ravel(),
        }
    )


def _frame_matrix(df: pd.DataFrame, size: int) -> np.ndarray:
    matrix = np.zeros((size, size), dtype=complex)
    matrix[df["row"].to_numpy(), df["col"].to_numpy()] = df["re"].to_numpy() + 1j * df["im"].to_numpy()
    return matrix


def write_matrix_csv(matrix: np.ndarray, path: Path) -> None:
    _matrix_frame(matrix).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def nfm_header(N: NearFieldMatrix) -> Dict[str, str]:
    noise = N.noise or NoiseDescriptor(delta=0.0, seed=0)
    return {
        "m2": str(N.circle.m2),
        "R": repr(float(N.circle.radius)),
        "lambda": repr(float(N.medium.lam)),
        "mu": repr(float(N.medium.mu)),
        "omega": repr(float(N.medium.omega)),
        "delta": repr(float(noise.delta)),
        "seed": str(int(noise.seed)),
    }


def write_nfm(N: NearFieldMatrix, path: Path) -> None:
    """Write a near-field matrix at full double precision."""
    header = " ".join(f"{k}={v}" for k, v in nfm_header(N).items())
    with open(path, "w") as f:
        f.write(f"# nfm v1 {header}\n")
        _matrix_frame(N.matrix).to_csv(f, index=False, float_format=FLOAT_FORMAT)
    logging.debug(f"Wrote {N.matrix.shape[0]}x{N.matrix.shape[1]} near-field matrix to {path}")


def read_nfm_header(path: Path) -> Dict[str, str]:
    with open(path) as f:
        first = f.readline().rstrip("\n")
    match = _HEADER.match(first)
    if not match:
        raise ParameterError(f"{path} is not a near-field matrix file (missing '# nfm v1' header)")
    header = dict(item.split("=", 1) for item in match.group("fields").split())
    missing = [k for k in HEADER_FIELDS if k not in header]
    if missing:
        raise ParameterError(f"{path} header lacks {', '.join(missing)}")
    return header


def read_nfm(path: Path) -> NearFieldMatrix:
    header = read_nfm_header(path)
    m2 = int(header["m2"])
    df = pd.read_csv(path, skiprows=1, float_precision="round_trip")
    if list(df.columns) != ["row", "col", "re", "im"]:
        raise ParameterError(f"{path} has columns {list(df.columns)}, expected row,col,re,im")
    delta, seed = float(header["delta"]), int(header["seed"])
    return NearFieldMatrix(
        matrix=_frame_matrix(df, 2 * m2),
        medium=make_medium(float(header["lambda"]), float(header["mu"]), float(header["omega"])),
        circle=MeasurementCircle(float(header["R"]), m2),
        noise=NoiseDescriptor(delta=delta, seed=seed),
    )


def write_grid(grid: IndicatorGrid, path: Path) -> None:
    """Write `x,y,W` rows in (y, x) row-major order; absent nodes are `nan`."""
    nodes = grid.spec.nodes()
    pd.DataFrame({"x": nodes[:, 0], "y": nodes[:, 1], "W": grid.values.ravel()}).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, na_rep="nan"
    )


def write_pgm(grid: IndicatorGrid, path: Path) -> None:
    """Linear map of [0, max W] onto 0..255, top row = largest y."""
    values = np.nan_to_num(grid.values, nan=0.0)
    peak = np.max(values)
    scaled = np.zeros_like(values) if peak <= 0 else values / peak * 255
    pixels = np.clip(np.rint(scaled), 0, 255).astype(int)[::-1]
    ny, nx = pixels.shape
    with open(path, "w") as f:
        f.write(f"P2\n{nx} {ny}\n255\n")
        for row in pixels:
            f.write(" ".join(str(p) for p in row) + "\n")
