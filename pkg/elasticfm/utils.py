import functools
import inspect
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Optional

import rich_click as click
from typer.models import ParameterInfo

from elasticfm.config import RunConfig, parse_alphas, parse_grid
from elasticfm.errors import (
    ElasticFMError,
    NumericalError,
    ParameterError,
    SingularModeError,
    SolverError,
)

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NUMERICAL = 4


class PipelineException(click.ClickException):
    """A ClickException that exits with a specific status code."""

    def __init__(self, message: str, exit_code: int) -> None:
        super().__init__(message)
        self.exit_code = exit_code


def exit_code_for(error: ElasticFMError) -> int:
    if isinstance(error, SolverError):
        return EXIT_SOLVER
    if isinstance(error, (NumericalError, SingularModeError)):
        return EXIT_NUMERICAL
    return EXIT_CONFIG


@contextmanager
def exit_on_error(stage: str):
    """Turn library errors into a logged message and the matching exit code."""
    try:
        yield
    except ParameterError as e:
        logging.error(f"{stage}: invalid configuration. {e}")
        raise PipelineException(str(e), EXIT_CONFIG)
    except SolverError as e:
        logging.error(
            f"{stage}: forward solver failed (residual {e.residual:.3e}"
            f"{'' if e.source_index is None else f', incident field {e.source_index}'})"
        )
        raise PipelineException(str(e), EXIT_SOLVER)
    except ElasticFMError as e:
        logging.error(f"{stage}: {e}")
        raise PipelineException(str(e), exit_code_for(e))


def typer_unpacker(f: Callable):
    """
    Make a Typer function into a normal function.

     from https://github.com/tiangolo/typer/issues/279#issuecomment-841875218
    """

    signature = inspect.signature(f)

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        # `f` keeps its Typer defaults for the CLI
        bound = signature.bind_partial(*args, **kwargs)
        for name, param in signature.parameters.items():
            if name not in bound.arguments and isinstance(param.default, ParameterInfo):
                bound.arguments[name] = param.default.default
        return f(*bound.args, **bound.kwargs)

    return wrapper


def run_config(
    config: Optional[Path] = None,
    base: Optional[RunConfig] = None,
    noise: Optional[float] = None,
    seed: Optional[int] = None,
    alpha: Optional[str] = None,
    paper_exact: bool = False,
    grid: Optional[str] = None,
    out: Optional[Path] = None,
    solver: Optional[str] = None,
) -> RunConfig:
    """Merge a config file (or preset) with command-line flags and validate the result."""
    with exit_on_error("Configuration"):
        resolved = RunConfig.load(config) if config is not None else (base or RunConfig())
        resolved = resolved.override(
            noise=noise,
            seed=seed,
            alphas=parse_alphas(alpha) if alpha is not None else None,
            paper_exact=True if paper_exact else None,
            grid_shape=parse_grid(grid) if grid is not None else None,
            out_dir=str(out) if out is not None else None,
            solver=solver,
        )
        return resolved.validate()
