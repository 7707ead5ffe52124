import logging

import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

from elasticfm import __version__
from elasticfm.commands import forward
from elasticfm.config import RunConfig
from elasticfm.errors import (
    DomainError,
    NumericalError,
    ParameterError,
    SingularModeError,
    SolverError,
)
from elasticfm.io import read_nfm
from elasticfm.main import app
from elasticfm.utils import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SOLVER, exit_code_for

runner = CliRunner()


def write_config(path, **changes):
    path.write_text(RunConfig(**changes).to_json())
    return path


@pytest.fixture
def empty_run(tmp_path):
    """An obstacle-free scene: the near-field matrix is exactly zero."""
    out = tmp_path / "empty"
    config = write_config(
        tmp_path / "empty.json", geometry=[], grid_shape=[5, 5], out_dir=str(out)
    )
    result = runner.invoke(app, ["forward", "--config", str(config)])
    assert result.exit_code == 0, result.output
    return config, out


def test_help():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ["forward", "reconstruct", "pipeline", "selftest"]:
        assert command in result.output


def test_version():
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert f"elasticfm {__version__}" in result.output


class TestForward:
    def test_empty_scene(self, empty_run):
        _, out = empty_run
        N = read_nfm(out / "nfm.csv")
        assert N.matrix.shape == (128, 128)
        assert not np.any(N.matrix)
        assert RunConfig.load(out / "config.json").geometry == []

    def test_noise_is_reproducible(self, tmp_path):
        config = write_config(
            tmp_path / "disk.json",
            geometry=[{"name": "disk", "center": [0.0, 0.0], "scale": 1.0}],
            solver="series",
        )
        for name in ["a", "b"]:
            args = ["forward", "--config", str(config), "--noise", "0.05", "--seed", "7"]
            result = runner.invoke(app, args + ["--out", str(tmp_path / name)])
            assert result.exit_code == 0, result.output
        first = (tmp_path / "a" / "nfm.csv").read_bytes()
        assert first == (tmp_path / "b" / "nfm.csv").read_bytes()
        assert read_nfm(tmp_path / "a" / "nfm.csv").noise.seed == 7

    def test_solver_failure(self, tmp_path):
        config = write_config(tmp_path / "coarse.json", mfs_sources=4, out_dir=str(tmp_path))
        result = runner.invoke(app, ["forward", "--config", str(config)])
        assert result.exit_code == EXIT_SOLVER
        assert "residual" in result.output

    def test_grid_outside_circle_rejected_before_solving(self, tmp_path):
        out = tmp_path / "out"
        config = write_config(
            tmp_path / "far.json", grid_bounds=[5.0, 6.0, 5.0, 6.0], out_dir=str(out)
        )
        result = runner.invoke(app, ["forward", "--config", str(config)])
        assert result.exit_code == EXIT_CONFIG
        assert not (out / "nfm.csv").exists()

    def test_aliasing_truncation_rejected(self, tmp_path):
        config = write_config(tmp_path / "m1.json", m1=40)
        result = runner.invoke(app, ["forward", "--config", str(config)])
        assert result.exit_code == EXIT_CONFIG

    def test_negative_noise_flag(self, tmp_path):
        result = runner.invoke(app, ["forward", "--noise", "-0.1", "--out", str(tmp_path)])
        assert result.exit_code == 2

    def test_direct_call(self, tmp_path):
        config = write_config(tmp_path / "empty.json", geometry=[], out_dir=str(tmp_path / "out"))
        N = forward(config=config, noise=0.1)
        assert N.noise.delta == 0.1
        assert (tmp_path / "out" / "nfm.csv").exists()


class TestReconstruct:
    def test_outputs(self, empty_run):
        config, out = empty_run
        result = runner.invoke(
            app, ["reconstruct", str(out / "nfm.csv"), "--config", str(config), "--alpha", "0,pi/2"]
        )
        assert result.exit_code == 0, result.output
        grid = pd.read_csv(out / "W.csv")
        assert list(grid.columns) == ["x", "y", "W"]
        assert len(grid) == 25
        # zero data: no test function is in the range, every W sits at the cap
        assert grid["W"].dropna().min() > 1e20
        for stem in ["W", "W_alpha0", "W_alpha1"]:
            assert (out / f"{stem}.pgm").read_text().startswith("P2\n5 5\n255\n")

    def test_grid_flag(self, empty_run):
        config, out = empty_run
        result = runner.invoke(
            app, ["reconstruct", str(out / "nfm.csv"), "--config", str(config), "--grid", "4,3"]
        )
        assert result.exit_code == 0, result.output
        assert len(pd.read_csv(out / "W.csv")) == 12

    def test_metadata_mismatch(self, empty_run, tmp_path):
        _, out = empty_run
        other = write_config(tmp_path / "omega.json", geometry=[], omega=9.0)
        result = runner.invoke(app, ["reconstruct", str(out / "nfm.csv"), "--config", str(other)])
        assert result.exit_code == EXIT_CONFIG
        assert "omega" in result.output

    def test_grid_outside_circle(self, empty_run, tmp_path):
        _, out = empty_run
        far = write_config(tmp_path / "far.json", geometry=[], grid_bounds=[5.0, 6.0, 5.0, 6.0])
        result = runner.invoke(app, ["reconstruct", str(out / "nfm.csv"), "--config", str(far)])
        assert result.exit_code == EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        result = runner.invoke(app, ["reconstruct", str(tmp_path / "nope.csv")])
        assert result.exit_code == 2


def test_unknown_example(tmp_path):
    result = runner.invoke(app, ["pipeline", "4", "--out", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIG


def test_selftest():
    result = runner.invoke(app, ["selftest"])
    assert result.exit_code == 0, result.output


class TestInternal:
    def test_dump_oti(self, tmp_path):
        path = tmp_path / "T.csv"
        result = runner.invoke(app, ["internal", "dump-oti", str(path), "--m1", "5"])
        assert result.exit_code == 0, result.output
        df = pd.read_csv(path)
        assert list(df.columns) == ["row", "col", "re", "im"]
        assert len(df) == 128 * 128

    def test_dump_oti_aliasing(self, tmp_path):
        result = runner.invoke(app, ["internal", "dump-oti", str(tmp_path / "T.csv"), "--m1", "40"])
        assert result.exit_code == EXIT_CONFIG
        result = runner.invoke(
            app, ["internal", "dump-oti", str(tmp_path / "T.csv"), "--paper-exact"]
        )
        assert result.exit_code == 0, result.output

    def test_spectrum(self, empty_run, tmp_path):
        config, out = empty_run
        path = tmp_path / "spectrum.tsv"
        result = runner.invoke(
            app,
            ["internal", "spectrum", str(out / "nfm.csv"), "--config", str(config), "-n", "3", "-o", str(path)],
        )
        assert result.exit_code == 0, result.output
        df = pd.read_csv(path, sep="\t")
        assert list(df.columns) == ["j", "eigenvalue", "abs"]
        assert df["j"].tolist() == [1, 2, 3]


@pytest.mark.parametrize(
    "error, code",
    [
        (ParameterError("bad"), EXIT_CONFIG),
        (DomainError("bad"), EXIT_CONFIG),
        (SolverError("bad", residual=1.0), EXIT_SOLVER),
        (SingularModeError("bad", order=3), EXIT_NUMERICAL),
        (NumericalError("bad"), EXIT_NUMERICAL),
    ],
)
def test_exit_codes(error, code):
    assert exit_code_for(error) == code


@pytest.mark.slow
def test_pipeline_is_deterministic(tmp_path):
    for name in ["first", "second"]:
        args = ["pipeline", "1", "--noise", "0.05", "--seed", "7", "--out", str(tmp_path / name)]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        assert "region 1" in result.output
    first = (tmp_path / "first" / "W.csv").read_bytes()
    assert first == (tmp_path / "second" / "W.csv").read_bytes()


def test_done_level_registration_is_idempotent():
    from elasticfm.rich_wrapper import DONE, add_logging_level

    add_logging_level("DONE", DONE)
    assert logging.DONE == DONE  # type: ignore[attr-defined]
    with pytest.raises(AttributeError):
        add_logging_level("DONE", DONE + 1)
