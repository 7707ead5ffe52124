"""
Run configuration: one flat JSON document per experiment.

Defaults reproduce the published setting (λ=2, μ=1, ω=10, R=4, m2=64) with the
alias-free truncation M1=31; `paper_exact` switches to M1=40.
"""
import json
import logging
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from elasticfm.errors import ElasticFMError, ParameterError
from elasticfm.factorization import GridSpec
from elasticfm.geometry import (
    MeasurementCircle,
    Scene,
    make_boundary,
    make_medium,
    make_scene,
)

ALIAS_FREE_M1 = 31
PAPER_M1 = 40
SOLVERS = ("mfs", "series")


def _kite() -> List[Dict[str, Any]]:
    return [{"name": "kite", "center": [0.0, 0.0], "scale": 1.0}]


@dataclass(frozen=True)
class RunConfig:
    lam: float = 2.0
    mu: float = 1.0
    omega: float = 10.0
    radius: float = 4.0
    m2: int = 64
    m1: Optional[int] = None
    truncation: Optional[int] = None
    geometry: List[Dict[str, Any]] = field(default_factory=_kite)
    grid_bounds: List[float] = field(default_factory=lambda: [-3.0, 3.0, -3.0, 3.0])
    grid_shape: List[int] = field(default_factory=lambda: [101, 101])
    alphas: List[float] = field(default_factory=lambda: [2 * math.pi / 3])
    noise: float = 0.0
    seed: int = 0
    paper_exact: bool = False
    solver: str = "mfs"
    mfs_sources: Optional[int] = None
    mfs_collocation: Optional[int] = None
    mfs_depth: float = 0.5
    mfs_tolerance: float = 1e-4
    out_dir: str = "elasticfm-out"

    # region: derived values
    @property
    def resolved_m1(self) -> int:
        if self.m1 is not None:
            return self.m1
        return PAPER_M1 if self.paper_exact else ALIAS_FREE_M1

    @property
    def resolved_truncation(self) -> int:
        return self.truncation if self.truncation is not None else self.resolved_m1

    @property
    def grid(self) -> GridSpec:
        x_min, x_max, y_min, y_max = self.grid_bounds
        nx, ny = self.grid_shape
        return GridSpec(x_min, x_max, y_min, y_max, int(nx), int(ny))

    def medium(self):
        return make_medium(self.lam, self.mu, self.omega)

    def circle(self) -> MeasurementCircle:
        return MeasurementCircle(self.radius, self.m2)

    def scene(self) -> Scene:
        obstacles = [
            make_boundary(g["name"], tuple(g.get("center", (0.0, 0.0))), float(g.get("scale", 1.0)))
            for g in self.geometry
        ]
        return make_scene(self.medium(), self.circle(), obstacles)

    def solver_options(self) -> Dict[str, Any]:
        return dict(
            n_sources=self.mfs_sources,
            n_collocation=self.mfs_collocation,
            depth=self.mfs_depth,
            tolerance=self.mfs_tolerance,
        )

    # endregion

    def validate(self) -> "RunConfig":
        """Check every module precondition before any compute."""
        try:
            self.scene()
        except ElasticFMError as e:
            raise ParameterError(str(e)) from e
        m1, m2 = self.resolved_m1, self.m2
        if m1 < 0:
            raise ParameterError(f"m1 must be nonnegative, got {m1}")
        if m1 >= m2 / 2 and not self.paper_exact:
            raise ParameterError(
                f"m1 = {m1} aliases on m2 = {m2} points; use m1 < {m2 // 2} or --paper-exact"
            )
        if not 0 < self.resolved_truncation <= 2 * m2:
            raise ParameterError(
                f"The Picard truncation must lie in 1..{2 * m2}, got {self.resolved_truncation}"
            )
        x_min, x_max, y_min, y_max = self.grid_bounds
        nx, ny = self.grid_shape
        if not (x_min < x_max and y_min < y_max) or nx < 2 or ny < 2:
            raise ParameterError(f"Invalid grid {self.grid_bounds} at {nx}x{ny}")
        if not np.any(np.linalg.norm(self.grid.nodes(), axis=-1) < self.radius):
            raise ParameterError(
                f"No node of the grid {self.grid_bounds} at {nx}x{ny} lies inside the "
                f"measurement circle R = {self.radius}"
            )
        if not self.alphas:
            raise ParameterError("At least one polarization angle is required")
        if self.noise < 0:
            raise ParameterError(f"The noise level must be nonnegative, got {self.noise}")
        if self.solver not in SOLVERS:
            raise ParameterError(f"Unknown solver '{self.solver}', choose one of {SOLVERS}")
        if not 0 < self.mfs_depth < 1:
            raise ParameterError(f"mfs_depth must lie in (0, 1), got {self.mfs_depth}")
        if self.mfs_sources is not None and self.mfs_sources < 1:
            raise ParameterError(f"mfs_sources must be positive, got {self.mfs_sources}")
        if self.mfs_collocation is not None and self.mfs_collocation < (self.mfs_sources or 1):
            raise ParameterError(
                f"mfs_collocation = {self.mfs_collocation} cannot determine "
                f"mfs_sources = {self.mfs_sources}"
            )
        return self

    def override(self, **changes) -> "RunConfig":
        """Return a copy with every non-None keyword applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"Unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParameterError(f"Configuration is not valid JSON: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        logging.debug(f"Reading configuration from {path}")
        return cls.from_json(Path(path).read_text())


def example_config(example_id: int) -> RunConfig:
    """The three published scenes: kite, star, and star + small kite."""
    if example_id == 1:
        return RunConfig(out_dir="example1")
    if example_id == 2:
        return RunConfig(
            geometry=[{"name": "star", "center": [0.0, 0.0], "scale": 1.0}],
            out_dir="example2",
        )
    if example_id == 3:
        return RunConfig(
            geometry=[
                {"name": "star", "center": [2.0, 2.0], "scale": 1.0},
                {"name": "kite", "center": [-1.0, -1.0], "scale": 0.5},
            ],
            grid_bounds=[-3.5, 3.5, -3.5, 3.5],
            alphas=[0.0, math.pi / 2, 2 * math.pi / 3],
            noise=0.02,
            out_dir="example3",
        )
    raise ParameterError(f"Unknown example {example_id}; choose 1, 2 or 3")


_PI_TERM = re.compile(r"^(?P<coef>[-+]?\d*\.?\d*)\*?pi(?:/(?P<den>\d+(?:\.\d+)?))?$")


def parse_angle(text: str) -> float:
    """Parse `1.2`, `pi`, `pi/2`, `2pi/3`, `0.5pi` or `-pi/4` as radians."""
    token = text.strip().lower().replace(" ", "")
    match = _PI_TERM.match(token)
    if match:
        coef = match.group("coef")
        value = math.pi * (float(coef) if coef not in ("", "+", "-") else float(coef + "1"))
        return value / float(match.group("den")) if match.group("den") else value
    try:
        return float(token)
    except ValueError:
        raise ParameterError(f"Cannot parse angle '{text}'") from None


def parse_alphas(text: str) -> List[float]:
    return [parse_angle(item) for item in text.split(",") if item.strip()]


def parse_grid(text: str) -> List[int]:
    try:
        nx, ny = (int(v) for v in text.split(","))
    except ValueError:
        raise ParameterError(f"--grid expects NX,NY, got '{text}'") from None
    return [nx, ny]
