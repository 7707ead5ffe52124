"""
Elastic medium, measurement circle and parametric obstacle boundaries.

Boundaries are smooth closed curves t -> x(t), t in [0, 2*pi), oriented
counterclockwise. Every callable here is vectorized over `t`.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from elasticfm.errors import DomainError, ParameterError

Point = Tuple[float, float]
CurveMap = Callable[[np.ndarray], np.ndarray]

# sample count used for closure / disjointness / containment checks
BOUNDARY_SAMPLES = 1024


@dataclass(frozen=True)
class ElasticMedium:
    lam: float
    mu: float
    omega: float
    kp: float
    ks: float


def make_medium(lam: float, mu: float, omega: float) -> ElasticMedium:
    """Build a medium from the Lamé constants and the angular frequency (unit density)."""
    if mu <= 0:
        raise ParameterError(f"The shear modulus must be positive, got mu={mu}")
    if 2 * mu + 3 * lam <= 0:
        raise ParameterError(
            f"The Lamé constants must satisfy 2*mu + 3*lambda > 0, got {2 * mu + 3 * lam}"
        )
    if omega <= 0:
        raise ParameterError(f"The angular frequency must be positive, got omega={omega}")
    kp = omega / np.sqrt(lam + 2 * mu)
    ks = omega / np.sqrt(mu)
    return ElasticMedium(lam=lam, mu=mu, omega=omega, kp=float(kp), ks=float(ks))


@dataclass(frozen=True)
class MeasurementCircle:
    radius: float
    m2: int

    def __post_init__(self):
        if self.radius <= 0:
            raise ParameterError(f"The measurement radius must be positive, got {self.radius}")
        if self.m2 < 2 or self.m2 % 2:
            raise ParameterError(f"The number of measurement points must be even, got {self.m2}")

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.m2) / self.m2

    @property
    def points(self) -> np.ndarray:
        """Equispaced points R(cos θ_j, sin θ_j), shape (m2, 2)."""
        theta = self.angles
        return self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    @property
    def weight(self) -> float:
        """Trapezoidal arc-length weight 2πR/m2."""
        return 2 * np.pi * self.radius / self.m2


@dataclass(frozen=True)
class ParametricBoundary:
    """A closed parametric curve.

    The coordinate maps are analytic, so they also accept complex parameters; see
    `continued`.
    """

    name: str
    position: CurveMap
    derivative: CurveMap
    second_derivative: CurveMap
    center: Point
    scale: float

    def sample(self, count: int = BOUNDARY_SAMPLES) -> np.ndarray:
        t = 2 * np.pi * np.arange(count) / count
        return self.position(t)

    def normal(self, t: np.ndarray) -> np.ndarray:
        """Outward unit normal."""
        d = self.derivative(t)
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def curvature(self, t: np.ndarray) -> np.ndarray:
        """Signed curvature; positive on convex arcs."""
        d = self.derivative(t)
        dd = self.second_derivative(t)
        cross = d[..., 0] * dd[..., 1] - d[..., 1] * dd[..., 0]
        return cross / np.linalg.norm(d, axis=-1) ** 3

    def max_extent(self) -> float:
        return float(np.max(np.linalg.norm(self.sample(), axis=-1)))

    def continued(self, t: np.ndarray) -> np.ndarray:
        """The curve as x1 + i x2, continued to complex `t`.

        For a counterclockwise curve, Im t > 0 moves into the enclosed region.
        """
        x = self.position(t)
        return x[..., 0] + 1j * x[..., 1]

    def continued_derivative(self, t: np.ndarray) -> np.ndarray:
        d = self.derivative(t)
        return d[..., 0] + 1j * d[..., 1]


def _validated(boundary: ParametricBoundary) -> ParametricBoundary:
    t = 2 * np.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
    if not np.allclose(boundary.position(np.array([0.0])), boundary.position(np.array([2 * np.pi]))):
        raise ParameterError(f"The {boundary.name} boundary is not closed")
    if np.min(np.linalg.norm(boundary.derivative(t), axis=-1)) <= 1e-12:
        raise ParameterError(f"The {boundary.name} boundary has a vanishing tangent")
    return boundary


def _parameter(t) -> np.ndarray:
    t = np.asarray(t)
    return t if np.iscomplexobj(t) else t.astype(float)


def _shifted(center: Point, scale: float, base: Callable, first: Callable, second: Callable):
    c = np.asarray(center, dtype=float)

    def position(t):
        return c + scale * base(_parameter(t))

    def derivative(t):
        return scale * first(_parameter(t))

    def second_derivative(t):
        return scale * second(_parameter(t))

    return position, derivative, second_derivative


def _check_scale(scale: float) -> None:
    if scale <= 0:
        raise ParameterError(f"Obstacle scale must be positive, got {scale}")


def kite_boundary(center: Point = (0.0, 0.0), scale: float = 1.0) -> ParametricBoundary:
    """Kite x(t) = center + scale*(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)."""
    _check_scale(scale)
    position, derivative, second = _shifted(
        center,
        scale,
        lambda t: np.stack([np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)], axis=-1),
        lambda t: np.stack([-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)], axis=-1),
        lambda t: np.stack([-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)], axis=-1),
    )
    return _validated(ParametricBoundary("kite", position, derivative, second, tuple(center), scale))


def star_boundary(center: Point = (0.0, 0.0), scale: float = 1.0) -> ParametricBoundary:
    """Five-armed star x(t) = center + scale*(1 + 0.2 cos 5t)(cos t, sin t)."""
    _check_scale(scale)

    def base(t):
        r = 1 + 0.2 * np.cos(5 * t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def first(t):
        r = 1 + 0.2 * np.cos(5 * t)
        dr = -np.sin(5 * t)
        return np.stack(
            [dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t)], axis=-1
        )

    def second(t):
        r = 1 + 0.2 * np.cos(5 * t)
        dr = -np.sin(5 * t)
        ddr = -5 * np.cos(5 * t)
        return np.stack(
            [
                ddr * np.cos(t) - 2 * dr * np.sin(t) - r * np.cos(t),
                ddr * np.sin(t) + 2 * dr * np.cos(t) - r * np.sin(t),
            ],
            axis=-1,
        )

    position, derivative, second_derivative = _shifted(center, scale, base, first, second)
    return _validated(
        ParametricBoundary("star", position, derivative, second_derivative, tuple(center), scale)
    )


def disk_boundary(center: Point = (0.0, 0.0), scale: float = 1.0) -> ParametricBoundary:
    """Circle of radius `scale`."""
    _check_scale(scale)
    position, derivative, second = _shifted(
        center,
        scale,
        lambda t: np.stack([np.cos(t), np.sin(t)], axis=-1),
        lambda t: np.stack([-np.sin(t), np.cos(t)], axis=-1),
        lambda t: np.stack([-np.cos(t), -np.sin(t)], axis=-1),
    )
    return _validated(ParametricBoundary("disk", position, derivative, second, tuple(center), scale))


BOUNDARIES = {
    "kite": kite_boundary,
    "star": star_boundary,
    "disk": disk_boundary,
}


def make_boundary(name: str, center: Point, scale: float) -> ParametricBoundary:
    """Look up a boundary family by name."""
    try:
        factory = BOUNDARIES[name]
    except KeyError:
        raise ParameterError(
            f"Unknown obstacle '{name}'. Choose one of: {', '.join(BOUNDARIES)}"
        ) from None
    return factory(center=tuple(center), scale=scale)


def _chunks(count: int, size: int = 512):
    for start in range(0, count, size):
        yield slice(start, min(start + size, count))


def contains(boundary: ParametricBoundary, points, samples: int = BOUNDARY_SAMPLES) -> np.ndarray:
    """Winding-number test: True where a point lies strictly inside the curve."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    curve = boundary.sample(samples)
    inside = np.zeros(len(pts), dtype=bool)
    for chunk in _chunks(len(pts)):
        rel = curve[None, :, :] - pts[chunk, None, :]
        angles = np.arctan2(rel[..., 1], rel[..., 0])
        steps = np.diff(np.concatenate([angles, angles[:, :1]], axis=1), axis=1)
        steps = (steps + np.pi) % (2 * np.pi) - np.pi
        inside[chunk] = np.abs(np.sum(steps, axis=1) / (2 * np.pi)) > 0.5
    return inside


def distance_to_boundary(
    boundary: ParametricBoundary, points, samples: int = BOUNDARY_SAMPLES
) -> np.ndarray:
    """Distance from each point to a dense sample of the curve."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    curve = boundary.sample(samples)
    distance = np.empty(len(pts))
    for chunk in _chunks(len(pts)):
        distance[chunk] = np.min(
            np.linalg.norm(pts[chunk, None, :] - curve[None, :, :], axis=-1), axis=1
        )
    return distance


@dataclass(frozen=True)
class Scene:
    medium: ElasticMedium
    circle: MeasurementCircle
    obstacles: List[ParametricBoundary] = field(default_factory=list)


def make_scene(
    medium: ElasticMedium,
    circle: MeasurementCircle,
    obstacles: Sequence[ParametricBoundary],
) -> Scene:
    """Validate that obstacles sit inside the circle and do not overlap."""
    obstacles = list(obstacles)
    for obstacle in obstacles:
        extent = obstacle.max_extent()
        if extent >= circle.radius:
            raise ParameterError(
                f"The {obstacle.name} obstacle reaches |x| = {extent:.3f}, "
                f"outside the measurement circle R = {circle.radius}"
            )
    for i, first in enumerate(obstacles):
        for second in obstacles[i + 1 :]:
            gap = float(np.min(distance_to_boundary(first, second.sample())))
            overlapping = gap <= 0 or np.any(contains(first, second.sample(64))) or np.any(
                contains(second, first.sample(64))
            )
            if overlapping:
                raise ParameterError(
                    f"Obstacles {first.name} at {first.center} and {second.name} at "
                    f"{second.center} are not disjoint"
                )
            logging.debug(f"Gap between {first.name} and {second.name}: {gap:.3f}")
    return Scene(medium=medium, circle=circle, obstacles=obstacles)


def inside_any(scene: Scene, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mask = np.zeros(len(pts), dtype=bool)
    for obstacle in scene.obstacles:
        mask |= contains(obstacle, pts)
    return mask


def check_outside(obstacles: Sequence[ParametricBoundary], points) -> None:
    """Raise if any point lies inside one of the obstacles."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    for obstacle in obstacles:
        inside = contains(obstacle, pts)
        if np.any(inside):
            raise DomainError(
                f"{int(np.sum(inside))} evaluation point(s) lie inside the {obstacle.name} obstacle, "
                f"e.g. {pts[np.argmax(inside)].tolist()}"
            )
