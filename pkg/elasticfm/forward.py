"""
Direct scattering by rigid obstacles (u = -u^in on ∂D) under point-source incidence.

Two solvers are provided:

- `MFSSolver`, a method-of-fundamental-solutions solver that represents the scattered
  field as Σ_k Π(x, s_k) c_k over fictitious sources inside the obstacles and fits the
  boundary data by truncated-SVD least squares. One factorization serves any number of
  incident fields.
- `disk_series`, the exact modal solution for an origin-centred disk, used as an oracle.

Sources sit on the boundary curve continued to complex parameters, x(t + iσ), which
follows the shape of the obstacle at every depth σ below its first singular point. The
depth is picked per obstacle from a scan of the continued curve and from the distance to
nearby incident sources; when an incident source comes close, nodes are graded toward it.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.spatial

from elasticfm.errors import DomainError, NumericalError, ParameterError, SolverError
from elasticfm.geometry import (
    BOUNDARY_SAMPLES,
    ElasticMedium,
    ParametricBoundary,
    Scene,
    check_outside,
    contains,
    disk_boundary,
)
from elasticfm.kernels import navier_green
from elasticfm.oti import a_n_matrix, invert_modal, rotation_m

IncidentField = Callable[[np.ndarray], np.ndarray]

# source depth as a fraction of the safe depth of each obstacle
DEFAULT_DEPTH = 0.5
MAX_DEPTH = 0.35
# the continued curve is singular where its speed collapses
SPEED_DROP = 0.1
SCAN_STEP = 0.005
SCAN_LIMIT = 2.0
GRADINGS = (0.3, 0.5, 0.7, 0.8, 0.9)
# sources per obstacle: depth * count ≈ DECAY_TARGET
DECAY_TARGET = 28.0
MIN_SOURCES = 256
MAX_SOURCES = 1024
SOURCE_STEP = 32
REFINEMENT = 1.5
NEIGHBOUR_SAMPLES = 256
SVD_CUTOFF = 1e-12
DEFAULT_TOLERANCE = 1e-4


def _nodes(count: int, offset: float = 0.0) -> np.ndarray:
    return 2 * np.pi * (np.arange(count) + offset) / count


def _round_count(value: float) -> int:
    count = int(np.ceil(value / SOURCE_STEP)) * SOURCE_STEP
    return int(np.clip(count, MIN_SOURCES, MAX_SOURCES))


@dataclass(frozen=True)
class SourceLayout:
    """Node placement for one obstacle.

    Nodes are equispaced in s and mapped to the curve parameter by
    t = s - grading * sin(s - focus), which clusters them around `focus`. Collocation
    nodes sit on the curve, sources at s + i * depth.
    """

    depth: float
    sources: int
    collocation: int
    focus: float = 0.0
    grading: float = 0.0

    def parameter(self, s: np.ndarray) -> np.ndarray:
        return s - self.grading * np.sin(s - self.focus)

    def stretch(self, s: np.ndarray) -> np.ndarray:
        return 1 - self.grading * np.cos(s - self.focus)

    def refined(self) -> "SourceLayout":
        sources = _round_count(REFINEMENT * self.sources)
        return replace(self, sources=sources, collocation=max(self.collocation, 2 * sources))


def _speed(boundary: ParametricBoundary, layout: SourceLayout, s: np.ndarray) -> np.ndarray:
    return np.abs(boundary.continued_derivative(layout.parameter(s)) * layout.stretch(s))


def critical_depth(boundary: ParametricBoundary, layout: SourceLayout) -> float:
    """First depth at which the continued curve nearly stops, at most SCAN_LIMIT."""
    s = _nodes(BOUNDARY_SAMPLES)
    depths = SCAN_STEP * np.arange(1, int(round(SCAN_LIMIT / SCAN_STEP)) + 1)
    ratio = _speed(boundary, layout, s[None, :] + 1j * depths[:, None]) / _speed(boundary, layout, s)
    dropped = np.flatnonzero(np.min(ratio, axis=1) < SPEED_DROP)
    return float(depths[dropped[0]]) if dropped.size else SCAN_LIMIT


def _exclusion_reach(
    boundary: ParametricBoundary, layout: SourceLayout, exclusion: np.ndarray
) -> np.ndarray:
    """Parametric distance from each boundary node to the nearest excluded point."""
    s = _nodes(BOUNDARY_SAMPLES)
    distance = scipy.spatial.distance.cdist(boundary.position(layout.parameter(s)), exclusion)
    return np.min(distance, axis=1) / _speed(boundary, layout, s)


def plan_sources(
    boundary: ParametricBoundary,
    exclusion: Optional[np.ndarray] = None,
    depth: float = DEFAULT_DEPTH,
    n_sources: Optional[int] = None,
    n_collocation: Optional[int] = None,
) -> SourceLayout:
    """Choose the source depth, grading and node counts for one obstacle.

    The safe depth is the smaller of `critical_depth` and the parametric distance to
    `exclusion`, the points where the data is singular (incident sources, neighbouring
    obstacles). Sources sit at the fraction `depth` of it. When an exclusion point is the
    binding limit, nodes are graded toward it if that allows deeper sources. Counts left
    as None follow from the chosen depth.
    """
    if not 0 < depth < 1:
        raise DomainError(f"The source depth fraction must lie in (0, 1), got {depth}")
    layout = SourceLayout(depth=0.0, sources=MIN_SOURCES, collocation=2 * MIN_SOURCES)
    critical = critical_depth(boundary, layout)
    safe = critical
    if exclusion is not None and len(exclusion):
        exclusion = np.asarray(exclusion, dtype=float)
        reach = _exclusion_reach(boundary, layout, exclusion)
        safe = min(critical, float(np.min(reach)))
        focus = float(_nodes(BOUNDARY_SAMPLES)[np.argmin(reach)])
        for grading in GRADINGS if safe < critical else ():
            graded = replace(layout, focus=focus, grading=grading)
            limit = min(
                critical_depth(boundary, graded),
                float(np.min(_exclusion_reach(boundary, graded, exclusion))),
            )
            logging.debug(f"{boundary.name}: grading {grading} allows depth {limit:.3f}")
            if limit > safe:
                safe, layout = limit, graded
    chosen = min(depth * safe, MAX_DEPTH)
    sources = n_sources if n_sources is not None else _round_count(DECAY_TARGET / chosen)
    collocation = n_collocation if n_collocation is not None else 2 * sources
    if collocation < sources:
        raise DomainError(
            f"{collocation} collocation nodes cannot determine {sources} sources on the "
            f"{boundary.name} obstacle"
        )
    logging.debug(
        f"{boundary.name}: {sources} sources at depth {chosen:.3f} "
        f"(safe {safe:.3f}, grading {layout.grading})"
    )
    return replace(layout, depth=chosen, sources=sources, collocation=collocation)


def source_points(boundary: ParametricBoundary, layout: SourceLayout) -> np.ndarray:
    """Fictitious source locations x(t(s_k + i*depth)), shape (layout.sources, 2)."""
    z = boundary.continued(layout.parameter(_nodes(layout.sources) + 1j * layout.depth))
    return np.stack([z.real, z.imag], axis=-1)


def collocation_points(
    boundary: ParametricBoundary, layout: SourceLayout, offset: float = 0.0
) -> np.ndarray:
    return boundary.position(layout.parameter(_nodes(layout.collocation, offset)))


def _stacked_green(medium: ElasticMedium, points: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Matrix with entry [2i + c, 2k + l] = Π(x_i, s_k)[c, l]."""
    green = navier_green(medium, points[:, None, :], sources[None, :, :])
    return green.transpose(0, 2, 1, 3).reshape(2 * len(points), 2 * len(sources))


@dataclass(frozen=True)
class ScatterSolution:
    """MFS representation of one scattered field."""

    medium: ElasticMedium
    obstacles: List[ParametricBoundary]
    sources: np.ndarray
    coefficients: np.ndarray
    residual: float

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        green = navier_green(self.medium, points[:, None, :], self.sources[None, :, :])
        return np.einsum("pkab,kb->pa", green, self.coefficients)


class MFSSolver:
    """Method of fundamental solutions for one or more rigid obstacles.

    The collocation matrix couples all obstacles, so multi-component scenes are solved
    as a single system. With the node counts left to the solver, a batch whose residual
    misses the tolerance is retried on refined nodes, up to MAX_SOURCES per obstacle.
    """

    def __init__(
        self,
        medium: ElasticMedium,
        obstacles: Sequence[ParametricBoundary],
        n_sources: Optional[int] = None,
        n_collocation: Optional[int] = None,
        depth: float = DEFAULT_DEPTH,
        cutoff: float = SVD_CUTOFF,
        tolerance: float = DEFAULT_TOLERANCE,
        exclusion: Optional[np.ndarray] = None,
    ) -> None:
        if n_sources is not None and n_sources < 1:
            raise DomainError(f"At least one source per obstacle is required, got {n_sources}")
        self.medium = medium
        self.obstacles = list(obstacles)
        self.cutoff = cutoff
        self.tolerance = tolerance
        self.adaptive = n_sources is None and n_collocation is None
        self.last_residuals: Optional[np.ndarray] = None
        self.layouts = [
            plan_sources(
                obstacle,
                self._exclusion(index, exclusion),
                depth=depth,
                n_sources=n_sources,
                n_collocation=n_collocation,
            )
            for index, obstacle in enumerate(self.obstacles)
        ]
        self._factorize()

    def _exclusion(self, index: int, exclusion: Optional[np.ndarray]) -> np.ndarray:
        parts = [o.sample(NEIGHBOUR_SAMPLES) for j, o in enumerate(self.obstacles) if j != index]
        if exclusion is not None:
            parts.append(np.atleast_2d(np.asarray(exclusion, dtype=float)))
        return np.concatenate(parts) if parts else np.empty((0, 2))

    def _factorize(self) -> None:
        sources = []
        for obstacle, layout in zip(self.obstacles, self.layouts):
            points = source_points(obstacle, layout)
            inside = contains(obstacle, points)
            if not np.all(inside):
                raise ParameterError(
                    f"{int(np.sum(~inside))} MFS source(s) fall outside the {obstacle.name} "
                    f"obstacle, e.g. {points[np.argmin(inside)].tolist()}; lower the source depth"
                )
            sources.append(points)
        self.sources = np.concatenate(sources)
        self.collocation = np.concatenate(
            [collocation_points(o, layout) for o, layout in zip(self.obstacles, self.layouts)]
        )
        self.validation = np.concatenate(
            [collocation_points(o, layout, 0.5) for o, layout in zip(self.obstacles, self.layouts)]
        )

        matrix = _stacked_green(self.medium, self.collocation, self.sources)
        logging.debug(
            f"Factorizing the {matrix.shape[0]}x{matrix.shape[1]} MFS collocation matrix"
        )
        try:
            u, s, vh = scipy.linalg.svd(matrix, full_matrices=False)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericalError(f"SVD of the collocation matrix failed: {e}") from e
        keep = s > self.cutoff * s[0]
        self._u = u[:, keep]
        self._s = s[keep]
        self._vh = vh[keep]
        self._validation_matrix = _stacked_green(self.medium, self.validation, self.sources)
        logging.debug(f"Kept {int(keep.sum())} of {len(s)} singular values")

    def _refine(self) -> bool:
        if not self.adaptive or all(layout.sources >= MAX_SOURCES for layout in self.layouts):
            return False
        self.layouts = [layout.refined() for layout in self.layouts]
        self._factorize()
        return True

    def _fit(self, boundary_data: np.ndarray) -> np.ndarray:
        return self._vh.conj().T @ ((self._u.conj().T @ boundary_data) / self._s[:, None])

    def _attempt(self, incident: Sequence[IncidentField]) -> Tuple[np.ndarray, np.ndarray]:
        on_boundary = np.stack(
            [np.asarray(f(self.collocation)).reshape(-1) for f in incident], axis=-1
        )
        on_validation = np.stack(
            [np.asarray(f(self.validation)).reshape(-1) for f in incident], axis=-1
        )
        coefficients = self._fit(-on_boundary)
        return coefficients, self.residuals(coefficients, on_validation)

    def solve_batch(self, incident: Sequence[IncidentField]) -> np.ndarray:
        """Coefficients (2 * sources, len(incident)) for many incident fields.

        Raises `SolverError` naming the first field whose boundary residual exceeds the
        tolerance once refinement is exhausted.
        """
        coefficients, residuals = self._attempt(incident)
        while np.any(~(residuals <= self.tolerance)) and self._refine():
            logging.info(
                f"MFS residual {np.nanmax(residuals):.1e} above {self.tolerance:.1e}; retrying "
                f"with {[layout.sources for layout in self.layouts]} sources"
            )
            coefficients, residuals = self._attempt(incident)
        for index, residual in enumerate(residuals):
            logging.debug(f"Incident field {index}: relative boundary residual {residual:.2e}")
        failed = np.flatnonzero(~(residuals <= self.tolerance))
        if failed.size:
            index = int(failed[0])
            raise SolverError(
                f"MFS boundary residual {residuals[index]:.3e} exceeds tolerance "
                f"{self.tolerance:.1e} for incident field {index}",
                residual=float(residuals[index]),
                source_index=index,
            )
        self.last_residuals = residuals
        return coefficients

    def residuals(self, coefficients: np.ndarray, on_validation: np.ndarray) -> np.ndarray:
        """‖u + u^in‖ / ‖u^in‖ at the validation points, per column; 0 for zero data."""
        misfit = np.linalg.norm(self._validation_matrix @ coefficients + on_validation, axis=0)
        scale = np.linalg.norm(on_validation, axis=0)
        return np.where(scale > 0, misfit / np.where(scale > 0, scale, 1.0), misfit)

    def solve(self, incident: IncidentField) -> ScatterSolution:
        coefficients = self.solve_batch([incident])
        return ScatterSolution(
            medium=self.medium,
            obstacles=self.obstacles,
            sources=self.sources,
            coefficients=coefficients[:, 0].reshape(-1, 2),
            residual=float(self.last_residuals[0]),
        )

    def field_matrix(self, points: np.ndarray) -> np.ndarray:
        """Map from stacked coefficients to the stacked scattered field at `points`."""
        check_outside(self.obstacles, points)
        return _stacked_green(self.medium, points, self.sources)


def solve_mfs(
    scene: Scene,
    obstacle: Optional[ParametricBoundary],
    incident: IncidentField,
    **options,
) -> ScatterSolution:
    """Solve for one incident field; `obstacle=None` uses every obstacle of the scene."""
    obstacles = scene.obstacles if obstacle is None else [obstacle]
    options.setdefault("exclusion", scene.circle.points)
    return MFSSolver(scene.medium, obstacles, **options).solve(incident)


def _fourier_orders(count: int, n_trunc: int) -> np.ndarray:
    return np.concatenate([np.arange(0, n_trunc + 1), np.arange(-n_trunc, 0)]) % count


def modal_coefficients(
    medium: ElasticMedium, values: np.ndarray, radius: float, n_trunc: int
) -> np.ndarray:
    """Potential coefficients (α_n, β_n), n = -n_trunc..n_trunc, of a radiating field.

    `values` are Cartesian displacements sampled at equispaced angles 2πj/len(values)
    on the circle of the given radius.
    """
    values = np.asarray(values)
    count = len(values)
    if count <= 2 * n_trunc:
        raise DomainError(f"{count} samples cannot resolve orders up to {n_trunc}")
    theta = 2 * np.pi * np.arange(count) / count
    polar = np.einsum("jab,jb->ja", rotation_m(theta), values)
    spectrum = np.fft.fft(polar, axis=0) / count
    orders = np.arange(-n_trunc, n_trunc + 1)
    data = spectrum[orders % count]
    inverse = invert_modal(a_n_matrix(medium, orders, radius), orders)
    return np.einsum("nab,nb->na", inverse, data)


def modal_field(
    medium: ElasticMedium, coefficients: np.ndarray, points: np.ndarray
) -> np.ndarray:
    """Evaluate Σ M(θ)^T A_n(r) (α_n, β_n) e^{inθ} at `points`."""
    n_trunc = (len(coefficients) - 1) // 2
    orders = np.arange(-n_trunc, n_trunc + 1)
    r = np.linalg.norm(points, axis=-1)
    theta = np.arctan2(points[:, 1], points[:, 0])
    radial = a_n_matrix(medium, orders[None, :], r[:, None])
    phase = np.exp(1j * np.outer(theta, orders))
    polar = np.einsum("pnab,nb,pn->pa", radial, coefficients, phase)
    return np.einsum("pba,pb->pa", rotation_m(theta), polar)


@dataclass(frozen=True)
class DiskSeriesSolution:
    medium: ElasticMedium
    radius: float
    coefficients: np.ndarray
    obstacles: List[ParametricBoundary] = field(default_factory=list)

    @property
    def orders(self) -> np.ndarray:
        n_trunc = (len(self.coefficients) - 1) // 2
        return np.arange(-n_trunc, n_trunc + 1)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return modal_field(self.medium, self.coefficients, points)


def disk_series(
    medium: ElasticMedium,
    radius: float,
    incident: IncidentField,
    n_trunc: Optional[int] = None,
) -> DiskSeriesSolution:
    """Exact modal solution for the rigid disk |x| < radius.

    Each order solves A_n(radius)(α_n, β_n) = f_n with f_n the Fourier coefficients of
    M(θ)(-u^in) on the boundary.
    """
    minimum = int(np.ceil(medium.ks * radius)) + 20
    if n_trunc is None:
        n_trunc = minimum
    elif n_trunc < minimum:
        raise DomainError(f"The disk series needs at least {minimum} orders, got {n_trunc}")
    count = max(8 * n_trunc, 256)
    theta = 2 * np.pi * np.arange(count) / count
    boundary = radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    data = -np.asarray(incident(boundary))
    coefficients = modal_coefficients(medium, data, radius, n_trunc)
    return DiskSeriesSolution(
        medium=medium,
        radius=radius,
        coefficients=coefficients,
        obstacles=[disk_boundary((0.0, 0.0), radius)],
    )


Solution = Union[ScatterSolution, DiskSeriesSolution]


def scatter_at(solution: Solution, points) -> np.ndarray:
    """Scattered displacement at `points`, shape (len(points), 2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    check_outside(solution.obstacles, points)
    return solution.evaluate(points)
