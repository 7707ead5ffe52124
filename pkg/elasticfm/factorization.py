"""
Near-field data and the factorization-method indicator.

Layout of every (2*m2) x (2*m2) matrix: row 2i + c is component c at receiver x_i,
column 2j + l is polarization a_l (a_1 = e_1, a_2 = e_2) of the source at y_j = x_j.
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
import rich.progress
import scipy.linalg
from scipy import ndimage

from elasticfm.errors import DomainError, NumericalError, ParameterError
from elasticfm.forward import MFSSolver, disk_series
from elasticfm.geometry import ElasticMedium, MeasurementCircle, Scene
from elasticfm.kernels import point_source, polarization, test_functions
from elasticfm.oti import OtIMatrix

POLARIZATIONS = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
EIGENVALUE_FLOOR = 1e-12
W_CAP = 1e30
SCAN_CHUNK = 1024


@dataclass(frozen=True)
class NoiseDescriptor:
    delta: float
    seed: int


@dataclass(frozen=True)
class NearFieldMatrix:
    matrix: np.ndarray
    medium: ElasticMedium
    circle: MeasurementCircle
    noise: Optional[NoiseDescriptor] = None
    convention: str = "source-major, a1=e1 then a2=e2"

    @property
    def is_clean(self) -> bool:
        return self.noise is None or self.noise.delta == 0

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block: entry [c, l] is component c at x_i for source y_j with polarization a_l."""
        return self.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]


def _incident(medium: ElasticMedium, y: np.ndarray, a: np.ndarray):
    def field(points):
        return point_source(medium, points, y, a)

    return field


def incident_fields(medium: ElasticMedium, circle: MeasurementCircle):
    """Point-source fields in column order: source j, then polarization a_1, a_2."""
    return [
        _incident(medium, y, a)
        for y in circle.points
        for a in POLARIZATIONS
    ]


def assemble_n(
    scene: Scene,
    solver: str = "mfs",
    **solver_options,
) -> NearFieldMatrix:
    """Simulate the near-field matrix for `scene`.

    `solver` is "mfs" (any scene, one combined system for all obstacles) or "series"
    (a single rigid disk centred at the origin).
    """
    medium, circle = scene.medium, scene.circle
    size = 2 * circle.m2
    if not scene.obstacles:
        logging.info("No obstacles in the scene: the near-field matrix is zero.")
        return NearFieldMatrix(np.zeros((size, size), dtype=complex), medium, circle)

    receivers = circle.points
    fields = incident_fields(medium, circle)
    if solver == "series":
        obstacle = scene.obstacles[0]
        if len(scene.obstacles) != 1 or obstacle.name != "disk" or np.any(obstacle.center):
            raise ParameterError("The series solver needs a single disk centred at the origin")
        columns = [
            disk_series(medium, obstacle.scale, field).evaluate(receivers).reshape(-1)
            for field in rich.progress.track(
                fields, description="Disk series", transient=True
            )
        ]
        matrix = np.stack(columns, axis=-1)
    elif solver == "mfs":
        mfs = MFSSolver(medium, scene.obstacles, exclusion=receivers, **solver_options)
        coefficients = mfs.solve_batch(fields)
        logging.info(
            f"Solved {len(fields)} forward problems; worst boundary residual "
            f"{np.max(mfs.last_residuals):.2e}"
        )
        matrix = mfs.field_matrix(receivers) @ coefficients
    else:
        raise ParameterError(f"Unknown forward solver '{solver}' (use 'mfs' or 'series')")

    if not np.all(np.isfinite(matrix)):
        raise NumericalError("The simulated near-field matrix has non-finite entries")
    return NearFieldMatrix(matrix, medium, circle)


def add_noise(N: NearFieldMatrix, delta: float, seed: int) -> NearFieldMatrix:
    """Multiply every complex entry by (1 + δ r), r ~ U[-1, 1], from a seeded stream."""
    if delta < 0:
        raise DomainError(f"The noise level must be nonnegative, got {delta}")
    descriptor = NoiseDescriptor(delta=float(delta), seed=int(seed))
    if delta == 0:
        return replace(N, matrix=N.matrix.copy(), noise=descriptor)
    rng = np.random.default_rng(seed)
    factors = 1 + delta * rng.uniform(-1.0, 1.0, size=N.matrix.shape)
    return replace(N, matrix=N.matrix * factors, noise=descriptor)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of F♯ sorted by descending |λ|.

    `vectors` are orthonormal in the Euclidean product; `weight` is the quadrature
    weight of the discrete L² product used by the Picard series.
    """

    values: np.ndarray
    vectors: np.ndarray
    weight: float = 1.0

    @property
    def weighted_vectors(self) -> np.ndarray:
        """Eigenvectors normalized in the weighted product."""
        return self.vectors / np.sqrt(self.weight)

    def __len__(self) -> int:
        return len(self.values)


def _hermitian_abs(matrix: np.ndarray) -> np.ndarray:
    values, vectors = scipy.linalg.eigh(matrix)
    return (vectors * np.abs(values)) @ vectors.conj().T


def f_sharp(T, N, weight: Optional[float] = None):
    """F♯ = |Re F| + |Im F| for F = T N, and its eigensystem.

    `T` and `N` may be `OtIMatrix` / `NearFieldMatrix` or plain arrays.
    """
    t = T.matrix if isinstance(T, OtIMatrix) else np.asarray(T)
    n = N.matrix if isinstance(N, NearFieldMatrix) else np.asarray(N)
    if t.shape[1] != n.shape[0]:
        raise DomainError(f"Cannot multiply T {t.shape} by N {n.shape}")
    if weight is None:
        weight = T.circle.weight if isinstance(T, OtIMatrix) else 1.0

    F = t @ n
    real_part = (F + F.conj().T) / 2
    imag_part = (F - F.conj().T) / 2j
    try:
        sharp = _hermitian_abs(real_part) + _hermitian_abs(imag_part)
        sharp = (sharp + sharp.conj().T) / 2
        values, vectors = scipy.linalg.eigh(sharp)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Hermitian eigendecomposition failed: {e}") from e
    order = np.argsort(-np.abs(values), kind="stable")
    return sharp, EigenSystem(values=values[order], vectors=vectors[:, order], weight=weight)


def picard_terms(eigs: EigenSystem, phis: np.ndarray, J: int) -> np.ndarray:
    """Σ_{j<J} |<φ, ψ_j>|² / |λ_j| for a stack of test functions (rows of `phis`)."""
    phis = np.atleast_2d(phis)
    if phis.shape[-1] != eigs.vectors.shape[0]:
        raise DomainError(
            f"Test function length {phis.shape[-1]} does not match {eigs.vectors.shape[0]}"
        )
    if not 0 < J <= len(eigs):
        raise DomainError(f"The truncation must lie in 1..{len(eigs)}, got {J}")
    values = np.abs(eigs.values[:J])
    keep = (values > 0) & (values >= EIGENVALUE_FLOOR * values[0])
    # <φ, ψ>_w = w Σ φ conj(ψ) with ψ normalized in the weighted product; the full product
    # is sliced so the leading terms do not depend on J
    products = (eigs.weight * phis @ eigs.weighted_vectors.conj())[:, :J]
    terms = np.abs(products[:, keep]) ** 2 / values[keep]
    if terms.shape[-1] == 0:
        return np.zeros(len(phis))
    # sequential accumulation keeps the partial sums monotone in J
    return np.cumsum(terms, axis=-1)[:, -1]


def _reciprocal(series: np.ndarray, cap: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(series > 0, 1.0 / np.where(series > 0, series, 1.0), cap)


def picard_w(eigs: EigenSystem, phi: np.ndarray, J: int, cap: float = W_CAP) -> float:
    """W = 1 / Σ_{j<=J} |<φ, ψ_j>|² / |λ_j|, or `cap` when the series vanishes."""
    return float(_reciprocal(picard_terms(eigs, phi, J), cap)[0])


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    def nodes(self) -> np.ndarray:
        """Nodes in row-major (y, x) order, shape (ny * nx, 2)."""
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.stack([X.ravel(), Y.ravel()], axis=-1)


@dataclass(frozen=True)
class IndicatorGrid:
    """W on a rectangular grid; values[iy, ix], NaN where the node is not evaluated."""

    spec: GridSpec
    values: np.ndarray
    alphas: tuple = ()

    @property
    def evaluated(self) -> np.ndarray:
        return np.isfinite(self.values)


def indicator_scan(
    eigs: EigenSystem,
    medium: ElasticMedium,
    circle: MeasurementCircle,
    grid: GridSpec,
    alphas: Sequence[float],
    J: int,
    cap: float = W_CAP,
) -> IndicatorGrid:
    """Evaluate W(z) = [Σ_a 1/W^a(z)]^{-1} at the grid nodes strictly inside the circle."""
    if not alphas:
        raise DomainError("At least one polarization angle is required")
    nodes = grid.nodes()
    inside = np.linalg.norm(nodes, axis=-1) < circle.radius
    if not np.any(inside):
        raise DomainError("No grid node lies inside the measurement circle")
    samples = nodes[inside]
    receivers = circle.points
    directions = [polarization(alpha) for alpha in alphas]

    combined = np.empty(len(samples))
    chunks = range(0, len(samples), SCAN_CHUNK)
    for start in rich.progress.track(chunks, description="Scanning grid", transient=True):
        block = samples[start : start + SCAN_CHUNK]
        reciprocal_sum = np.zeros(len(block))
        for a in directions:
            w = _reciprocal(picard_terms(eigs, test_functions(medium, receivers, block, a), J), cap)
            reciprocal_sum += 1.0 / w
        combined[start : start + SCAN_CHUNK] = 1.0 / reciprocal_sum

    values = np.full(len(nodes), np.nan)
    values[inside] = combined
    return IndicatorGrid(
        spec=grid, values=values.reshape(grid.ny, grid.nx), alphas=tuple(float(a) for a in alphas)
    )


@dataclass(frozen=True)
class Component:
    area: int
    centroid: np.ndarray


def threshold_components(grid: IndicatorGrid, level: float = 0.3) -> List[Component]:
    """Connected regions where W exceeds `level` times its maximum, largest first."""
    values = np.nan_to_num(grid.values, nan=0.0)
    mask = values >= level * np.max(values)
    labels, count = ndimage.label(mask)
    X, Y = np.meshgrid(grid.spec.xs, grid.spec.ys)
    components = []
    for label in range(1, count + 1):
        region = labels == label
        centroid = np.array([X[region].mean(), Y[region].mean()])
        components.append(Component(area=int(region.sum()), centroid=centroid))
    return sorted(components, key=lambda c: -c.area)
