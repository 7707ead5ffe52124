"""
Outgoing-to-incoming (OtI) operator on the measurement circle.

A radiating field on |x| = r is written per angular order n as
u = Σ M(θ)^T A_n(r) (α_n, β_n)^T e^{inθ}, where (α_n, β_n) are the coefficients of
the P and S potentials. The OtI operator replaces every outgoing Hankel value by its
conjugate (B_n) and flips the sign, which turns Π(·, z)a into conj(Π(·, z))a.
"""
import logging
from dataclasses import dataclass

import numpy as np

from elasticfm.errors import DomainError, SingularModeError
from elasticfm.geometry import ElasticMedium, MeasurementCircle
from elasticfm.specfun import hankel1, hankel1_deriv

# column-equilibrated condition number above which A_n is treated as singular
MAX_MODAL_CONDITION = 1e12


def rotation_m(theta) -> np.ndarray:
    """M(θ) = [[cos θ, sin θ], [-sin θ, cos θ]], shape (..., 2, 2)."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)


def _modal(medium: ElasticMedium, n, r, conjugate: bool) -> np.ndarray:
    n = np.asarray(n)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError(f"Modal matrices need a positive radius, got r={r!r}")
    kp, ks = medium.kp, medium.ks
    hp, hs = hankel1(n, kp * r), hankel1(n, ks * r)
    dhp, dhs = hankel1_deriv(n, kp * r), hankel1_deriv(n, ks * r)
    if conjugate:
        hp, hs, dhp, dhs = np.conj(hp), np.conj(hs), np.conj(dhp), np.conj(dhs)
    return np.stack(
        [
            np.stack([kp * dhp, -1j * n * hs / r], axis=-1),
            np.stack([1j * n * hp / r, ks * dhs], axis=-1),
        ],
        axis=-2,
    )


def a_n_matrix(medium: ElasticMedium, n, r) -> np.ndarray:
    """Outgoing modal matrix A_n(r); broadcasts over `n` and `r`."""
    return _modal(medium, n, r, conjugate=False)


def b_n_matrix(medium: ElasticMedium, n, R) -> np.ndarray:
    """A_n(R) with every Hankel value conjugated; the explicit i*n factors are kept."""
    return _modal(medium, n, R, conjugate=True)


def equilibrated_condition(matrices: np.ndarray) -> np.ndarray:
    """2-norm condition number after scaling every column to unit length."""
    scaled = matrices / np.linalg.norm(matrices, axis=-2, keepdims=True)
    return np.linalg.cond(scaled)


def invert_modal(matrices: np.ndarray, orders) -> np.ndarray:
    """Invert a stack of 2x2 modal matrices by the adjugate formula."""
    orders = np.atleast_1d(np.asarray(orders))
    condition = np.atleast_1d(equilibrated_condition(matrices))
    if not np.all(np.isfinite(matrices)) or np.any(~(condition <= MAX_MODAL_CONDITION)):
        worst = int(np.argmax(np.where(np.isfinite(condition), condition, np.inf)))
        raise SingularModeError(
            f"Modal matrix of order {int(orders.flat[worst])} is singular "
            f"(condition {condition.flat[worst]:.3g})",
            order=int(orders.flat[worst]),
        )
    a, b = matrices[..., 0, 0], matrices[..., 0, 1]
    c, d = matrices[..., 1, 0], matrices[..., 1, 1]
    det = a * d - b * c
    adjugate = np.stack([np.stack([d, -b], axis=-1), np.stack([-c, a], axis=-1)], axis=-2)
    return adjugate / det[..., None, None]


def mode_operators(medium: ElasticMedium, M1: int, R: float):
    """Orders -M1..M1 and the per-order 2x2 maps B_n(R) A_n(R)^{-1}."""
    if M1 < 0:
        raise DomainError(f"The truncation order must be nonnegative, got M1={M1}")
    orders = np.arange(-M1, M1 + 1)
    inverse = invert_modal(a_n_matrix(medium, orders, R), orders)
    return orders, b_n_matrix(medium, orders, R) @ inverse


def oti_kernel(medium: ElasticMedium, M1: int, R: float, theta_x: float, theta_y: float) -> np.ndarray:
    """Truncated kernel K_{M1}(x, y) for x, y on the circle of radius R."""
    orders, operators = mode_operators(medium, M1, R)
    phase = np.exp(1j * orders * (theta_x - theta_y))
    inner = np.sum(operators * phase[:, None, None], axis=0)
    return -rotation_m(theta_x).T @ inner @ rotation_m(theta_y) / (2 * np.pi * R)


@dataclass(frozen=True)
class OtIMatrix:
    matrix: np.ndarray
    M1: int
    circle: MeasurementCircle
    weighted: bool = True


def assemble_oti(
    medium: ElasticMedium,
    M1: int,
    circle: MeasurementCircle,
    weighted: bool = True,
    allow_aliasing: bool = False,
) -> OtIMatrix:
    """Discrete OtI operator; block (i, j) is K_{M1}(x_i, x_j), times 2πR/m2 when weighted.

    Rows and columns use the stacked index 2*(point) + component.
    """
    m2, R = circle.m2, circle.radius
    if M1 >= m2 / 2:
        if not allow_aliasing:
            raise DomainError(
                f"M1 = {M1} aliases on {m2} points (need M1 < {m2 // 2}); "
                "pass allow_aliasing to reproduce the published setting"
            )
        logging.warning(f"Assembling the OtI matrix with aliased orders (M1 = {M1}, m2 = {m2}).")
    orders, operators = mode_operators(medium, M1, R)

    # the inner sum depends on θx - θy only: evaluate it once per angular offset
    offsets = circle.angles
    phases = np.exp(1j * np.outer(offsets, orders))
    inner = np.einsum("kn,nab->kab", phases, operators)

    i, j = np.meshgrid(np.arange(m2), np.arange(m2), indexing="ij")
    rotations = rotation_m(circle.angles)
    blocks = (
        -np.swapaxes(rotations, -1, -2)[i] @ inner[(i - j) % m2] @ rotations[j] / (2 * np.pi * R)
    )
    if weighted:
        blocks = blocks * circle.weight
    matrix = blocks.transpose(0, 2, 1, 3).reshape(2 * m2, 2 * m2)
    return OtIMatrix(matrix=matrix, M1=M1, circle=circle, weighted=weighted)
