import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from elasticfm.errors import DomainError, SingularModeError
from elasticfm.geometry import MeasurementCircle
from elasticfm.kernels import point_source, polarization, test_functions
from elasticfm.oti import (
    a_n_matrix,
    assemble_oti,
    b_n_matrix,
    equilibrated_condition,
    invert_modal,
    oti_kernel,
    rotation_m,
)
from elasticfm.specfun import hankel1


@pytest.fixture(scope="module")
def oti31(medium, circle):
    return assemble_oti(medium, 31, circle)


def sampling_points(rng, count, r_min, r_max):
    radius = rng.uniform(r_min, r_max, count)
    angle = rng.uniform(0, 2 * np.pi, count)
    return radius[:, None] * np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def point_source_error(medium, circle, T, z, a):
    outgoing = point_source(medium, circle.points, z, a).reshape(-1)
    incoming = test_functions(medium, circle.points, z, a)[0]
    return np.linalg.norm(T.matrix @ outgoing - incoming) / np.linalg.norm(incoming)


def mode_samples(medium, circle, n, coefficients):
    """Samples of M(θ)^T A_n(R) c e^{inθ} on the circle, stacked."""
    theta = circle.angles
    polar = (a_n_matrix(medium, n, circle.radius) @ coefficients)[None, :] * np.exp(1j * n * theta)[:, None]
    return np.einsum("jba,jb->ja", rotation_m(theta), polar).reshape(-1)


class TestRotation:
    def test_identity(self):
        assert np.array_equal(rotation_m(0.0), np.eye(2))

    def test_orthogonal(self):
        m = rotation_m(1.3)
        assert_allclose(m.T @ m, np.eye(2), atol=1e-15)
        assert np.linalg.det(m) == pytest.approx(1.0)

    def test_group_property(self):
        assert_allclose(rotation_m(0.4 + 0.9), rotation_m(0.4) @ rotation_m(0.9), atol=1e-15)

    def test_vectorized(self):
        assert rotation_m(np.zeros(5)).shape == (5, 2, 2)


class TestModalMatrices:
    def test_zero_order_diagonal(self, medium):
        a0 = a_n_matrix(medium, 0, 4.0)
        assert a0[0, 1] == 0 and a0[1, 0] == 0

    @pytest.mark.parametrize("m", [1, 2, 5, 6])
    def test_negative_order(self, medium, m):
        positive = a_n_matrix(medium, m, 4.0)
        flipped = positive * np.array([[1, -1], [-1, 1]])
        assert_allclose(a_n_matrix(medium, -m, 4.0), (-1) ** m * flipped, rtol=1e-12)

    def test_high_order_invertible(self, medium):
        assert abs(np.linalg.det(a_n_matrix(medium, 40, 4.0))) > 1e-8

    def test_b0_is_conjugate(self, medium):
        assert_allclose(b_n_matrix(medium, 0, 4.0), np.conj(a_n_matrix(medium, 0, 4.0)), rtol=1e-15)

    def test_b_keeps_order_factor(self, medium):
        expected = -1j * 3 * np.conj(hankel1(3, medium.ks * 4.0)) / 4.0
        assert_allclose(b_n_matrix(medium, 3, 4.0)[0, 1], expected, rtol=1e-14)

    def test_b_finite(self, medium):
        assert np.all(np.isfinite(b_n_matrix(medium, np.arange(-40, 41), 4.0)))

    def test_nonpositive_radius(self, medium):
        with pytest.raises(DomainError):
            a_n_matrix(medium, 1, 0.0)
        with pytest.raises(DomainError):
            b_n_matrix(medium, 1, -4.0)

    def test_inverse(self, medium):
        orders = np.arange(-31, 32)
        matrices = a_n_matrix(medium, orders, 4.0)
        assert_allclose(invert_modal(matrices, orders) @ matrices, np.broadcast_to(np.eye(2), matrices.shape), atol=1e-12)
        assert np.all(equilibrated_condition(matrices) < 1e6)

    def test_singular_mode_names_order(self):
        matrices = np.array([np.eye(2), [[1.0, 2.0], [2.0, 4.0]]], dtype=complex)
        with pytest.raises(SingularModeError) as info:
            invert_modal(matrices, [4, 7])
        assert info.value.order == 7


class TestKernel:
    def test_single_term(self, medium):
        theta_x, theta_y = 0.3, 2.1
        expected = (
            -rotation_m(theta_x).T
            @ b_n_matrix(medium, 0, 4.0)
            @ np.linalg.inv(a_n_matrix(medium, 0, 4.0))
            @ rotation_m(theta_y)
            / (2 * np.pi * 4.0)
        )
        assert_allclose(oti_kernel(medium, 0, 4.0, theta_x, theta_y), expected, rtol=1e-12)

    def test_rotational_covariance(self, medium):
        c = 0.7
        shifted = oti_kernel(medium, 10, 4.0, 0.2 + c, 1.1 + c)
        expected = rotation_m(c).T @ oti_kernel(medium, 10, 4.0, 0.2, 1.1) @ rotation_m(c)
        assert_allclose(shifted, expected, rtol=1e-12, atol=1e-14)

    def test_matches_matrix_blocks(self, medium, circle):
        T = assemble_oti(medium, 12, circle, weighted=False)
        i, j = 5, 40
        block = T.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
        assert_allclose(block, oti_kernel(medium, 12, 4.0, circle.angles[i], circle.angles[j]), rtol=1e-10, atol=1e-14)


class TestAssembly:
    def test_shape_and_weight(self, medium, circle, oti31):
        unweighted = assemble_oti(medium, 31, circle, weighted=False)
        assert oti31.matrix.shape == (128, 128)
        assert np.all(np.isfinite(oti31.matrix))
        assert_allclose(oti31.matrix, unweighted.matrix * circle.weight)

    def test_aliasing_rejected(self, medium, circle):
        with pytest.raises(DomainError, match="aliases"):
            assemble_oti(medium, 40, circle)

    def test_aliasing_allowed(self, medium, circle, caplog):
        with caplog.at_level(logging.WARNING):
            T = assemble_oti(medium, 40, circle, allow_aliasing=True)
        assert T.M1 == 40
        assert "aliased" in caplog.text

    def test_cyclic_shift_covariance(self, medium, circle, oti31):
        step = rotation_m(2 * np.pi / circle.m2)
        blocks = oti31.matrix.reshape(64, 2, 64, 2).transpose(0, 2, 1, 3)
        shifted = np.roll(blocks, (-1, -1), axis=(0, 1))
        expected = step.T @ blocks @ step
        assert np.max(np.abs(shifted - expected)) <= 1e-12 * np.max(np.abs(blocks))

    def test_block_toeplitz(self, medium, circle, oti31):
        rotations = rotation_m(circle.angles)
        blocks = oti31.matrix.reshape(64, 2, 64, 2).transpose(0, 2, 1, 3)
        unrotated = rotations[:, None] @ blocks @ np.swapaxes(rotations, -1, -2)[None, :]
        for offset in (0, 3, 63):
            diagonal = np.array([unrotated[(j + offset) % 64, j] for j in range(64)])
            assert np.max(np.abs(diagonal - diagonal[0])) <= 1e-12 * np.max(np.abs(blocks))


class TestPointSourceMapping:
    def test_reference_sampling_point(self, medium, circle, oti31):
        assert point_source_error(medium, circle, oti31, np.array([0.5, -0.3]), np.array([1.0, 0.0])) <= 1e-2

    def test_random_sampling_points(self, medium, circle, oti31, rng):
        for z in sampling_points(rng, 20, 0.5, 2.0):
            for a in np.eye(2):
                assert point_source_error(medium, circle, oti31, z, a) <= 1e-2

    def test_error_shrinks_with_truncation(self, medium, circle, oti31, rng):
        coarse = assemble_oti(medium, 15, circle)
        for z in sampling_points(rng, 20, 0.5, 1.0):
            a = polarization(rng.uniform(0, 2 * np.pi))
            assert point_source_error(medium, circle, oti31, z, a) < point_source_error(medium, circle, coarse, z, a)


class TestNormPreservation:
    @pytest.mark.parametrize("n", [-31, -7, 0, 1, 12, 31])
    @pytest.mark.parametrize("potential", [[1.0, 0.0], [0.0, 1.0]], ids=["P", "S"])
    def test_single_potential_modes(self, medium, circle, oti31, n, potential):
        u = mode_samples(medium, circle, n, np.array(potential, dtype=complex))
        assert np.linalg.norm(oti31.matrix @ u) == pytest.approx(np.linalg.norm(u), rel=1e-10)

    @pytest.mark.parametrize("n", [-20, 3, 31])
    def test_mode_mapping(self, medium, circle, oti31, n):
        c = np.array([0.3 - 0.2j, 1.1 + 0.4j])
        u = mode_samples(medium, circle, n, c)
        theta = circle.angles
        polar = -(b_n_matrix(medium, n, circle.radius) @ c)[None, :] * np.exp(1j * n * theta)[:, None]
        expected = np.einsum("jba,jb->ja", rotation_m(theta), polar).reshape(-1)
        assert_allclose(oti31.matrix @ u, expected, rtol=1e-10, atol=1e-12 * np.max(np.abs(expected)))

    def test_zero_order_subspace_is_isometric(self, medium, circle, oti31):
        for c in ([1.0, 0.0], [0.0, 1.0], [0.6, 0.8j], [1.0 + 1j, -2.0]):
            u = mode_samples(medium, circle, 0, np.array(c, dtype=complex))
            assert np.linalg.norm(oti31.matrix @ u) == pytest.approx(np.linalg.norm(u), rel=1e-10)

    def test_mixed_potentials_are_not_isometric(self, medium, circle, oti31):
        u = mode_samples(medium, circle, 12, np.array([1.0, 1.0], dtype=complex))
        ratio = np.linalg.norm(oti31.matrix @ u) / np.linalg.norm(u)
        assert abs(ratio - 1) > 1e-6


def test_different_circle(medium):
    small = MeasurementCircle(3.0, 32)
    T = assemble_oti(medium, 15, small)
    assert T.matrix.shape == (64, 64)
    assert T.circle is small
