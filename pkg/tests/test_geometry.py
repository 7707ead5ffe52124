import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from elasticfm.errors import ParameterError
from elasticfm.geometry import (
    BOUNDARIES,
    MeasurementCircle,
    contains,
    disk_boundary,
    distance_to_boundary,
    kite_boundary,
    make_boundary,
    make_medium,
    make_scene,
    star_boundary,
)


class TestMedium:
    def test_reference_medium(self):
        medium = make_medium(2, 1, 10)
        assert medium.kp == pytest.approx(5.0, rel=1e-15)
        assert medium.ks == pytest.approx(10.0, rel=1e-15)

    def test_zero_lambda(self):
        medium = make_medium(0, 1, 1)
        assert medium.kp == pytest.approx(1 / math.sqrt(2))
        assert medium.ks == pytest.approx(1.0)
        assert medium.kp < medium.ks

    @pytest.mark.parametrize(
        "lam, mu, omega",
        [(-1, 1, 10), (2, 0, 10), (2, -1, 10), (2, 1, 0), (2, 1, -3)],
    )
    def test_invalid(self, lam, mu, omega):
        with pytest.raises(ParameterError):
            make_medium(lam, mu, omega)


class TestCircle:
    def test_points(self, circle):
        points = circle.points
        assert points.shape == (64, 2)
        assert_allclose(points[0], [4.0, 0.0])
        assert_allclose(points[16], [0.0, 4.0], atol=1e-15)
        assert_allclose(np.linalg.norm(points, axis=-1), 4.0)
        assert circle.weight == pytest.approx(2 * math.pi * 4 / 64)

    @pytest.mark.parametrize("radius, m2", [(4.0, 63), (0.0, 64), (-1.0, 64), (4.0, 0)])
    def test_invalid(self, radius, m2):
        with pytest.raises(ParameterError):
            MeasurementCircle(radius, m2)


class TestKite:
    def test_positions(self):
        kite = kite_boundary()
        assert_allclose(kite.position(np.array([0.0]))[0], [1.0, 0.0], atol=1e-15)
        assert_allclose(kite.position(np.array([np.pi]))[0], [-1.0, 0.0], atol=1e-15)

    def test_derivative_at_zero(self):
        assert_allclose(kite_boundary().derivative(np.array([0.0]))[0], [0.0, 1.5], atol=1e-15)

    def test_scaled_and_shifted(self):
        small = kite_boundary((-1.0, -1.0), 0.5)
        assert_allclose(small.position(np.array([0.0]))[0], [-0.5, -1.0])


class TestStar:
    def test_positions(self):
        star = star_boundary()
        assert_allclose(star.position(np.array([0.0]))[0], [1.2, 0.0])
        t = np.pi / 5
        assert_allclose(star.position(np.array([t]))[0], 0.8 * np.array([np.cos(t), np.sin(t)]))

    def test_shift(self):
        t = np.linspace(0, 2 * np.pi, 11)
        assert_allclose(star_boundary((2.0, 2.0)).position(t), star_boundary().position(t) + 2.0)


@pytest.mark.parametrize("name", sorted(BOUNDARIES))
class TestBoundaryFamilies:
    def test_closed(self, name):
        boundary = make_boundary(name, (0.3, -0.2), 0.8)
        assert_allclose(boundary.position(np.array([0.0])), boundary.position(np.array([2 * np.pi])), atol=1e-14)

    def test_tangent_nonvanishing(self, name):
        boundary = make_boundary(name, (0.0, 0.0), 1.0)
        t = 2 * np.pi * np.arange(1024) / 1024
        assert np.min(np.linalg.norm(boundary.derivative(t), axis=-1)) > 0.1

    def test_derivatives_match_finite_differences(self, name):
        boundary = make_boundary(name, (0.5, 0.5), 1.3)
        t = np.linspace(0, 2 * np.pi, 37)
        h = 1e-6
        first = (boundary.position(t + h) - boundary.position(t - h)) / (2 * h)
        second = (boundary.derivative(t + h) - boundary.derivative(t - h)) / (2 * h)
        assert_allclose(boundary.derivative(t), first, atol=1e-7)
        assert_allclose(boundary.second_derivative(t), second, atol=1e-6)

    def test_outward_normal(self, name):
        boundary = make_boundary(name, (0.0, 0.0), 1.0)
        t = 2 * np.pi * np.arange(64) / 64
        outside = boundary.position(t) + 1e-3 * boundary.normal(t)
        inside = boundary.position(t) - 1e-3 * boundary.normal(t)
        assert not np.any(contains(boundary, outside))
        assert np.all(contains(boundary, inside))

    def test_continued_matches_position_on_real_axis(self, name):
        boundary = make_boundary(name, (0.3, -0.2), 0.8)
        t = np.linspace(0, 2 * np.pi, 29)
        x = boundary.position(t)
        assert_allclose(boundary.continued(t), x[:, 0] + 1j * x[:, 1], atol=1e-15)

    def test_continued_derivative_is_complex_derivative(self, name):
        boundary = make_boundary(name, (0.0, 0.0), 1.0)
        t = np.linspace(0, 2 * np.pi, 29) + 0.05j
        h = 1e-6
        along_imaginary = (boundary.continued(t + 1j * h) - boundary.continued(t - 1j * h)) / (2j * h)
        assert_allclose(along_imaginary, boundary.continued_derivative(t), atol=1e-7)

    def test_continued_moves_inward(self, name):
        boundary = make_boundary(name, (0.0, 0.0), 1.0)
        z = boundary.continued(2 * np.pi * np.arange(128) / 128 + 0.03j)
        assert np.all(contains(boundary, np.stack([z.real, z.imag], axis=-1)))


def test_disk_curvature_and_normal():
    disk = disk_boundary((1.0, 1.0), 2.0)
    t = np.array([0.0, np.pi / 2])
    assert_allclose(disk.normal(t), [[1.0, 0.0], [0.0, 1.0]], atol=1e-15)
    assert_allclose(disk.curvature(t), 0.5)


def test_disk_continuation_is_a_concentric_circle():
    disk = disk_boundary((1.0, -1.0), 2.0)
    t = np.linspace(0, 2 * np.pi, 16)
    z = disk.continued(t + 0.4j)
    assert_allclose(z, (1.0 - 1.0j) + 2.0 * np.exp(-0.4) * np.exp(1j * t))


def test_kite_has_concave_arc():
    t = np.linspace(0, 2 * np.pi, 512)
    assert np.min(kite_boundary().curvature(t)) < 0


def test_unknown_boundary():
    with pytest.raises(ParameterError, match="Unknown obstacle"):
        make_boundary("triangle", (0, 0), 1)


def test_nonpositive_scale():
    with pytest.raises(ParameterError):
        kite_boundary((0, 0), 0.0)


class TestQueries:
    def test_contains(self):
        kite = kite_boundary()
        result = contains(kite, [[0.0, 0.0], [3.0, 0.0], [0.5, 0.2], [-1.5, 0.0]])
        assert result.tolist() == [True, False, True, False]

    def test_contains_many_points(self):
        disk = disk_boundary((0.0, 0.0), 1.0)
        xs = np.linspace(-2, 2, 61)
        X, Y = np.meshgrid(xs, xs)
        points = np.stack([X.ravel(), Y.ravel()], -1)
        radius = np.linalg.norm(points, axis=-1)
        clear = np.abs(radius - 1) > 0.01
        assert np.array_equal(contains(disk, points)[clear], (radius < 1)[clear])

    def test_distance(self):
        disk = disk_boundary((0.0, 0.0), 1.0)
        assert_allclose(distance_to_boundary(disk, [[3.0, 0.0], [0.0, 0.5]]), [2.0, 0.5], atol=1e-4)


class TestScene:
    def test_reference_obstacles_inside_circle(self, circle):
        for obstacle in [kite_boundary(), star_boundary(), star_boundary((2, 2)), kite_boundary((-1, -1), 0.5)]:
            assert obstacle.max_extent() < circle.radius

    def test_two_component_scene(self, medium, circle):
        scene = make_scene(medium, circle, [star_boundary((2.0, 2.0)), kite_boundary((-1.0, -1.0), 0.5)])
        assert len(scene.obstacles) == 2

    def test_obstacle_outside_circle(self, medium, circle):
        with pytest.raises(ParameterError, match="outside the measurement circle"):
            make_scene(medium, circle, [kite_boundary((3.5, 0.0))])

    def test_overlapping_obstacles(self, medium, circle):
        with pytest.raises(ParameterError, match="not disjoint"):
            make_scene(medium, circle, [disk_boundary((0, 0), 1.0), disk_boundary((1.5, 0), 1.0)])

    def test_nested_obstacles(self, medium, circle):
        with pytest.raises(ParameterError, match="not disjoint"):
            make_scene(medium, circle, [disk_boundary((0, 0), 2.0), disk_boundary((0, 0), 0.5)])

    def test_empty_scene(self, medium, circle):
        assert make_scene(medium, circle, []).obstacles == []
