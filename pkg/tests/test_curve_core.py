"""Curves, resampling, curvature, distances and group elements."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rigid_image
from src import shapes
from src.curve_core import (
    CurvatureProfile,
    GroupElement,
    PlanarCurve,
    euclidean_curvature,
    hausdorff_distance,
    minimal_period,
    normalize_minimal_period,
    period_count,
    require_monotone,
    resample_by_arclength,
)
from src.utils import (
    ConstantCurvature,
    EmptySet,
    GroupKind,
    InsufficientResolution,
    InvalidCurve,
    InvalidGroupElement,
    NotMonotone,
    OpenCurve,
)


def ellipse_curvature(a: float, b: float, theta: np.ndarray) -> np.ndarray:
    return a * b / (a ** 2 * np.sin(theta) ** 2 + b ** 2 * np.cos(theta) ** 2) ** 1.5


class TestPlanarCurve:
    def test_too_few_samples(self):
        with pytest.raises(InvalidCurve):
            PlanarCurve(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))

    def test_coincident_neighbours(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 1.0], [3.0, 0.0]])
        with pytest.raises(InvalidCurve):
            PlanarCurve(pts)

    def test_non_finite(self):
        pts = np.array([[0.0, 0.0], [1.0, np.nan], [2.0, 0.0], [3.0, 1.0]])
        with pytest.raises(InvalidCurve):
            PlanarCurve(pts)

    def test_closed_curve_drops_repeated_endpoint(self):
        theta = np.linspace(0.0, 2 * np.pi, 65)
        curve = PlanarCurve(np.column_stack([np.cos(theta), np.sin(theta)]), closed=True)
        assert curve.sample_count == 64

    def test_samples_are_read_only(self, ellipse):
        with pytest.raises(ValueError):
            ellipse.samples[0, 0] = 5.0


class TestResampling:
    @pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
    def test_circle_length_and_speed(self, radius, config):
        arc = resample_by_arclength(shapes.circle(radius), 1024, config)

        assert arc.total_length == pytest.approx(2 * np.pi * radius, rel=1e-8)
        assert arc.closed
        np.testing.assert_allclose(arc.speed(), 1.0, atol=1e-6)
        np.testing.assert_allclose(np.linalg.norm(arc.nodes, axis=1), radius, atol=1e-8)

    def test_open_curve_keeps_endpoints(self, spiral, config):
        arc = resample_by_arclength(spiral, 512, config)
        np.testing.assert_allclose(arc.nodes[0], spiral.samples[0], atol=1e-12)
        np.testing.assert_allclose(arc.nodes[-1], spiral.samples[-1], atol=1e-9)
        assert arc.s[-1] == pytest.approx(arc.total_length)

    def test_too_few_nodes(self, ellipse):
        with pytest.raises(InsufficientResolution):
            resample_by_arclength(ellipse, 3)

    @pytest.mark.parametrize("curve", [shapes.circle(2.0), shapes.ellipse(), shapes.limacon(), shapes.log_spiral()])
    def test_chord_never_exceeds_the_arc(self, curve, config):
        assert curve.chord_length <= resample_by_arclength(curve, 1024, config).total_length * (1 + 1e-12)

    def test_cubic_splines_on_request(self, config):
        cubic = config.replace(spline_degree=3, resample_density=2)
        arc = resample_by_arclength(shapes.circle(2.0), 1024, cubic)

        assert arc.spline_degree == 3
        assert arc.total_length == pytest.approx(4 * np.pi, rel=1e-6)
        np.testing.assert_allclose(euclidean_curvature(arc, 1, cubic).kappa, 0.5, atol=1e-4)


class TestCurvature:
    @pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
    def test_circle(self, radius, config):
        arc = resample_by_arclength(shapes.circle(radius), 1024, config)
        profile = euclidean_curvature(arc, 1, config)

        np.testing.assert_allclose(profile.kappa, 1 / radius, atol=1e-6)
        np.testing.assert_allclose(profile.column(1), 0.0, atol=1e-5)

    def test_ellipse_matches_closed_form(self, config):
        arc = resample_by_arclength(shapes.ellipse(2.0, 1.0, n=1024), 1024, config)
        profile = euclidean_curvature(arc, 0, config)
        theta = np.arctan2(arc.nodes[:, 1] / 1.0, arc.nodes[:, 0] / 2.0)

        np.testing.assert_allclose(profile.kappa, ellipse_curvature(2.0, 1.0, theta), atol=1e-5)
        assert profile.kappa.max() == pytest.approx(2.0, abs=1e-5)
        assert profile.kappa.min() == pytest.approx(0.25, abs=1e-5)

    def test_clockwise_traversal_flips_sign(self, config):
        reversed_ellipse = PlanarCurve(shapes.ellipse().samples[::-1], closed=True)
        profile = euclidean_curvature(resample_by_arclength(reversed_ellipse, 512, config), 0, config)
        assert np.all(profile.kappa < 0)

    @given(
        angle=st.floats(min_value=-np.pi, max_value=np.pi),
        tx=st.floats(min_value=-10, max_value=10),
        ty=st.floats(min_value=-10, max_value=10),
    )
    @settings(max_examples=10, deadline=None)
    def test_rigid_invariance(self, angle, tx, ty):
        curve = shapes.ellipse(2.0, 1.0)
        moved = rigid_image(curve, angle, (tx, ty))
        base = euclidean_curvature(resample_by_arclength(curve, 512), 1)
        image = euclidean_curvature(resample_by_arclength(moved, 512), 1)

        np.testing.assert_allclose(image.columns, base.columns, atol=1e-6)

    def test_order_needs_nodes(self, ellipse):
        arc = resample_by_arclength(ellipse, 12)
        with pytest.raises(InsufficientResolution):
            euclidean_curvature(arc, 1)

    def test_turn_limit_comes_from_the_config(self, config):
        arc = resample_by_arclength(shapes.circle(), 256, config)
        euclidean_curvature(arc, 0, config)
        with pytest.raises(InsufficientResolution):
            euclidean_curvature(arc, 0, config.replace(max_turn_per_node=0.01))


class TestHausdorff:
    def test_single_points(self):
        assert hausdorff_distance([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5.0)

    def test_is_symmetric_and_directed_max(self):
        a = np.array([[0.0, 0.0], [1.0, 0.0]])
        b = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]])
        assert hausdorff_distance(a, b) == pytest.approx(4.0)
        assert hausdorff_distance(b, a) == pytest.approx(4.0)

    def test_polyline_mode_measures_to_segments(self):
        a = np.array([[0.5, 1.0]])
        b = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert hausdorff_distance(a, b, connect=True) == pytest.approx(np.hypot(0.5, 1.0))
        directed = hausdorff_distance(b, a, connect=True)
        assert directed == pytest.approx(np.hypot(0.5, 1.0))

    @given(st.lists(
        st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=8),
        min_size=3, max_size=3,
    ))
    @settings(max_examples=50, deadline=None)
    def test_triangle_inequality(self, sets):
        a, b, c = (np.array(points) for points in sets)
        assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-9

    def test_empty_set(self):
        with pytest.raises(EmptySet):
            hausdorff_distance(np.empty((0, 2)), [[0.0, 0.0]])


class TestGroupElement:
    def test_compose_with_inverse_is_identity(self):
        g = GroupElement.rotation(0.3, (1.0, 2.0))
        identity = g.compose(g.inverse())
        assert identity.distance_to_identity() < 1e-12

    def test_affine_inverse(self):
        g = GroupElement(GroupKind.AFFINE, [[2.0, 1.0], [0.0, 0.5]], [1.0, -1.0])
        pts = np.array([[0.0, 0.0], [1.0, 3.0]])
        np.testing.assert_allclose(g.inverse().apply(g.apply(pts)), pts, atol=1e-12)

    def test_se2_rejects_non_rotation(self):
        with pytest.raises(InvalidGroupElement):
            GroupElement(GroupKind.SE2, [[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])

    def test_affine_rejects_singular(self):
        with pytest.raises(InvalidGroupElement):
            GroupElement(GroupKind.AFFINE, [[1.0, 2.0], [2.0, 4.0]], [0.0, 0.0])


class TestPeriods:
    def test_flower_has_four_periods(self, config):
        arc = resample_by_arclength(shapes.flower(petals=4), 1024, config)
        profile = euclidean_curvature(arc, 0, config)

        assert period_count(profile, config) == 4
        assert minimal_period(profile, config) == pytest.approx(arc.total_length / 4, rel=1e-3)

    def test_ellipse_has_two_periods(self, ellipse, config):
        profile = euclidean_curvature(resample_by_arclength(ellipse, 1024, config), 0, config)
        assert period_count(profile, config) == 2

    def test_egg_has_no_symmetry(self, config):
        profile = euclidean_curvature(resample_by_arclength(shapes.egg(), 1024, config), 0, config)
        assert period_count(profile, config) == 1

    def test_circle_has_no_minimal_period(self, config):
        profile = euclidean_curvature(resample_by_arclength(shapes.circle(), 512, config), 0, config)
        with pytest.raises(ConstantCurvature):
            minimal_period(profile, config)

    def test_open_profile(self):
        with pytest.raises(OpenCurve):
            minimal_period(CurvatureProfile.from_callables(1.0, 64, lambda s: s))

    def test_repeated_traversal_is_normalized(self):
        twice = shapes.circle(turns=2, n=256)
        once = normalize_minimal_period(twice)
        assert twice.sample_count == 512
        assert once.sample_count == 256


class TestCurvatureProfile:
    def test_monotone_sign(self, spiral, config):
        profile = euclidean_curvature(resample_by_arclength(spiral, 1024, config), 1, config)
        assert require_monotone(profile) == -1.0

    def test_ellipse_is_not_monotone(self, ellipse, config):
        profile = euclidean_curvature(resample_by_arclength(ellipse, 512, config), 1, config)
        with pytest.raises(NotMonotone):
            require_monotone(profile)

    def test_inverse(self):
        profile = CurvatureProfile.from_callables(2.0, 201, lambda s: 1.0 + s ** 2)
        assert float(profile.inverse(2.0)) == pytest.approx(1.0, abs=1e-8)

    def test_with_order_differentiates(self):
        profile = CurvatureProfile.from_callables(1.0, 401, lambda s: np.sin(s))
        extended = profile.with_order(2)
        np.testing.assert_allclose(extended.column(1), np.cos(profile.s), atol=1e-8)
        np.testing.assert_allclose(extended.column(2), -np.sin(profile.s), atol=1e-5)

    def test_must_start_at_zero(self):
        with pytest.raises(InvalidCurve):
            CurvatureProfile(np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0, 1.0]))
