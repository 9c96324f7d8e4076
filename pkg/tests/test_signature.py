"""Signatures, tube neighbourhoods and signature metrics."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rigid_image, sign_changes
from src import shapes
from src.curve_core import GroupElement, PlanarCurve, apply_group, resample_by_arclength
from src.signature import (
    GraphSamples,
    PhasePortrait,
    TubeNeighborhood,
    affine_signature,
    common_domain,
    delta_star,
    euclidean_signature,
    inner_tube_contains,
    is_injective,
    l1_signature_distance,
    lift_signature,
    lifted_signature_distance,
    require_simple,
    signature_hausdorff,
    tube_contains,
)
from src.utils import (
    GroupKind,
    KindMismatch,
    NoCommonDomain,
    NonConvexArc,
    NotGraphLike,
    OpenCurve,
    SignatureKind,
    SignatureNotSimple,
)


class TestEuclideanSignature:
    def test_circle_is_a_point(self, config):
        arc = resample_by_arclength(shapes.circle(2.0), 512, config)
        sig = euclidean_signature(arc, 1, config=config)

        np.testing.assert_allclose(sig.u, 0.5, atol=1e-6)
        np.testing.assert_allclose(sig.v, 0.0, atol=1e-5)
        assert sig.spread() < config.differentiation_tol

    def test_ellipse_has_four_vertices_per_revolution(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 1024, config)
        sig = euclidean_signature(arc, 2, one_period=False, config=config)

        assert sig.order == 2
        assert sig.closed
        assert sign_changes(sig.samples[:, 1]) == 4

    def test_one_period_of_ellipse(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 1024, config)
        sig = euclidean_signature(arc, 1, config=config)

        assert sig.periods == 2
        assert sig.length == pytest.approx(arc.total_length / 2)
        assert len(sig.s) == 512

    def test_in_phase(self, spiral, config):
        sig = euclidean_signature(resample_by_arclength(spiral, 1024, config), 2, config=config)
        assert sig.in_phase_error() < 1e-3

    @given(
        angle=st.floats(min_value=-np.pi, max_value=np.pi),
        shift=st.floats(min_value=-5, max_value=5),
    )
    @settings(max_examples=10, deadline=None)
    def test_rigid_invariance(self, angle, shift):
        curve = shapes.log_spiral()
        base = euclidean_signature(resample_by_arclength(curve, 512), 1)
        moved = euclidean_signature(resample_by_arclength(rigid_image(curve, angle, (shift, -shift)), 512), 1)
        assert signature_hausdorff(base, moved) <= 1e-6

    def test_order_must_be_positive(self, spiral):
        with pytest.raises(ValueError):
            euclidean_signature(resample_by_arclength(spiral, 256), 0)

    def test_kind_mismatch(self, spiral, config):
        arc = resample_by_arclength(spiral, 256, config)
        with pytest.raises(KindMismatch):
            signature_hausdorff(euclidean_signature(arc, 1, config=config),
                                euclidean_signature(arc, 2, config=config))


class TestAffineSignature:
    def test_parabola_has_zero_mu(self, config):
        sig = affine_signature(resample_by_arclength(shapes.parabola(), 1024, config), config)
        interior = slice(len(sig.s) // 20, -len(sig.s) // 20)

        assert sig.kind is SignatureKind.AFFINE
        np.testing.assert_allclose(sig.u[interior], 0.0, atol=1e-3)

    def test_ellipse_has_constant_mu(self, ellipse, config):
        sig = affine_signature(resample_by_arclength(ellipse, 1024, config), config)
        expected = -(2.0 * 1.0) ** (-2 / 3)

        np.testing.assert_allclose(sig.u, expected, rtol=1e-3)

    def test_unimodular_invariance(self, ellipse, config):
        shear = GroupElement(GroupKind.AFFINE, [[1.0, 0.6], [0.0, 1.0]], [0.5, -2.0])
        base = affine_signature(resample_by_arclength(ellipse, 1024, config), config)
        image = affine_signature(resample_by_arclength(apply_group(shear, ellipse), 1024, config), config)

        assert signature_hausdorff(base, image) <= 5e-3
        assert image.length == pytest.approx(base.length, rel=1e-4)

    def test_negative_curvature_is_rejected(self, config):
        clockwise = PlanarCurve(shapes.ellipse().samples[::-1], closed=True)
        with pytest.raises(NonConvexArc):
            affine_signature(resample_by_arclength(clockwise, 512, config), config)


class TestTubes:
    def test_flat_tube_membership(self):
        tube = TubeNeighborhood(GraphSamples([0.0, 1.0], [1.0, 1.0]), 0.1)

        assert inner_tube_contains(tube, [0.5, 1.05])
        assert not inner_tube_contains(tube, [0.5, 1.2])
        assert not inner_tube_contains(tube, [1.05, 1.0])
        assert tube_contains(tube, [1.05, 1.0])
        assert not tube_contains(tube, [1.2, 1.0])

    def test_vectorized_membership(self):
        tube = TubeNeighborhood(GraphSamples([0.0, 1.0], [0.0, 1.0]), 0.1)
        points = np.array([[0.5, 0.5], [0.5, 0.7], [-0.05, 0.0]])
        np.testing.assert_array_equal(tube_contains(tube, points), [True, False, True])

    def test_delta_star_of_flat_tube(self):
        tube = TubeNeighborhood(GraphSamples([0.0, 0.5, 1.0], [1.0, 1.0, 1.0]), 0.1)
        assert delta_star(tube) == pytest.approx(0.1)

    def test_delta_star_is_positive_for_curved_graph(self):
        u = np.linspace(0.0, 1.0, 50)
        tube = TubeNeighborhood(GraphSamples(u, 1.0 + u ** 2), 0.05)
        assert 0 < delta_star(tube) <= 0.05

    @given(
        index=st.integers(min_value=0, max_value=49),
        angle=st.floats(min_value=0.0, max_value=2 * np.pi),
        fraction=st.floats(min_value=0.0, max_value=0.99),
    )
    @settings(max_examples=50, deadline=None)
    def test_delta_star_ball_lies_in_the_tube(self, index, angle, fraction):
        u = np.linspace(0.0, 1.0, 50)
        tube = TubeNeighborhood(GraphSamples(u, 1.0 + u ** 2), 0.05)
        radius = fraction * delta_star(tube)
        point = np.array([u[index], 1.0 + u[index] ** 2]) + radius * np.array([np.cos(angle), np.sin(angle)])

        assert tube_contains(tube, point)

    @given(
        points=st.lists(st.tuples(st.floats(min_value=-0.3, max_value=1.3), st.floats(min_value=0.5, max_value=2.5)),
                        min_size=1, max_size=20),
        small=st.floats(min_value=0.01, max_value=0.2),
        extra=st.floats(min_value=0.0, max_value=0.2),
    )
    @settings(max_examples=50, deadline=None)
    def test_tubes_are_nested(self, points, small, extra):
        graph = GraphSamples(np.linspace(0.0, 1.0, 30), 1.0 + np.linspace(0.0, 1.0, 30) ** 2)
        inner = TubeNeighborhood(graph, small)
        outer = TubeNeighborhood(graph, small + extra)
        points = np.array(points)

        assert not np.any(inner_tube_contains(inner, points) & ~tube_contains(inner, points))
        assert not np.any(tube_contains(inner, points) & ~tube_contains(outer, points))

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            TubeNeighborhood(GraphSamples([0.0, 1.0], [1.0, 1.0]), 0.0)


class TestGraphs:
    def test_decreasing_u_is_reversed(self):
        graph = GraphSamples([2.0, 1.0, 0.0], [5.0, 4.0, 3.0])
        np.testing.assert_array_equal(graph.u, [0.0, 1.0, 2.0])
        np.testing.assert_array_equal(graph.v, [3.0, 4.0, 5.0])

    def test_non_monotone_u(self):
        with pytest.raises(NotGraphLike):
            GraphSamples([0.0, 1.0, 0.5], [1.0, 1.0, 1.0])

    def test_l1_distance_of_parallel_graphs(self):
        f = GraphSamples([0.0, 2.0], [1.0, 1.0])
        g = GraphSamples([0.0, 1.0, 2.0], [1.5, 1.5, 1.5])
        assert l1_signature_distance(f, g) == pytest.approx(1.0)

    def test_l1_distance_with_crossing(self):
        f = GraphSamples([0.0, 1.0], [0.0, 1.0])
        g = GraphSamples([0.0, 1.0], [1.0, 0.0])
        assert l1_signature_distance(f, g) == pytest.approx(0.5)

    def test_l1_distance_uses_common_domain(self):
        f = GraphSamples([0.0, 3.0], [1.0, 1.0])
        g = GraphSamples([1.0, 2.0], [2.0, 2.0])
        assert common_domain(f, g) == (1.0, 2.0)
        assert l1_signature_distance(f, g) == pytest.approx(1.0)

    def test_disjoint_domains(self):
        with pytest.raises(NoCommonDomain):
            common_domain(GraphSamples([0.0, 1.0], [1.0, 1.0]), GraphSamples([2.0, 3.0], [1.0, 1.0]))

    def test_from_graph_is_in_phase(self):
        u = np.linspace(1.0, 2.0, 400)
        portrait = PhasePortrait.from_graph(u, u ** 2)
        # s(u) = 1 - 1/u for F(u) = u²
        np.testing.assert_allclose(portrait.s, 1.0 - 1.0 / u, atol=1e-8)


class TestInjectivity:
    def test_full_revolution_of_ellipse_repeats(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 512, config)
        assert not is_injective(euclidean_signature(arc, 1, one_period=False, config=config), config=config)

    def test_one_period_of_ellipse_is_simple(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 512, config)
        assert is_injective(euclidean_signature(arc, 1, config=config), config=config)

    def test_lifted_signature_separates_repeats(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 512, config)
        lifted = lift_signature(arc, 1, config=config)
        assert lifted.order == 1
        assert is_injective(lifted, config=config)

    def test_lift_needs_closed_curve(self, spiral):
        with pytest.raises(OpenCurve):
            lift_signature(resample_by_arclength(spiral, 256), 1)

    def test_repeated_signature_is_not_simple(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 512, config)
        require_simple(euclidean_signature(arc, 1, config=config), config)
        with pytest.raises(SignatureNotSimple):
            require_simple(euclidean_signature(arc, 1, one_period=False, config=config), config)


class TestLiftedDistance:
    def test_rigid_image_has_the_same_lift(self, ellipse, config):
        a = lift_signature(resample_by_arclength(ellipse, 512, config), 1, config=config)
        b = lift_signature(resample_by_arclength(rigid_image(ellipse), 512, config), 1, config=config)
        assert lifted_signature_distance(a, b) <= 1e-6

    def test_orders_must_agree(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 512, config)
        with pytest.raises(KindMismatch):
            lifted_signature_distance(lift_signature(arc, 1, config=config), lift_signature(arc, 2, config=config))

    def test_base_point_moves_the_lift(self, ellipse, config):
        arc = resample_by_arclength(ellipse, 512, config)
        a = lift_signature(arc, 1, config=config)
        b = lift_signature(arc, 1, base_point_index=arc.node_count // 4, config=config)

        np.testing.assert_allclose(b.base_point, arc.nodes[arc.node_count // 4])
        assert lifted_signature_distance(a, b) >= 0.1
