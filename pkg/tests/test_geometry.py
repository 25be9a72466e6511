import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splinetrack.geometry import (
    BARYCENTRIC,
    DecimationError,
    DegenerateShapeError,
    InvalidShapeError,
    Pose,
    ShapeVector,
    barycenter_area,
    contour_length,
    decimate,
    dewhiten,
    edge_partition,
    interpolate,
    point_in_polygon,
    point_segment_distance,
    signed_area,
    triangulate,
    validate,
    whiten,
)

SQUARE = np.array([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])


def star_polygon(rng, n, r_lo=0.5, r_hi=2.0):
    """Random simple polygon: sorted angles with random radii around the origin."""
    a = np.sort(rng.uniform(0, 2 * np.pi, n))
    # keep angular gaps away from zero so consecutive vertices stay distinct
    a = np.linspace(0, 2 * np.pi, n, endpoint=False) + rng.uniform(-0.3, 0.3, n) * (np.pi / n)
    r = rng.uniform(r_lo, r_hi, n)
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def blending_oracle(alpha, vertices):
    """Linear spline through the wrapped control points via triangle blending functions."""
    n = len(vertices)
    Vw = np.vstack([vertices, vertices[:1]])
    tri = lambda x: (1 - abs(x)) * (abs(x) <= 1)  # noqa: E731
    B = np.array([tri(n * alpha - i) for i in range(n + 1)])
    return B @ Vw


class TestInterpolate:
    def test_endpoints(self):
        s = ShapeVector(SQUARE)
        np.testing.assert_array_equal(interpolate(0.0, s), SQUARE[0])
        np.testing.assert_array_equal(interpolate(1.0, s), SQUARE[0])

    def test_midpoint_of_first_edge(self):
        s = ShapeVector(SQUARE)
        np.testing.assert_allclose(interpolate(1 / 8, s), (SQUARE[0] + SQUARE[1]) / 2, atol=1e-15)

    def test_half_parameter_reaches_opposite_vertex(self):
        s = ShapeVector(SQUARE)
        np.testing.assert_allclose(interpolate(0.5, s), [-0.5, -0.5], atol=1e-15)

    def test_matches_blending_definition(self):
        rng = np.random.default_rng(3)
        v = star_polygon(rng, 9)
        s = ShapeVector(v)
        for alpha in np.linspace(0, 1, 1001):
            np.testing.assert_allclose(interpolate(alpha, s), blending_oracle(alpha, v), atol=1e-12)

    def test_knots_are_vertices(self):
        v = star_polygon(np.random.default_rng(4), 11)
        s = ShapeVector(v)
        for i in range(11):
            np.testing.assert_array_equal(interpolate(i / 11, s), v[i])

    def test_domain(self):
        with pytest.raises(ValueError):
            interpolate(1.5, ShapeVector(SQUARE))


class TestBarycenterArea:
    def test_unit_square(self):
        g, A = barycenter_area(ShapeVector(SQUARE))
        np.testing.assert_allclose(g, 0, atol=1e-15)
        assert A == pytest.approx(1.0)

    def test_triangle(self):
        g, A = barycenter_area(ShapeVector([[0, 0], [1, 0], [0, 1]]))
        assert A == pytest.approx(0.5)
        np.testing.assert_allclose(g, [1 / 3, 1 / 3])

    def test_clockwise_is_negative(self):
        _, A = barycenter_area(ShapeVector(SQUARE[::-1]))
        assert A == pytest.approx(-1.0)

    def test_random_12gon_against_rejection_sampling(self):
        rng = np.random.default_rng(12)
        v = star_polygon(rng, 12) + [0.7, -0.2]
        g, A = barycenter_area(ShapeVector(v))
        lo, hi = v.min(0), v.max(0)
        pts = rng.uniform(lo, hi, size=(400_000, 2))
        inside = point_in_polygon(pts, v)
        box = np.prod(hi - lo)
        assert A == pytest.approx(box * inside.mean(), rel=0.005)
        g_mc = pts[inside].mean(0)
        assert np.linalg.norm(g - g_mc) < 0.005 * np.linalg.norm(hi - lo)

    def test_degenerate(self):
        with pytest.raises(DegenerateShapeError):
            barycenter_area(ShapeVector([[0, 0], [1, 0], [2, 0]]))


class TestLengthAndPartition:
    def test_lengths(self):
        assert contour_length(ShapeVector(SQUARE)) == pytest.approx(4.0)
        assert contour_length(ShapeVector([[0, 0], [3, 0], [0, 4]])) == pytest.approx(12.0)

    @given(st.floats(0.01, 100))
    def test_homogeneous(self, c):
        s = ShapeVector(SQUARE)
        assert contour_length(s.scaled(c)) == pytest.approx(c * contour_length(s), rel=1e-12)

    def test_square_weights(self):
        p = edge_partition(ShapeVector(SQUARE))
        assert p.n == 4
        np.testing.assert_allclose(p.weights, 0.25)

    def test_rectangle_weights(self):
        rect = ShapeVector([[1, 0.5], [-1, 0.5], [-1, -0.5], [1, -0.5]])
        np.testing.assert_allclose(edge_partition(rect).weights, [1 / 3, 1 / 6, 1 / 3, 1 / 6])

    def test_zero_length_edge(self):
        with pytest.raises(InvalidShapeError):
            edge_partition(ShapeVector([[0, 0], [1, 0], [1, 0], [0, 1]]))

    @settings(max_examples=50)
    @given(st.integers(3, 40), st.integers(0, 2**31))
    def test_weights_normalised(self, n, seed):
        p = edge_partition(ShapeVector(star_polygon(np.random.default_rng(seed), n)))
        assert abs(p.weights.sum() - 1) < 1e-12
        assert p.cumulative[-1] == 1.0


L_HEXAGON = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)


class TestTriangulate:
    def test_triangle(self):
        t = triangulate(ShapeVector([[0, 0], [1, 0], [0, 1]]))
        assert t.n == 1
        assert t.areas[0] == pytest.approx(0.5)

    def test_square(self):
        t = triangulate(ShapeVector(SQUARE))
        assert t.n == 2
        np.testing.assert_allclose(t.areas, 0.5)

    def test_l_hexagon(self):
        t = triangulate(ShapeVector(L_HEXAGON))
        assert t.n == 4
        assert t.total_area == pytest.approx(signed_area(L_HEXAGON), rel=1e-12)

    def test_clockwise_input(self):
        t = triangulate(ShapeVector(L_HEXAGON[::-1]))
        assert t.total_area == pytest.approx(3.0)

    def test_bow_tie_rejected(self):
        with pytest.raises(InvalidShapeError):
            triangulate(ShapeVector([[0, 0], [1, 1], [1, 0], [0, 1]]))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(3, 40), st.integers(0, 2**31))
    def test_area_and_weights(self, n, seed):
        v = star_polygon(np.random.default_rng(seed), n)
        t = triangulate(ShapeVector(v))
        assert t.n == n - 2
        assert t.total_area == pytest.approx(abs(signed_area(v)), rel=1e-9)
        assert abs(t.weights.sum() - 1) < 1e-12
        # every triangle corner is a shape vertex
        assert set(t.indices.ravel()) <= set(range(n))

    def test_triangles_cover_interior(self):
        rng = np.random.default_rng(5)
        v = star_polygon(rng, 15)
        t = triangulate(ShapeVector(v))
        pts = rng.uniform(v.min(0), v.max(0), size=(5000, 2))
        inside = point_in_polygon(pts, v)
        hits = np.zeros(len(pts), dtype=int)
        for tri in t.triangles:
            hits += point_in_polygon(pts, tri)
        # disjoint interiors, union equals the polygon (boundary hits are measure zero)
        assert np.all(hits[inside] == 1)
        assert np.all(hits[~inside] == 0)


class TestValidate:
    def test_square_all_pass(self):
        rep = validate(ShapeVector(SQUARE, BARYCENTRIC))
        assert rep.ok, rep.describe()

    def test_bow_tie(self):
        rep = validate(ShapeVector([[0, 0], [1, 1], [1, 0], [0, 1]]))
        assert not rep["simple"].passed

    def test_translated_square(self):
        rep = validate(ShapeVector(SQUARE + [1, 0], BARYCENTRIC))
        assert not rep["barycenter_at_origin"].passed
        assert rep["barycenter_at_origin"].defect == pytest.approx(1.0)

    def test_collinear_vertex(self):
        v = [[1, 0], [0.5, 0.5], [0, 1], [-1, 0], [0, -1]]
        rep = validate(ShapeVector(v))
        assert not rep["non_collinear"].passed

    def test_asymmetric_reported(self):
        v = star_polygon(np.random.default_rng(8), 7)
        g, _ = barycenter_area(ShapeVector(v))
        rep = validate(ShapeVector(v - g, BARYCENTRIC))
        assert rep["barycenter_at_origin"].passed
        assert not rep["reflection_symmetry"].passed

    def test_clockwise_flagged_then_oriented(self):
        s = ShapeVector(SQUARE[::-1], BARYCENTRIC)
        assert not validate(s)["counter_clockwise"].passed
        o = s.oriented()
        assert validate(o).ok
        np.testing.assert_array_equal(o.vertices[0], s.vertices[0])

    def test_duplicate_vertex(self):
        rep = validate(ShapeVector([[0, 0], [1, 0], [1, 0], [0, 1]]))
        assert not rep["distinct_vertices"].passed


class TestFrames:
    def test_identity(self):
        s = ShapeVector(SQUARE, BARYCENTRIC)
        np.testing.assert_array_equal(dewhiten(s, Pose([0, 0], 0)).vertices, SQUARE)

    def test_quarter_turn(self):
        s = ShapeVector([[1, 0], [0, 1], [-1, 0]], BARYCENTRIC)
        np.testing.assert_allclose(dewhiten(s, Pose([0, 0], np.pi / 2)).vertices[0], [0, 1], atol=1e-15)

    @given(
        st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0, 2 * np.pi, exclude_max=True), st.integers(0, 2**31)
    )
    def test_round_trip_and_barycenter(self, gx, gy, h, seed):
        v = star_polygon(np.random.default_rng(seed), 8)
        g0, _ = barycenter_area(ShapeVector(v))
        s = ShapeVector(v - g0, BARYCENTRIC)
        pose = Pose([gx, gy], h)
        w = dewhiten(s, pose)
        np.testing.assert_allclose(whiten(w, pose).vertices, s.vertices, atol=1e-12)
        g, _ = barycenter_area(w)
        np.testing.assert_allclose(g, [gx, gy], atol=1e-9)


class TestDecimate:
    def test_removes_collinear_vertex(self):
        v = np.array([[1, 0], [0.5, 0.5], [0, 1], [-1, 0], [0, -1]], dtype=float)
        d = decimate(ShapeVector(v), 1e-9)
        assert d.n == 4
        assert not any(np.allclose(p, [0.5, 0.5]) for p in d.vertices)

    def test_zero_tolerance_is_identity(self):
        v = star_polygon(np.random.default_rng(1), 20)
        d = decimate(ShapeVector(v), 0.0)
        np.testing.assert_array_equal(d.vertices, v)

    def test_circle_hausdorff(self):
        n, r = 100, 5.0
        a = 2 * np.pi * np.arange(n) / n
        s = ShapeVector(r * np.column_stack([np.cos(a), np.sin(a)]), BARYCENTRIC)
        tol = 0.05 * r
        d = decimate(s, tol)
        assert d.n < n
        # vertex subset
        assert all(any(np.array_equal(p, q) for q in s.vertices) for p in d.vertices)
        # brute-force Hausdorff between the two polylines via dense samples
        def dense(shape, k=4000):
            v0, v1 = shape.edges()
            t = np.linspace(0, 1, k // shape.n, endpoint=False)[:, None, None]
            return ((1 - t) * v0 + t * v1).reshape(-1, 2)

        d_ab = point_segment_distance(dense(s), *d.edges()).min(1).max()
        d_ba = point_segment_distance(dense(d), *s.edges()).min(1).max()
        assert max(d_ab, d_ba) <= tol + 1e-12

    def test_symmetric_shape_stays_symmetric(self):
        n, r = 64, 5.0
        a = 2 * np.pi * np.arange(n) / n
        v = np.column_stack([r * np.cos(a), 0.5 * r * np.sin(a)])
        d = decimate(ShapeVector(v, BARYCENTRIC), 0.1)
        assert validate(d)["reflection_symmetry"].passed

    def test_collapse_raises(self):
        with pytest.raises(DecimationError):
            decimate(ShapeVector(SQUARE), 10.0)
