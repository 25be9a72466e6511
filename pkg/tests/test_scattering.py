import numpy as np
import pytest
from scipy import stats

from oracles import grid_cell_areas, point_in_polygon, random_star_polygon
from splinetrack.geometry import BARYCENTRIC, EdgePartition, ShapeVector, barycenter_area, edge_partition, point_segment_distance, triangulate
from splinetrack.scattering import (
    CardinalityParams,
    Dataset,
    SensorConfig,
    cardinality_params,
    generate_scan,
    noise,
    sample_cardinality,
    sample_contour_point,
    sample_contour_points,
    sample_surface_point,
    sample_surface_points,
    sample_triangle_point,
    triangle_point,
)

SQUARE = np.array([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])
UNIT_TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def rectangle(w, h):
    return ShapeVector([[w / 2, h / 2], [-w / 2, h / 2], [-w / 2, -h / 2], [w / 2, -h / 2]], BARYCENTRIC)


class TestSensorConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SensorConfig("radar", np.eye(2), 1.0)
        with pytest.raises(ValueError):
            SensorConfig("contour", -np.eye(2), 1.0)
        with pytest.raises(ValueError):
            SensorConfig("contour", np.eye(2), 0.0)
        with pytest.raises(ValueError):
            SensorConfig("contour", np.eye(2), 1.0, eta=1.5)

    def test_from_dict(self):
        s = SensorConfig.from_dict({"kind": "surface", "sigma": 2.0, "resolution": 5})
        np.testing.assert_array_equal(s.R, 4 * np.eye(2))
        assert s.eta == 0.9
        s2 = SensorConfig.from_dict({"kind": "contour", "R": [[1, 0], [0, 2]], "resolution": 1})
        assert s2.R[1, 1] == 2


class TestCardinality:
    def test_contour_example(self):
        # 30 x 10 rectangle: perimeter 80 m
        p = cardinality_params(rectangle(30, 10), SensorConfig.isotropic("contour", 1, 5.0), 1.0)
        assert (p.mu, p.pi) == (16, 0.9)
        assert p.mean == pytest.approx(14.4)

    def test_surface_example(self):
        # 12 x 10 rectangle: area 120 m^2
        p = cardinality_params(rectangle(12, 10), SensorConfig.isotropic("surface", 1, 5.0), 1.0)
        assert (p.mu, p.pi) == (24, 0.9)
        assert p.mean == pytest.approx(21.6)

    def test_dark_sensor(self):
        p = cardinality_params(rectangle(30, 10), SensorConfig.isotropic("contour", 1, 5.0, eta=0.0))
        assert p.pi == 0.0
        rng = np.random.default_rng(0)
        assert all(sample_cardinality(p, rng) == 0 for _ in range(100))

    def test_below_resolution_warns(self, caplog):
        p = cardinality_params(rectangle(0.1, 0.1), SensorConfig.isotropic("contour", 1, 5.0))
        assert p.mu == 0
        assert "below sensor resolution" in caplog.text

    def test_reflectivity_range(self):
        with pytest.raises(ValueError):
            cardinality_params(rectangle(1, 1), SensorConfig.isotropic("contour", 1, 1.0), 1.5)

    def test_certain_detection(self):
        rng = np.random.default_rng(0)
        assert all(sample_cardinality(CardinalityParams(7, 1.0), rng) == 7 for _ in range(100))

    def test_moments(self):
        rng = np.random.default_rng(42)
        p = CardinalityParams(16, 0.9)
        m = np.array([sample_cardinality(p, rng) for _ in range(100_000)])
        assert abs(m.mean() - 14.4) < 0.05
        assert m.var() == pytest.approx(p.variance, rel=0.05)
        assert m.min() >= 0 and m.max() <= 16


class TestContourSampling:
    def test_square_edge_frequencies(self):
        p = edge_partition(ShapeVector(SQUARE))
        pts = sample_contour_points(p, 100_000, np.random.default_rng(1))
        d = point_segment_distance(pts, p.starts, p.ends)
        assert d.min(1).max() < 1e-12
        counts = np.bincount(d.argmin(1), minlength=4)
        assert stats.chisquare(counts).pvalue > 0.01

    def test_unequal_edges(self):
        rng = np.random.default_rng(2)
        v = random_star_polygon(rng, 11)
        p = edge_partition(ShapeVector(v))
        pts = sample_contour_points(p, 100_000, rng)
        counts = np.bincount(point_segment_distance(pts, p.starts, p.ends).argmin(1), minlength=p.n)
        assert stats.chisquare(counts, 100_000 * p.weights).pvalue > 0.01

    def test_dominant_edge(self):
        # weights of a closed polygon never exceed 1/2, so build the mixture by hand
        starts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
        ends = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
        w = np.array([1.0, 0.0, 0.0])
        p = EdgePartition(starts, ends, np.ones(3), w, np.cumsum(w))
        pts = sample_contour_points(p, 1000, np.random.default_rng(0))
        assert np.all(pts[:, 1] == 0.0)

    def test_single_draw(self):
        p = edge_partition(ShapeVector(SQUARE))
        y = sample_contour_point(p, np.random.default_rng(0))
        assert y.shape == (2,)


class TestTriangleSampling:
    def test_corners(self):
        np.testing.assert_array_equal(triangle_point(UNIT_TRI, 0.0, 0.3), UNIT_TRI[0])
        np.testing.assert_array_equal(triangle_point(UNIT_TRI, 1.0, 1.0), UNIT_TRI[2])
        np.testing.assert_array_equal(triangle_point(UNIT_TRI, 1.0, 0.0), UNIT_TRI[1])

    def test_centroid(self):
        pts = sample_triangle_point(UNIT_TRI, np.random.default_rng(3), 100_000)
        np.testing.assert_allclose(pts.mean(0), [1 / 3, 1 / 3], atol=0.005)
        assert np.all(pts >= 0) and np.all(pts.sum(1) <= 1 + 1e-15)

    def test_single(self):
        assert sample_triangle_point(UNIT_TRI, np.random.default_rng(0)).shape == (2,)


class TestSurfaceSampling:
    def test_square_triangle_selection(self):
        tri = triangulate(ShapeVector(SQUARE))
        pts = sample_surface_points(tri, 100_000, np.random.default_rng(4))
        first = point_in_polygon(pts, tri.triangles[0])
        assert stats.chisquare([first.sum(), (~first).sum()]).pvalue > 0.01

    def test_one_triangle(self):
        tri = triangulate(ShapeVector(UNIT_TRI))
        a = sample_surface_points(tri, 100, np.random.default_rng(5))
        assert np.all(point_in_polygon(a, UNIT_TRI))

    def test_inside_and_grid_uniform(self):
        rng = np.random.default_rng(6)
        v = random_star_polygon(rng, 13)
        tri = triangulate(ShapeVector(v))
        pts = sample_surface_points(tri, 100_000, rng)
        assert np.all(point_in_polygon(pts, v))
        areas, xs, ys = grid_cell_areas(v, 20)
        H, _, _ = np.histogram2d(pts[:, 1], pts[:, 0], bins=[ys, xs])
        keep = areas > 0
        assert H[~keep].sum() == 0
        expected = 100_000 * areas[keep] / areas.sum()
        assert stats.chisquare(H[keep], expected).pvalue > 0.01

    def test_single(self):
        tri = triangulate(ShapeVector(SQUARE))
        assert sample_surface_point(tri, np.random.default_rng(0)).shape == (2,)


class TestScan:
    def test_noiseless_contour(self):
        s = ShapeVector(random_star_polygon(np.random.default_rng(7), 9))
        sensor = SensorConfig.isotropic("contour", 1e-12, 0.1)
        Y = generate_scan(s, sensor, CardinalityParams(50, 1.0), np.random.default_rng(0))
        assert Y.m == 50
        v0, v1 = s.edges()
        assert point_segment_distance(Y.points, v0, v1).min(1).max() < 1e-9

    def test_dark(self):
        sensor = SensorConfig.isotropic("surface", 1.0, 1.0)
        Y = generate_scan(ShapeVector(SQUARE), sensor, CardinalityParams(50, 0.0), np.random.default_rng(0), k=3)
        assert Y.m == 0 and Y.k == 3

    @pytest.mark.parametrize("kind", ["contour", "surface"])
    def test_unbiased(self, kind):
        v = random_star_polygon(np.random.default_rng(8), 9) * 5
        s = ShapeVector(v)
        g, _ = barycenter_area(s)
        sensor = SensorConfig.isotropic(kind, 1.0, 1.0)
        rng = np.random.default_rng(9)
        part, tri = edge_partition(s), triangulate(s)
        pts = np.vstack(
            [
                generate_scan(s, sensor, CardinalityParams(3, 1.0), rng, partition=part, triangulation=tri).points
                for _ in range(10_000)
            ]
        )
        if kind == "surface":
            target = g
        else:
            # contour points average to the arc-length centroid, not the area barycenter
            target = (part.weights[:, None] * 0.5 * (part.starts + part.ends)).sum(0)
        se = pts.std(0) / np.sqrt(len(pts))
        assert np.all(np.abs(pts.mean(0) - target) < 3 * se)

    def test_deterministic(self):
        s = ShapeVector(SQUARE * 10)
        sensor = SensorConfig.isotropic("contour", 1.0, 1.0)
        p = CardinalityParams(20, 0.8)
        a = generate_scan(s, sensor, p, np.random.default_rng(123))
        b = generate_scan(s, sensor, p, np.random.default_rng(123))
        np.testing.assert_array_equal(a.points, b.points)

    def test_anisotropic_noise(self):
        R = np.array([[4.0, 1.0], [1.0, 0.5]])
        n = noise(R, 200_000, np.random.default_rng(0))
        np.testing.assert_allclose(np.cov(n.T), R, rtol=0.02, atol=0.01)

    def test_dataset_readonly(self):
        d = Dataset(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            d.points[0, 0] = 1
        assert len(Dataset(np.empty(0))) == 0
