"""
Unit tests for the workability checks and the osculating partition.
"""
import math
import unittest

import numpy as np
from scipy.optimize import minimize_scalar

from src.arrangement import OrientedDrawing
from src.errors import C1Violation, DegeneratePoints, TooFewVertices
from src.lacecheck import (
    check_c0, check_c1, check_c2, check_c3, check_c4, deming_fit, face_shape_classes, osculating_partition,
    polygon_circumradius, polygon_inradius, topological_order, verify_all,
)
from src.models import VerificationThresholds
from tests.test_fixtures import TestFixtures, permuted_edges


class TestConditionC1(unittest.TestCase):

    def test_square_grid_passes(self):
        result = check_c1(TestFixtures.create_square_grid())
        self.assertTrue(result.passed)
        self.assertEqual(result.offenders, [])

    def test_degree_three_vertex(self):
        result = check_c1(TestFixtures.create_degree_three_drawing())
        self.assertFalse(result.passed)
        self.assertEqual(result.offenders, [0])

    def test_alternating_out_edges(self):
        result = check_c1(TestFixtures.create_alternating_drawing())
        self.assertEqual(result.offenders, [0])

    def test_boundary_vertices_are_exempt(self):
        d = TestFixtures.create_triangle_cycle()
        self.assertTrue(check_c1(d).passed)


class TestOsculatingPartition(unittest.TestCase):

    def setUp(self):
        self.drawing = TestFixtures.create_square_grid()
        self.partition = osculating_partition(self.drawing)

    def test_every_edge_in_exactly_one_path(self):
        self.assertTrue(np.all(self.partition.edge_to_path >= 0))
        self.assertEqual(sum(len(p) for p in self.partition.paths), self.drawing.num_edges)
        for i, path in enumerate(self.partition.paths):
            self.assertTrue(np.all(self.partition.edge_to_path[list(path.edges)] == i))

    def test_paths_are_connected_chains(self):
        d = self.drawing
        for path in self.partition.paths:
            self.assertFalse(path.closed)
            for a, b in zip(path.edges, path.edges[1:]):
                self.assertEqual(d.heads[a], d.tails[b])
            self.assertEqual(len(path.vertices), len(path.edges) + 1)
            self.assertTrue(d.boundary[path.vertices[0]])
            self.assertTrue(d.boundary[path.vertices[-1]])

    def test_paths_alternate_direction_on_square_grid(self):
        d = self.drawing
        longest = max(self.partition.paths, key=len)
        vectors = d.edge_vectors()[list(longest.edges)]
        vertical = np.abs(vectors[:, 0]) < 1e-9
        self.assertTrue(np.all(vertical[1:] != vertical[:-1]))

    def test_independent_of_edge_order(self):
        expected = set(self.partition.edge_sets(self.drawing))
        for seed in (1, 2):
            shuffled = permuted_edges(self.drawing, seed)
            self.assertEqual(set(osculating_partition(shuffled).edge_sets(shuffled)), expected)

    def test_c1_failure_raises(self):
        with self.assertRaises(C1Violation) as ctx:
            osculating_partition(TestFixtures.create_degree_three_drawing())
        self.assertEqual(ctx.exception.offenders, [0])

    def test_boundary_vertices_end_paths(self):
        d = TestFixtures.create_triangle_cycle()
        partition = osculating_partition(d)
        self.assertEqual(len(partition.paths), 3)
        self.assertFalse(any(p.closed for p in partition.paths))
        self.assertTrue(np.all(partition.edge_to_path >= 0))


class TestDemingFit(unittest.TestCase):

    def test_points_on_a_line(self):
        xs = np.linspace(-2, 3, 11)
        fit = deming_fit(np.column_stack((xs, 2 * xs + 1)))
        self.assertAlmostEqual(fit.max_deviation, 0.0, places=9)
        self.assertAlmostEqual(fit.direction[0], 1 / math.sqrt(5), places=9)
        self.assertAlmostEqual(fit.direction[1], 2 / math.sqrt(5), places=9)

    def test_direction_follows_up(self):
        fit = deming_fit([[0.0, 0.0], [1.0, -1.0], [2.0, -2.0]], up=(0.0, 1.0))
        self.assertGreater(fit.direction[1], 0)

    def test_degenerate_points(self):
        with self.assertRaises(DegeneratePoints):
            deming_fit([[1.0, 1.0]])
        with self.assertRaises(DegeneratePoints):
            deming_fit([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])

    def test_matches_numerical_optimum(self):
        rng = np.random.default_rng(11)
        xs = rng.uniform(-5, 5, 40)
        pts = np.column_stack((xs, 0.7 * xs + rng.normal(0, 0.4, 40)))
        centred = pts - pts.mean(axis=0)

        def residual(theta):
            return float(np.sum((centred[:, 1] * math.cos(theta) - centred[:, 0] * math.sin(theta)) ** 2))

        grid = np.linspace(0, math.pi, 721)
        start = grid[int(np.argmin([residual(t) for t in grid]))]
        best = minimize_scalar(residual, bounds=(start - 0.01, start + 0.01), method="bounded",
                               options={"xatol": 1e-12})
        fit = deming_fit(pts)
        fitted = residual(math.atan2(fit.direction[1], fit.direction[0]))
        self.assertLessEqual(fitted, best.fun + 1e-8)
        self.assertAlmostEqual(fit.centroid[0], float(pts[:, 0].mean()), places=12)


class TestConditionC4(unittest.TestCase):

    def test_square_grid_staircases(self):
        metrics = check_c4(TestFixtures.create_square_grid(), s_max=1.0)
        self.assertTrue(metrics.passed)
        self.assertGreater(len(metrics.per_path_max_deviation), 0)
        self.assertLess(metrics.worst, 0.5)
        self.assertEqual(len(metrics.per_path_angle_to_up), len(metrics.per_path_max_deviation))

    def test_tight_bound_fails(self):
        metrics = check_c4(TestFixtures.create_square_grid(), s_max=0.1)
        self.assertFalse(metrics.passed)

    def test_fibonacci_bigrid_within_bound(self):
        d = TestFixtures.create_fibonacci_bigrid()
        bound = 0.5 * (1 + (1 + math.sqrt(5)) / 2) * math.sin(math.pi / 3)
        self.assertLessEqual(check_c4(d, bound).worst, bound)


class TestConditionC0(unittest.TestCase):

    def test_square_grid_metrics(self):
        metrics = check_c0(TestFixtures.create_square_grid(), margin=2.0)
        self.assertTrue(metrics.passed)
        self.assertAlmostEqual(metrics.min_pair_distance, 1.0)
        self.assertAlmostEqual(metrics.min_face_inradius, 0.5)
        self.assertAlmostEqual(metrics.max_face_circumradius, math.sqrt(2) / 2)
        self.assertAlmostEqual(metrics.largest_empty_circle_radius, math.sqrt(2) / 2)

    def test_margin_too_large(self):
        with self.assertRaises(TooFewVertices):
            check_c0(TestFixtures.create_square_grid(), margin=100.0)


class TestPolygonRadii(unittest.TestCase):

    def test_triangle_inradius(self):
        self.assertAlmostEqual(polygon_inradius(np.array([[0, 0], [4, 0], [0, 3]])), 1.0)

    def test_clockwise_input(self):
        self.assertAlmostEqual(polygon_inradius(np.array([[0, 3], [4, 0], [0, 0]])), 1.0)

    def test_rhombus_inradius(self):
        rhomb = np.array([[0, 0], [1, 0], [1 + math.cos(1.0), math.sin(1.0)], [math.cos(1.0), math.sin(1.0)]])
        self.assertAlmostEqual(polygon_inradius(rhomb), math.sin(1.0) / 2)

    def test_hexagon_inradius(self):
        angles = np.arange(6) * math.pi / 3
        hexagon = np.column_stack((np.cos(angles), np.sin(angles)))
        self.assertAlmostEqual(polygon_inradius(hexagon), math.sqrt(3) / 2, places=7)

    def test_non_convex_inradius(self):
        ell = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
        expected = math.sqrt(2) / (1 + math.sqrt(2))
        self.assertAlmostEqual(polygon_inradius(ell), expected, places=3)

    def test_circumradius(self):
        square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        self.assertAlmostEqual(polygon_circumradius(square), math.sqrt(2) / 2)
        obtuse = np.array([[0, 0], [4, 0], [1, 1]], dtype=float)
        self.assertAlmostEqual(polygon_circumradius(obtuse), 2.0)


class TestConditionsC2C3(unittest.TestCase):

    def test_grid_connected_and_acyclic(self):
        d = TestFixtures.create_square_grid()
        c2 = check_c2(d)
        self.assertTrue(c2.passed)
        self.assertEqual(c2.min_face_degree, 4)
        c3 = check_c3(d)
        self.assertTrue(c3.acyclic)
        self.assertTrue(c3.all_edges_downward)

    def test_topological_order_respects_edges(self):
        d = TestFixtures.create_square_grid(3.0)
        rank = {v: i for i, v in enumerate(topological_order(d))}
        self.assertTrue(all(rank[int(t)] < rank[int(h)] for t, h in zip(d.tails, d.heads)))

    def test_cycle_detected(self):
        c3 = check_c3(TestFixtures.create_triangle_cycle())
        self.assertFalse(c3.passed)

    def test_disconnected_drawing(self):
        d = OrientedDrawing.from_lists([[0, 1], [0, 0], [5, 1], [5, 0]], [(0, 1), (2, 3)],
                                       boundary=[True] * 4)
        self.assertFalse(check_c2(d).connected)

    def test_face_shape_classes(self):
        d = TestFixtures.create_square_grid()
        interior = [f for f in d.bounded_faces() if not d.boundary[f].any()]
        classes = face_shape_classes(d, interior)
        self.assertEqual(len(classes), 1)
        self.assertEqual(len(classes[0].members), len(interior))


class TestVerifyAll(unittest.TestCase):

    def test_square_grid_passes(self):
        report = verify_all(TestFixtures.create_square_grid(), VerificationThresholds(), s_max=1.0)
        self.assertTrue(report.passed)
        self.assertEqual(report.errors, [])
        self.assertGreater(len(report.boundary_vertices), 0)
        data = report.to_dict()
        self.assertTrue(data["passed"])
        self.assertIn("c4", data)

    def test_explicit_threshold_wins(self):
        thresholds = VerificationThresholds(s_max=0.1)
        report = verify_all(TestFixtures.create_square_grid(), thresholds, s_max=1.0)
        self.assertFalse(report.c4.passed)
        self.assertFalse(report.passed)

    def test_c1_failure_skips_c4(self):
        report = verify_all(TestFixtures.create_alternating_drawing(), VerificationThresholds(margin=0.0), s_max=1.0)
        self.assertFalse(report.passed)
        self.assertIsNone(report.c4)
        self.assertTrue(any("C4 skipped" in e for e in report.errors))

    def test_missing_s_max_fails(self):
        report = verify_all(TestFixtures.create_square_grid())
        self.assertTrue(report.c1.passed)
        self.assertIsNone(report.c4)
        self.assertFalse(report.passed)
        self.assertIn("C4 skipped: no s_max bound given", report.errors)
        self.assertIsNone(report.to_dict()["c4"])


if __name__ == '__main__':
    unittest.main()
