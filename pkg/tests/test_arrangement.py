"""
Unit tests for line families, multigrids and their arrangements.
"""
import math
import unittest

import numpy as np
import shapely

from src.arrangement import (
    ConstantSpacing, Line, LineFamily, Multigrid, OrientedDrawing, WordSpacing, assign_down_orientation,
    bigrid, build_arrangement, clip_from_radius, family_line, intersect, line_position, multigrid,
    perturb_offsets, star_vectors,
)
from src.errors import (
    DegenerateIntersection, EmptyArrangement, HorizontalEdge, IndexOutOfRange, InvalidParams, ParallelLines,
)
from src.words import SpacingWord, fibonacci_word
from tests.test_fixtures import TILTED_UP, TestFixtures


class TestLineFamilies(unittest.TestCase):
    """Line positions and intersections."""

    def setUp(self):
        self.word = SpacingWord("LSL", len_s=1.0, len_l=2.0)
        self.family = LineFamily(0.0, 0.0, WordSpacing(self.word))

    def test_word_spacing_positions(self):
        self.assertEqual(self.family.valid_range(), (-1, 2))
        self.assertEqual(line_position(self.family, 0), 0.0)
        self.assertEqual(line_position(self.family, 1), 1.0)
        self.assertEqual(line_position(self.family, 2), 3.0)
        self.assertEqual(line_position(self.family, -1), -2.0)

    def test_index_out_of_range(self):
        with self.assertRaises(IndexOutOfRange):
            line_position(self.family, 5)
        with self.assertRaises(IndexOutOfRange):
            line_position(self.family, -2)

    def test_constant_spacing_positions(self):
        family = LineFamily(0.3, 0.25, ConstantSpacing(2.0))
        self.assertEqual(line_position(family, 3), 6.25)
        self.assertEqual(line_position(family, -1), -1.75)

    def test_constant_spacing_must_be_positive(self):
        with self.assertRaises(InvalidParams):
            ConstantSpacing(0.0)

    def test_default_anchor_is_the_word_middle(self):
        word = SpacingWord("LSL")
        middle = LineFamily(0.0, 0.0, WordSpacing(word))
        start = LineFamily(0.0, 0.0, WordSpacing(word, origin=0))
        self.assertEqual(WordSpacing(word).anchor, 1)
        self.assertAlmostEqual(line_position(middle, 1), word.len_s)
        self.assertAlmostEqual(line_position(start, 1), word.len_l)
        self.assertAlmostEqual(word.len_l, (1 + math.sqrt(5)) / 2)

    def test_explicit_origin(self):
        family = LineFamily(0.0, 0.0, WordSpacing(self.word, origin=0))
        self.assertEqual(family.valid_range(), (0, 3))
        self.assertEqual(line_position(family, 3), 5.0)

    def test_intersect(self):
        point = intersect(Line(0.0, 1.0), Line(math.pi / 2, 2.0))
        self.assertAlmostEqual(point[0], 1.0)
        self.assertAlmostEqual(point[1], 2.0)

    def test_intersect_family_lines(self):
        a = LineFamily(0.0, 0.5)
        b = LineFamily(math.pi / 2, 0.5)
        point = intersect(family_line(a, 1), family_line(b, -1))
        self.assertAlmostEqual(point[0], 1.5)
        self.assertAlmostEqual(point[1], -0.5)

    def test_parallel_lines(self):
        with self.assertRaises(ParallelLines):
            intersect(Line(0.0, 1.0), Line(math.pi, 2.0))


class TestMultigrids(unittest.TestCase):

    def test_star_vectors(self):
        five = star_vectors(5)
        self.assertEqual(len(five), 5)
        self.assertAlmostEqual(five[1], 2 * math.pi / 5)
        four = star_vectors(4)
        self.assertAlmostEqual(four[1], math.pi / 4)
        with self.assertRaises(InvalidParams):
            star_vectors(1)

    def test_parallel_families_rejected(self):
        with self.assertRaises(InvalidParams):
            Multigrid((LineFamily(0.0), LineFamily(math.pi)))

    def test_offset_count_checked(self):
        with self.assertRaises(InvalidParams):
            multigrid(3, (0.1, 0.2))

    def test_bigrid_angle_range(self):
        word = fibonacci_word(5)
        with self.assertRaises(InvalidParams):
            bigrid(word, alpha=0.0)
        with self.assertRaises(InvalidParams):
            bigrid(word, alpha=2.0)
        grid = bigrid(word, alpha=math.pi / 3)
        self.assertAlmostEqual(grid.families[1].normal_angle - grid.families[0].normal_angle, math.pi / 3)

    def test_perturb_offsets_stays_within_magnitude(self):
        grid = multigrid(5, (0.1, 0.2, 0.3, -0.4, -0.2))
        moved = perturb_offsets(grid, np.random.default_rng(7), magnitude=1e-3)
        delta = np.asarray(moved.offsets) - np.asarray(grid.offsets)
        self.assertTrue(np.all(np.abs(delta) <= 1e-3))
        self.assertTrue(np.any(delta != 0))

    def test_perturb_offsets_deterministic(self):
        grid = multigrid(3)
        first = perturb_offsets(grid, np.random.default_rng(3)).offsets
        second = perturb_offsets(grid, np.random.default_rng(3)).offsets
        self.assertEqual(first, second)


class TestBuildArrangement(unittest.TestCase):
    """Arrangement construction on a small square grid."""

    def setUp(self):
        self.drawing = build_arrangement(multigrid(2, (0.5, 0.5)), clip_from_radius(3.0))

    def test_counts(self):
        self.assertEqual(self.drawing.num_vertices, 36)
        self.assertEqual(self.drawing.num_edges, 60)
        self.assertEqual(int(self.drawing.boundary.sum()), 20)

    def test_faces_and_euler_characteristic(self):
        self.assertEqual(len(self.drawing.bounded_faces()), 25)
        self.assertEqual(self.drawing.euler_characteristic(), 2)

    def test_unit_edges(self):
        lengths = np.linalg.norm(self.drawing.edge_vectors(), axis=1)
        np.testing.assert_allclose(lengths, 1.0)

    def test_interior_vertices_have_degree_four(self):
        degree = self.drawing.degree()
        self.assertTrue(np.all(degree[self.drawing.interior] == 4))
        self.assertTrue(np.all(degree[self.drawing.boundary] < 4))

    def test_edges_carry_families(self):
        vertical = np.abs(self.drawing.edge_vectors()[:, 0]) < 1e-12
        np.testing.assert_array_equal(self.drawing.edge_family[vertical], 0)
        np.testing.assert_array_equal(self.drawing.edge_family[~vertical], 1)
        self.assertEqual(self.drawing.num_families, 2)

    def test_rotation_is_counterclockwise(self):
        centre = int(np.argmin(np.linalg.norm(self.drawing.positions - [0.5, 0.5], axis=1)))
        edges = self.drawing.rotation(centre)
        self.assertEqual(len(edges), 4)
        angles = []
        for e in edges:
            other = self.drawing.heads[e] if self.drawing.tails[e] == centre else self.drawing.tails[e]
            vec = self.drawing.positions[other] - self.drawing.positions[centre]
            angles.append(math.atan2(vec[1], vec[0]))
        self.assertEqual(angles, sorted(angles))

    def test_three_concurrent_lines(self):
        with self.assertRaises(DegenerateIntersection):
            build_arrangement(multigrid(3, (0.0, 0.0, 0.0)), clip_from_radius(3.0))

    def test_empty_clip(self):
        grid = bigrid(SpacingWord("LSL"))
        with self.assertRaises(EmptyArrangement):
            build_arrangement(grid, (100.0, 100.0, 110.0, 110.0))

    def test_degenerate_clip(self):
        with self.assertRaises(InvalidParams):
            build_arrangement(multigrid(2, (0.5, 0.5)), (1.0, 1.0, 1.0, 2.0))
        with self.assertRaises(InvalidParams):
            clip_from_radius(0.0)

    def test_bigrid_is_bounded_by_the_word(self):
        word = fibonacci_word(6)
        d = build_arrangement(bigrid(word), clip_from_radius(1000.0))
        self.assertEqual(d.num_vertices, (len(word) + 1) ** 2)


class TestPlanarity(unittest.TestCase):
    """Edges of an arrangement meet only at shared endpoints."""

    def assert_plane_drawing(self, d):
        ends = np.stack([d.positions[d.tails], d.positions[d.heads]], axis=1)
        segments = shapely.linestrings(ends)
        pairs = shapely.crosses(segments[:, None], segments[None, :]) | \
            shapely.overlaps(segments[:, None], segments[None, :])
        self.assertEqual(int(pairs.sum()), 0)

        incident = np.zeros((d.num_vertices, d.num_edges), dtype=bool)
        edge_ids = np.arange(d.num_edges)
        incident[d.tails, edge_ids] = True
        incident[d.heads, edge_ids] = True
        points = shapely.points(d.positions)
        gaps = shapely.distance(points[:, None], segments[None, :])
        self.assertGreater(float(gaps[~incident].min()), 1e-9)

    def test_pentagrid(self):
        grid = multigrid(5, (0.13, 0.27, 0.41, 0.09, 0.33))
        self.assert_plane_drawing(build_arrangement(grid, clip_from_radius(3.0)))

    def test_fibonacci_bigrid(self):
        self.assert_plane_drawing(build_arrangement(bigrid(fibonacci_word(8)), clip_from_radius(6.0)))

    def test_seven_families(self):
        grid = multigrid(7, (0.05, 0.31, 0.17, 0.44, 0.23, 0.38, 0.11))
        self.assert_plane_drawing(build_arrangement(grid, clip_from_radius(2.0)))


class TestOrientation(unittest.TestCase):

    def test_horizontal_edges_rejected(self):
        d = build_arrangement(multigrid(2, (0.5, 0.5)), clip_from_radius(3.0))
        with self.assertRaises(HorizontalEdge) as ctx:
            assign_down_orientation(d, (0.0, 1.0))
        self.assertGreaterEqual(ctx.exception.edge_id, 0)

    def test_every_edge_points_down(self):
        d = TestFixtures.create_square_grid()
        self.assertIsInstance(d, OrientedDrawing)
        self.assertTrue(np.all(d.edge_vectors() @ d.up < 0))
        self.assertAlmostEqual(float(np.linalg.norm(d.up)), 1.0)

    def test_in_and_out_degrees(self):
        d = TestFixtures.create_square_grid()
        interior = d.interior
        self.assertTrue(np.all(d.in_degree()[interior] == 2))
        self.assertTrue(np.all(d.out_degree()[interior] == 2))

    def test_bigrid_orientation(self):
        d = TestFixtures.create_fibonacci_bigrid()
        self.assertTrue(np.all(d.edge_vectors()[:, 1] < 0))

    def test_rotated_copy(self):
        d = TestFixtures.create_square_grid(3.0)
        turned = d.rotated(math.pi / 2, family_shift=1)
        np.testing.assert_allclose(turned.positions[:, 0], -d.positions[:, 1], atol=1e-12)
        np.testing.assert_array_equal(turned.edge_family, (d.edge_family + 1) % 2)
        np.testing.assert_allclose(turned.up, [-TILTED_UP[1], TILTED_UP[0]], atol=1e-12)
        self.assertTrue(np.all(turned.edge_vectors() @ turned.up < 0))


if __name__ == '__main__':
    unittest.main()
