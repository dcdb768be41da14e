import math
from unittest import TestCase

import numpy as np

from ltlstep.utils import math_util

SQUARE = [[0, 0], [2, 0], [2, 1], [0, 1]]


class TestPolygons(TestCase):

    def test_signed_area(self):
        self.assertEqual(math_util.polygon_signed_area(SQUARE), 2)
        self.assertEqual(math_util.polygon_signed_area(SQUARE[::-1]), -2)

    def test_is_convex_ccw(self):
        self.assertTrue(math_util.is_convex_ccw(SQUARE))
        self.assertFalse(math_util.is_convex_ccw(SQUARE[::-1]))
        self.assertFalse(math_util.is_convex_ccw(SQUARE[:2]))
        # Collinear vertex
        self.assertFalse(math_util.is_convex_ccw([[0, 0], [1, 0], [2, 0], [2, 1], [0, 1]]))
        # Reflex vertex
        self.assertFalse(math_util.is_convex_ccw([[0, 0], [2, 0], [1, 0.5], [2, 1], [0, 1]]))

    def test_halfspaces(self):
        A, b = math_util.halfspaces_from_vertices(SQUARE)
        self.assertEqual(A.shape, (4, 2))
        self.assertTrue(np.allclose(np.linalg.norm(A, axis=1), 1))
        for vertex in SQUARE:
            self.assertLessEqual(np.max(A @ vertex - b), 1e-12)
        self.assertAlmostEqual(np.max(A @ [3, 0.5] - b), 1)

        center, radius = math_util.chebyshev_center(A, b)
        self.assertAlmostEqual(radius, 0.5)
        self.assertAlmostEqual(center[1], 0.5)

        lowers, uppers = math_util.bounding_box(A, b)
        self.assertTrue(np.allclose(lowers, [0, 0]))
        self.assertTrue(np.allclose(uppers, [2, 1]))

        vertices = math_util.vertices_from_halfspaces(A, b, center)
        self.assertEqual(len(vertices), 4)
        self.assertTrue(math_util.is_convex_ccw(vertices))
        self.assertAlmostEqual(math_util.polygon_signed_area(vertices), 2)

    def test_empty_and_unbounded(self):
        # x <= 0 and x >= 1
        A, b = np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]]), np.array([0, -1, 1, 1])
        self.assertIsNone(math_util.bounding_box(A, b))
        self.assertEqual(math_util.chebyshev_center(A, b), (None, None))
        # Half plane
        A, b = np.array([[1.0, 0]]), np.array([1.0])
        self.assertIsNone(math_util.bounding_box(A, b))
        self.assertEqual(math_util.chebyshev_center(A, b), (None, math.inf))


class TestVectors(TestCase):

    def test_box_row_max(self):
        self.assertEqual(math_util.box_row_max([1, -2, 0], [-1, -1, -5], [3, 2, 5]), 5)
        self.assertEqual(math_util.box_row_max([], [], []), 0)

    def test_unit_directions(self):
        directions = math_util.unit_directions(8)
        self.assertEqual(directions.shape, (8, 2))
        self.assertTrue(np.allclose(directions[0], [1, 0]))
        self.assertTrue(np.allclose(directions[2], [0, 1]))
        self.assertTrue(np.allclose(np.linalg.norm(directions, axis=1), 1))

    def test_rotate_and_mirror(self):
        x, y = math_util.rotate(0, 1, (0, 0.35))
        self.assertAlmostEqual(x, -0.35)
        self.assertAlmostEqual(y, 0)
        self.assertEqual(math_util.rotate(1, 0, (0.2, 0.1)), (0.2, 0.1))
        self.assertEqual(math_util.mirror((0.0, 0.35)), (0.0, -0.35))

    def test_is_psd(self):
        self.assertTrue(math_util.is_psd(np.diag([1000.0, 1000.0, 100.0])))
        self.assertTrue(math_util.is_psd(np.zeros((3, 3))))
        self.assertTrue(math_util.is_psd([[1, 1], [1, 1]]))
        self.assertFalse(math_util.is_psd([[1, 2], [2, 1]]))
        self.assertFalse(math_util.is_psd([[1, 1], [0, 1]]))
        self.assertFalse(math_util.is_psd([[1, 0, 0]]))
        self.assertFalse(math_util.is_psd([[math.nan, 0], [0, 1]]))
