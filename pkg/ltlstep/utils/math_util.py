import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection


# Plane geometry


def polygon_signed_area(vertices):
    points = np.asarray(vertices, dtype=float)
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def is_convex_ccw(vertices, tol=1e-12):
    # Every turn must be to the left (collinear vertices are not allowed)
    points = np.asarray(vertices, dtype=float)
    count = len(points)
    if count < 3:
        return False
    for i in range(count):
        a, b, c = points[i], points[(i + 1) % count], points[(i + 2) % count]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross <= tol:
            return False
    return True


def halfspaces_from_vertices(vertices):
    """Outward unit normals A and offsets b of {p : A p <= b} for the hull of the vertices.

    Rows follow the hull facets, which for 2D are the polygon edges.
    """
    hull = ConvexHull(np.asarray(vertices, dtype=float))
    equations = hull.equations
    A = np.delete(equations, equations.shape[1] - 1, 1)
    b = -1 * equations[:, equations.shape[1] - 1]
    return A, b


def chebyshev_center(A, b):
    # Largest inscribed ball: max r s.t. a_i p + |a_i| r <= b_i
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    dim = A.shape[1]
    norm_vector = np.linalg.norm(A, axis=1).reshape(-1, 1)
    c = np.zeros(dim + 1)
    c[-1] = -1
    bounds = [(None, None)] * dim + [(0, None)]
    sol = linprog(c, A_ub=np.c_[A, norm_vector], b_ub=b, bounds=bounds, method="highs")
    if sol.status == 3:
        # Unbounded radius
        return None, float("inf")
    if not sol.success:
        return None, None
    return sol.x[:-1], float(sol.x[-1])


def bounding_box(A, b):
    """Solves 2 * dim LPs. Returns (lowers, highers) or None if the set is empty or unbounded."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    dim = A.shape[1]
    lowers, uppers = np.zeros(dim), np.zeros(dim)
    for d in range(dim):
        for sign in (1.0, -1.0):
            c = np.zeros(dim)
            c[d] = sign
            sol = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * dim, method="highs")
            if not sol.success:
                return None
            if sign > 0:
                lowers[d] = sol.x[d]
            else:
                uppers[d] = sol.x[d]
    return lowers, uppers


def vertices_from_halfspaces(A, b, interior_point):
    # CCW ordered vertices of a bounded polygon {p : A p <= b}
    half_space = np.c_[np.asarray(A, dtype=float), -np.asarray(b, dtype=float)]
    intersection = HalfspaceIntersection(half_space, np.asarray(interior_point, dtype=float))
    vertices = intersection.intersections
    hull = ConvexHull(vertices)
    return vertices[hull.vertices, :]


def box_row_max(coefficients, lowers, uppers):
    # max of sum(coef * v) over the box lowers <= v <= uppers
    total = 0.0
    for coef, lower, upper in zip(coefficients, lowers, uppers):
        if coef > 0:
            total += coef * upper
        elif coef < 0:
            total += coef * lower
    return total


def unit_directions(count):
    angles = 2 * math.pi * np.arange(count) / count
    return np.c_[np.cos(angles), np.sin(angles)]


def rotate(c, s, point):
    # [c -s; s c] p
    return c * point[0] - s * point[1], s * point[0] + c * point[1]


def mirror(point):
    return point[0], -point[1]


# Matrices


def is_psd(matrix, tol=1e-9):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if not np.all(np.isfinite(matrix)):
        return False
    if not np.allclose(matrix, matrix.T, atol=tol, rtol=0):
        return False
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    return bool(np.min(np.linalg.eigvalsh(matrix)) >= -tol * scale) if matrix.size else True
