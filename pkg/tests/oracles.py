"""Independent reference implementations used by the tests."""

import itertools

import numpy as np


def girard_area(a, b, c):
    """Triangle area from its interior angles (angle sum minus pi)."""

    def angle(p, q, r):
        # angle at p between arcs pq and pr, via tangent vectors
        tq = q - np.dot(p, q) * p
        tr = r - np.dot(p, r) * p
        return np.arctan2(np.linalg.norm(np.cross(tq, tr)), np.dot(tq, tr))

    return angle(a, b, c) + angle(b, c, a) + angle(c, a, b) - np.pi


def brute_force_hull(points, tol=1e-12):
    """Hull faces as the triples whose plane has every other point on one side."""
    n = len(points)
    faces = set()
    for i, j, k in itertools.combinations(range(n), 3):
        normal = np.cross(points[j] - points[i], points[k] - points[i])
        side = (points - points[i]) @ normal
        side[[i, j, k]] = 0.0
        if np.all(side <= tol) or np.all(side >= -tol):
            faces.add(frozenset((i, j, k)))
    return faces


def planar_circumcenter(a, b, c):
    """Classical circumcenter of a triangle in 3D, by the textbook formula."""
    ab, ac = b - a, c - a
    n = np.cross(ab, ac)
    x = a + (np.dot(ac, ac) * np.cross(n, ab) + np.dot(ab, ab) * np.cross(ac, n)) / (2.0 * np.dot(n, n))
    return x


def uniform_sphere(rng, m):
    v = rng.standard_normal((m, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_cap(center, radius, rng, m):
    """Uniform samples from the spherical cap of angular ``radius``."""
    z = rng.uniform(np.cos(radius), 1.0, m)
    phi = rng.uniform(0.0, 2.0 * np.pi, m)
    r = np.sqrt(1.0 - z * z)
    local = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    c = np.asarray(center, float)
    # any orthonormal frame with c as third axis
    helper = np.array([1.0, 0, 0]) if abs(c[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(helper, c)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    return local @ np.stack([e1, e2, c])


def sample_polygon(vertices, rng, m):
    """Uniform samples from a convex polygon smaller than a hemisphere.

    Rejection from the smallest cap around the vertex mean that holds
    every vertex.
    """
    v = np.asarray(vertices, float)
    normals = np.cross(v, np.roll(v, -1, axis=0))
    center = v.sum(axis=0)
    center /= np.linalg.norm(center)
    radius = np.max(np.arccos(np.clip(v @ center, -1.0, 1.0)))
    out, got = [], 0
    while got < m:
        x = sample_cap(center, radius, rng, 2 * m)
        x = x[np.all(x @ normals.T >= 0.0, axis=1)]
        out.append(x)
        got += len(x)
    return np.concatenate(out)[:m]


def power_owner(points, weights, x):
    """Index of the site with the smallest power distance, per row of ``x``."""
    d = ((x[:, None, :] - points[None, :, :]) ** 2).sum(-1) - np.asarray(weights)[None, :]
    return d.argmin(axis=1)
