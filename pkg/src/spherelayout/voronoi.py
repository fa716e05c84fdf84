"""Weighted spherical Voronoi tessellation as the dual of the hull.

Each hull triangle contributes one tessellation vertex, its weighted
circumcenter; the cell of a generator is the polygon through the
circumcenters of its incident triangles.  Because the hull itself ignores
the weights, strongly unequal weights can produce "wrong" edges whose dual
cells overlap.  :func:`detect_wrong_edges` finds them with a local
regularity (power) test and :func:`swap_wrong_edges` flips them.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import tolerances as tol
from .errors import CircumcenterAtOrigin, DegenerateInput, FlipWouldInvert, UnknownEdge
from .geometry import (
    SphericalPolygon,
    orientation,
    signed_excess,
    weighted_circumcenters,
    weighted_distance,
    unit,
)
from .hull import HullMesh, convex_hull


@dataclass(frozen=True, eq=False)
class Tessellation:
    """Cells of a weighted spherical Voronoi tessellation.

    ``vertices[t]`` is the weighted circumcenter of ``mesh.triangles[t]``;
    ``cells[i]`` lists the triangle ids around generator ``i`` in
    counter-clockwise order, so ``vertices[cells[i]]`` is the cell polygon.
    ``overlap`` is set when some cell has a negatively oriented fan
    triangle, the visible symptom of wrong edges.
    """

    points: np.ndarray
    weights: np.ndarray
    mesh: HullMesh
    vertices: np.ndarray
    cells: List[np.ndarray]
    overlap: bool
    _fan: Tuple[np.ndarray, ...] = field(repr=False)

    def __len__(self):
        return len(self.cells)

    def cell(self, i) -> SphericalPolygon:
        return SphericalPolygon(self.vertices[self.cells[i]], generator_id=i)

    def polygons(self) -> List[SphericalPolygon]:
        return [self.cell(i) for i in range(len(self.cells))]

    def fan_areas(self):
        owner, a, b, c = self._fan
        v = self.vertices
        return signed_excess(v[a], v[b], v[c])

    def areas(self):
        """Signed cell areas in steradians."""
        owner = self._fan[0]
        return np.bincount(owner, weights=self.fan_areas(), minlength=len(self.cells))

    def area_fractions(self):
        return self.areas() / (4.0 * np.pi)

    def centroids(self):
        """Spherical fan centroids of all cells.

        Rows for cells without a usable centroid (non-positive area or a
        vanishing weighted sum) are NaN.
        """
        owner, a, b, c = self._fan
        v = self.vertices
        areas = signed_excess(v[a], v[b], v[c])
        tc = v[a] + v[b] + v[c]
        nrm = np.linalg.norm(tc, axis=1, keepdims=True)
        tc = np.divide(tc, nrm, out=np.zeros_like(tc), where=nrm > tol.CENTROID)
        n = len(self.cells)
        s = np.stack([np.bincount(owner, weights=areas * tc[:, k], minlength=n) for k in range(3)], axis=1)
        tot = np.bincount(owner, weights=areas, minlength=n)
        nrm = np.linalg.norm(s, axis=1)
        ok = (tot > 0) & (nrm > tol.CENTROID)
        out = np.full_like(s, np.nan)
        out[ok] = s[ok] / nrm[ok, None]
        return out

    def locate(self, points):
        """Index of the cell containing each point (-1 when none).

        Points covered by several overlapping cells go to the lowest id.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(pts), -1, dtype=np.int64)
        for i in range(len(self.cells)):
            free = out < 0
            if not free.any():
                break
            hit = self.cell(i).contains(pts[free])
            idx = np.flatnonzero(free)[hit]
            out[idx] = i
        return out


def _fan_indices(cells):
    owner, a, b, c = [], [], [], []
    for i, cell in enumerate(cells):
        k = len(cell)
        if k < 3:
            continue
        owner.append(np.full(k - 2, i))
        a.append(np.full(k - 2, cell[0]))
        b.append(cell[1:-1])
        c.append(cell[2:])
    if not owner:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    return tuple(np.concatenate(x).astype(np.int64) for x in (owner, a, b, c))


def _oriented_circumcenters(p, w, t):
    """Weighted circumcenters placed on the outer side of each face.

    A hull face whose plane has the origin on its outer side (all points
    within one hemisphere) gets ``-x/|x|``: the dual vertex must sit in the
    empty cap beyond the face, not in the cap behind it.
    """
    a, b, c = p[t[:, 0]], p[t[:, 1]], p[t[:, 2]]
    centers, bad = weighted_circumcenters(a, b, c, w[t[:, 0]], w[t[:, 1]], w[t[:, 2]])
    back = orientation(a, b, c) < 0
    centers[back] *= -1.0
    return centers, bad


def triangle_circumcenters(mesh: HullMesh, weights):
    """Weighted circumcenters of every mesh triangle; raises on degeneracy."""
    w = np.asarray(weights, dtype=float)
    t = mesh.triangles
    p = mesh.points
    centers, bad = _oriented_circumcenters(p, w, t)
    if bad.any():
        tid = int(np.flatnonzero(bad)[0])
        raise CircumcenterAtOrigin(
            f"triangle {tid} {t[tid].tolist()} has a degenerate weighted circumcenter",
            triangle=tid,
            vertices=t[tid].tolist(),
        )
    return centers


def build_wsvt(points, weights, mesh: Optional[HullMesh] = None, hull_method: str = "incremental") -> Tessellation:
    """Weighted spherical Voronoi tessellation of ``points``.

    Parameters
    ----------
    points : (n, 3) array_like
        Unit vectors, n >= 4, in general position.
    weights : (n,) array_like
        Power-distance weights.
    mesh : HullMesh, optional
        Triangulation to dualise.  Defaults to the convex hull of
        ``points``; pass a repaired mesh from :func:`swap_wrong_edges` to
        dualise that instead.
    """
    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    if mesh is None:
        mesh = convex_hull(pts, method=hull_method)
    centers = triangle_circumcenters(mesh, w)
    cells = [np.asarray(f, dtype=np.int64) for f in mesh.vertex_fans()]
    fan = _fan_indices(cells)
    _, a, b, c = fan
    overlap = bool(np.any(orientation(centers[a], centers[b], centers[c]) < -tol.ORIENTATION))
    centers.setflags(write=False)
    return Tessellation(pts, w, mesh, centers, cells, overlap, fan)


@dataclass
class EdgeReport:
    """Outcome of a wrong-edge scan or repair.

    ``wrong_edges`` are the edges failing the test before any repair,
    ``residual_wrong`` the count left in the returned mesh and ``skipped``
    the edges whose flip would have inverted a triangle.
    """

    wrong_edges: List[Tuple[int, int]]
    swaps_performed: int = 0
    residual_wrong: Optional[int] = None
    skipped: List[Tuple[int, int]] = field(default_factory=list)
    degenerate: List[Tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.residual_wrong is None:
            self.residual_wrong = len(self.wrong_edges)


def _side_fails(points, w, tri, opposite):
    """Power test of one triangle against the far vertex across its first edge.

    ``tri = (a, b, c)``; the edge is ``(a, b)``.  True when ``opposite``
    is strictly closer than ``a`` (in power distance) to the weighted
    circumcenter of ``abc``.  Returns None for a degenerate circumcenter.
    ``points`` is a list of 3-tuples here; this sits in the flip loop, so it
    avoids numpy per call.
    """
    a, b, c = tri
    x = _circumcenter_scalar(points[a], points[b], points[c], w[a], w[b], w[c])
    if x is None:
        return None
    pa, pd = points[a], points[opposite]
    da = (pa[0] - x[0]) ** 2 + (pa[1] - x[1]) ** 2 + (pa[2] - x[2]) ** 2 - w[a]
    dd = (pd[0] - x[0]) ** 2 + (pd[1] - x[1]) ** 2 + (pd[2] - x[2]) ** 2 - w[opposite]
    return dd < da - tol.REGULARITY


def _circumcenter_scalar(a, b, c, wa, wb, wc):
    """Scalar twin of :func:`_oriented_circumcenters` for one triangle."""
    e1 = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
    e2 = (c[0] - a[0], c[1] - a[1], c[2] - a[2])
    aa = a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
    bb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2]
    cc = c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
    ae1 = a[0] * e1[0] + a[1] * e1[1] + a[2] * e1[2]
    ae2 = a[0] * e2[0] + a[1] * e2[1] + a[2] * e2[2]
    r1 = 0.5 * (bb - aa - wb + wa) - ae1
    r2 = 0.5 * (cc - aa - wc + wa) - ae2
    g11 = e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]
    g12 = e1[0] * e2[0] + e1[1] * e2[1] + e1[2] * e2[2]
    g22 = e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]
    det = g11 * g22 - g12 * g12
    if abs(det) < tol.SOLVE * tol.SOLVE:
        return None
    s = (r1 * g22 - r2 * g12) / det
    t = (r2 * g11 - r1 * g12) / det
    x = [a[k] + s * e1[k] + t * e2[k] for k in range(3)]
    n = math.sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    if n < tol.SOLVE:
        return None
    # orientation a . (e1 x e2) decides which side of the sphere
    o = (
        a[0] * (e1[1] * e2[2] - e1[2] * e2[1])
        + a[1] * (e1[2] * e2[0] - e1[0] * e2[2])
        + a[2] * (e1[0] * e2[1] - e1[1] * e2[0])
    )
    if o < 0:
        n = -n
    return (x[0] / n, x[1] / n, x[2] / n)


def _orient_scalar(a, b, c):
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        + a[1] * (b[2] * c[0] - b[0] * c[2])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


def _all_side_tests(mesh: HullMesh, w):
    """Vectorised :func:`_side_fails` for every (triangle, edge slot)."""
    t = mesh.triangles
    p = mesh.points
    x, bad = _oriented_circumcenters(p, w, t)
    fails = np.zeros(t.shape, dtype=bool)
    degenerate = np.zeros(t.shape, dtype=bool)
    for k in range(3):
        u = t[:, k]
        v = t[:, (k + 1) % 3]
        nb = t[mesh.neighbors[:, k]]
        opp = nb[(nb != u[:, None]) & (nb != v[:, None])]
        fails[:, k] = weighted_distance(p[opp], w[opp], x) < weighted_distance(p[u], w[u], x) - tol.REGULARITY
        degenerate[:, k] = bad
    fails &= ~degenerate
    return fails, degenerate


def detect_wrong_edges(mesh: HullMesh, weights) -> EdgeReport:
    """Edges violating local regularity under the given weights.

    An edge shared by triangles ``(a, b, c)`` and ``(b, a, d)`` is wrong
    when ``d`` beats ``a`` in power distance at the weighted circumcenter
    of ``abc``, or ``c`` beats ``b`` at that of ``bad``.  With equal weights
    no hull edge is wrong.
    """
    w = np.asarray(weights, dtype=float)
    fails, degenerate = _all_side_tests(mesh, w)
    wrong, degen = set(), set()
    t = mesh.triangles
    for tid, k in zip(*np.nonzero(fails)):
        u, v = int(t[tid, k]), int(t[tid, (k + 1) % 3])
        wrong.add((min(u, v), max(u, v)))
    for tid, k in zip(*np.nonzero(degenerate)):
        u, v = int(t[tid, k]), int(t[tid, (k + 1) % 3])
        degen.add((min(u, v), max(u, v)))
    return EdgeReport(sorted(wrong), degenerate=sorted(degen - wrong))


class _MutableTriangulation:
    """Working copy of a mesh supporting edge flips."""

    def __init__(self, mesh: HullMesh):
        self.points = mesh.points
        self.coords = [tuple(p) for p in mesh.points.tolist()]
        self.tris = [tuple(int(v) for v in t) for t in mesh.triangles]
        self.owner = {}
        for tid, (i, j, k) in enumerate(self.tris):
            for e in ((i, j), (j, k), (k, i)):
                self.owner[e] = tid

    def has_edge(self, i, j):
        return (i, j) in self.owner

    def quad(self, i, j):
        """Return ``(t1, t2, c, d)`` with ``t1 = (i, j, c)``, ``t2 = (j, i, d)``."""
        if (i, j) not in self.owner or (j, i) not in self.owner:
            raise UnknownEdge(f"edge {(i, j)} is not in the mesh")
        t1, t2 = self.owner[(i, j)], self.owner[(j, i)]
        c = next(v for v in self.tris[t1] if v != i and v != j)
        d = next(v for v in self.tris[t2] if v != i and v != j)
        return t1, t2, c, d

    def side_tests(self, i, j, w):
        """Both one-sided tests of edge ``(i, j)``; None marks degeneracy."""
        t1, t2, c, d = self.quad(i, j)
        return _side_fails(self.coords, w, (i, j, c), d), _side_fails(self.coords, w, (j, i, d), c)

    def is_wrong(self, i, j, w):
        a, b = self.side_tests(i, j, w)
        return bool(a) or bool(b)

    def flip(self, i, j):
        t1, t2, c, d = self.quad(i, j)
        if (c, d) in self.owner or c == d:
            raise FlipWouldInvert(f"edge {(c, d)} already exists")
        p = self.coords
        if _orient_scalar(p[i], p[d], p[c]) <= tol.ORIENTATION or _orient_scalar(p[d], p[j], p[c]) <= tol.ORIENTATION:
            raise FlipWouldInvert(f"flipping {(i, j)} would invert a triangle")
        self.tris[t1] = (i, d, c)
        self.tris[t2] = (d, j, c)
        del self.owner[(i, j)]
        del self.owner[(j, i)]
        self.owner[(i, d)] = t1
        self.owner[(d, c)] = t1
        self.owner[(c, i)] = t1
        self.owner[(d, j)] = t2
        self.owner[(j, c)] = t2
        self.owner[(c, d)] = t2
        return c, d

    def to_mesh(self) -> HullMesh:
        return HullMesh.from_triangles(self.points, self.tris)


def flip_edge(mesh: HullMesh, edge) -> HullMesh:
    """Replace edge ``(i, j)`` by the other diagonal of its quadrilateral.

    Raises :class:`FlipWouldInvert` when either new triangle would be
    flat or clockwise, or the other diagonal already exists.
    """
    i, j = (int(e) for e in edge)
    work = _MutableTriangulation(mesh)
    work.flip(i, j)
    return work.to_mesh()


def swap_wrong_edges(mesh: HullMesh, weights, max_passes: Optional[int] = None) -> Tuple[HullMesh, EdgeReport]:
    """Flip wrong edges until none remain or the step budget runs out.

    Wrong edges are processed from a FIFO queue in sorted order; after each
    flip the four outer edges of the quadrilateral and the new diagonal are
    re-tested and queued if wrong.  ``max_passes`` bounds the number of
    queue pops (default ``3 * E``).  Repair is not guaranteed to reach zero:
    the triangulation with the fewest wrong edges seen is returned, so the
    count never increases.
    """
    w = np.asarray(weights, dtype=float)
    initial = detect_wrong_edges(mesh, w)
    w = w.tolist()
    report = EdgeReport(list(initial.wrong_edges), degenerate=list(initial.degenerate))
    if not initial.wrong_edges:
        return mesh, report
    budget = 3 * mesh.n_edges if max_passes is None else int(max_passes)

    work = _MutableTriangulation(mesh)
    wrong = set(initial.wrong_edges)
    best_count = len(wrong)
    best_tris = list(work.tris)
    best_swaps = 0
    swaps = 0
    skipped = set()
    queue = deque(initial.wrong_edges)
    queued = set(queue)
    steps = 0
    while queue and steps < budget and wrong:
        steps += 1
        e = queue.popleft()
        queued.discard(e)
        i, j = e
        if not work.has_edge(i, j) or e not in wrong:
            continue
        try:
            c, d = work.flip(i, j)
        except FlipWouldInvert:
            skipped.add(e)
            continue
        swaps += 1
        skipped.discard(e)
        wrong.discard(e)
        touched = [(i, d), (d, j), (j, c), (c, i), (c, d)]
        for u, v in touched:
            key = (min(u, v), max(u, v))
            if work.is_wrong(u, v, w):
                wrong.add(key)
                if key not in queued:
                    queue.append(key)
                    queued.add(key)
            else:
                wrong.discard(key)
        if len(wrong) < best_count:
            best_count = len(wrong)
            best_tris = list(work.tris)
            best_swaps = swaps

    out = HullMesh.from_triangles(mesh.points, best_tris)
    final = detect_wrong_edges(out, np.asarray(w))
    report.swaps_performed = best_swaps
    report.residual_wrong = len(final.wrong_edges)
    report.skipped = sorted(e for e in skipped if e in set(final.wrong_edges))
    return out, report


def build_scaled_tessellation(points, weights) -> Tessellation:
    """Weighted tessellation whose bisectors are great circles.

    Cell ``i`` is where ``(1 + w_i / 2) p_i . x`` is largest.  Near a
    generator this ranks sites like the power distance ``|p - x|^2 - w``,
    but every boundary is a great circle.  The cells are the radial
    projection of the faces of the polar of the hull of the scaled sites,
    so they come straight from that hull and never overlap.  A site
    pushed inside the hull by its neighbours gets an empty cell.

    Raises :class:`DegenerateInput` when the origin is not strictly
    inside the scaled hull.
    """
    from scipy.spatial import ConvexHull

    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    scaled = (1.0 + 0.5 * w)[:, None] * pts
    try:
        h = ConvexHull(scaled)
    except Exception as exc:  # QhullError on flat input
        raise DegenerateInput(f"qhull failed: {exc}") from exc
    if np.any(h.equations[:, 3] >= -tol.COPLANAR):
        raise DegenerateInput("origin is not inside the hull of the scaled sites")
    tris = h.simplices.copy()
    a, b, c = scaled[tris[:, 0]], scaled[tris[:, 1]], scaled[tris[:, 2]]
    flip = np.sum(np.cross(b - a, c - a) * h.equations[:, :3], axis=1) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    mesh = HullMesh.from_triangles(pts, tris)
    t = mesh.triangles
    centers = unit(np.cross(scaled[t[:, 1]] - scaled[t[:, 0]], scaled[t[:, 2]] - scaled[t[:, 0]]))
    cells = [np.asarray(f, dtype=np.int64) for f in mesh.vertex_fans()]
    fan = _fan_indices(cells)
    centers.setflags(write=False)
    return Tessellation(pts, w, mesh, centers, cells, False, fan)
