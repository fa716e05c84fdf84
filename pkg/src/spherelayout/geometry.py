"""Primitives on the unit sphere.

Points are plain ``numpy`` arrays of shape ``(3,)`` (or ``(n, 3)`` for the
vectorised helpers).  Areas are in steradians; all formulas assume radius 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import tolerances as tol
from .errors import (
    CircumcenterAtOrigin,
    DegenerateCentroid,
    DegeneratePolygon,
    DegenerateTriangle,
)

FULL_SPHERE = 4.0 * np.pi


def unit(v):
    """Return ``v`` scaled to unit length (row-wise for 2-D input)."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def weighted_distance(a, w, x):
    """Power distance ``|a - x|^2 - w`` of point ``x`` to site ``a``.

    Broadcasts over leading dimensions.  The result may be negative.
    """
    d = np.asarray(a, dtype=float) - np.asarray(x, dtype=float)
    return np.sum(d * d, axis=-1) - w


def arc_length(u, v):
    """Great-circle distance between unit vectors (stable near 0 and pi)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.arctan2(np.linalg.norm(np.cross(u, v), axis=-1), np.sum(u * v, axis=-1))


def orientation(a, b, c):
    """Triple product ``a . (b x c)``; positive for counter-clockwise
    triangles seen from outside the sphere."""
    return np.sum(np.asarray(a) * np.cross(b, c), axis=-1)


def spherical_excess(a, b, c):
    """Unsigned spherical excess of triangles ``abc`` (L'Huilier form).

    Vectorised; never raises.  Coincident vertices give 0.
    """
    A = arc_length(b, c)
    B = arc_length(c, a)
    C = arc_length(a, b)
    s = 0.5 * (A + B + C)
    prod = (
        np.tan(0.5 * s)
        * np.tan(0.5 * (s - A))
        * np.tan(0.5 * (s - B))
        * np.tan(0.5 * (s - C))
    )
    return 4.0 * np.arctan(np.sqrt(np.clip(prod, 0.0, None)))


def signed_excess(a, b, c):
    """Spherical excess carrying the sign of the triangle's orientation."""
    return np.sign(orientation(a, b, c)) * spherical_excess(a, b, c)


def _coincident(u, v):
    return np.linalg.norm(np.asarray(u, float) - np.asarray(v, float)) < tol.COINCIDENT


def triangle_area(a, b, c) -> float:
    """Area of the spherical triangle ``abc``.

    Coincident vertices give exactly 0.  Distinct vertices lying on one
    great circle raise :class:`DegenerateTriangle`.
    """
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    if _coincident(a, b) or _coincident(b, c) or _coincident(c, a):
        return 0.0
    if abs(orientation(a, b, c)) < tol.ORIENTATION:
        raise DegenerateTriangle("triangle vertices lie on a great circle")
    return float(spherical_excess(a, b, c))


def triangle_centroid(a, b, c):
    """Spherical centroid ``(a + b + c) / |a + b + c|``."""
    s = np.asarray(a, float) + np.asarray(b, float) + np.asarray(c, float)
    n = np.linalg.norm(s)
    if n < tol.CENTROID:
        raise DegenerateCentroid("vertices sum to the zero vector")
    return s / n


@dataclass(frozen=True)
class SphericalPolygon:
    """Counter-clockwise polygon on the unit sphere with great-arc edges."""

    vertices: np.ndarray
    generator_id: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self) -> float:
        return polygon_area(self)

    @property
    def centroid(self):
        return polygon_centroid(self)

    def contains(self, points):
        return point_in_polygon(self, points)


def _vertices(p) -> np.ndarray:
    if isinstance(p, SphericalPolygon):
        return p.vertices
    return np.asarray(p, dtype=float).reshape(-1, 3)


def _usable_vertices(p) -> np.ndarray:
    v = _vertices(p)
    if len(v) == 0:
        raise DegeneratePolygon("empty polygon")
    keep = np.linalg.norm(v - np.roll(v, -1, axis=0), axis=1) >= tol.COINCIDENT
    v = v[keep]
    if len(v) < 3:
        raise DegeneratePolygon(f"polygon has {len(v)} usable vertices, need 3")
    return v


def fan_triangles(v):
    """Split vertex array ``v`` into the fan ``(v0, vi, vi+1)``, i = 1..n-2."""
    k = len(v)
    i = np.arange(1, k - 1)
    return np.repeat(v[:1], k - 2, axis=0), v[i], v[i + 1]


def polygon_area(p) -> float:
    """Area of a polygon as the sum of its fan triangles from vertex 0.

    Fan triangles are signed by orientation, so a clockwise polygon comes
    back negative.
    """
    v = _usable_vertices(p)
    return float(np.sum(signed_excess(*fan_triangles(v))))


def polygon_centroid(p):
    """Area-weighted mean of the fan-triangle centroids, renormalised."""
    v = _usable_vertices(p)
    a, b, c = fan_triangles(v)
    areas = signed_excess(a, b, c)
    if np.sum(areas) <= 0.0:
        raise DegeneratePolygon("polygon has non-positive area")
    cents = a + b + c
    norms = np.linalg.norm(cents, axis=1, keepdims=True)
    cents = np.divide(cents, norms, out=np.zeros_like(cents), where=norms > tol.CENTROID)
    s = areas @ cents
    n = np.linalg.norm(s)
    if n < tol.CENTROID:
        raise DegenerateCentroid("weighted fan-centroid sum vanishes")
    return s / n


def point_in_polygon(p, points, boundary_tol=1e-12):
    """Winding-number membership test.

    Returns a boolean array, one entry per row of ``points`` (a scalar for a
    single point).  Meant for polygons smaller than a hemisphere around the
    query point.
    """
    v = _vertices(p)
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    # project vertices onto each query point's tangent plane; azimuths around
    # the point are preserved, so the summed turning gives the winding number
    dots = pts @ v.T
    u = v[None, :, :] - dots[:, :, None] * pts[:, None, :]
    w = np.roll(u, -1, axis=1)
    sin = np.einsum("mj,mkj->mk", pts, np.cross(u, w))
    cos = np.einsum("mkj,mkj->mk", u, w)
    with np.errstate(invalid="ignore"):
        winding = np.sum(np.arctan2(sin, cos), axis=1) / (2.0 * np.pi)
    inside = winding > 0.5
    if boundary_tol:
        # points on an edge or at a vertex count as inside
        nxt = np.roll(v, -1, axis=0)
        e = orientation(v[None, :, :], nxt[None, :, :], pts[:, None, :])
        span = arc_length(v, nxt)[None, :]
        detour = arc_length(v[None, :, :], pts[:, None, :]) + arc_length(pts[:, None, :], nxt[None, :, :])
        on_edge = (np.abs(e) <= boundary_tol) & (detour - span <= 4.0 * boundary_tol + 1e-15)
        inside |= np.any(on_edge, axis=1)
    return bool(inside[0]) if single else inside


def _circumcenter_solve(a, b, c, wa, wb, wc):
    """In-plane solution ``x`` of the equal-power-distance conditions.

    Vectorised over rows.  Returns ``(x, gram_det)``.
    """
    e1 = b - a
    e2 = c - a
    # |b|^2 - |a|^2 - 2 x.(b - a) = wb - wa, likewise for c
    r1 = 0.5 * (np.sum(b * b, -1) - np.sum(a * a, -1) - wb + wa) - np.sum(a * e1, -1)
    r2 = 0.5 * (np.sum(c * c, -1) - np.sum(a * a, -1) - wc + wa) - np.sum(a * e2, -1)
    g11 = np.sum(e1 * e1, -1)
    g12 = np.sum(e1 * e2, -1)
    g22 = np.sum(e2 * e2, -1)
    det = g11 * g22 - g12 * g12
    safe = np.where(np.abs(det) < tol.SOLVE * tol.SOLVE, 1.0, det)
    s = (r1 * g22 - r2 * g12) / safe
    t = (r2 * g11 - r1 * g12) / safe
    x = a + s[..., None] * e1 + t[..., None] * e2
    return x, det


def weighted_circumcenters(a, b, c, wa, wb, wc, planar=False):
    """Vectorised weighted circumcenters of many triangles.

    Returns ``(centers, bad)`` where ``bad`` flags rows whose solve was
    degenerate (collinear input) or whose in-plane point sits at the
    origin.  With ``planar=True`` the un-normalised in-plane points are
    returned instead of their projections.
    """
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    x, det = _circumcenter_solve(a, b, c, np.asarray(wa, float), np.asarray(wb, float), np.asarray(wc, float))
    n = np.linalg.norm(x, axis=-1)
    bad = (np.abs(det) < tol.SOLVE * tol.SOLVE) | (n < tol.SOLVE)
    if planar:
        return x, bad
    out = x / np.where(n < tol.SOLVE, 1.0, n)[..., None]
    return out, bad


def weighted_circumcenter(a, b, c, wa=0.0, wb=0.0, wc=0.0):
    """Weighted circumcenter of spherical triangle ``abc``.

    Solves for the point ``x`` in the plane of ``a, b, c`` whose power
    distances to the three weighted sites agree, then projects it onto the
    sphere as ``x / |x|``.
    """
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    x, det = _circumcenter_solve(a, b, c, float(wa), float(wb), float(wc))
    scale = max(np.dot(b - a, b - a), np.dot(c - a, c - a))
    if abs(det) < tol.SOLVE * tol.SOLVE or abs(det) < tol.SOLVE * scale * scale:
        raise DegenerateTriangle("collinear triangle has no circumcenter")
    n = np.linalg.norm(x)
    if n < tol.SOLVE:
        raise CircumcenterAtOrigin("in-plane weighted circumcenter is at the origin")
    return x / n


def _arc_crossing(p, q, n, h):
    """Parameter ``t`` in [0, 1] where the arc ``p -> q`` meets ``n . x = h``.

    Points on the arc are ``unit((1 - t) p + t q)``; squaring
    ``n . u(t) = h |u(t)|`` gives a quadratic in ``t``.
    """
    alpha = float(n @ p)
    beta = float(n @ (q - p))
    c = float(p @ q)
    qa = beta * beta - h * h * (2.0 - 2.0 * c)
    qb = 2.0 * (alpha * beta - h * h * (c - 1.0))
    qc = alpha * alpha - h * h
    if abs(qa) < 1e-15:
        roots = [-qc / qb] if abs(qb) > 1e-300 else []
    else:
        disc = max(qb * qb - 4.0 * qa * qc, 0.0)
        sq = np.sqrt(disc)
        roots = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
    best = None
    for t in roots:
        if -1e-9 <= t <= 1.0 + 1e-9 and (h == 0.0 or (alpha + t * beta) * h >= 0.0):
            if best is None or abs(t - 0.5) < abs(best - 0.5):
                best = t
    if best is None:
        # fall back to bisection on the signed residual
        lo, hi = 0.0, 1.0
        f_lo = alpha - h
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            u = (1.0 - mid) * p + mid * q
            f_mid = float(n @ u) - h * float(np.linalg.norm(u))
            if (f_mid > 0) == (f_lo > 0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        best = 0.5 * (lo + hi)
    return min(max(best, 0.0), 1.0)


def clip_polygon(p, normal, offset=0.0):
    """Part of a polygon on the side ``normal . x <= offset``.

    Sutherland-Hodgman against one half-space.  ``offset == 0`` is a
    great-circle cut; otherwise the boundary is a small circle and the new
    edge it contributes is replaced by the great arc between the two
    crossing points.  Returns an ``(m, 3)`` vertex array, possibly with
    fewer than three rows when nothing is left.
    """
    v = _vertices(p)
    n = np.asarray(normal, dtype=float)
    h = float(offset)
    side = v @ n - h
    if np.all(side <= 0.0):
        return v.copy()
    if np.all(side > 0.0):
        return np.zeros((0, 3))
    out = []
    k = len(v)
    for i in range(k):
        cur, nxt = v[i], v[(i + 1) % k]
        s_cur, s_nxt = side[i], side[(i + 1) % k]
        if s_cur <= 0.0:
            out.append(cur)
        if (s_cur <= 0.0) != (s_nxt <= 0.0):
            t = s_cur / (s_cur - s_nxt) if h == 0.0 else _arc_crossing(cur, nxt, n, h)
            out.append(unit((1.0 - t) * cur + t * nxt))
    out = np.array(out) if out else np.zeros((0, 3))
    if len(out):
        keep = np.linalg.norm(out - np.roll(out, -1, axis=0), axis=1) >= tol.COINCIDENT
        out = out[keep]
    return out


def nearest_point_on_boundary(p, x):
    """Closest point to ``x`` on the polygon's great-arc boundary."""
    v = _vertices(p)
    x = np.asarray(x, dtype=float)
    best, best_d = None, np.inf
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        axis = np.cross(a, b)
        na = np.linalg.norm(axis)
        cands = [a, b]
        if na > tol.COINCIDENT:
            axis /= na
            y = x - (x @ axis) * axis
            ny = np.linalg.norm(y)
            if ny > tol.COINCIDENT:
                y /= ny
                # y lies on arc a->b iff it is between a and b on that circle
                if orientation(a, y, axis) >= 0 and orientation(y, b, axis) >= 0:
                    cands.append(y)
        for c in cands:
            d = arc_length(c, x)
            if d < best_d:
                best, best_d = c, d
    return best


def is_convex(p, tolerance=1e-12) -> bool:
    """True if every vertex turns left (counter-clockwise, seen from outside)."""
    v = _usable_vertices(p)
    turns = orientation(np.roll(v, 1, axis=0), v, np.roll(v, -1, axis=0))
    return bool(np.all(turns >= -tolerance))


def polygon_moment_centroid(p):
    """Exact centroid direction, the normalised area integral of ``x``.

    By Stokes, the integral equals half the sum over edges of the arc
    length times the unit normal of the edge's great circle.  Unlike
    :func:`polygon_centroid` it does not depend on a triangulation, so it
    respects the polygon's symmetries.
    """
    v = _usable_vertices(p)
    w = np.roll(v, -1, axis=0)
    n = np.cross(v, w)
    norms = np.linalg.norm(n, axis=1, keepdims=True)
    n = np.divide(n, norms, out=np.zeros_like(n), where=norms > tol.COINCIDENT)
    m = 0.5 * (arc_length(v, w) @ n)
    s = np.linalg.norm(m)
    if s < tol.CENTROID:
        raise DegenerateCentroid("polygon moment vanishes")
    return m / s
