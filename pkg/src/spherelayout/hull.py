"""Convex hull of points on the unit sphere.

For points on a sphere the hull's faces are the spherical Delaunay
triangles, so :class:`HullMesh` doubles as the (unweighted) Delaunay
triangulation that the tessellation is dualised from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from . import tolerances as tol
from .errors import DegenerateInput, TooFewPoints, UnknownEdge


def _canonical(tri):
    """Rotate a triangle so its smallest index comes first (keeps winding)."""
    i, j, k = (int(t) for t in tri)
    if i < j and i < k:
        return (i, j, k)
    if j < k:
        return (j, k, i)
    return (k, i, j)


@dataclass(frozen=True, eq=False)
class HullMesh:
    """Outward-oriented triangulation of a set of sphere points.

    Attributes
    ----------
    points : (n, 3) array
        Site positions, indexed by generator id.
    triangles : (F, 3) int array
        Vertex triples, counter-clockwise seen from outside.
    neighbors : (F, 3) int array
        ``neighbors[t, k]`` is the triangle across the edge
        ``(triangles[t, k], triangles[t, (k + 1) % 3])``.
    edges : dict
        ``(i, j)`` with ``i < j`` mapped to its two incident triangles,
        lower id first.
    """

    points: np.ndarray
    triangles: np.ndarray
    neighbors: np.ndarray
    edges: Dict[Tuple[int, int], Tuple[int, int]]

    @classmethod
    def from_triangles(cls, points, triangles, canonical=True):
        """Build adjacency for a closed triangulation.

        Raises ``ValueError`` if some directed edge is used twice or has no
        twin (not a closed 2-manifold).
        """
        points = np.asarray(points, dtype=float)
        tris = [_canonical(t) for t in triangles] if canonical else [tuple(map(int, t)) for t in triangles]
        if canonical:
            tris.sort()
        tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
        directed = {}
        for t, (i, j, k) in enumerate(tris):
            for slot, (u, v) in enumerate(((i, j), (j, k), (k, i))):
                if (u, v) in directed:
                    raise ValueError(f"directed edge {(u, v)} used twice")
                directed[(u, v)] = (t, slot)
        neighbors = np.full_like(tris, -1)
        edges = {}
        for (u, v), (t, slot) in directed.items():
            twin = directed.get((v, u))
            if twin is None:
                raise ValueError(f"edge {(u, v)} has no twin")
            neighbors[t, slot] = twin[0]
            if u < v:
                a, b = sorted((t, twin[0]))
                edges[(u, v)] = (a, b)
        points.setflags(write=False)
        tris.setflags(write=False)
        neighbors.setflags(write=False)
        return cls(points, tris, neighbors, edges)

    @property
    def n_vertices(self) -> int:
        return len(np.unique(self.triangles))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    def euler_ok(self) -> bool:
        v = self.n_vertices
        return self.n_faces == 2 * v - 4 and self.n_edges == 3 * v - 6

    def face_set(self):
        return {frozenset(map(int, t)) for t in self.triangles}

    def vertex_fans(self) -> List[List[int]]:
        """Incident triangles of every vertex, counter-clockwise.

        Ordered by walking triangle adjacency rather than by angle.  Vertices
        absent from the mesh get an empty list.
        """
        tris = self.triangles
        start = {}
        for t, tri in enumerate(tris):
            for k in range(3):
                start.setdefault(int(tri[k]), (t, k))
        fans = [[] for _ in range(len(self.points))]
        for v, (t0, k0) in start.items():
            fan = []
            t, k = t0, k0
            while True:
                fan.append(t)
                # tri = (v, a, b) rotated; next CCW triangle shares edge (b, v)
                nxt = self.neighbors[t, (k + 2) % 3]
                t = int(nxt)
                k = int(np.flatnonzero(tris[t] == v)[0])
                if t == t0:
                    break
                if len(fan) > len(tris):
                    raise ValueError(f"vertex {v} fan does not close")
            fans[v] = fan
        return fans


def edge_neighbors(mesh: HullMesh, edge) -> Tuple[int, int]:
    """The two triangles sharing ``edge``, lower triangle id first."""
    i, j = (int(e) for e in edge)
    key = (i, j) if i < j else (j, i)
    try:
        return mesh.edges[key]
    except KeyError:
        raise UnknownEdge(f"edge {edge} is not in the mesh") from None


def _signed_volume(p, q, r, s):
    """Six times the signed volume of tetrahedron ``pqrs`` (vectorised in ``s``)."""
    return np.dot(s - p, np.cross(q - p, r - p))


def _initial_simplex(pts, order):
    p0 = order[0]
    d = np.linalg.norm(pts[order] - pts[p0], axis=1)
    p1 = order[int(np.argmax(d))]
    if d.max() < tol.DUPLICATE:
        raise DegenerateInput("all points coincide")
    u = pts[p1] - pts[p0]
    area = np.linalg.norm(np.cross(pts[order] - pts[p0], u), axis=1)
    p2 = order[int(np.argmax(area))]
    if area.max() < tol.COPLANAR:
        raise DegenerateInput("all points are collinear")
    vol = _signed_volume(pts[p0], pts[p1], pts[p2], pts[order])
    p3 = order[int(np.argmax(np.abs(vol)))]
    if np.abs(vol).max() < tol.COPLANAR:
        raise DegenerateInput("all points are coplanar")
    if _signed_volume(pts[p0], pts[p1], pts[p2], pts[p3]) > 0:
        # p3 above (p0, p1, p2): flip so every face points away from p3
        p1, p2 = p2, p1
    return [(p0, p1, p2), (p0, p3, p1), (p1, p3, p2), (p2, p3, p0)]


def _incremental_hull(pts, seed=0):
    n = len(pts)
    order = np.random.default_rng(seed).permutation(n)
    faces: Dict[int, Tuple[int, int, int]] = {}
    owner: Dict[Tuple[int, int], int] = {}  # directed edge -> face
    conflicts: Dict[int, np.ndarray] = {}  # face -> point indices above it
    point_faces: Dict[int, set] = {}  # point -> faces it sees
    next_id = 0

    def add_face(tri, candidates):
        nonlocal next_id
        f = next_id
        next_id += 1
        faces[f] = tri
        i, j, k = tri
        for e in ((i, j), (j, k), (k, i)):
            owner[e] = f
        if len(candidates):
            vol = _signed_volume(pts[i], pts[j], pts[k], pts[candidates])
            above = candidates[vol > tol.COPLANAR]
        else:
            above = candidates
        conflicts[f] = above
        for p in above.tolist():
            point_faces.setdefault(p, set()).add(f)
        return f

    simplex = _initial_simplex(pts, order)
    used = {v for tri in simplex for v in tri}
    rest = np.array([p for p in order if p not in used], dtype=np.int64)
    for tri in simplex:
        add_face(tri, rest)

    for p in rest.tolist():
        visible = point_faces.pop(p, None)
        if not visible:
            continue
        horizon = []
        for f in visible:
            i, j, k = faces[f]
            for u, v in ((i, j), (j, k), (k, i)):
                twin = owner[(v, u)]
                if twin not in visible:
                    horizon.append((u, v, f, twin))
        new = []
        for u, v, f, twin in horizon:
            cand = np.union1d(conflicts[f], conflicts[twin])
            cand = cand[cand != p]
            new.append(((u, v, p), cand))
        for f in visible:
            i, j, k = faces.pop(f)
            for e in ((i, j), (j, k), (k, i)):
                if owner.get(e) == f:
                    del owner[e]
            for q in conflicts.pop(f).tolist():
                if q != p:
                    point_faces[q].discard(f)
        for tri, cand in new:
            add_face(tri, cand)

    return list(faces.values())


def _qhull(pts):
    from scipy.spatial import ConvexHull

    h = ConvexHull(pts)
    tris = h.simplices.copy()
    # qhull does not orient simplices; orient by the outward facet normal
    normals = h.equations[:, :3]
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    flip = np.sum(np.cross(b - a, c - a) * normals, axis=1) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def convex_hull(points, method: str = "incremental", seed: int = 0) -> HullMesh:
    """Triangulated convex hull of unit-sphere points.

    Parameters
    ----------
    points : (n, 3) array_like
        At least four pairwise-distinct points, not all coplanar.
    method : {"incremental", "qhull"}
        ``"incremental"`` is the randomized-order incremental hull of this
        module; ``"qhull"`` delegates to :class:`scipy.spatial.ConvexHull`.
        Both return the same canonical mesh for points in general position.
    seed : int
        Seed of the insertion order (incremental only).  Output does not
        depend on it for points in general position.

    Raises
    ------
    TooFewPoints
        Fewer than four points.
    DegenerateInput
        Duplicates, coplanar input, or points left off the hull because they
        are cocircular with a hull face within tolerance.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(pts)
    if n < 4:
        raise TooFewPoints(f"need at least 4 points, got {n}")
    _check_duplicates(pts)
    if method == "incremental":
        tris = _incremental_hull(pts, seed)
    elif method == "qhull":
        try:
            tris = _qhull(pts)
        except Exception as exc:  # scipy raises QhullError for flat input
            raise DegenerateInput(f"qhull failed: {exc}") from exc
    else:
        raise ValueError(f"unknown hull method {method!r}")
    mesh = HullMesh.from_triangles(pts, tris)
    missing = sorted(set(range(n)) - set(np.unique(mesh.triangles).tolist()))
    if missing:
        raise DegenerateInput(f"points {missing} are not hull vertices (cocircular input)", missing)
    return mesh


def _check_duplicates(pts):
    from scipy.spatial import cKDTree

    pairs = cKDTree(pts).query_pairs(tol.DUPLICATE, output_type="ndarray")
    if len(pairs):
        raise DegenerateInput(f"duplicate points {pairs[0].tolist()}", pairs[0].tolist())
