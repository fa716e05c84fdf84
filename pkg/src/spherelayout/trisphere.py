"""TriSphere: node placement on a subdivided icosahedron.

The sphere is discretised into ``20 * 4**level`` triangles and each node
takes the centre of one face.  Whenever the node count is not of that form
some faces stay empty; :class:`WasteStats` measures how many.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LevelTooLarge
from .geometry import spherical_excess, unit

MAX_LEVEL = 7

_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICO_VERTICES = np.array(
    [
        [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
        [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
        [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
    ]
)

# the five faces around vertex 0 come first, then their neighbours, so a
# prefix of the list is a connected patch of the surface
_ICO_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
)


@dataclass(frozen=True, eq=False)
class IcoSphere:
    """Subdivided icosahedron with vertices on the unit sphere."""

    level: int
    vertices: np.ndarray
    faces: np.ndarray

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def triangles(self) -> np.ndarray:
        """``(F, 3, 3)`` array of face corner coordinates."""
        return self.vertices[self.faces]

    def areas(self):
        v = self.vertices
        f = self.faces
        return spherical_excess(v[f[:, 0]], v[f[:, 1]], v[f[:, 2]])

    def centroids(self):
        return unit(self.triangles.sum(axis=1))


def build_icosphere(level: int) -> IcoSphere:
    """Icosahedron subdivided ``level`` times by edge midpoints.

    Every face ``(a, b, c)`` is replaced, in place and in order, by its
    three corner triangles and the middle one; midpoints are pushed out to
    the sphere and shared between neighbouring faces.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    if level > MAX_LEVEL:
        raise LevelTooLarge(f"level {level} exceeds the cap of {MAX_LEVEL}")
    verts = [tuple(v) for v in unit(_ICO_VERTICES).tolist()]
    faces = [tuple(f) for f in _ICO_FACES.tolist()]
    for _ in range(level):
        cache = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = unit(np.add(verts[i], verts[j]))
                cache[key] = len(verts)
                verts.append(tuple(m.tolist()))
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        faces = new
    return IcoSphere(level, np.array(verts), np.array(faces, dtype=np.int64))


def level_for(n: int) -> int:
    """Smallest subdivision level whose face count can hold ``n`` nodes."""
    if n < 1:
        raise ValueError("need at least one node")
    level = 0
    while 20 * 4**level < n:
        level += 1
    return level


@dataclass(frozen=True)
class WasteStats:
    """Face usage of a TriSphere placement; ``waste`` is exact."""

    nodes: int
    level: int
    faces: int

    @property
    def unused(self) -> int:
        return self.faces - self.nodes

    @property
    def waste(self) -> Fraction:
        return Fraction(self.unused, self.faces)

    @property
    def waste_percent(self) -> Fraction:
        return self.waste * 100


def waste_stats(n: int) -> WasteStats:
    """Analytic waste for ``n`` nodes, without building the mesh."""
    level = level_for(n)
    if level > MAX_LEVEL:
        raise LevelTooLarge(f"{n} nodes need level {level}, cap is {MAX_LEVEL}")
    return WasteStats(n, level, 20 * 4**level)


def trisphere_layout(n: int):
    """Place ``n`` nodes at the centroids of the first ``n`` faces.

    Returns ``(positions, WasteStats)``.
    """
    stats = waste_stats(n)
    sphere = build_icosphere(stats.level)
    return sphere.centroids()[:n], stats
