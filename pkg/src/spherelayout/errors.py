"""Exception hierarchy."""


class SphereLayoutError(Exception):
    """Base class for all errors raised by spherelayout."""


class DegenerateTriangle(SphereLayoutError, ValueError):
    pass


class DegenerateCentroid(SphereLayoutError, ValueError):
    pass


class DegeneratePolygon(SphereLayoutError, ValueError):
    pass


class CircumcenterAtOrigin(SphereLayoutError, ValueError):
    """The in-plane weighted circumcenter is (numerically) the origin.

    ``triangle`` holds the offending triangle id when raised while
    building a tessellation, ``vertices`` the generator indices.
    """

    def __init__(self, msg, triangle=None, vertices=None):
        super().__init__(msg)
        self.triangle = triangle
        self.vertices = vertices


class TooFewPoints(SphereLayoutError, ValueError):
    pass


class DegenerateInput(SphereLayoutError, ValueError):
    """Coincident, coplanar or cocircular input the hull cannot resolve.

    ``indices`` lists the offending input points when known.
    """

    def __init__(self, msg, indices=()):
        super().__init__(msg)
        self.indices = tuple(indices)


class UnknownEdge(SphereLayoutError, KeyError):
    pass


class FlipWouldInvert(SphereLayoutError):
    pass


class NotConverged(SphereLayoutError):
    """The Lloyd loop stopped without meeting its threshold.

    Carries the best state seen so the caller can accept it.
    """

    def __init__(self, msg, positions=None, tessellation=None, report=None):
        super().__init__(msg)
        self.positions = positions
        self.tessellation = tessellation
        self.report = report


class LevelTooLarge(SphereLayoutError, ValueError):
    pass


class NonPositiveExplicitWeight(SphereLayoutError, ValueError):
    pass


class RegionTooSmall(SphereLayoutError):
    def __init__(self, msg, node_id=None):
        super().__init__(msg)
        self.node_id = node_id


class ParseError(SphereLayoutError, ValueError):
    pass


class IoError(SphereLayoutError, OSError):
    pass


class CycleError(SphereLayoutError):
    pass


class InvalidTree(SphereLayoutError, ValueError):
    """Duplicate ids, a missing root, or a tree that is too shallow."""
