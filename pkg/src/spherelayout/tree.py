"""Tree layout on concentric spheres.

Depth-``k`` nodes sit on the sphere of radius ``r_k = k * radius_scale``.
The root's children split the whole sphere (WSCVT or TriSphere); every
other node's children are placed inside the region of their parent,
radially projected outward, so each subtree lives in a pyramid with apex
at the origin.

All regions are stored on the unit sphere; a node's position is its unit
direction times its level radius.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    CycleError,
    DegenerateCentroid,
    DegenerateInput,
    DegeneratePolygon,
    InvalidTree,
    LevelTooLarge,
    NonPositiveExplicitWeight,
    NotConverged,
    RegionTooSmall,
)
from .geometry import (
    SphericalPolygon,
    arc_length,
    FULL_SPHERE,
    clip_polygon,
    is_convex,
    nearest_point_on_boundary,
    point_in_polygon,
    polygon_area,
    polygon_centroid,
    polygon_moment_centroid,
    unit,
)
from .lloyd import ConvergenceReport, LloydConfig, initial_distribution, run_wscvt, size_error
from .voronoi import build_scaled_tessellation
from .trisphere import MAX_LEVEL, WasteStats, build_icosphere, level_for, trisphere_layout

ALGORITHMS = ("wscvt", "trisphere")
# a scaled-weight cell on the whole sphere is always smaller than a hemisphere
MAX_SPHERE_SHARE = 0.45
RESTART_SEED_STEP = 7919
SETTLE_ITERATIONS = 200
STALL_ITERATIONS = 200
CAP_MARGIN = 0.95

log = logging.getLogger(__name__)


@dataclass(eq=False)
class TreeNode:
    """A node of the hierarchy; ``explicit_weight`` overrides the leaf count."""

    id: str
    label: str = ""
    explicit_weight: Optional[float] = None
    children: List["TreeNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        """Nodes in pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def height(self) -> int:
        """Number of edges on the longest root-to-leaf path."""
        best = 0
        stack = [(self, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in node.children)
        return best


def validate_tree(tree: TreeNode):
    """Raise :class:`CycleError` or :class:`InvalidTree` for malformed trees."""
    seen_ids = set()
    seen_nodes = set()
    stack = [(tree, ())]
    while stack:
        node, path = stack.pop()
        if id(node) in path:
            raise CycleError(f"node {node.id!r} is its own ancestor")
        if id(node) in seen_nodes:
            raise InvalidTree(f"node {node.id!r} appears under two parents")
        seen_nodes.add(id(node))
        if node.id in seen_ids:
            raise InvalidTree(f"duplicate node id {node.id!r}")
        seen_ids.add(node.id)
        for c in node.children:
            stack.append((c, path + (id(node),)))


def subtree_weights(tree: TreeNode) -> Dict[str, float]:
    """Weight of every node, keyed by id.

    A node's weight is its ``explicit_weight`` if set, otherwise the number
    of leaves below it (a leaf counts 1).  Explicit weights must be
    positive.
    """
    validate_tree(tree)
    out: Dict[str, float] = {}
    leaves: Dict[str, int] = {}
    order = list(tree.walk())
    for node in reversed(order):
        if node.explicit_weight is not None and not node.explicit_weight > 0:
            raise NonPositiveExplicitWeight(f"node {node.id!r} has weight {node.explicit_weight!r}")
        count = 1 if node.is_leaf else sum(leaves[c.id] for c in node.children)
        leaves[node.id] = count
        out[node.id] = float(node.explicit_weight) if node.explicit_weight is not None else float(count)
    return out


# ---------------------------------------------------------------- placement


@dataclass
class RegionPlacement:
    """Result of placing a sibling group inside one region."""

    positions: np.ndarray
    cells: List[SphericalPolygon]
    error: float = 0.0
    iterations: int = 0


def _cap_samples(center, radius, m, rng):
    """``m`` uniform samples in the spherical cap around ``center``."""
    z = 1.0 - rng.random(m) * (1.0 - np.cos(radius))
    phi = rng.random(m) * 2.0 * np.pi
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    local = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    # orthonormal frame with third axis = center
    helper = np.array([1.0, 0.0, 0.0]) if abs(center[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = unit(np.cross(helper, center))
    e2 = np.cross(center, e1)
    return local @ np.vstack([e1, e2, center])


def _sample_inside(v, k, rng, node_id=None):
    c = polygon_centroid(v)
    radius = float(np.max(arc_length(c, v)))
    picked = []
    for _ in range(200):
        cand = _cap_samples(c, radius, 8 * k, rng)
        for x in cand[point_in_polygon(v, cand)]:
            if all(np.linalg.norm(x - p) > 1e-6 for p in picked):
                picked.append(x)
                if len(picked) == k:
                    return np.array(picked)
    raise RegionTooSmall(f"could not find {k} distinct points inside the region", node_id)


def _pull_inside(v, x, center):
    if point_in_polygon(v, x):
        return x
    b = nearest_point_on_boundary(v, x)
    y = unit(0.99 * b + 0.01 * center)
    return y if point_in_polygon(v, y) else center


def _cell(v, pos, scale, i):
    """Part of the region where ``scale[i] * pos[i] . x`` is the largest.

    The boundary between two sites is the great circle with normal
    ``scale[j] pos[j] - scale[i] pos[i]``, so every cut is a great-circle
    clip and neighbouring cells share their edges exactly.  A convex piece
    lies in a half-space iff its vertices do, so only sites that some
    vertex still prefers are clipped against, most violated first.
    """
    normals = scale[:, None] * pos - scale[i] * pos[i]
    normals[i] = 0.0
    poly = v
    for _ in range(len(pos)):
        worst = np.max(poly @ normals.T, axis=0)
        j = int(np.argmax(worst))
        # vertices made by a cut sit on its circle up to rounding
        if worst[j] <= 1e-15:
            break
        poly = clip_polygon(poly, normals[j], 0.0)
        normals[j] = 0.0
        if len(poly) < 3:
            return np.zeros((0, 3))
    return poly


def _safe_area(poly):
    if len(poly) < 3:
        return 0.0
    try:
        return max(polygon_area(poly), 0.0)
    except DegeneratePolygon:
        return 0.0


def _axis_split(v, fractions, node_id=None):
    """Cut a region into pieces of the given area fractions.

    The cuts are great circles through the poles of the region's long
    axis: the arc from the centroid toward the two most distant vertices.
    Cut positions come from root bracketing on the clipped area.
    """
    k = len(v)
    best = (-1.0, 0, 1)
    for i in range(k):
        for j in range(i + 1, k):
            d = float(arc_length(v[i], v[j]))
            if d > best[0]:
                best = (d, i, j)
    _, i, j = best
    c = polygon_centroid(v)
    t = v[j] - v[i]
    t = t - np.dot(t, c) * c
    if np.linalg.norm(t) < 1e-12:
        t = np.cross(c, [1.0, 0.0, 0.0] if abs(c[0]) < 0.9 else [0.0, 1.0, 0.0])
    ahead = unit(t)
    # u is perpendicular to the centroid: it lies outside any region that
    # stays within 90 degrees of its centroid, so the sweep cannot wrap
    u = np.cross(c, ahead)
    p = c

    def normal(phi):
        return np.cross(u, np.cos(phi) * p + np.sin(phi) * ahead)

    total = polygon_area(v)

    def before(phi, target):
        return _safe_area(clip_polygon(v, normal(phi), 0.0)) - target

    # the cut planes turn about u; the vertices' angles bound the sweep
    phis = np.arctan2(v @ ahead, v @ p)
    lo, hi = phis.min() - 1e-9, phis.max() + 1e-9
    cuts = []
    for f in np.cumsum(fractions)[:-1]:
        target = f * total
        if before(lo, target) > 0 or before(hi, target) < 0:
            raise RegionTooSmall("region could not be split along its axis", node_id)
        cuts.append(brentq(before, lo, hi, args=(target,), xtol=1e-14))
    pieces = []
    prev = None
    for s in cuts + [None]:
        poly = v
        if prev is not None:
            poly = clip_polygon(poly, -normal(prev), 0.0)
        if s is not None:
            poly = clip_polygon(poly, normal(s), 0.0)
        pieces.append(poly)
        prev = s
    return pieces


def _cap_shares(desired, cap):
    """Clip shares at ``cap`` and hand the excess to the others pro rata."""
    d = np.asarray(desired, dtype=float) / np.sum(desired)
    capped = np.zeros(len(d), dtype=bool)
    while np.any(d > cap + 1e-15) and not np.all(capped | (d > cap)):
        capped |= d > cap
        free = ~capped
        d[capped] = cap
        d[free] *= (1.0 - cap * capped.sum()) / d[free].sum()
    return d


def _scale_cap(work, pos, margin=CAP_MARGIN):
    """Largest weights that keep every site inside its own cell.

    Site ``i`` owns itself while ``s_j cos(theta_ij) <= s_i`` for all
    ``j``, with ``s = 1 + w / 2``.  Only ``margin`` of that headroom is
    used so no cell is squeezed to nothing.  Lowering one weight can
    tighten another's bound, hence the loop.
    """
    c = np.clip(pos @ pos.T, -1.0, 1.0)
    np.fill_diagonal(c, 0.0)
    near = c > 1e-12
    head = np.where(near, 1.0 / np.where(near, c, 1.0) - 1.0, np.inf)
    for _ in range(len(work)):
        s = 1.0 + 0.5 * work
        bound = np.min(s[None, :] * (1.0 + margin * head), axis=1)
        if np.all(bound >= s):
            break
        work = np.maximum(2.0 * (np.minimum(s, bound) - 1.0), 0.0)
    return work


def _lloyd_in_region(v, desired, config: LloydConfig, rng, max_iterations, node_id=None):
    """Lloyd loop with scaled-weight cells, clipped to ``v``.

    ``v=None`` means the whole sphere; cells then come from
    :func:`build_scaled_tessellation`.  Generators move to the exact
    (moment) centroids of their cells; the fan-triangle formula depends
    on the starting vertex and would break the region's symmetries.

    On the whole sphere, weights stay fixed until the generators stop
    moving (or for at most ``SETTLE_ITERATIONS`` rounds); weights and
    positions trade off there and adapting early drifts toward lopsided
    layouts.  Inside a region the weights adapt from the start but are
    capped by :func:`_scale_cap`, so no cell can empty out.  Either way
    adaptation pauses once the error is below ``epsilon / 10``, a margin
    that keeps later Lloyd moves from pushing it back over.  The loop
    stops early when the error has not improved for ``STALL_ITERATIONS``
    rounds.
    """
    k = len(desired)
    whole = v is None
    if whole:
        total = FULL_SPHERE
        pos = initial_distribution(k, int(rng.integers(2**32)))
        work = desired.copy()
    else:
        total = polygon_area(v)
        center = polygon_centroid(v)
        pos = _sample_inside(v, k, rng, node_id)
        work = _scale_cap(np.full(k, total / (np.pi * k)), pos)
    cells = None
    err = np.inf
    best, best_it = np.inf, 0
    it = 0
    moved = np.inf
    settled = not whole
    for it in range(1, max_iterations + 1):
        if whole:
            try:
                cells = [c.vertices for c in build_scaled_tessellation(pos, work).polygons()]
            except DegenerateInput as exc:
                raise RegionTooSmall(f"sphere split broke down: {exc}", node_id) from exc
        else:
            scale = 1.0 + 0.5 * work
            cells = [_cell(v, pos, scale, i) for i in range(k)]
        areas = np.array([_safe_area(c) for c in cells])
        err = size_error((desired, areas / total), config.error_mode)
        if moved <= 1e-8 or it > SETTLE_ITERATIONS:
            settled = True
        if settled and err <= config.epsilon:
            break
        if err < best:
            best, best_it = err, it
        elif it - best_it > STALL_ITERATIONS:
            break
        new = pos.copy()
        for i, c in enumerate(cells):
            if areas[i] <= 0.0:
                continue
            try:
                m = polygon_moment_centroid(c)
            except DegenerateCentroid:
                continue
            new[i] = m if whole else _pull_inside(v, m, center)
        moved = float(np.max(arc_length(new, pos)))
        pos = new
        if settled and err > 0.1 * config.epsilon or np.any(areas <= 0.0):
            share = areas / total
            if whole:
                work = np.maximum(work * np.clip(1.0 - (share - desired) / desired, 0.5, 2.0), config.delta)
            else:
                ratio = desired / np.maximum(share, 1e-300)
                work = np.maximum(work * np.clip(ratio, 0.5, 2.0), config.delta)
        if not whole:
            work = _scale_cap(work, pos)
    return pos, cells, float(err), it


def _bisect_split(v, desired, node_id=None):
    """Exact-area fallback: recursive two-way axis cuts.

    The weights are cut into two runs of nearly equal total, the region is
    split in that ratio along its long axis, and each half recurses until
    at most three children remain.
    """
    k = len(desired)
    if k <= 3:
        return _axis_split(v, desired / desired.sum(), node_id)
    csum = np.cumsum(desired) / desired.sum()
    m = int(np.argmin(np.abs(csum[:-1] - 0.5))) + 1
    left, right = _axis_split(v, np.array([csum[m - 1], 1.0 - csum[m - 1]]), node_id)
    return _bisect_split(left, desired[:m], node_id) + _bisect_split(right, desired[m:], node_id)


def restricted_placement(region, weights, config: Optional[LloydConfig] = None, seed=None,
                         max_iterations=1000, node_id=None, return_cells=False):
    """Place one point per weight inside a convex region.

    A heuristic: one child goes to the region centroid; two or three split
    the region by great circles across its longest axis in proportion to
    their weights and sit at the piece centroids; four or more run a
    Lloyd loop whose cells are clipped to the region.  If that loop misses
    ``epsilon``, recursive axis cuts are tried and the better result kept.

    Parameters
    ----------
    region : SphericalPolygon or (m, 3) array
        Convex, counter-clockwise, positive area.
    weights : sequence of float
    config : LloydConfig, optional
        ``epsilon``, ``delta``, ``error_mode`` and ``seed`` are used.
    seed : int or sequence, optional
        Overrides ``config.seed`` for the initial points.
    return_cells : bool
        Return a :class:`RegionPlacement` instead of the bare positions.

    Raises
    ------
    RegionTooSmall
        Degenerate region, or no room for distinct, nonempty cells.
    """
    config = config or LloydConfig()
    v = region.vertices if isinstance(region, SphericalPolygon) else np.asarray(region, float)
    w = np.asarray(weights, dtype=float)
    if len(w) == 0:
        raise ValueError("need at least one weight")
    if np.any(~(w > 0)):
        raise ValueError("weights must be positive")
    try:
        area = polygon_area(v)
    except DegeneratePolygon as exc:
        raise RegionTooSmall(f"degenerate region: {exc}", node_id) from exc
    if not area > 1e-14:
        raise RegionTooSmall(f"region area {area:.3g} is not positive", node_id)
    if not is_convex(v, 1e-10):
        raise ValueError("restricted placement needs a convex region")
    desired = w / w.sum()
    rng = np.random.default_rng(config.seed if seed is None else seed)
    err, iters = 0.0, 0
    if len(w) == 1:
        cells = [v]
        pos = polygon_centroid(v)[None, :]
    elif len(w) <= 3:
        cells = _axis_split(v, desired, node_id)
        pos = np.array([polygon_centroid(c) for c in cells])
    else:
        try:
            pos, cells, err, iters = _lloyd_in_region(v, desired, config, rng, max_iterations, node_id)
        except RegionTooSmall:
            err = np.inf
        if not err <= config.epsilon:
            try:
                split = _bisect_split(v, desired, node_id)
            except RegionTooSmall:
                if err == np.inf:
                    raise
            else:
                split_err = size_error(
                    (desired, np.array([_safe_area(c) for c in split]) / area), config.error_mode)
                if split_err < err:
                    log.info("group %s: Lloyd error %.3g, using axis cuts", node_id, err)
                    cells, err = split, split_err
                    pos = np.array([polygon_centroid(c) for c in cells])
    out = _finish(pos, cells, node_id)
    if not return_cells:
        return out.positions
    out.error = err if len(w) > 3 else size_error(
        (desired, np.array([_safe_area(c) for c in cells]) / area), config.error_mode)
    out.iterations = iters
    return out


def _finish(pos, cells, node_id):
    polys = []
    pos = pos.copy()
    for i, c in enumerate(cells):
        if _safe_area(c) <= 1e-14:
            raise RegionTooSmall(f"child {i} ended with an empty cell", node_id)
        poly = SphericalPolygon(c)
        if not point_in_polygon(poly, pos[i]):
            pos[i] = polygon_centroid(poly)
        polys.append(poly)
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    if len(pos) > 1 and d.min() < 1e-9:
        raise RegionTooSmall("children do not get distinct positions", node_id)
    return RegionPlacement(pos, polys)


def _lune(lo, width):
    """Lune between longitudes ``lo`` and ``lo + width`` (width < pi)."""
    e0 = np.array([np.cos(lo), np.sin(lo), 0.0])
    e1 = np.array([np.cos(lo + width), np.sin(lo + width), 0.0])
    return np.array([e0, [0.0, 0.0, -1.0], e1, [0.0, 0.0, 1.0]])


def _lunes(desired, margin):
    """Split the whole sphere into lunes for two or three children."""
    widths = np.minimum(2.0 * np.pi * desired, np.pi - margin)
    starts = np.concatenate([[0.0], np.cumsum(2.0 * np.pi * desired)[:-1]])
    cells = [_lune(s, wd) for s, wd in zip(starts, widths)]
    pos = np.array([polygon_centroid(c) for c in cells])
    return pos, cells


# ---------------------------------------------------------------- layout


@dataclass(frozen=True)
class TreeLayoutConfig:
    """Settings for :func:`layout_tree`.

    ``radius_scale`` sets the sphere spacing, ``r_k = k * radius_scale``.
    ``lune_margin`` keeps whole-sphere lunes (root fanout 2 or 3) below a
    hemisphere so they stay convex.  ``restarts`` and ``restart_budget``
    control how often a whole-sphere WSCVT run is tried from a new seed,
    and how many iterations each attempt gets, before falling back to
    scaled-weight cells.
    """

    lloyd: LloydConfig = field(default_factory=LloydConfig)
    radius_scale: float = 1.0
    lune_margin: float = 1e-3
    restricted_iterations: int = 1000
    restarts: int = 2
    restart_budget: int = 1000

    def __post_init__(self):
        if not self.radius_scale > 0:
            raise ValueError("radius_scale must be positive")


@dataclass(frozen=True, eq=False)
class PlacedNode:
    id: str
    level: int
    direction: np.ndarray
    radius: float
    region: Optional[SphericalPolygon]
    parent: Optional[str]

    @property
    def position(self):
        return self.direction * self.radius


@dataclass(eq=False)
class Layout:
    """Placed tree.  ``nodes`` is in pre-order; ``radii[k]`` is level ``k``'s radius."""

    algorithm: str
    nodes: Dict[str, PlacedNode]
    radii: List[float]
    config: TreeLayoutConfig
    report: Optional[ConvergenceReport] = None
    waste: Optional[WasteStats] = None
    group_errors: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, node_id) -> PlacedNode:
        return self.nodes[node_id]

    def positions(self):
        return np.array([n.position for n in self.nodes.values()])

    def level_of(self, k) -> List[PlacedNode]:
        return [n for n in self.nodes.values() if n.level == k]


def _subdivide(tri, levels):
    """Sub-triangles of one face after ``levels`` midpoint subdivisions.

    Same order as :func:`build_icosphere`, so the result equals the faces
    of the finer icosphere that descend from ``tri``.
    """
    faces = [tuple(np.asarray(p, float) for p in tri)]
    for _ in range(levels):
        new = []
        for a, b, c in faces:
            ab, bc, ca = unit(a + b), unit(b + c), unit(c + a)
            new.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        faces = new
    return [np.array(f) for f in faces]


def _levels_needed(k):
    s = 0
    while 4**s < k:
        s += 1
    return s


def layout_tree(tree: TreeNode, algorithm: str = "wscvt", config: Optional[TreeLayoutConfig] = None) -> Layout:
    """Place every node of ``tree`` on its level sphere.

    Parameters
    ----------
    tree : TreeNode
        Root of a tree with at least one child.
    algorithm : {"wscvt", "trisphere"}
        How the root's children split the sphere.  With ``"wscvt"`` deeper
        groups use :func:`restricted_placement` inside their parent's cell;
        with ``"trisphere"`` each parent's face is subdivided and its
        children take the first sub-faces (weights are ignored).
    config : TreeLayoutConfig, optional

    Raises
    ------
    InvalidTree, CycleError, NonPositiveExplicitWeight
        Malformed input.
    RegionTooSmall
        A region cannot host its children; carries the parent's id.
    NotConverged, LevelTooLarge
        From the underlying solvers.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    config = config or TreeLayoutConfig()
    weights = subtree_weights(tree)
    height = tree.height()
    if height < 1:
        raise InvalidTree("tree needs at least one level below the root")
    radii = [k * config.radius_scale for k in range(height + 1)]
    zero = np.zeros(3)
    nodes: Dict[str, PlacedNode] = {tree.id: PlacedNode(tree.id, 0, zero, 0.0, None, None)}
    layout = Layout(algorithm, nodes, radii, config)

    tri_levels = _trisphere_levels(tree) if algorithm == "trisphere" else None
    group = 0
    for parent in list(tree.walk()):
        if parent.is_leaf:
            continue
        here = nodes[parent.id]
        level = here.level + 1
        kids = parent.children
        w = np.array([weights[c.id] for c in kids])
        if algorithm == "wscvt":
            dirs, regions = _place_wscvt(layout, here, w, group, config)
        else:
            dirs, regions = _place_trisphere(layout, here, len(kids), tri_levels)
        for c, d, r in zip(kids, dirs, regions):
            nodes[c.id] = PlacedNode(c.id, level, unit(d), radii[level], r, parent.id)
        group += 1
    # keep pre-order
    layout.nodes = {n.id: nodes[n.id] for n in tree.walk()}
    return layout


def _place_wscvt(layout, here, w, group, config):
    k = len(w)
    seed = [config.lloyd.seed, group]
    if here.region is None:
        desired = w / w.sum()
        if k == 1:
            return [np.array([0.0, 0.0, 1.0])], [None]
        if k <= 3:
            pos, cells = _lunes(desired, config.lune_margin)
            return pos, [SphericalPolygon(c) for c in cells]
        # a dominant share collapses the power-diagram iteration; skip it
        attempt = None if desired.max() > MAX_SPHERE_SHARE else _wscvt_with_restarts(w, config)
        if attempt is None:
            return _sphere_fallback(layout, here, w, group, config)
        pos, tess, report = attempt
        if here.level == 0:
            layout.report = report
        layout.group_errors[here.id] = report.final_error
        regions = tess.polygons()
        pos = pos.copy()
        for i, r in enumerate(regions):
            if not point_in_polygon(r, pos[i]):
                pos[i] = polygon_centroid(r)
        return pos, regions
    out = restricted_placement(here.region, w, config.lloyd, seed=seed,
                               max_iterations=config.restricted_iterations,
                               node_id=here.id, return_cells=True)
    layout.group_errors[here.id] = out.error
    return out.positions, out.cells


def _wscvt_with_restarts(w, config):
    """:func:`run_wscvt` from ``config.restarts`` seeds, or ``None``.

    Few, unequal cells often cycle or fold over instead of settling, so
    each attempt gets at most ``restart_budget`` iterations.
    """
    base = config.lloyd
    budget = min(base.max_iterations, config.restart_budget)
    for attempt in range(config.restarts):
        cfg = replace(base, seed=base.seed + RESTART_SEED_STEP * attempt, max_iterations=budget)
        try:
            # a diverging attempt overflows on its way out; that is handled here
            with np.errstate(over="ignore", invalid="ignore"):
                return run_wscvt(w, cfg)
        except NotConverged:
            log.debug("WSCVT attempt %d stalled", attempt)
    return None


def _sphere_fallback(layout, here, w, group, config):
    """Whole-sphere split with scaled-weight cells.

    Used when the power-diagram iteration does not settle.  Shares above
    ``MAX_SPHERE_SHARE`` cannot be met by these cells and are capped; the
    recorded group error is measured against the uncapped shares.
    """
    desired = w / w.sum()
    target = _cap_shares(desired, MAX_SPHERE_SHARE)
    rng = np.random.default_rng([config.lloyd.seed, group])
    pos, cells, err, it = _lloyd_in_region(
        None, target, config.lloyd, rng, config.lloyd.max_iterations, here.id
    )
    areas = np.array([_safe_area(c) for c in cells])
    err = size_error((desired, areas / FULL_SPHERE), config.lloyd.error_mode)
    log.info("group %s: scaled-cell fallback, error %.3g after %d iterations", here.id, err, it)
    report = ConvergenceReport(
        iterations=it, final_error=err, error_history=[err],
        converged=bool(err <= config.lloyd.epsilon), residual_wrong_edges=0, reseeds=0,
    )
    if here.level == 0:
        layout.report = report
    layout.group_errors[here.id] = err
    regions = [SphericalPolygon(c) for c in cells]
    pos = pos.copy()
    for i, r in enumerate(regions):
        if not point_in_polygon(r, pos[i]):
            pos[i] = polygon_centroid(r)
    return pos, regions


def _trisphere_levels(tree):
    """Icosphere level used on each sphere.

    Level 1 uses the smallest icosphere that holds the root's children;
    each deeper sphere subdivides enough for the largest fanout of the
    level above, so every sphere carries one uniform triangulation.
    """
    levels = {1: level_for(len(tree.children))}
    frontier = [tree]
    depth = 0
    while frontier:
        depth += 1
        nxt = [c for n in frontier for c in n.children]
        if depth >= 2:
            fan = max((len(n.children) for n in frontier), default=0)
            if fan:
                levels[depth] = levels[depth - 1] + _levels_needed(fan)
        frontier = nxt
    for k, lv in levels.items():
        if lv > MAX_LEVEL:
            raise LevelTooLarge(f"sphere {k} needs icosphere level {lv}, cap is {MAX_LEVEL}")
    return levels


def _place_trisphere(layout, here, k, levels):
    if here.region is None:
        pos, stats = trisphere_layout(k)
        layout.waste = stats
        faces = build_icosphere(stats.level).triangles[:k]
        return pos, [SphericalPolygon(f) for f in faces]
    steps = levels[here.level + 1] - levels[here.level]
    subs = _subdivide(here.region.vertices, steps)[:k]
    return [unit(f.sum(axis=0)) for f in subs], [SphericalPolygon(f) for f in subs]


def layout_violations(layout: Layout, tolerance=1e-9) -> List[str]:
    """Check a layout's structural guarantees; returns a list of problems.

    Radii strictly increase and match each node's level, the root sits at
    the origin without a region, every other node lies inside its region,
    and every region (and position) lies inside the parent's region.
    """
    problems = []
    radii = layout.radii
    if radii[0] != 0.0 or any(b <= a for a, b in zip(radii, radii[1:])):
        problems.append(f"radii not strictly increasing from 0: {radii}")
    for node in layout.nodes.values():
        if node.parent is None:
            if np.any(node.position != 0.0) or node.region is not None:
                problems.append(f"root {node.id!r} not at origin with empty region")
            continue
        r = np.linalg.norm(node.position)
        if abs(r - radii[node.level]) > tolerance * max(1.0, radii[node.level]):
            problems.append(f"{node.id!r}: |position| = {r!r}, level radius {radii[node.level]!r}")
        if node.region is not None and not point_in_polygon(node.region, node.direction, tolerance):
            problems.append(f"{node.id!r}: position outside its region")
        parent = layout.nodes[node.parent]
        if parent.region is None:
            continue
        if not point_in_polygon(parent.region, node.direction, tolerance):
            problems.append(f"{node.id!r}: position outside the parent's region")
        if node.region is not None:
            inside = point_in_polygon(parent.region, node.region.vertices, tolerance)
            if not np.all(inside):
                problems.append(f"{node.id!r}: region leaves the parent's region")
    return problems
