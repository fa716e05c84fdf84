"""Weighted spherical centroidal Voronoi tessellation (WSCVT).

Lloyd iteration with per-generator weight adaptation: build the weighted
tessellation, measure each cell's share of the sphere, stop if every share
is close enough to its target, otherwise move generators to their cell
centroids and nudge the weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import CircumcenterAtOrigin, DegenerateInput, NotConverged
from .geometry import orientation, unit
from .hull import convex_hull
from .voronoi import Tessellation, build_wsvt, detect_wrong_edges, swap_wrong_edges

log = logging.getLogger(__name__)

ERROR_MODES = ("max", "average")
SWAP_POLICIES = ("each-iteration", "never")
MAX_RESEEDS = 10
MAX_HALVINGS = 12


@dataclass(frozen=True)
class LloydConfig:
    """Solver settings.

    ``literal_update`` switches :func:`adjust_weight` to the sign that grows
    the weight of an oversized cell; it exists to study that variant and does
    not converge in practice.
    """

    epsilon: float = 5e-4
    delta: float = 1e-6
    max_iterations: int = 10000
    seed: int = 0
    error_mode: str = "max"
    swap_policy: str = "each-iteration"
    literal_update: bool = False
    hull_method: str = "qhull"

    def __post_init__(self):
        mode = "average" if self.error_mode in ("avg", "mean") else self.error_mode
        object.__setattr__(self, "error_mode", mode)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.delta < 1e-2:
            raise ValueError("delta must be a small positive number")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.error_mode not in ERROR_MODES:
            raise ValueError(f"error_mode must be one of {ERROR_MODES}")
        if self.swap_policy not in SWAP_POLICIES:
            raise ValueError(f"swap_policy must be one of {SWAP_POLICIES}")


@dataclass
class GeneratorState:
    """Per-generator arrays: position, working weight, desired and actual size."""

    positions: np.ndarray
    weights: np.ndarray
    desired: np.ndarray
    actual: np.ndarray


@dataclass
class ConvergenceReport:
    iterations: int = 0
    final_error: float = float("inf")
    error_history: List[float] = field(default_factory=list)
    converged: bool = False
    residual_wrong_edges: int = 0
    reseeds: int = 0


def initial_distribution(n: int, seed=0) -> np.ndarray:
    """``n`` uniform random unit vectors, deterministic per ``seed``.

    Candidates closer than 1e-6 (chord) to an accepted point are redrawn,
    and so is the whole set while it fits in one hemisphere: the origin
    must lie inside the hull, or some Delaunay circle is larger than a
    hemisphere.  That redraw only matters for small ``n``.
    """
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    rng = np.random.default_rng(seed)
    while True:
        pts = unit(rng.standard_normal((n, 3)))
        for i in range(1, n):
            while np.min(np.linalg.norm(pts[:i] - pts[i], axis=1)) <= 1e-6:
                pts[i] = unit(rng.standard_normal(3))
        if _surrounds_origin(pts):
            return pts


def _surrounds_origin(pts) -> bool:
    from scipy.spatial import ConvexHull

    # facet equations are n . x + b <= 0 inside; the origin gives b
    return bool(np.all(ConvexHull(pts).equations[:, 3] < -1e-9))


def adjust_weight(w, d, a, delta=1e-6, literal=False):
    """Scale a weight toward its target cell size.

    The corrected update is ``w * (1 + (d - a) / d)``: an oversized cell
    (``a > d``) loses weight, a starved one gains it.  ``literal=True``
    uses ``w * (1 + (a - d) / d)`` instead.  Results are floored at
    ``delta``.  Works elementwise on arrays.
    """
    d = np.asarray(d, dtype=float)
    rel = (np.asarray(a, dtype=float) - d) / d
    factor = 1.0 + rel if literal else 1.0 - rel
    out = np.maximum(np.asarray(w, dtype=float) * factor, delta)
    return float(out) if out.ndim == 0 else out


def size_error(state, mode="max") -> float:
    """Max (or mean) of ``|actual - desired|`` over generators.

    ``state`` is a :class:`GeneratorState` or a ``(desired, actual)`` pair.
    """
    if isinstance(state, GeneratorState):
        desired, actual = state.desired, state.actual
    else:
        desired, actual = state
    diff = np.abs(np.asarray(actual, float) - np.asarray(desired, float))
    if mode == "max":
        return float(np.max(diff))
    if mode in ("average", "avg", "mean"):
        return float(np.mean(diff))
    raise ValueError(f"unknown error mode {mode!r}")


def _tessellate(pos, w, config, report):
    mesh = convex_hull(pos, method=config.hull_method)
    tess = build_wsvt(pos, w, mesh)
    if tess.overlap and config.swap_policy == "each-iteration":
        mesh, edges = swap_wrong_edges(mesh, w)
        tess = build_wsvt(pos, w, mesh)
        report.residual_wrong_edges = edges.residual_wrong
    elif config.swap_policy == "never":
        report.residual_wrong_edges = len(detect_wrong_edges(mesh, w).wrong_edges) if tess.overlap else 0
    else:
        report.residual_wrong_edges = 0
    return tess


def _blend(anchor, lam):
    (p0, w0), (p1, w1) = anchor
    return unit(p0 + lam * (p1 - p0)), w0 + lam * (w1 - w0)


def _sound(tess, actual, finite):
    """Positive cells with defined centroids, and the origin inside the hull.

    If the origin is outside the hull, some Delaunay circle is larger than
    a hemisphere and the dual cells it feeds cannot be trusted.
    """
    if np.any(actual <= 0.0) or not np.all(finite):
        return False
    p = tess.points
    t = tess.mesh.triangles
    return bool(np.all(orientation(p[t[:, 0]], p[t[:, 1]], p[t[:, 2]]) > 0.0))


def _offender(exc):
    if isinstance(exc, CircumcenterAtOrigin) and exc.vertices:
        return int(exc.vertices[0])
    if isinstance(exc, DegenerateInput) and exc.indices:
        return int(exc.indices[0])
    return None


def run_wscvt(weights, config: Optional[LloydConfig] = None):
    """Place one generator per weight so cell areas follow the weights.

    Parameters
    ----------
    weights : sequence of float
        Positive weights, at least four.  Only their ratios matter: the
        desired size of cell ``i`` is ``weights[i] / sum(weights)``.
    config : LloydConfig, optional

    Returns
    -------
    positions : (n, 3) array
        Generator positions on the unit sphere.
    tessellation : Tessellation
        The tessellation measured at those positions.
    report : ConvergenceReport

    Raises
    ------
    NotConverged
        ``max_iterations`` reached, or more than ten re-seeds were needed.
        The exception carries the best state seen.
    """
    config = config or LloydConfig()
    w_in = np.asarray(weights, dtype=float)
    n = len(w_in)
    if n < 4:
        raise ValueError(f"WSCVT needs at least 4 generators, got {n}")
    if np.any(~(w_in > 0)):
        raise ValueError("weights must be positive")
    desired = w_in / w_in.sum()
    # working weights start equal (1/n): that is the unweighted diagram,
    # which is always sound, and it does not depend on the input scale.
    # Adaptation grows the differences from there.  They are not
    # renormalised; with floored weights a renormalisation cancels the
    # common growth factor and the loop stalls.
    work = np.full(n, 1.0 / n)
    pos = initial_distribution(n, config.seed)
    reseed_rng = np.random.default_rng([config.seed, 0x5EED])
    report = ConvergenceReport()
    best = None

    it = 0
    anchor = None  # last accepted state and the step proposed from it
    anchor_sound = False
    halvings = 0
    while it < config.max_iterations:
        try:
            tess = _tessellate(pos, work, config, report)
        except (CircumcenterAtOrigin, DegenerateInput) as exc:
            if anchor_sound and halvings < MAX_HALVINGS:
                halvings += 1
                pos, work = _blend(anchor, 0.5**halvings)
                continue
            i = _offender(exc)
            report.reseeds += 1
            if i is None or report.reseeds > MAX_RESEEDS:
                raise NotConverged(f"geometric degeneracy: {exc}", *_best(best, report)) from exc
            log.debug("re-seeding generator %d after %s", i, exc)
            pos = pos.copy()
            pos[i] = unit(reseed_rng.standard_normal(3))
            continue
        it += 1
        actual = tess.area_fractions()
        err = size_error((desired, actual), config.error_mode)
        report.iterations = it
        report.error_history.append(err)
        report.final_error = err
        cents = tess.centroids()
        ok = np.all(np.isfinite(cents), axis=1)
        sound = _sound(tess, actual, ok)
        if not sound and anchor_sound and halvings < MAX_HALVINGS:
            # the step broke the tessellation: retry half as far from the last sound state
            halvings += 1
            pos, work = _blend(anchor, 0.5**halvings)
            continue
        halvings = 0
        valid = not tess.overlap
        if valid and (best is None or err < best[2]):
            best = (pos, tess, err)
        if valid and err <= config.epsilon:
            report.converged = True
            return pos, tess, report

        step_pos = pos.copy()
        step_pos[ok] = cents[ok]
        step_work = adjust_weight(work, desired, np.clip(actual, 0.0, None), config.delta, config.literal_update)
        anchor = ((pos, work), (step_pos, step_work))
        anchor_sound = sound
        pos, work = step_pos, step_work

    best_err = best[2] if best is not None else report.final_error
    raise NotConverged(
        f"no convergence after {config.max_iterations} iterations (best error {best_err:.3g})",
        *_best(best, report),
    )


def _best(best, report):
    if best is None:
        return None, None, report
    return best[0], best[1], report
