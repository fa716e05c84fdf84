"""Weighted spherical Voronoi layouts for trees.

The package builds weighted spherical Voronoi tessellations from a convex
hull, relaxes them with a weighted Lloyd iteration so cell areas follow
given weights, compares the result against the icosphere (TriSphere)
baseline, and lays whole trees out on concentric spheres.
"""

from .errors import *  # noqa: F401,F403
from .geometry import (
    SphericalPolygon,
    arc_length,
    clip_polygon,
    point_in_polygon,
    polygon_area,
    polygon_centroid,
    polygon_moment_centroid,
    spherical_excess,
    triangle_area,
    triangle_centroid,
    weighted_circumcenter,
    weighted_distance,
)
from .hull import HullMesh, convex_hull, edge_neighbors
from .io import export_mesh, ingest_tree, read_layout, report_comparison, write_layout
from .lloyd import ConvergenceReport, LloydConfig, adjust_weight, initial_distribution, run_wscvt, size_error
from .tree import Layout, TreeLayoutConfig, TreeNode, layout_tree, restricted_placement, subtree_weights
from .trisphere import build_icosphere, trisphere_layout, waste_stats
from .voronoi import Tessellation, build_wsvt, detect_wrong_edges, flip_edge, swap_wrong_edges

__version__ = "0.1.0"
