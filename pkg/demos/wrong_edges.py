"""Wrong edges under a dominant weight, and what flipping can repair.

With equal weights the hull triangulation is exactly the dual of the
Voronoi cells.  Raise one weight far above the others and some edges fail
the local power test: the dual cells fold over each other.  Flipping
repairs part of them; the rest stay and are reported.
"""

import numpy as np

from spherelayout.hull import convex_hull
from spherelayout.lloyd import initial_distribution
from spherelayout.voronoi import build_wsvt, detect_wrong_edges, swap_wrong_edges

pts = initial_distribution(10, 3)
mesh = convex_hull(pts)

for heavy in (0.01, 0.1, 0.5, 1.0, 10.0):
    w = np.full(10, 0.01)
    w[0] = heavy
    wrong = detect_wrong_edges(mesh, w).wrong_edges
    fixed, report = swap_wrong_edges(mesh, w)
    tess = build_wsvt(pts, w, fixed)
    print(
        f"heavy weight {heavy:5.2f}: {len(wrong):2d} wrong edges, {report.swaps_performed:2d} flips, "
        f"{report.residual_wrong:2d} left, cells overlap: {tess.overlap}, euler ok: {fixed.euler_ok()}"
    )
