"""Lay out a directory tree on nested spheres.

Children of the root share the first sphere in proportion to their leaf
counts; every deeper group is confined to its parent's cell, projected
outward.  Both placement algorithms run on the same tree and the layout
documents are written next to each other.
"""

import sys
import time
from pathlib import Path

from spherelayout.io import ingest_tree, write_layout
from spherelayout.tree import layout_tree, layout_violations, subtree_weights

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "examples"
out = Path(sys.argv[2] if len(sys.argv) > 2 else "demo_out")
out.mkdir(exist_ok=True)

tree = ingest_tree(root, max_depth=2)
weights = subtree_weights(tree)
print(f"{root}: {len(weights)} nodes, height {tree.height()}, {int(weights[tree.id])} leaves")
for child in tree.children:
    print(f"  {child.id:30s} weight {weights[child.id]:g}")

for algorithm in ("wscvt", "trisphere"):
    t = time.perf_counter()
    layout = layout_tree(tree, algorithm)
    dt = time.perf_counter() - t
    path = out / f"layout_{algorithm}.json"
    write_layout(layout, path, {n.id: n.label for n in tree.walk()})
    print(f"{algorithm:9s}: {dt:.2f}s, radii {layout.radii}, violations {len(layout_violations(layout))}, wrote {path}")
    if layout.group_errors:
        worst = max(layout.group_errors.items(), key=lambda kv: kv[1])
        print(f"           worst group size error {worst[1]:.2e} (under {worst[0]!r})")
