"""How much of the sphere does the icosphere baseline leave empty?

The baseline puts one node per face of a subdivided icosahedron, and the
face count jumps by 4x per level.  Node counts just above 20 * 4**i leave
most faces unused.
"""

from spherelayout.io import report_comparison
from spherelayout.trisphere import build_icosphere, waste_stats

for level in range(4):
    sphere = build_icosphere(level)
    a = sphere.areas()
    print(f"level {level}: {sphere.face_count:6d} faces, area ratio max/min {a.max() / a.min():.4f}")

print()
for n in (20, 21, 80, 81, 100, 320, 321):
    s = waste_stats(n)
    print(f"n={n:4d}: level {s.level}, {s.unused:5d} of {s.faces:5d} faces unused ({float(s.waste_percent):6.2f}%)")

print()
print(report_comparison([20, 50, 1000, 1500], run_wscvt_rows=False))
