"""Single table of numerical tolerances used across the package."""

#: chord length below which two points on the sphere are the same point
COINCIDENT = 1e-12
#: |a . (b x c)| below which a triangle is treated as flat
ORIENTATION = 1e-12
#: determinant / norm floor for the small linear solves
SOLVE = 1e-9
#: chord below which two generators are duplicates (hull input)
DUPLICATE = 1e-10
#: signed-volume band treated as "on the plane" by the hull
COPLANAR = 1e-12
#: norm below which a weighted sum cannot be normalised to a direction
CENTROID = 1e-12
#: margin used by the local regularity test on hull edges
REGULARITY = 1e-12
