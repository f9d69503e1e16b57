"""
Visibility and invisibility graphs
==================================

A series becomes a graph on its time indices. Two points see each other when
the straight segment between them passes strictly above every point in
between. The invisibility graph flips the picture: every intermediate point
must sit strictly above the segment.
"""

import numpy as np

from vgvalid import build_pair, degrees, ivg_build, vg_build

# A five-point toy series.
y = np.array([3.0, 1.0, 2.0, 0.5, 4.0])
vg, ivg = build_pair(y)
print("VG edges :", [(i + 1, j + 1) for i, j in vg.edges().tolist()])
print("IVG edges:", [(i + 1, j + 1) for i, j in ivg.edges().tolist()])

# Consecutive points always see each other, so the VG contains the path.
# The literal IVG never links neighbours.
assert all(vg.has_edge(i, i + 1) for i in range(len(y) - 1))

# Convex series are complete graphs; concave ones collapse to the path.
t = np.arange(8.0)
print("convex  VG edges:", vg_build(t ** 2).edge_count, "of", 8 * 7 // 2)
print("concave VG edges:", vg_build(-t ** 2).edge_count)

# The two IVG readings disagree once a pair has mixed intermediates.
z = [0.0, 10.0, -10.0, 0.0]
print("literal IVG has (1,4):   ", ivg_build(z, "literal").has_edge(0, 3))
print("complement IVG has (1,4):", ivg_build(z, "complement").has_edge(0, 3))

# Graphs depend only on the ordering of slopes, so affine maps leave them alone.
noise = np.random.default_rng(0).standard_normal(300)
assert build_pair(noise) == build_pair(2.5 * noise - 7.0)

# White-noise VGs stay sparse: the mean degree levels off as n grows.
for n in (100, 1000, 5000):
    _, mean = degrees(vg_build(np.random.default_rng(n).standard_normal(n)))
    print(f"white noise, n={n:5d}: mean VG degree {mean:.3f}")
