"""Counting zero-energy modes of single elements.

Without a stabilization term the element stiffness is built only from the
projected strain.  If the strain space (degree ell) is too small for the
number of element DOFs, extra zero eigenvalues appear beyond the three rigid
body motions.  For regular polygons with k = 2 the first spurious mode shows
up at N = 2 ell + 2 vertices.
"""

from vemsf.eigenanalysis import sweep_perturbed, sweep_regular

for ell in (3, 4, 5):
    reps = sweep_regular(2, ell, range(3, 17))
    row = " ".join(f"{r.spurious_count:2d}" for r in reps)
    print(f"k=2 ell={ell}  n=3..16 spurious: {row}")

# Moving a single vertex of the octagon breaks its symmetry.  For k = 3 and
# ell = 4 this removes the spurious modes once the move is large enough.
print()
for rep in sweep_perturbed(3, 4, 8):
    print(f"octagon, vertex 0 moved by {rep.n_or_delta:<6g} h: {rep.spurious_count} spurious")
