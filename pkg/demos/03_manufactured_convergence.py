"""Refinement study with a smooth manufactured solution.

The displacement x sin(pi x) sin(pi y), y sin(pi x) sin(pi y) is solved on
Lloyd-relaxed Voronoi meshes of increasing size.  The slopes against
1/sqrt(N_dof) approach k + 1 in L2 and k in the energy norm.
"""

from vemsf.studybench.studies import format_table, run_convergence

for k in (2, 3):
    report = run_convergence("manufactured2", k, levels=3)
    print(format_table(report))
