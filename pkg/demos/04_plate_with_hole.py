"""Plate with a circular hole under far-field tension.

A quarter plate is modelled with symmetry rollers.  The hole is approximated
by straight chords, so the geometric error limits the energy convergence
rate below the optimal value of k.
"""

from vemsf.studybench.catalog import plate_hole, plate_self_check
from vemsf.studybench.studies import format_table, run_convergence

print(f"exact field: hole traction residual {plate_self_check(plate_hole()):.1e}")
report = run_convergence("plate_hole", 2)
print(format_table(report))
print(f"energy slopes {[round(r, 2) for r in report.rates_energy]} (optimal would be 2)")
