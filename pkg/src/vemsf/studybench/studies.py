"""Patch tests, refinement studies, eigenvalue sweeps and report output."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from .. import eigenanalysis
from ..errors import InvalidParameterError, VemError
from ..system import convergence_rate, error_norms, solve_bvp
from .catalog import beam_self_check, get_benchmark, plate_self_check

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("level", "n_elems", "n_dofs", "linf", "l2", "energy", "rate_l2", "rate_energy")
PATCH_FAMILIES = ("uniform", "voronoi_random", "voronoi_lloyd", "nonconvex_split")
EQUILIBRIUM_FAMILIES = ("uniform", "voronoi_random", "voronoi_lloyd")
STUDIES = ("manufactured1", "manufactured2", "beam", "beam_nonconvex", "plate_hole")
LLOYD_ITERATIONS = 5
# edges shorter than this fraction of the mean cell size are collapsed on box domains
COLLAPSE_TOL = 0.1

# element / seed counts per level
LADDERS = {
    "manufactured1": (64, 256, 1024, 4096),
    "manufactured2": (64, 256, 1024, 4096),
    "beam": (150, 400, 1000, 3500),
    "beam_nonconvex": (2, 4, 8, 16),  # rows of the split-rectangle mesh
    "plate_hole": (250, 1500, 6000),
}


@dataclass
class LevelRecord:
    level: int | str
    n_elems: int
    n_dofs: int
    linf: float
    l2: float
    energy: float
    params: dict = field(default_factory=dict)

    @property
    def h(self):
        return 1.0 / math.sqrt(self.n_dofs)


@dataclass
class StudyReport:
    name: str
    k: int
    family: str
    levels: list = field(default_factory=list)
    rates_l2: list = field(default_factory=list)
    rates_energy: list = field(default_factory=list)
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)

    def compute_rates(self):
        if len(self.levels) >= 2:
            dofs = [r.n_dofs for r in self.levels]
            self.rates_l2 = convergence_rate([r.l2 for r in self.levels], dofs)
            self.rates_energy = convergence_rate([r.energy for r in self.levels], dofs)
        return self

    def max_error(self):
        return max((max(r.linf, r.l2, r.energy) for r in self.levels), default=0.0)


def _patch_mesh(bench, family, k, equilibrium, seed):
    extra = {}
    if family.startswith("voronoi"):
        extra["collapse_tol"] = COLLAPSE_TOL
        if k == 3:
            extra["min_vertices"] = 4
    if family == "uniform":
        params = {"nx": 8, "ny": 2} if equilibrium else {"nx": 4, "ny": 4}
    elif family == "nonconvex_split":
        params = {"nx": 8, "ny": 1} if equilibrium else {"nx": 4, "ny": 2}
    elif family == "voronoi_random":
        params = {"n_seeds": 16}
    elif family == "voronoi_lloyd":
        params = {"n_seeds": 16, "iterations": 3}
    else:
        raise InvalidParameterError(f"unknown patch-test mesh family {family!r}")
    return bench.mesh(family, seed=seed, **params, **extra)


def run_patch_tests(k, families=None, equilibrium=False, seed=0):
    """16-element patch tests; one level per mesh family."""
    if k not in (2, 3):
        raise InvalidParameterError(f"patch tests are defined for k = 2 or 3, got {k}")
    if equilibrium:
        name = "quadratic_equilibrium" if k == 2 else "cubic_equilibrium"
        families = families or EQUILIBRIUM_FAMILIES
    else:
        name = "quadratic_patch" if k == 2 else "cubic_patch"
        families = families or PATCH_FAMILIES
    bench = get_benchmark(name)
    report = StudyReport(name, k, ",".join(families))
    t0 = time.perf_counter()
    for family in families:
        try:
            mesh = _patch_mesh(bench, family, k, equilibrium, seed)
            sol = solve_bvp(bench.bvp(mesh, k))
        except VemError as exc:
            raise type(exc)(f"{family}: {exc}") from exc
        e = error_norms(sol, bench.exact, bench.material)
        report.levels.append(LevelRecord(family, mesh.n_cells, sol.dofmap.n_dofs, e.linf, e.l2, e.energy))
    report.wall_time = time.perf_counter() - t0
    return report


def _convergence_mesh(bench, study, count, k, seed):
    if study == "beam_nonconvex":
        return bench.mesh("nonconvex_split", nx=8 * count, ny=count), {"nx": 8 * count, "ny": count}
    params = {"n_seeds": count, "iterations": LLOYD_ITERATIONS}
    if k == 3:
        params["min_vertices"] = 4
    if bench.hole is None:
        params["collapse_tol"] = COLLAPSE_TOL
    return bench.mesh("voronoi_lloyd", seed=seed, **params), params


def run_convergence(study, k, levels=None, seed=0, ladder=None):
    """Refinement study on the named benchmark; returns errors and rates per level."""
    if study not in STUDIES:
        raise InvalidParameterError(f"unknown study {study!r}; choose from {STUDIES}")
    if k not in (2, 3):
        raise InvalidParameterError(f"convergence studies are defined for k = 2 or 3, got {k}")
    ladder = tuple(ladder or LADDERS[study])
    levels = len(ladder) if levels is None else levels
    if levels < 3 or levels > len(ladder):
        raise InvalidParameterError(f"levels must be in 3..{len(ladder)} for {study}, got {levels}")
    bench = get_benchmark(study)
    if study.startswith("beam"):
        res = beam_self_check(bench)
        if res >= 1e-8:
            raise VemError(f"beam exact solution fails its traction self-check ({res:.2e})")
    if study == "plate_hole":
        res = plate_self_check(bench)
        if res >= 1e-10:
            raise VemError(f"plate exact solution fails its hole traction self-check ({res:.2e})")
    family = "nonconvex_split" if study == "beam_nonconvex" else "voronoi_lloyd"
    report = StudyReport(study, k, family, meta={"seed": seed, "ladder": ladder[:levels]})
    t0 = time.perf_counter()
    for i, count in enumerate(ladder[:levels]):
        mesh, params = _convergence_mesh(bench, study, count, k, seed)
        sol = solve_bvp(bench.bvp(mesh, k))
        e = error_norms(sol, bench.exact, bench.material)
        log.info("%s k=%d level %d: %d cells, %d dofs, L2 %.3e, energy %.3e", study, k, i, mesh.n_cells, sol.dofmap.n_dofs, e.l2, e.energy)
        report.levels.append(LevelRecord(i, mesh.n_cells, sol.dofmap.n_dofs, e.linf, e.l2, e.energy, params))
    report.wall_time = time.perf_counter() - t0
    return report.compute_rates()


def run_eigen_studies(config, out_dir=None):
    """Run the sweeps listed in ``config`` and write one CSV per sweep.

    ``config`` is a list of dicts with keys ``family`` (regular, perturbed
    or inserted), ``k``, ``ell`` and optionally ``nmax``, ``base_ngon``,
    ``deltas``.  Returns ``{name: reports}``; files go to ``out_dir`` if given.
    """
    results = {}
    for entry in config:
        fam = entry["family"]
        k, ell = int(entry["k"]), int(entry["ell"])
        if fam == "regular":
            reps = eigenanalysis.sweep_regular(k, ell, range(3, int(entry.get("nmax", 16)) + 1))
        elif fam == "perturbed":
            reps = eigenanalysis.sweep_perturbed(
                k, ell, int(entry.get("base_ngon", 8)), tuple(entry.get("deltas", eigenanalysis.DEFAULT_DELTAS))
            )
        elif fam == "inserted":
            reps = eigenanalysis.sweep_inserted_nodes(k, ell, int(entry.get("nmax", 16)))
        else:
            raise InvalidParameterError(f"unknown eigen study family {fam!r}")
        name = f"eigen_{fam}_k{k}_l{ell}"
        results[name] = reps
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            eigenanalysis.write_spectrum_csv(reps, Path(out_dir) / f"{name}.csv")
    return results


def _fmt(value):
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def report_rows(report):
    """Rows in column order; rate columns are filled from the second level on."""
    rows = []
    for i, rec in enumerate(report.levels):
        r2 = report.rates_l2[i - 1] if i > 0 and len(report.rates_l2) >= i else ""
        re = report.rates_energy[i - 1] if i > 0 and len(report.rates_energy) >= i else ""
        rows.append([rec.level, rec.n_elems, rec.n_dofs, rec.linf, rec.l2, rec.energy, r2, re])
    return rows


def emit_report(report, path, format="csv"):
    """Write ``report`` as CSV (17 significant digits) or as an aligned text table."""
    rows = [[_fmt(v) for v in row] for row in report_rows(report)]
    path = Path(path)
    if format == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            writer.writerows(rows)
    elif format == "table":
        path.write_text(format_table(report))
    else:
        raise InvalidParameterError(f"format must be csv or table, got {format!r}")
    return path


def format_table(report):
    head = f"{report.name}  k={report.k}  family={report.family}\n"
    cols = REPORT_COLUMNS
    body = []
    for row in report_rows(report):
        body.append([f"{v:.3e}" if isinstance(v, float) and cols[j] in ("linf", "l2", "energy") else
                     (f"{v:.2f}" if isinstance(v, float) else str(v)) for j, v in enumerate(row)])
    widths = [max(len(c), *(len(r[j]) for r in body)) if body else len(c) for j, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in body]
    return head + "\n".join(lines) + "\n"
