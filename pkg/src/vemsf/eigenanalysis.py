"""Element eigenvalue studies: counting spurious zero-energy modes of K_E."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .element import element_stiffness, select_ell
from .errors import InvalidParameterError, VemError
from .mesh import element_geometry, generate_mesh, perturb_vertex
from .polyspace import material_matrix
from .projectors import build_projectors

ZERO_TOL = 1e-8
RIGID_MODES = 3
DEFAULT_DELTAS = (0.0, 1e-3, 1e-2, 0.05, 0.1, 0.2)
CSV_COLUMNS = ("family", "n_or_delta", "k", "ell", "zero_count", "spurious_count", "lambda_min_nonzero", "lambda_max")


def default_material():
    return material_matrix(1.0, 0.3, "plane_stress")


@dataclass(frozen=True)
class SpectrumReport:
    family: str
    n_or_delta: float
    k: int
    ell: int
    eigenvalues: np.ndarray
    zero_count: int
    threshold: float = ZERO_TOL
    n_vertices: int | None = None
    error: str | None = None

    @property
    def spurious_count(self):
        return self.zero_count - RIGID_MODES if self.error is None else -1

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1]) if len(self.eigenvalues) else float("nan")

    @property
    def lambda_min_nonzero(self):
        nz = self.eigenvalues[self.zero_count :]
        return float(nz[0]) if len(nz) else float("nan")

    def row(self):
        return {
            "family": self.family,
            "n_or_delta": self.n_or_delta,
            "k": self.k,
            "ell": self.ell,
            "zero_count": self.zero_count,
            "spurious_count": self.spurious_count,
            "lambda_min_nonzero": self.lambda_min_nonzero,
            "lambda_max": self.lambda_max,
        }


def count_zero_eigenvalues(eigenvalues, rel_tol=ZERO_TOL):
    lam = np.sort(np.asarray(eigenvalues))
    return int(np.count_nonzero(lam < rel_tol * lam[-1]))


def element_spectrum(K, k=None, ell=None, family="", n_or_delta=float("nan"), rel_tol=ZERO_TOL, n_vertices=None):
    """Full symmetric eigen-decomposition; zero means lambda < rel_tol * lambda_max."""
    K = np.asarray(K, dtype=float)
    lam = np.linalg.eigvalsh(0.5 * (K + K.T))
    return SpectrumReport(
        family=family,
        n_or_delta=n_or_delta,
        k=k,
        ell=ell,
        eigenvalues=lam,
        zero_count=count_zero_eigenvalues(lam, rel_tol),
        threshold=rel_tol,
        n_vertices=n_vertices,
    )


def cell_stiffness(mesh, cell, k, ell, material=None):
    geom = element_geometry(mesh, cell)
    if ell is None:
        ell = select_ell(geom.n_vertices, k)
    proj = build_projectors(geom, k, ell, cell=cell)
    return element_stiffness(proj, material or default_material())


def sweep_regular(k, ell, n_range, material=None):
    reports = []
    for n in n_range:
        if not 3 <= n <= 24:
            raise InvalidParameterError(f"regular polygon sweep supports 3 <= n <= 24, got {n}")
        if k == 3 and n == 3:
            continue
        mesh = generate_mesh("regular_ngon", {"n": n})
        K = cell_stiffness(mesh, 0, k, ell, material)
        reports.append(element_spectrum(K, k, ell, "regular", n, n_vertices=n))
    return reports


def sweep_perturbed(k, ell, base_ngon, delta_list=DEFAULT_DELTAS, vertex=0, component="y", material=None):
    """Perturb one coordinate of one vertex by delta * h_E for each delta."""
    base = generate_mesh("regular_ngon", {"n": base_ngon})
    h = element_geometry(base, 0).diameter
    reports = []
    for delta in delta_list:
        try:
            mesh = perturb_vertex(base, vertex, component, delta * h)
            K = cell_stiffness(mesh, 0, k, ell, material)
            reports.append(element_spectrum(K, k, ell, "perturbed", delta, n_vertices=base_ngon))
        except VemError as exc:
            reports.append(
                SpectrumReport("perturbed", delta, k, ell, np.array([]), 0, n_vertices=base_ngon, error=str(exc))
            )
    return reports


def sweep_inserted_nodes(k, ell, max_nodes, min_nodes=4, material=None):
    """Maximum spurious count over all cells of the 3x3 grid, per central node count."""
    reports = []
    for n_nodes in range(min_nodes, max_nodes + 1):
        mesh = generate_mesh("grid_with_inserted_nodes", {"n_nodes": n_nodes})
        worst = None
        for c in range(mesh.n_cells):
            rep = element_spectrum(
                cell_stiffness(mesh, c, k, ell, material), k, ell, "inserted", n_nodes, n_vertices=len(mesh.cells[c])
            )
            if worst is None or rep.zero_count > worst.zero_count:
                worst = rep
        reports.append(worst)
    return reports


def write_spectrum_csv(reports, path):
    """Write reports to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(reports, path)
    else:
        with open(path, "w", newline="") as fh:
            _write_rows(reports, fh)


def _write_rows(reports, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in rep.row().items()})
