"""Command line entry point: ``vemsf eigen|patch|converge|mesh``."""

from __future__ import annotations

import argparse
import logging
import sys

from .. import eigenanalysis
from ..errors import VemError
from ..mesh import FAMILIES, generate_mesh, write_mesh
from .studies import STUDIES, emit_report, format_table, run_convergence, run_eigen_studies, run_patch_tests


def _parser():
    p = argparse.ArgumentParser(prog="vemsf", description="Serendipity VEM elasticity studies")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eigen", help="element eigenvalue sweeps")
    e.add_argument("--k", type=int, choices=(2, 3), required=True)
    e.add_argument("--ell", type=int, required=True)
    e.add_argument("--family", choices=("regular", "perturbed", "inserted"), required=True)
    e.add_argument("--nmax", type=int, default=16, help="largest polygon / node count")
    e.add_argument("--base-ngon", type=int, default=8, help="polygon perturbed in the perturbed sweep")
    e.add_argument("--out", help="CSV output path (default: stdout)")

    pt = sub.add_parser("patch", help="16-element patch tests")
    pt.add_argument("--k", type=int, choices=(2, 3), required=True)
    pt.add_argument("--equilibrium", action="store_true", help="bar with traction boundaries")
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--out", help="CSV output path (default: table on stdout)")

    c = sub.add_parser("converge", help="refinement study")
    c.add_argument("--study", choices=STUDIES, required=True)
    c.add_argument("--k", type=int, choices=(2, 3), required=True)
    c.add_argument("--levels", type=int, default=3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", help="CSV output path (default: table on stdout)")

    m = sub.add_parser("mesh", help="generate and write a mesh")
    m.add_argument("--family", choices=FAMILIES, required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--nx", type=int, default=4)
    m.add_argument("--ny", type=int, default=4)
    m.add_argument("--n-seeds", type=int, default=16)
    m.add_argument("--iterations", type=int, default=3)
    m.add_argument("--n", type=int, default=6, help="regular polygon vertex count")
    m.add_argument("--n-nodes", type=int, default=4, help="central cell vertex count")
    m.add_argument("--seed", type=int, default=0)
    return p


def _mesh_params(args):
    fam = args.family
    if fam in ("uniform", "nonconvex_split"):
        return {"nx": args.nx, "ny": args.ny}
    if fam == "voronoi_random":
        return {"n_seeds": args.n_seeds}
    if fam == "voronoi_lloyd":
        return {"n_seeds": args.n_seeds, "iterations": args.iterations}
    if fam == "regular_ngon":
        return {"n": args.n}
    return {"n_nodes": args.n_nodes}


def _write(report, out):
    if out:
        emit_report(report, out, "csv")
    else:
        sys.stdout.write(format_table(report))


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "eigen":
            cfg = {"family": args.family, "k": args.k, "ell": args.ell, "nmax": args.nmax, "base_ngon": args.base_ngon}
            reps = next(iter(run_eigen_studies([cfg]).values()))
            eigenanalysis.write_spectrum_csv(reps, args.out or sys.stdout)
        elif args.command == "patch":
            _write(run_patch_tests(args.k, equilibrium=args.equilibrium, seed=args.seed), args.out)
        elif args.command == "converge":
            _write(run_convergence(args.study, args.k, args.levels, seed=args.seed), args.out)
        elif args.command == "mesh":
            write_mesh(generate_mesh(args.family, _mesh_params(args), seed=args.seed), args.out)
    except VemError as exc:
        print(f"vemsf: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
