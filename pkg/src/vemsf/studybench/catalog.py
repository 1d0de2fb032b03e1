"""Benchmark problems with closed-form solutions.

Every body force, strain and stress below is obtained by symbolic
differentiation of the displacement field, so the loads are always
consistent with the stated material.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from ..errors import InvalidParameterError
from ..mesh import generate_mesh
from ..polyspace import material_matrix
from ..system import AnalyticField, BoundaryValueProblem, Dirichlet, Neumann, PointConstraint, zero_traction

X, Y = sp.symbols("x y", real=True)


def _vectorize(exprs):
    fns = [sp.lambdify((X, Y), e, "numpy") for e in exprs]

    def call(points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([np.broadcast_to(np.asarray(fn(x, y), dtype=float), x.shape) for fn in fns])

    return call


def _poly_degree(expr):
    try:
        return int(sp.Poly(sp.expand(expr), X, Y).total_degree())
    except sp.PolynomialError:
        return None


@dataclass(frozen=True)
class SymbolicField:
    """Displacement (u, v) with its derived strain, stress and body force."""

    u: sp.Expr
    v: sp.Expr
    C: sp.Matrix

    @property
    def strain(self):
        return [sp.diff(self.u, X), sp.diff(self.v, Y), sp.diff(self.u, Y) + sp.diff(self.v, X)]

    @property
    def stress(self):
        return list(self.C * sp.Matrix(self.strain))

    @property
    def body_force(self):
        s11, s22, s12 = self.stress
        return [-(sp.diff(s11, X) + sp.diff(s12, Y)), -(sp.diff(s12, X) + sp.diff(s22, Y))]

    def analytic(self, label, loaded=True):
        """Numeric closures; ``loaded=False`` declares a self-equilibrated field (f = 0)."""
        deg_u = [_poly_degree(e) for e in (self.u, self.v)]
        degree = None if None in deg_u else max(deg_u)
        f = self.body_force if loaded else None
        fdeg = None
        if f is not None:
            deg_f = [_poly_degree(e) for e in f]
            fdeg = None if None in deg_f else max(deg_f)
            if fdeg is not None and all(sp.expand(e) == 0 for e in f):
                f = None
        return AnalyticField(
            label=label,
            displacement=_vectorize([self.u, self.v]),
            strain=_vectorize(self.strain),
            stress=_vectorize(self.stress),
            body_force=None if f is None else _vectorize(f),
            body_force_degree=fdeg,
            degree=degree,
        )


def symbolic_material(E, nu, mode="plane_stress"):
    E = sp.nsimplify(E)
    nu = sp.nsimplify(nu)
    if mode == "plane_stress":
        c = E / (1 - nu**2)
        return c * sp.Matrix([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]])
    c = E / ((1 + nu) * (1 - 2 * nu))
    return c * sp.Matrix([[1 - nu, nu, 0], [nu, 1 - nu, 0], [0, 0, (1 - 2 * nu) / 2]])


@dataclass
class Benchmark:
    """A boundary value problem family: exact field, material, domain and boundary assignment.

    ``conditions`` maps boundary group names to ``"dirichlet"``,
    ``"exact_traction"``, ``"zero_traction"``, ``"roller_x"`` (u_x = 0) or
    ``"roller_y"`` (u_y = 0).
    """

    name: str
    exact: AnalyticField
    E: float
    nu: float
    mode: str
    box: tuple
    conditions: dict
    hole: tuple | None = None
    point_constraints: tuple = ()
    match_rigid: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def material(self):
        return material_matrix(self.E, self.nu, self.mode)

    def mesh_params(self, **params):
        out = {"box": self.box, **params}
        if self.hole is not None:
            out["hole"] = self.hole
        return out

    def mesh(self, family, seed=0, **params):
        return generate_mesh(family, self.mesh_params(**params), seed=seed)

    def _condition(self, kind):
        ex = self.exact
        if kind == "dirichlet":
            return Dirichlet(ex.displacement)
        if kind == "exact_traction":
            return Neumann(ex.traction)
        if kind == "zero_traction":
            return Neumann(zero_traction)
        if kind == "roller_x":
            return Dirichlet(ex.displacement, components=(0,))
        if kind == "roller_y":
            return Dirichlet(ex.displacement, components=(1,))
        raise InvalidParameterError(f"unknown boundary condition kind {kind!r}")

    def bvp(self, mesh, k, **options):
        conds = {g: self._condition(kind) for g, kind in self.conditions.items() if g in mesh.boundary_groups()}
        points = tuple(PointConstraint(p, self.exact.displacement, comps) for p, comps in self.point_constraints)
        return BoundaryValueProblem(
            mesh,
            k,
            self.material,
            conds,
            body_force=self.exact.body_force,
            body_force_degree=self.exact.body_force_degree,
            point_constraints=points,
            rigid_reference=self.exact.displacement if self.match_rigid else None,
            **options,
        )


UNIT = (0.0, 1.0, 0.0, 1.0)
BAR = (0.0, 8.0, -0.5, 0.5)
ALL_DIRICHLET = {g: "dirichlet" for g in ("left", "right", "bottom", "top")}
CLAMPED_LEFT = {"left": "dirichlet", "right": "exact_traction", "bottom": "exact_traction", "top": "exact_traction"}


def quadratic_patch():
    E, nu = 1.0, 0.3
    u = X**2 + 3 * X * Y + 7 * Y**2 + 5 * X + 2 * Y + 8
    v = 6 * X**2 + 3 * X * Y + Y**2 + 4 * X + 9 * Y + 1
    f = SymbolicField(u, v, symbolic_material(E, nu))
    return Benchmark("quadratic_patch", f.analytic("quadratic_patch"), E, nu, "plane_stress", UNIT, ALL_DIRICHLET)


def cubic_patch():
    E, nu = 1.0, 0.3
    u = 3 * X**3 + 6 * X**2 * Y + 7 * X * Y**2 + 8 * Y**3 + X**2 + 3 * X * Y + Y**2 + 5 * X + 2 * Y + 4
    v = 4 * X**3 + 7 * X**2 * Y + 8 * X * Y**2 + 11 * Y**3 + 2 * X**2 + X * Y + 4 * Y**2 + 8 * X + 9 * Y + 11
    f = SymbolicField(u, v, symbolic_material(E, nu))
    return Benchmark("cubic_patch", f.analytic("cubic_patch"), E, nu, "plane_stress", UNIT, ALL_DIRICHLET)


def quadratic_equilibrium():
    E, nu = 1.0, 0.3
    f = SymbolicField(X * Y, X, symbolic_material(E, nu))
    return Benchmark(
        "quadratic_equilibrium", f.analytic("quadratic_equilibrium"), E, nu, "plane_stress", BAR, CLAMPED_LEFT
    )


def cubic_equilibrium(P=None):
    """Cantilever under an end shear load, clamped at x = 0 (cubic displacement).

    By default P is scaled so that the tip deflection v(L, 0) equals 1.
    """
    E, nu = 1.0, 0.3
    L, D = 8, 1
    Es, nus = sp.nsimplify(E), sp.nsimplify(nu)
    I = sp.Rational(D**3, 12)
    if P is None:
        tip = (sp.Rational(4) + 5 * nus) * D**2 * L / 4 + 2 * L**3
        Ps = 6 * Es * I / tip
    else:
        Ps = sp.nsimplify(P)
    u = -Ps * Y / (6 * Es * I) * ((6 * L - 3 * X) * X + (2 + nus) * (Y**2 - sp.Rational(D**2, 4)))
    v = Ps / (6 * Es * I) * (3 * nus * Y**2 * (L - X) + (4 + 5 * nus) * D**2 * X / 4 + (3 * L - X) * X**2)
    f = SymbolicField(sp.expand(u), sp.expand(v), symbolic_material(E, nu))
    return Benchmark(
        "cubic_equilibrium", f.analytic("cubic_equilibrium"), E, nu, "plane_stress", BAR, CLAMPED_LEFT, meta={"P": float(Ps)}
    )


def manufactured1():
    E, nu = 2.5, 0.25
    u = -X**6 / 80 + X**4 * Y**2 / 2 - sp.Rational(13, 16) * X**2 * Y**4 + sp.Rational(3, 40) * Y**6
    v = X * Y**5 / 2 - sp.Rational(5, 12) * X**3 * Y**3
    f = SymbolicField(u, v, symbolic_material(E, nu))
    return Benchmark("manufactured1", f.analytic("manufactured1"), E, nu, "plane_stress", UNIT, ALL_DIRICHLET)


def manufactured2():
    E, nu = 2.5, 0.25
    s = sp.sin(sp.pi * X) * sp.sin(sp.pi * Y)
    f = SymbolicField(X * s, Y * s, symbolic_material(E, nu))
    return Benchmark("manufactured2", f.analytic("manufactured2"), E, nu, "plane_stress", UNIT, ALL_DIRICHLET)


def beam_constants(L=8.0, D=1.0, q0=100.0):
    """(A, B, C, D, beta) of the single-mode Airy solution for a top load -q0 sin(pi x / L)."""
    beta = sp.pi / sp.nsimplify(L)
    c = sp.nsimplify(D) / 2
    A, B, Cc, Dd = sp.symbols("A B C D")
    # stress profiles with the sin/cos factors of x removed
    syy = lambda y: -(beta**2) * (A * sp.sinh(beta * y) + B * sp.cosh(beta * y)
                                  + Cc * beta * y * sp.sinh(beta * y) + Dd * beta * y * sp.cosh(beta * y))
    sxy = lambda y: -(beta**2) * (A * sp.cosh(beta * y) + B * sp.sinh(beta * y)
                                  + Cc * (beta * y * sp.cosh(beta * y) + sp.sinh(beta * y))
                                  + Dd * (beta * y * sp.sinh(beta * y) + sp.cosh(beta * y)))
    eqs = [syy(c) + sp.nsimplify(q0), syy(-c), sxy(c), sxy(-c)]
    sol = sp.solve(eqs, [A, B, Cc, Dd], dict=True)[0]
    return sol[A], sol[B], sol[Cc], sol[Dd], beta


def beam(L=8.0, D=1.0, q0=100.0, u0=0.0):
    """Simply supported beam under a sinusoidal top load; all edges carry exact tractions.

    The bottom corners are pinned (both components on the left, vertical on
    the right) to make the system nonsingular.  The rigid part of the discrete
    solution is then set to match the mean displacement and mean rotation of
    the exact field, so that pointwise corner errors do not pollute the whole
    beam.
    """
    E, nu = 2e5, 0.3
    A, B, Cc, Dd, beta = beam_constants(L, D, q0)
    Es, nus = sp.nsimplify(E), sp.nsimplify(nu)
    by = beta * Y
    u = -beta / Es * sp.cos(beta * X) * (
        A * (1 + nus) * sp.sinh(by) + B * (1 + nus) * sp.cosh(by)
        + Cc * ((1 + nus) * by * sp.sinh(by) + 2 * sp.cosh(by))
        + Dd * ((1 + nus) * by * sp.cosh(by) + 2 * sp.sinh(by))
    ) + sp.nsimplify(u0)
    v = -beta / Es * sp.sin(beta * X) * (
        A * (1 + nus) * sp.cosh(by) + B * (1 + nus) * sp.sinh(by)
        + Cc * ((1 + nus) * by * sp.cosh(by) - (1 - nus) * sp.sinh(by))
        + Dd * ((1 + nus) * by * sp.sinh(by) - (1 - nus) * sp.cosh(by))
    )
    f = SymbolicField(u, v, symbolic_material(E, nu))
    box = (0.0, float(L), -float(D) / 2, float(D) / 2)
    conds = {g: "exact_traction" for g in ("left", "right", "bottom", "top")}
    pins = (((0.0, -float(D) / 2), (0, 1)), ((float(L), -float(D) / 2), (1,)))
    return Benchmark(
        "beam",
        f.analytic("beam", loaded=False),
        E,
        nu,
        "plane_stress",
        box,
        conds,
        point_constraints=pins,
        match_rigid=True,
        meta={"L": L, "D": D, "q0": q0, "constants": [float(c) for c in (A, B, Cc, Dd, beta)]},
    )


def beam_self_check(bench=None, n=41):
    """Max relative traction residual on the top and bottom edges."""
    bench = bench or beam()
    L, D, q0 = bench.meta["L"], bench.meta["D"], bench.meta["q0"]
    x = np.linspace(0.0, L, n)
    top = np.column_stack([x, np.full(n, D / 2)])
    bot = np.column_stack([x, np.full(n, -D / 2)])
    st = bench.exact.stress(top)
    sb = bench.exact.stress(bot)
    load = -q0 * np.sin(np.pi * x / L)
    res = max(
        np.abs(st[:, 1] - load).max(),
        np.abs(sb[:, 1]).max(),
        np.abs(st[:, 2]).max(),
        np.abs(sb[:, 2]).max(),
    )
    return float(res / q0)


def kirsch_field(a=1.0, sigma0=1.0, E=2e5, nu=0.3):
    """Plane-strain displacement around a traction-free circular hole under x-tension."""
    mu = sp.nsimplify(E) / (2 * (1 + sp.nsimplify(nu)))
    kappa = 3 - 4 * sp.nsimplify(nu)
    a = sp.nsimplify(a)
    s0 = sp.nsimplify(sigma0)
    r = sp.sqrt(X**2 + Y**2)
    c, s = X / r, Y / r
    c2, s2 = c**2 - s**2, 2 * s * c
    ur = s0 * a / (8 * mu) * (r / a * (kappa - 1 + 2 * c2) + 2 * a / r * ((1 + kappa) * c2 + 1) - 2 * a**3 / r**3 * c2)
    ut = s0 * a / (8 * mu) * ((1 - kappa) * a / r - r / a - a**3 / r**3) * 2 * s2
    u = ur * c - ut * s
    v = ur * s + ut * c
    return u, v


def kirsch_stress_polar(r, theta, a=1.0, sigma0=1.0):
    r = np.asarray(r, dtype=float)
    q = (a / r) ** 2
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    srr = sigma0 / 2 * (1 - q) + sigma0 / 2 * (1 - 4 * q + 3 * q**2) * c2
    stt = sigma0 / 2 * (1 + q) - sigma0 / 2 * (1 + 3 * q**2) * c2
    srt = -sigma0 / 2 * (1 + 2 * q - 3 * q**2) * s2
    return srr, stt, srt


def plate_hole(a=1.0, L=5.0, sigma0=1.0):
    """Quarter plate with a circular hole; rollers on the symmetry lines."""
    E, nu = 2e5, 0.3
    u, v = kirsch_field(a, sigma0, E, nu)
    exact = SymbolicField(u, v, symbolic_material(E, nu, "plane_strain")).analytic("plate_hole", loaded=False)
    conds = {
        "left": "roller_x",
        "bottom": "roller_y",
        "right": "exact_traction",
        "top": "exact_traction",
        "hole": "zero_traction",
    }
    return Benchmark(
        "plate_hole",
        exact,
        E,
        nu,
        "plane_strain",
        (0.0, float(L), 0.0, float(L)),
        conds,
        hole=((0.0, 0.0), float(a)),
        meta={"a": a, "L": L, "sigma0": sigma0},
    )


def plate_self_check(bench=None, n=37):
    """Max hole traction from the coded displacement field (should vanish)."""
    bench = bench or plate_hole()
    a = bench.meta["a"]
    th = np.linspace(0.0, np.pi / 2, n)
    pts = a * np.column_stack([np.cos(th), np.sin(th)])
    normal_in = -pts / a
    s = bench.exact.stress(pts)
    t1 = s[:, 0] * normal_in[:, 0] + s[:, 2] * normal_in[:, 1]
    t2 = s[:, 2] * normal_in[:, 0] + s[:, 1] * normal_in[:, 1]
    return float(np.hypot(t1, t2).max() / bench.meta["sigma0"])


BENCHMARKS: dict[str, Callable[[], Benchmark]] = {
    "quadratic_patch": quadratic_patch,
    "cubic_patch": cubic_patch,
    "quadratic_equilibrium": quadratic_equilibrium,
    "cubic_equilibrium": cubic_equilibrium,
    "manufactured1": manufactured1,
    "manufactured2": manufactured2,
    "beam": beam,
    "plate_hole": plate_hole,
}


def benchmark_catalog():
    """Build every benchmark; returns a name -> Benchmark dict."""
    return {name: make() for name, make in BENCHMARKS.items()}


def get_benchmark(name):
    key = "beam" if name == "beam_nonconvex" else name
    if key not in BENCHMARKS:
        raise InvalidParameterError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")
    return BENCHMARKS[key]()
