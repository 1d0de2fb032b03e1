"""Scaled monomial bases, Voigt operators and isotropic material matrices.

Monomials of degree ``d`` are ordered by descending power of xi:
``xi^d, xi^(d-1) eta, ..., eta^d``.  Derivatives are taken with exact
coefficient maps, never numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, SingularMaterialError


@lru_cache(maxsize=None)
def monomial_exponents(degree):
    """(n, 2) array of (power of xi, power of eta), graded by total degree."""
    rows = [(d - i, i) for d in range(degree + 1) for i in range(d + 1)]
    out = np.array(rows, dtype=int).reshape(-1, 2)
    out.setflags(write=False)
    return out


def n_monomials(degree):
    return (degree + 1) * (degree + 2) // 2 if degree >= 0 else 0


@lru_cache(maxsize=None)
def _derivative_maps(degree):
    """Matrices taking monomial coefficients to coefficients of d/dxi and d/deta."""
    exps = monomial_exponents(degree)
    index = {tuple(e): i for i, e in enumerate(exps)}
    n = len(exps)
    dxi = np.zeros((n, n))
    deta = np.zeros((n, n))
    for j, (a, b) in enumerate(exps):
        if a > 0:
            dxi[index[(a - 1, b)], j] = a
        if b > 0:
            deta[index[(a, b - 1)], j] = b
    dxi.setflags(write=False)
    deta.setflags(write=False)
    return dxi, deta


def scaled_monomials(points, center, h, degree):
    """Values of all scaled monomials up to ``degree``: shape (npts, n_monomials)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    xi = (p[:, 0] - center[0]) / h
    eta = (p[:, 1] - center[1]) / h
    exps = monomial_exponents(degree)
    deg = np.arange(degree + 1)
    pxi = xi[:, None] ** deg[None, :]
    peta = eta[:, None] ** deg[None, :]
    return pxi[:, exps[:, 0]] * peta[:, exps[:, 1]]


@lru_cache(maxsize=None)
def _vector_coefficients(k):
    """Coefficient tables (n_monomials(k), N_k) for both components of the vector basis."""
    exps = monomial_exponents(k)
    index = {tuple(e): i for i, e in enumerate(exps)}
    nm = len(exps)
    cols = []

    def col(first=(), second=()):
        c0 = np.zeros(nm)
        c1 = np.zeros(nm)
        for coef, e in first:
            c0[index[e]] += coef
        for coef, e in second:
            c1[index[e]] += coef
        cols.append((c0, c1))

    col(first=[(1.0, (0, 0))])
    col(second=[(1.0, (0, 0))])
    if k >= 1:
        col(first=[(-1.0, (0, 1))], second=[(1.0, (1, 0))])  # rotation (-eta, xi)
        col(first=[(1.0, (0, 1))], second=[(1.0, (1, 0))])  # shear (eta, xi)
        col(first=[(1.0, (1, 0))])  # (xi, 0)
        col(second=[(1.0, (0, 1))])  # (0, eta)
    for d in range(2, k + 1):
        for i in range(d + 1):
            e = (d - i, i)
            col(first=[(1.0, e)])
            col(second=[(1.0, e)])
    c0 = np.column_stack([c[0] for c in cols])
    c1 = np.column_stack([c[1] for c in cols])
    c0.setflags(write=False)
    c1.setflags(write=False)
    return c0, c1


@dataclass(frozen=True)
class VectorMonomialBasis:
    """Scaled vector monomial basis of [P_k(E)]^2 bound to (x_E, h_E).

    Order: (1,0), (0,1), (-eta, xi), (eta, xi), (xi, 0), (0, eta), then for
    each degree d >= 2 and each monomial m: (m, 0), (0, m).
    """

    k: int
    center: tuple
    h: float

    def __post_init__(self):
        if self.k < 0:
            raise InvalidParameterError("polynomial order must be >= 0")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def size(self):
        return (self.k + 1) * (self.k + 2)

    def coefficients(self):
        return _vector_coefficients(self.k)

    def eval(self, points):
        """Basis matrix at points: (npts, 2, N_k), or (2, N_k) for a single point."""
        single = np.ndim(points) == 1
        v = scaled_monomials(points, self.center, self.h, self.k)
        c0, c1 = self.coefficients()
        out = np.stack([v @ c0, v @ c1], axis=1)
        return out[0] if single else out

    def strain(self, points):
        """Voigt strains (eps_11, eps_22, 2 eps_12) of every basis field: (npts, 3, N_k)."""
        single = np.ndim(points) == 1
        v = scaled_monomials(points, self.center, self.h, self.k)
        c0, c1 = self.coefficients()
        dxi, deta = _derivative_maps(self.k)
        inv_h = 1.0 / self.h
        e11 = v @ (dxi @ c0)
        e22 = v @ (deta @ c1)
        g12 = v @ (deta @ c0 + dxi @ c1)
        out = inv_h * np.stack([e11, e22, g12], axis=1)
        return out[0] if single else out


@dataclass(frozen=True)
class MatrixMonomialBasis:
    """Voigt basis of symmetric 2x2 matrix polynomials of degree ell.

    Column ``3 a + s`` is monomial ``a`` times the Voigt unit vector ``s``.
    """

    ell: int
    center: tuple
    h: float

    def __post_init__(self):
        if self.ell < 0:
            raise InvalidParameterError("strain order must be >= 0")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def n_scalar(self):
        return n_monomials(self.ell)

    @property
    def size(self):
        return 3 * self.n_scalar

    def scalar(self, points):
        return scaled_monomials(points, self.center, self.h, self.ell)

    def eval(self, points):
        single = np.ndim(points) == 1
        v = self.scalar(points)
        out = np.zeros((len(v), 3, self.size))
        for s in range(3):
            out[:, s, s::3] = v
        return out[0] if single else out

    def divergence(self, points):
        """Row-wise divergence [[d/dx, 0, d/dy], [0, d/dy, d/dx]] of each column: (npts, 2, M)."""
        single = np.ndim(points) == 1
        v = self.scalar(points)
        dxi, deta = _derivative_maps(self.ell)
        dx = (v @ dxi) / self.h
        dy = (v @ deta) / self.h
        out = np.zeros((len(v), 2, self.size))
        out[:, 0, 0::3] = dx
        out[:, 1, 1::3] = dy
        out[:, 0, 2::3] = dy
        out[:, 1, 2::3] = dx
        return out[0] if single else out


def eval_vector_basis(basis, x):
    return basis.eval(x)


def eval_matrix_basis(basis, x):
    return basis.eval(x)


def strain_of_vector_basis(basis, x):
    return basis.strain(x)


def divergence_of_matrix_basis(basis, x):
    return basis.divergence(x)


@dataclass(frozen=True)
class MaterialMatrix:
    C: np.ndarray
    mode: str
    E: float
    nu: float


def material_matrix(E, nu, mode="plane_stress"):
    """Isotropic 3x3 Voigt constitutive matrix for plane stress or plane strain."""
    mode = mode.replace("-", "_").replace(" ", "_")
    if not E > 0:
        raise InvalidParameterError(f"Young's modulus must be positive, got {E}")
    if mode == "plane_stress":
        if not -1.0 < nu <= 0.5:
            raise InvalidParameterError(f"plane stress needs -1 < nu <= 0.5, got {nu}")
        c = E / (1.0 - nu**2)
        C = c * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])
    elif mode == "plane_strain":
        if nu == 0.5:
            raise SingularMaterialError("plane strain is singular for incompressible nu = 0.5")
        if not -1.0 < nu < 0.5:
            raise InvalidParameterError(f"plane strain needs -1 < nu < 0.5, got {nu}")
        c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
        C = c * np.array([[1.0 - nu, nu, 0.0], [nu, 1.0 - nu, 0.0], [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)]])
    else:
        raise InvalidParameterError(f"mode must be plane_stress or plane_strain, got {mode!r}")
    C.setflags(write=False)
    return MaterialMatrix(C=C, mode=mode, E=float(E), nu=float(nu))
