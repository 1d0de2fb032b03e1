"""Strain-order selection and element stiffness / load assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidParameterError
from .projectors import DofLayout, ProjectorSet, build_projectors, lagrange_basis
from .quadrature import edge_rule, sbc_polygon_rule

SUFFICIENT_BOUND = "sufficient_bound"


def select_ell(n_vertices, k, policy=SUFFICIENT_BOUND):
    """Strain order for an element with ``n_vertices`` vertices.

    ``policy`` is either ``"sufficient_bound"`` (smallest ell with
    N_E <= 2 ell - 2k + 5 and ell >= k - 1) or an integer used as is.
    """
    if policy == SUFFICIENT_BOUND:
        if n_vertices < 3:
            raise InvalidParameterError(f"an element needs at least 3 vertices, got {n_vertices}")
        ell = math.ceil((n_vertices + 2 * k - 5) / 2)
        return max(ell, k - 1, 0)
    if isinstance(policy, (int, np.integer)) and not isinstance(policy, bool) and policy >= 0:
        return int(policy)
    raise InvalidParameterError(f"unknown ell policy {policy!r}")


@dataclass
class ElementMatrices:
    K: np.ndarray
    b: np.ndarray
    layout: DofLayout
    ell: int
    projectors: ProjectorSet


def element_stiffness(projectors, material):
    """K_E = Pi^T (int N^pT C N^p) Pi, with the middle factor kron(scalar Gram, C)."""
    C = material.C if hasattr(material, "C") else np.asarray(material)
    middle = np.kron(projectors.strain_gram, C)
    K = projectors.Pi.T @ middle @ projectors.Pi
    return 0.5 * (K + K.T)


def element_force(
    projectors,
    body_force=None,
    tractions=None,
    boundary_edges=None,
    body_force_degree=None,
    load_degree=None,
):
    """Element load vector.

    ``body_force(points) -> (n, 2)`` enters through its L2 projection onto
    vector polynomials of degree ``load_degree`` (default k).
    ``tractions`` maps local edge index to ``t0(points, normal) -> (n, 2)``;
    every such edge must be listed in ``boundary_edges`` when that is given.
    ``body_force_degree`` is the polynomial degree of f, or None for a
    non-polynomial load (quadrature then adds k + 2).
    """
    layout = projectors.layout
    geom = layout.geometry
    k = layout.k
    S = layout.n_sites
    b = np.zeros(2 * S)
    if body_force is not None:
        q = load_degree if load_degree is not None else k
        if not 0 <= q <= k:
            raise InvalidParameterError(f"load projection degree must be in 0..{k}, got {q}")
        n_sub = (q + 1) * (q + 2)
        extra = body_force_degree if body_force_degree is not None else k + 2
        rule = sbc_polygon_rule(geom, q + extra)
        N = projectors.vbasis.eval(rule.points)[:, :, :n_sub]
        if q == k:
            P = projectors.Pi0_tilde
        else:
            full = projectors.vbasis.eval(sbc_polygon_rule(geom, 2 * k).points)
            w = sbc_polygon_rule(geom, 2 * k).weights
            G = np.einsum("q,qca,qcb->ab", w, full, full)
            P = np.linalg.solve(G[:n_sub, :n_sub], G[:n_sub, :] @ projectors.Pi_S)
        f = np.asarray(body_force(rule.points), dtype=float).reshape(-1, 2)
        # int (N P)^T f
        b += P.T @ np.einsum("q,qca,qc->a", rule.weights, N, f)
    if tractions:
        allowed = None if boundary_edges is None else set(boundary_edges)
        for edge, t0 in tractions.items():
            if allowed is not None and edge not in allowed:
                raise ConfigurationError(f"traction assigned to interior edge {edge}")
            p0, p1 = geom.edge(edge)
            rule = edge_rule(p0, p1, 2 * k + 2)
            L = lagrange_basis(layout.params, rule.params)
            t = np.asarray(t0(rule.points, geom.normals[edge]), dtype=float).reshape(-1, 2)
            sites = layout.edge_sites[edge]
            b[sites] += np.einsum("q,qi,q->i", rule.weights, L, t[:, 0])
            b[sites + S] += np.einsum("q,qi,q->i", rule.weights, L, t[:, 1])
    return b


def element_matrices(geom, k, material, ell_policy=SUFFICIENT_BOUND, cell=None, **load):
    ell = select_ell(geom.n_vertices, k, ell_policy)
    proj = build_projectors(geom, k, ell, cell=cell)
    K = element_stiffness(proj, material)
    b = element_force(proj, **load)
    return ElementMatrices(K=K, b=b, layout=proj.layout, ell=ell, projectors=proj)
