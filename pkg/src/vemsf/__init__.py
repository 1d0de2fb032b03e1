"""Stabilization-free serendipity virtual elements for plane elasticity."""

from .element import element_force, element_matrices, element_stiffness, select_ell
from .errors import (
    ConditioningError,
    ConfigurationError,
    ElementErrors,
    GeometryError,
    InvalidParameterError,
    MeshParseError,
    MeshValidationError,
    RankDeficiencyError,
    SingularMaterialError,
    SolverError,
    UnsupportedElementError,
    VemError,
)
from .mesh import (
    ElementGeometry,
    PolygonalMesh,
    element_geometry,
    generate_mesh,
    perturb_vertex,
    read_mesh,
    validate_mesh,
    write_mesh,
)
from .polyspace import MatrixMonomialBasis, VectorMonomialBasis, material_matrix
from .projectors import build_projectors
from .quadrature import edge_rule, sbc_polygon_rule
from .system import (
    AnalyticField,
    BoundaryValueProblem,
    Dirichlet,
    Neumann,
    PointConstraint,
    build_dof_map,
    convergence_rate,
    error_norms,
    solve_bvp,
)

__version__ = "0.1.0"
