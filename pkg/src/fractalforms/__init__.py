"""Numerical analysis on the Sierpinski gasket in harmonic coordinates.

Cells and vertices of the gasket, harmonic extension and graph energy, the
harmonic embedding ``Phi``, Kusuoka measure and ``Z`` field, one-forms and
their cotangent quotients, the map into the Dirichlet-form module, line
integrals along edge paths, and intrinsic-metric estimates.
"""

from .bridge import (
    SimpleTensorField,
    adjointness_residual,
    composed_graph_energy,
    energy_report,
    h_inner,
    kusuoka_quadrature,
    pi_map,
    pi_star,
    z_seminorm,
    z_seminorm_sq,
)
from .cotangent import (
    ConstraintSet,
    Form1,
    OmegaElement,
    QuadratureMeasure,
    l2_inner,
    omega_norm,
    omega_product,
    quotient_norm,
    tangent_projection,
)
from .embedding import HarmonicChart, build_chart, cell_frame, phi_at
from .energy import base_energy, extend_to_level, graph_energy, harmonic_extend
from .errors import (
    DegenerateCellError,
    DomainError,
    FractalFormsError,
    InvariantViolation,
    ParseError,
    ResourceLimitError,
    SolverError,
    UnknownIdentifierError,
)
from .expr import Expr, parse
from .gasket import DEFAULT_MAX_LEVEL, LevelGraph, Vertex, build_level_graph
from .intrinsic import MetricEstimate, intrinsic_lower_bound, intrinsic_metric, mu_length
from .paths import EdgePath, PathIntegralResult, euclidean_length, integrate_form, refine_path
from .zfield import ZField, c_z_bound, kusuoka_table, z_field, z_matrix

__version__ = "0.1.0"
