"""crsphere: sphericity of strictly pseudoconvex hypersurfaces in C^2.

Decides whether a real hypersurface M = {rho = 0} in C^2 is locally
CR-equivalent to the sphere near a point, using exact truncated-power-series
arithmetic and two independent pipelines that cross-validate each other: the
regularizing-field derivatives of the second-jet invariant on one side, and
the fourth jet-derivative of the associated second-order ODE on the other.
"""

from .expr import ExprAst, ParseError, check_real, evaluate, expand_at, parse
from .hypersurface import (
    DegenerateGradientError,
    GeometryError,
    HypersurfacePatch,
    LeviDegenerateError,
    NotOnSurfaceError,
    NotRealError,
    SamplingError,
    TangentField01,
    TrustExhaustedError,
    apply_field,
    build_patch,
    iterate_L_phi,
    levi_form,
    phi,
    phi_matrix,
    regularizing_field,
    restrict_to_surface,
    sample_points,
    tangent_01_field,
    theta,
)
from .jets import (
    ContextMismatch,
    Jet,
    JetContext,
    JetError,
    NotCentered,
    SingularJacobian,
    SingularNormalization,
    UntrustedRead,
    implicit_solve,
    read_derivative,
)
from .segre_ode import (
    AssociatedOde,
    ComplexDefining,
    associated_ode,
    complex_defining,
    cross_check,
    cubic_check,
    segre_graph,
    tresse_invariant,
)
from .sphericity import (
    ConditionReport,
    CubicCoefficients,
    SphericityReport,
    VerdictConfig,
    check_conditions,
    cr_defect,
    cubic_decompose,
    curvature_proxy,
    sphericity_verdict,
)

__version__ = "0.1.0"
