"""The Segre-family pipeline: complex defining equation, Segre graphs, the
associated second-order ODE, and the fourth jet-derivative invariant.

For an analytic surface the Segre varieties are graphs ``w(z)`` obtained by
freezing the conjugated variables in the complex defining equation
``w = rho_c(z, zbar, wbar)``.  They are exactly the solutions of one
holomorphic ODE ``w'' = phi3(z, w, w')``; this module extracts ``phi3`` as a
jet in (z, w, xi) centered at the lifted base point (p, theta(p)) by solving
the incidence system

    w  = rho_c(z, abar, bbar)
    xi = d/dz rho_c(z, abar, bbar)

for the Segre parameters (abar, bbar) and substituting them into the second
z-derivative of rho_c.  The Jacobian of that solve is (up to normalization)
the Levi determinant, so a singular solve is reported as Levi degeneracy.

``d^4 phi3 / d xi^4`` is the classical relative point invariant of the ODE;
its vanishing says the right-hand side is cubic in the jet coordinate, which
happens exactly for spherical surfaces.  ``cross_check`` compares its value
at the lift against the hypersurface pipeline's fourth regularizing-field
derivative: the two compute the same relative invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import jets
from .hypersurface import (
    HypersurfacePatch,
    LeviDegenerateError,
    TrustExhaustedError,
    VAR_W,
    iterate_L_phi,
)
from .jets import Jet, JetContext, SingularJacobian

__all__ = [
    "DEFAULT_ODE_DEGREE",
    "ComplexDefining",
    "AssociatedOde",
    "complex_defining",
    "segre_graph",
    "associated_ode",
    "tresse_invariant",
    "cubic_check",
    "cross_check",
]

#: Truncation degree of the 3-variable ODE jet; four xi-derivatives still
#: leave trust >= 6 for series-level statements.
DEFAULT_ODE_DEGREE = 10

#: Segre parameters farther than this from the base point degrade the
#: truncated re-expansion too much to trust.
PARAMETER_RADIUS = 0.5


@dataclass(frozen=True)
class ComplexDefining:
    """w solved as a jet in (z, zbar, wbar) offsets about the base point."""

    rho_c: Jet
    point: tuple[complex, complex]

    def roundtrip_residual(self, patch: HypersurfacePatch) -> float:
        """Largest trusted coefficient of rho after substituting the solve back in."""
        return jets.eliminate(patch.rho, VAR_W, self.rho_c).max_trusted_abs()


@dataclass(frozen=True)
class AssociatedOde:
    """Right-hand side of w'' = phi3(z, w, w') as a jet in (z, w, xi).

    Centered at the lift (p, theta(p)); ``xi0`` is the slope coordinate of
    the center.
    """

    phi3: Jet
    point: tuple[complex, complex]
    xi0: complex

    def to_rows(self, trusted_only: bool = True) -> list[list[float]]:
        """Serializable [i, j, k, re, im] rows of nonzero coefficients."""
        rows = []
        for alpha, c in self.phi3.terms(trusted_only=trusted_only):
            rows.append([*map(int, alpha), c.real, c.imag])
        return rows


def complex_defining(patch: HypersurfacePatch) -> ComplexDefining:
    """Solve rho = 0 for w in terms of (z, zbar, wbar) about the base point."""
    try:
        return ComplexDefining(rho_c=patch.w_solve, point=patch.point)
    except SingularJacobian as exc:
        raise LeviDegenerateError(f"complex defining solve is singular: {exc}") from exc


def segre_graph(cd: ComplexDefining, x: tuple[complex, complex]) -> Jet:
    """Graph w(z) of the Segre variety of the point ``x``, as a univariate jet.

    Freezes the conjugated variables at conj(x); the constant term is in
    absolute w-coordinates.  Parameters outside PARAMETER_RADIUS of the base
    point are refused because the truncated re-expansion loses accuracy.
    """
    da = x[0].conjugate() - cd.point[0].conjugate()
    db = x[1].conjugate() - cd.point[1].conjugate()
    if max(abs(da), abs(db)) > PARAMETER_RADIUS:
        raise ValueError(
            f"Segre parameter {x!r} is too far from the base point for a trusted re-expansion"
        )
    ctx1 = JetContext.get(1, cd.rho_c.ctx.degree)
    args = [ctx1.variable(0), ctx1.constant(da), ctx1.constant(db)]
    graph = jets.substitute(cd.rho_c, args, allow_constant=True)
    return graph + cd.point[1]


def associated_ode(patch: HypersurfacePatch, degree: int = DEFAULT_ODE_DEGREE) -> AssociatedOde:
    """Extract the associated ODE right-hand side for an analytic patch."""
    if patch.rho.trust < 4:
        raise TrustExhaustedError(
            f"ODE extraction needs trust >= 4, have {patch.rho.trust}",
            max_order=max(patch.rho.trust - 2, 0),
        )
    rho_c = complex_defining(patch).rho_c
    rc = jets.to_degree(rho_c, degree)
    rc_z = jets.to_degree(rho_c.derive(0), degree)
    rc_zz = jets.to_degree(rho_c.derive(0).derive(0), degree)
    xi0 = rc_z.value()

    # Incidence system in (z, w, xi, abar, bbar): the Segre graph through
    # (z, w) with slope xi determines the parameters.
    c5 = JetContext.get(5, degree)
    lift = (0, 3, 4)  # (z, zbar, wbar) -> (z, abar, bbar)
    f1 = jets.inject(rc, c5, lift) - c5.variable(1)
    f2 = jets.inject(rc_z, c5, lift) - xi0 - c5.variable(2)
    try:
        a_off, b_off = jets.implicit_solve([f1, f2], unknowns=[3, 4])
    except SingularJacobian as exc:
        raise LeviDegenerateError(f"parameter solve is singular (Levi degeneracy): {exc}") from exc

    ctx3 = a_off.ctx
    phi3 = jets.substitute(rc_zz, [ctx3.variable(0), a_off, b_off])
    return AssociatedOde(phi3=phi3, point=patch.point, xi0=xi0)


def tresse_invariant(ode: AssociatedOde) -> Jet:
    """Fourth jet-coordinate derivative of the ODE right-hand side."""
    if ode.phi3.trust < 4:
        raise TrustExhaustedError(
            f"fourth xi-derivative needs trust >= 4, have {ode.phi3.trust}",
            max_order=max(ode.phi3.trust, 0),
        )
    out = ode.phi3
    for _ in range(4):
        out = out.derive(2)
    return out


def cubic_check(ode: AssociatedOde, tol: float) -> bool:
    """True iff every trusted coefficient with xi-exponent >= 4 is below tol."""
    if ode.phi3.trust < 4:
        raise TrustExhaustedError(
            f"cubic check needs trust >= 4, have {ode.phi3.trust}",
            max_order=max(ode.phi3.trust, 0),
        )
    phi3 = ode.phi3
    ctx = phi3.ctx
    end = ctx.trusted_end(phi3.trust)
    worst = 0.0
    for r in range(end):
        if ctx.exponents[r, 2] >= 4:
            worst = max(worst, float(abs(phi3.coeffs[r])))
    return worst <= tol


def cross_check(patch: HypersurfacePatch, degree: int = DEFAULT_ODE_DEGREE) -> float:
    """Residual of the cross-pipeline identity at the lifted base point.

    Compares the hypersurface pipeline's L^4 phi at p with the ODE pipeline's
    d^4 phi3 / d xi^4 at (p, theta(p)), relative to max(1, magnitudes).
    """
    lhs = iterate_L_phi(patch, 4)[4].value()
    rhs = tresse_invariant(associated_ode(patch, degree)).value()
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
