"""Sphericity criterion: condition reports, cubic decomposition, verdicts.

The criterion evaluated here: a strictly pseudoconvex surface is spherical
near a point exactly when the fourth regularizing-field derivative of the
second-jet invariant vanishes there.  "Vanishes" is certified two ways at
once: (a) the trusted series coefficients of ``L^4 phi`` restricted to the
surface vanish through the surviving trust order, and (b) the pointwise value
vanishes at additional sampled points.  Finite-jet inputs only support (a);
when the surviving trust is too low to certify the series statement, the
verdict is honestly ``inconclusive``.

The cubic decomposition splits the invariant as
``phi = a0 + a1*theta + a2*theta^2 + a3*theta^3`` via the cascade
``a3 = L^3 phi / 6``, ``a2 = (L^2 phi - 6 a3 theta)/2``,
``a1 = L phi - 3 a3 theta^2 - 2 a2 theta``, ``a0 = phi - ...``; the
reconstruction is exact by construction, and the diagnostic content is
whether the coefficients are CR (annihilated by the tangent (0,1) field on
the surface), which ``cr_defect`` quantifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import ExprAst
from .hypersurface import (
    GeometryError,
    HypersurfacePatch,
    TrustExhaustedError,
    apply_field,
    build_patch,
    iterate_L_phi,
    restrict_to_surface,
    sample_points,
    tangent_01_field,
    theta,
)
from .jets import Jet

__all__ = [
    "CERT_TRUST",
    "QuantityReport",
    "ConditionReport",
    "CubicCoefficients",
    "PointResult",
    "SphericityReport",
    "VerdictConfig",
    "check_conditions",
    "cubic_decompose",
    "cr_defect",
    "curvature_proxy",
    "sphericity_verdict",
]

#: Minimal surviving trust of L^4 phi required to certify series-level
#: vanishing (not just a pointwise zero).
CERT_TRUST = 4

QUANTITY_NAMES = ("theta", "phi", "L_phi", "L2_phi", "L3_phi", "L4_phi")


@dataclass(frozen=True)
class QuantityReport:
    """One scalar invariant at one point."""

    name: str
    value: complex  # value at the base point
    max_abs: float  # largest trusted ambient coefficient magnitude
    max_abs_on_surface: float  # same, after restriction to the surface
    trust: int


@dataclass(frozen=True)
class ConditionReport:
    """All six condition quantities at one point, plus Levi data and tolerances."""

    point: tuple[complex, complex]
    levi: float
    tol: float
    quantities: dict[str, QuantityReport]


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of the cubic split of phi in powers of theta."""

    a0: Jet
    a1: Jet
    a2: Jet
    a3: Jet

    def as_tuple(self) -> tuple[Jet, Jet, Jet, Jet]:
        return (self.a0, self.a1, self.a2, self.a3)


@dataclass(frozen=True)
class VerdictConfig:
    degree: int = 12
    tol_abs: float = 1e-9
    tol_rel: float = 1e-9
    samples: int = 5
    radius: float = 0.05
    seed: int = 0x5EED


@dataclass(frozen=True)
class PointResult:
    """Per-point outcome: a report with a status, or an error string."""

    point: tuple[complex, complex]
    status: str  # "certified" | "witness" | "undecided" | "error"
    report: ConditionReport | None = None
    error: str | None = None


@dataclass(frozen=True)
class SphericityReport:
    verdict: str  # "spherical" | "not_spherical" | "inconclusive"
    base: PointResult
    samples: list[PointResult] = field(default_factory=list)
    config: VerdictConfig = field(default_factory=VerdictConfig)
    finite_jet: bool = False


def check_conditions(patch: HypersurfacePatch) -> ConditionReport:
    """Evaluate theta, phi and the four field derivatives of phi at the patch point."""
    seq = iterate_L_phi(patch, 4)
    jets_by_name = dict(zip(QUANTITY_NAMES, [theta(patch), *seq]))
    quantities = {}
    for name, j in jets_by_name.items():
        restricted = restrict_to_surface(patch, j)
        quantities[name] = QuantityReport(
            name=name,
            value=j.value(),
            max_abs=j.max_trusted_abs(),
            max_abs_on_surface=restricted.max_trusted_abs(),
            trust=j.trust,
        )
    return ConditionReport(
        point=patch.original_point,
        levi=patch.levi,
        tol=patch.vanish_tol,
        quantities=quantities,
    )


def cubic_decompose(patch: HypersurfacePatch) -> CubicCoefficients:
    """Split phi into cubic coefficients in theta; needs trust >= 5.

    Computable for any strictly pseudoconvex patch; no sphericity assumption.
    """
    if patch.rho.trust < 5:
        raise TrustExhaustedError(
            f"cubic decomposition needs trust >= 5, have {patch.rho.trust}",
            max_order=max(patch.rho.trust - 2, 0),
        )
    seq = iterate_L_phi(patch, 3)
    th = theta(patch)
    a3 = seq[3] * (1.0 / 6.0)
    a2 = (seq[2] - 6.0 * a3 * th) * 0.5
    a1 = seq[1] - 3.0 * (a3 * th * th) - 2.0 * (a2 * th)
    a0 = seq[0] - ((a3 * th + a2) * th + a1) * th
    return CubicCoefficients(a0=a0, a1=a1, a2=a2, a3=a3)


def cr_defect(patch: HypersurfacePatch, coeffs: CubicCoefficients) -> tuple[float, float, float, float]:
    """How far the cubic coefficients are from being CR on the surface.

    Returns, for each coefficient, the largest trusted coefficient magnitude
    of its tangent-field derivative restricted to the surface; all four are
    zero exactly when the coefficients are CR functions there.
    """
    if patch.rho.trust < 6:
        raise TrustExhaustedError(
            f"CR defects need trust >= 6, have {patch.rho.trust}",
            max_order=max(patch.rho.trust - 2, 0),
        )
    l0 = tangent_01_field(patch)
    out = []
    for a in coeffs.as_tuple():
        out.append(restrict_to_surface(patch, apply_field(l0, a)).max_trusted_abs())
    return tuple(out)


def curvature_proxy(patch: HypersurfacePatch) -> complex:
    """Value of L^4 phi at the base point: a relative invariant whose vanishing
    locus matches the classical curvature invariant's."""
    return iterate_L_phi(patch, 4)[4].value()


def _classify(report: ConditionReport) -> str:
    q = report.quantities["L4_phi"]
    if q.max_abs_on_surface > report.tol:
        return "witness"
    if q.trust >= CERT_TRUST:
        return "certified"
    return "undecided"


def sphericity_verdict(
    source: ExprAst | Jet | str,
    point: tuple[complex, complex],
    config: VerdictConfig | None = None,
) -> SphericityReport:
    """Aggregate sphericity verdict at ``point`` and sampled nearby points.

    ``spherical`` requires series-level vanishing certified at the base point
    and at every sampled point; ``not_spherical`` requires a trusted nonzero
    witness somewhere; anything else is ``inconclusive``.  Base-point
    geometry failures propagate as exceptions; sampled-point failures are
    recorded per point and block certification but not a witness.
    """
    cfg = config or VerdictConfig()
    patch = build_patch(source, point, cfg.degree, cfg.tol_abs, cfg.tol_rel)
    base_report = check_conditions(patch)
    base = PointResult(point=patch.original_point, status=_classify(base_report), report=base_report)

    sample_results: list[PointResult] = []
    finite_jet = patch.source is None
    if not finite_jet and cfg.samples > 0:
        for q in sample_points(patch, cfg.samples, cfg.radius, cfg.seed):
            try:
                qpatch = build_patch(patch.source, q, cfg.degree, cfg.tol_abs, cfg.tol_rel)
                qreport = check_conditions(qpatch)
                sample_results.append(
                    PointResult(point=q, status=_classify(qreport), report=qreport)
                )
            except GeometryError as exc:
                sample_results.append(PointResult(point=q, status="error", error=str(exc)))

    statuses = [base.status] + [r.status for r in sample_results]
    if "witness" in statuses:
        verdict = "not_spherical"
    elif all(s == "certified" for s in statuses):
        verdict = "spherical"
    else:
        verdict = "inconclusive"
    return SphericityReport(
        verdict=verdict,
        base=base,
        samples=sample_results,
        config=cfg,
        finite_jet=finite_jet,
    )
