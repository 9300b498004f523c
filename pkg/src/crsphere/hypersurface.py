"""Hypersurface-level geometry for strictly pseudoconvex surfaces in C^2.

A patch bundles a base point with the jet of a real defining function rho in
the four formal variables (z, zbar, w, wbar).  On top of it this module
builds the two scalar invariants

* ``theta = -rho_z / rho_w``   (slope of the complex tangent line), and
* ``phi``                      (second jet of the formal Segre variety, a
                                bordered 3x3 determinant over rho_w^3),

the tangent (0,1) vector field ``L0 = rho_wbar d/dzbar - rho_zbar d/dwbar``,
its normalization ``L = L0 / (L0 theta)`` satisfying ``L theta = 1``, the
Levi form, on-surface restriction of ambient jets, and deterministic point
sampling on the surface.

Coordinate conventions: variable indices are z=0, zbar=1, w=2, wbar=3.
``build_patch`` swaps (z, w) when rho_w vanishes at the base point but rho_z
does not, and flips the sign of rho when needed so that the Levi value is
positive for strictly pseudoconvex input (the model ``Im(w) - abs2(z)`` is
the positive orientation).  theta, phi and everything derived from them are
invariant under both adjustments.

Patches are immutable after construction and all operations are pure, so
independent patches may be processed concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import jets
from .expr import ExprAst, check_real, expand_at, parse
from .jets import Jet, JetContext

__all__ = [
    "VAR_Z",
    "VAR_ZBAR",
    "VAR_W",
    "VAR_WBAR",
    "GeometryError",
    "NotOnSurfaceError",
    "DegenerateGradientError",
    "NotRealError",
    "LeviDegenerateError",
    "SamplingError",
    "TrustExhaustedError",
    "TangentField01",
    "HypersurfacePatch",
    "build_patch",
    "theta",
    "phi",
    "phi_matrix",
    "tangent_01_field",
    "regularizing_field",
    "apply_field",
    "iterate_L_phi",
    "levi_form",
    "restrict_to_surface",
    "sample_points",
]

VAR_Z, VAR_ZBAR, VAR_W, VAR_WBAR = 0, 1, 2, 3
_SWAP_ZW = (2, 3, 0, 1)

DEFAULT_DEGREE = 12
DEFAULT_TOL_ABS = 1e-9
DEFAULT_TOL_REL = 1e-9


class GeometryError(Exception):
    """Base class for hypersurface-level failures."""


class NotOnSurfaceError(GeometryError):
    """The base point does not satisfy rho = 0 within tolerance."""


class DegenerateGradientError(GeometryError):
    """d(rho) vanishes at the base point; no hypersurface structure."""


class NotRealError(GeometryError):
    """The defining function is not real-valued."""


class LeviDegenerateError(GeometryError):
    """The Levi form vanishes at the base point."""


class SamplingError(GeometryError):
    """Point sampling on the surface failed or is unavailable."""


class TrustExhaustedError(GeometryError):
    """Not enough trusted derivative orders remain for the request."""

    def __init__(self, message: str, max_order: int):
        super().__init__(message)
        self.max_order = max_order


@dataclass(frozen=True)
class TangentField01:
    """A (0,1) vector field a*d/dzbar + b*d/dwbar with jet coefficients."""

    a: Jet
    b: Jet


def _levi_value(rho: Jet) -> float:
    """Bordered-Hessian Levi value, normalized by |d rho|^2.

    Positive for the model orientation Im(w) - abs2(z); zero exactly at
    Levi-degenerate points.
    """
    c = rho.coeffs
    ctx = rho.ctx
    rz = complex(c[ctx.rank((1, 0, 0, 0))])
    rzb = complex(c[ctx.rank((0, 1, 0, 0))])
    rw = complex(c[ctx.rank((0, 0, 1, 0))])
    rwb = complex(c[ctx.rank((0, 0, 0, 1))])
    rzzb = complex(c[ctx.rank((1, 1, 0, 0))])
    rwzb = complex(c[ctx.rank((0, 1, 1, 0))])
    rzwb = complex(c[ctx.rank((1, 0, 0, 1))])
    rwwb = complex(c[ctx.rank((0, 0, 1, 1))])
    det = -rz * rzb * rwwb + rz * rwb * rwzb + rw * rzb * rzwb - rw * rwb * rzzb
    grad2 = abs(rz) ** 2 + abs(rw) ** 2
    return float(det.real / grad2)


class HypersurfacePatch:
    """Base point plus the defining-function jet, with cached invariants.

    ``point`` is in working coordinates (after a possible (z, w) swap);
    ``original_point`` and ``source`` stay in the caller's coordinates so
    that sampling and reports are phrased in the input chart.
    """

    def __init__(
        self,
        point: tuple[complex, complex],
        rho: Jet,
        source: ExprAst | None,
        levi: float,
        swapped: bool,
        flipped: bool,
        original_point: tuple[complex, complex],
        tol_abs: float,
        tol_rel: float,
    ):
        self.point = point
        self.rho = rho
        self.source = source
        self.levi = levi
        self.swapped = swapped
        self.flipped = flipped
        self.original_point = original_point
        self.tol_abs = tol_abs
        self.tol_rel = tol_rel
        self.scale = float(np.abs(rho.coeffs).max())

    @property
    def degree(self) -> int:
        return self.rho.ctx.degree

    @property
    def vanish_tol(self) -> float:
        """A jet "vanishes" when every trusted coefficient is below this."""
        return self.tol_abs + self.tol_rel * self.scale

    def __repr__(self) -> str:
        return (
            f"HypersurfacePatch(point={self.point!r}, degree={self.degree}, "
            f"trust={self.rho.trust}, levi={self.levi:.6g})"
        )

    @cached_property
    def theta(self) -> Jet:
        return -self.rho.derive(VAR_Z) * self.rho.derive(VAR_W).invert()

    @cached_property
    def w_solve(self) -> Jet:
        """Complex defining solve: w as a jet in (z, zbar, wbar) offsets."""
        return jets.implicit_solve([self.rho], [VAR_W])[0]


def build_patch(
    source: ExprAst | Jet | str,
    point: tuple[complex, complex],
    degree: int = DEFAULT_DEGREE,
    tol_abs: float = DEFAULT_TOL_ABS,
    tol_rel: float = DEFAULT_TOL_REL,
) -> HypersurfacePatch:
    """Expand (or accept) a defining-function jet at ``point`` and validate it.

    Accepts a DSL string, a parsed AST, or a raw 4-variable jet (finite-jet
    mode; its own degree wins).  Validates rho(p) = 0, reality and
    d(rho) != 0, applies the coordinate swap and orientation flip described
    in the module docstring, and caches the Levi value.
    """
    point = (complex(point[0]), complex(point[1]))
    ast: ExprAst | None = None
    if isinstance(source, str):
        ast = parse(source)
    elif isinstance(source, ExprAst):
        ast = source
    elif not isinstance(source, Jet):
        raise TypeError(f"source must be a DSL string, an AST or a Jet, not {type(source)!r}")

    if ast is not None:
        if degree < 2:
            raise ValueError("patch degree must be at least 2")
        rho = expand_at(ast, point, JetContext.get(4, degree))
    else:
        rho = source
        if rho.ctx.nvars != 4:
            raise ValueError("a defining-function jet needs 4 variables (z, zbar, w, wbar)")
        if rho.ctx.degree < 2 or rho.trust < 2:
            raise ValueError("a defining-function jet needs degree and trust >= 2")

    scale = float(np.abs(rho.coeffs).max())
    if scale == 0.0:
        raise DegenerateGradientError("defining function is identically zero")
    tol = tol_abs + tol_rel * scale

    const = complex(rho.coeffs[0])
    if abs(const) > tol:
        raise NotOnSurfaceError(f"rho(p) = {const:.6g}, base point is not on the surface")
    if not check_real(rho, tol):
        raise NotRealError("defining function is not real-valued")

    cz = complex(rho.coeffs[rho.ctx.rank((1, 0, 0, 0))])
    cw = complex(rho.coeffs[rho.ctx.rank((0, 0, 1, 0))])
    if abs(cw) <= tol and abs(cz) <= tol:
        raise DegenerateGradientError("d(rho) vanishes at the base point")
    swapped = False
    working_point = point
    # Solve-direction conditioning: series solved for w grow like
    # (|rho_z|/|rho_w|)^k, so work in the chart where the w-derivative
    # dominates.  This subsumes the required swap at rho_w = 0.
    if abs(cw) < 0.5 * abs(cz):
        rho = jets.permute_vars(rho, _SWAP_ZW)
        working_point = (point[1], point[0])
        swapped = True

    levi = _levi_value(rho)
    flipped = False
    if levi < 0:
        rho = -rho
        levi = -levi
        flipped = True

    return HypersurfacePatch(
        point=working_point,
        rho=rho,
        source=ast,
        levi=levi,
        swapped=swapped,
        flipped=flipped,
        original_point=point,
        tol_abs=tol_abs,
        tol_rel=tol_rel,
    )


def theta(patch: HypersurfacePatch) -> Jet:
    """Tangent-slope invariant ``-rho_z / rho_w`` as an ambient jet (trust - 1)."""
    return patch.theta


def phi(patch: HypersurfacePatch, corner: str = "rho") -> Jet:
    """Second-jet invariant as an ambient jet (trust - 2).

    ``corner="rho"`` places rho itself in the (1,1) corner of the bordered
    determinant; ``corner="zero"`` places 0 there.  The two representatives
    agree on the surface (their difference is divisible by rho).
    """
    if corner not in ("rho", "zero"):
        raise ValueError("corner must be 'rho' or 'zero'")
    rho = patch.rho
    rz = rho.derive(VAR_Z)
    rw = rho.derive(VAR_W)
    rzz = rz.derive(VAR_Z)
    rzw = rz.derive(VAR_W)
    rww = rw.derive(VAR_W)
    det = -rz * (rz * rww - rzw * rw) + rw * (rz * rzw - rzz * rw)
    if corner == "rho":
        det = det + rho * (rzz * rww - rzw * rzw)
    return det * rw.invert() ** 3


def phi_matrix(patch: HypersurfacePatch) -> list[list[Jet]]:
    """Matrix form of the second-jet invariant; in C^2 the single entry of the
    entrywise determinant formula (zero corner)."""
    return [[phi(patch, corner="zero")]]


def tangent_01_field(patch: HypersurfacePatch) -> TangentField01:
    """The canonical tangent (0,1) field ``rho_wbar d/dzbar - rho_zbar d/dwbar``.

    Tangency ``L0 rho = 0`` holds identically by antisymmetry.
    """
    return TangentField01(a=patch.rho.derive(VAR_WBAR), b=-patch.rho.derive(VAR_ZBAR))


def apply_field(field: TangentField01, f: Jet) -> Jet:
    """Derivative of ``f`` along the field; trust drops by one."""
    return field.a * f.derive(VAR_ZBAR) + field.b * f.derive(VAR_WBAR)


def regularizing_field(patch: HypersurfacePatch, base: TangentField01 | None = None) -> TangentField01:
    """Normalize a tangent (0,1) field so that it maps theta to 1.

    Strict pseudoconvexity makes the normalizing factor invertible; a zero
    constant term signals a Levi-degenerate base point.
    """
    field = base if base is not None else tangent_01_field(patch)
    lt = apply_field(field, patch.theta)
    if abs(complex(lt.coeffs[0])) <= patch.vanish_tol:
        raise LeviDegenerateError("Levi-degenerate point: field derivative of theta vanishes")
    inv = lt.invert()
    return TangentField01(a=field.a * inv, b=field.b * inv)


def iterate_L_phi(patch: HypersurfacePatch, k: int = 4) -> list[Jet]:
    """[phi, L phi, ..., L^k phi] for the regularizing field; each step costs one trust order."""
    if not 0 <= k <= 4:
        raise ValueError("k must be between 0 and 4")
    if patch.rho.trust < k + 2:
        raise TrustExhaustedError(
            f"trust {patch.rho.trust} supports at most {max(patch.rho.trust - 2, 0)} field applications",
            max_order=max(patch.rho.trust - 2, 0),
        )
    field = regularizing_field(patch)
    seq = [phi(patch)]
    for _ in range(k):
        seq.append(apply_field(field, seq[-1]))
    return seq


def levi_form(patch: HypersurfacePatch) -> float:
    """Levi value at the base point; > 0 iff strictly pseudoconvex, 0 iff degenerate."""
    return patch.levi


def restrict_to_surface(patch: HypersurfacePatch, f: Jet) -> Jet:
    """Restriction of an ambient jet to the surface, as a jet in (z, zbar, wbar).

    Substitutes the complex defining solve for w; coefficientwise vanishing of
    the result certifies vanishing of f on the surface near the base point
    through the surviving trust order.
    """
    return jets.eliminate(f, VAR_W, patch.w_solve)


# -- point sampling ------------------------------------------------------------


def _rho_gradient(ast: ExprAst, q: tuple[complex, complex]) -> tuple[float, complex, complex]:
    j = expand_at(ast, q, JetContext.get(4, 2))
    val = complex(j.coeffs[0]).real
    gz = complex(j.coeffs[j.ctx.rank((1, 0, 0, 0))])
    gw = complex(j.coeffs[j.ctx.rank((0, 0, 1, 0))])
    return val, gz, gw


def _project_to_surface(
    ast: ExprAst, q: tuple[complex, complex], tol: float = 1e-12, max_iter: int = 50
) -> tuple[complex, complex]:
    """Newton correction along the real normal direction until |rho| <= tol."""
    for _ in range(max_iter):
        val, gz, gw = _rho_gradient(ast, q)
        if abs(val) <= tol:
            return q
        grad2 = abs(gz) ** 2 + abs(gw) ** 2
        if grad2 < 1e-30:
            raise SamplingError("gradient collapsed during Newton correction")
        t = -val / (2.0 * grad2)
        q = (q[0] + t * gz.conjugate(), q[1] + t * gw.conjugate())
    raise SamplingError(f"Newton correction did not reach |rho| <= {tol:g}")


def sample_points(
    patch: HypersurfacePatch,
    count: int,
    radius: float = 0.05,
    seed: int = 0x5EED,
) -> list[tuple[complex, complex]]:
    """Deterministic points on the surface near the base point.

    Perturbs the base point tangentially within ``radius`` and Newton-corrects
    along the real normal until |rho| <= 1e-12.  Requires expression mode;
    finite-jet patches cannot be sampled.  Points are returned in the
    caller's original coordinates.
    """
    if patch.source is None:
        raise SamplingError("sampling unavailable in finite-jet mode")
    if count < 0:
        raise ValueError("count must be non-negative")
    ast = patch.source
    p = patch.original_point
    rng = np.random.default_rng(seed)
    points: list[tuple[complex, complex]] = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 20 * max(count, 1):
            raise SamplingError("too many failed sampling attempts")
        raw = rng.normal(size=4)
        v = (raw[0] + 1j * raw[1], raw[2] + 1j * raw[3])
        _, gz, gw = _rho_gradient(ast, p)
        n = (gz.conjugate(), gw.conjugate())
        n2 = abs(n[0]) ** 2 + abs(n[1]) ** 2
        if n2 < 1e-30:
            raise SamplingError("gradient vanishes at the base point")
        proj = (v[0] * n[0].conjugate() + v[1] * n[1].conjugate()).real / n2
        vt = (v[0] - proj * n[0], v[1] - proj * n[1])
        norm = (abs(vt[0]) ** 2 + abs(vt[1]) ** 2) ** 0.5
        if norm < 1e-12:
            continue
        step = radius * (0.25 + 0.75 * rng.random()) / norm
        q0 = (p[0] + step * vt[0], p[1] + step * vt[1])
        try:
            points.append(_project_to_surface(ast, q0))
        except SamplingError:
            continue
    return points
