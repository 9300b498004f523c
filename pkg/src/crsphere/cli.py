"""Command-line front end.

Subcommands:

* ``check``       sphericity verdict at a point (exit 0 spherical,
                  1 not spherical, 2 inconclusive, >2 error)
* ``ode``         associated-ODE extraction: coefficients, the fourth
                  jet-derivative invariant, the cubic verdict
* ``decompose``   cubic decomposition of phi and its CR defects
* ``crosscheck``  residual of the two-pipeline identity at the base point
* ``levi``        Levi value at the base point

Complex numbers are passed as ``re,im`` pairs on the command line and as
``[re, im]`` arrays in JSON.  Finite-jet input files are JSON arrays of
``[a, b, c, d, re, im]`` rows meaning the coefficient of
``z^a zbar^b w^c wbar^d``.  JSON reports follow ``docs/report-schema.json``
and are byte-identical for identical configurations.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .expr import ParseError
from .hypersurface import GeometryError, build_patch
from .jets import Jet, JetContext, JetError
from .segre_ode import associated_ode, cross_check, cubic_check, tresse_invariant
from .sphericity import (
    ConditionReport,
    PointResult,
    SphericityReport,
    VerdictConfig,
    cr_defect,
    cubic_decompose,
    curvature_proxy,
    sphericity_verdict,
)

__all__ = ["RunConfig", "main"]

EXIT_SPHERICAL = 0
EXIT_NOT_SPHERICAL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
EXIT_GEOMETRY = 4

_VERDICT_EXIT = {
    "spherical": EXIT_SPHERICAL,
    "not_spherical": EXIT_NOT_SPHERICAL,
    "inconclusive": EXIT_INCONCLUSIVE,
}

SCHEMA_ID = "crsphere-report/1"


class UsageError(Exception):
    """Bad flags, bad input files, unparseable points."""


@dataclass(frozen=True)
class RunConfig:
    """One resolved invocation: the surface, the point, numerics, output mode."""

    rho: str | None
    jet_file: str | None
    point: tuple[complex, complex]
    degree: int
    tol_abs: float
    tol_rel: float
    samples: int
    radius: float
    seed: int
    json_output: bool

    def verdict_config(self) -> VerdictConfig:
        return VerdictConfig(
            degree=self.degree,
            tol_abs=self.tol_abs,
            tol_rel=self.tol_rel,
            samples=self.samples,
            radius=self.radius,
            seed=self.seed,
        )


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"complex numbers are written re,im -- got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise UsageError(f"bad complex number {text!r}: {exc}") from exc


def _load_jet_file(path: str, degree: int) -> Jet:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read jet file {path!r}: {exc}") from exc
    if not isinstance(rows, list):
        raise UsageError("jet file must be a JSON array of [a, b, c, d, re, im] rows")
    ctx = JetContext.get(4, degree)
    terms = []
    for row in rows:
        if not (isinstance(row, list) and len(row) == 6):
            raise UsageError(f"bad jet row {row!r}: expected [a, b, c, d, re, im]")
        a, b, c, d, re_part, im_part = row
        alpha = (int(a), int(b), int(c), int(d))
        if min(alpha) < 0:
            raise UsageError(f"negative exponent in jet row {row!r}")
        if sum(alpha) > degree:
            raise UsageError(f"jet row {row!r} exceeds --degree {degree}")
        terms.append((alpha, complex(float(re_part), float(im_part))))
    return ctx.from_terms(terms, trust=degree)


def _resolve_source(cfg: RunConfig, expression_only: bool = False):
    if cfg.rho is not None and cfg.jet_file is not None:
        raise UsageError("--rho and --jet-file are mutually exclusive")
    if cfg.rho is not None:
        return cfg.rho
    if cfg.jet_file is not None:
        if expression_only:
            raise UsageError("this command needs expression mode (--rho); finite jets carry no off-surface data")
        return _load_jet_file(cfg.jet_file, cfg.degree)
    raise UsageError("one of --rho or --jet-file is required")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--rho", help="defining function as a DSL expression")
    sub.add_argument("--jet-file", help="finite-jet JSON file ([a,b,c,d,re,im] rows)")
    sub.add_argument(
        "--point",
        nargs=2,
        default=["0,0", "0,0"],
        metavar=("Z", "W"),
        help="base point as two re,im pairs (default: the origin)",
    )
    sub.add_argument("--degree", type=int, default=12, help="truncation degree (default 12)")
    sub.add_argument("--tol-abs", type=float, default=1e-9)
    sub.add_argument("--tol-rel", type=float, default=1e-9)
    sub.add_argument("--samples", type=int, default=5, help="extra surface points to certify at")
    sub.add_argument("--radius", type=float, default=0.05, help="sampling radius")
    sub.add_argument("--seed", type=lambda s: int(s, 0), default=0x5EED, help="sampling seed")
    sub.add_argument("--json", action="store_true", help="machine-readable output")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        rho=args.rho,
        jet_file=args.jet_file,
        point=(_parse_complex(args.point[0]), _parse_complex(args.point[1])),
        degree=args.degree,
        tol_abs=args.tol_abs,
        tol_rel=args.tol_rel,
        samples=args.samples,
        radius=args.radius,
        seed=args.seed,
        json_output=args.json,
    )


# -- serialization helpers ----------------------------------------------------


def _pair(c: complex) -> list[float]:
    return [c.real, c.imag]


def _condition_dict(report: ConditionReport) -> dict:
    return {
        "levi": report.levi,
        "tol": report.tol,
        "quantities": {
            name: {
                "value": _pair(q.value),
                "max_abs": q.max_abs,
                "max_abs_on_surface": q.max_abs_on_surface,
                "trust": q.trust,
            }
            for name, q in report.quantities.items()
        },
    }


def _point_result_dict(result: PointResult) -> dict:
    out = {
        "point": [_pair(result.point[0]), _pair(result.point[1])],
        "status": result.status,
        "error": result.error,
        "conditions": _condition_dict(result.report) if result.report else None,
    }
    return out


def _report_dict(report: SphericityReport, cfg: RunConfig) -> dict:
    return {
        "schema": SCHEMA_ID,
        "verdict": report.verdict,
        "finite_jet": report.finite_jet,
        "base": _point_result_dict(report.base),
        "samples": [_point_result_dict(r) for r in report.samples],
        "config": {
            "degree": cfg.degree,
            "tol_abs": cfg.tol_abs,
            "tol_rel": cfg.tol_rel,
            "samples": cfg.samples,
            "radius": cfg.radius,
            "seed": cfg.seed,
        },
    }


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _print_conditions(report: ConditionReport, indent: str = "  ") -> None:
    print(f"{indent}levi {report.levi:.9g}   tolerance {report.tol:.3e}")
    for name, q in report.quantities.items():
        print(
            f"{indent}{name:<7} value {q.value.real:+.6e}{q.value.imag:+.6e}i"
            f"   |series| {q.max_abs:.3e}   |on-surface| {q.max_abs_on_surface:.3e}   trust {q.trust}"
        )


# -- subcommands ------------------------------------------------------------------


def _cmd_check(cfg: RunConfig) -> int:
    source = _resolve_source(cfg)
    if cfg.degree < 6:
        raise UsageError("check needs --degree >= 6 to reach the fourth field derivative")
    report = sphericity_verdict(source, cfg.point, cfg.verdict_config())
    if cfg.json_output:
        _emit_json(_report_dict(report, cfg))
    else:
        print(f"verdict: {report.verdict}")
        print(f"base point {report.base.point[0]} {report.base.point[1]} [{report.base.status}]")
        _print_conditions(report.base.report)
        for r in report.samples:
            if r.error is not None:
                print(f"sample {r.point[0]} {r.point[1]} [error: {r.error}]")
            else:
                l4 = r.report.quantities["L4_phi"]
                print(
                    f"sample {r.point[0]} {r.point[1]} [{r.status}]"
                    f"  |L4_phi on-surface| {l4.max_abs_on_surface:.3e}"
                )
    return _VERDICT_EXIT[report.verdict]


def _cmd_ode(cfg: RunConfig) -> int:
    source = _resolve_source(cfg, expression_only=True)
    patch = build_patch(source, cfg.point, cfg.degree, cfg.tol_abs, cfg.tol_rel)
    ode = associated_ode(patch)
    invariant = tresse_invariant(ode)
    cubic = cubic_check(ode, patch.vanish_tol)
    if cfg.json_output:
        _emit_json(
            {
                "schema": SCHEMA_ID,
                "command": "ode",
                "point": [_pair(cfg.point[0]), _pair(cfg.point[1])],
                "xi0": _pair(ode.xi0),
                "phi3": ode.to_rows(),
                "invariant_value": _pair(invariant.value()),
                "invariant_max_abs": invariant.max_trusted_abs(),
                "cubic": cubic,
                "trust": ode.phi3.trust,
            }
        )
    else:
        print(f"associated ODE at {cfg.point[0]} {cfg.point[1]}  (lift slope {ode.xi0})")
        rows = ode.to_rows()
        if rows:
            print(f"phi3 coefficients (z, w, xi exponents), {len(rows)} nonzero:")
            for i, j, k, re_part, im_part in rows[:40]:
                print(f"  z^{int(i)} w^{int(j)} xi^{int(k)}: {re_part:+.9e}{im_part:+.9e}i")
            if len(rows) > 40:
                print(f"  ... {len(rows) - 40} more")
        else:
            print("phi3 = 0 (all trusted coefficients vanish)")
        print(f"fourth xi-derivative: value {invariant.value()}  max |coeff| {invariant.max_trusted_abs():.3e}")
        print(f"cubic in xi: {cubic}")
    return 0


def _cmd_decompose(cfg: RunConfig) -> int:
    source = _resolve_source(cfg)
    patch = build_patch(source, cfg.point, cfg.degree, cfg.tol_abs, cfg.tol_rel)
    coeffs = cubic_decompose(patch)
    defects = cr_defect(patch, coeffs)
    values = [a.value() for a in coeffs.as_tuple()]
    if cfg.json_output:
        _emit_json(
            {
                "schema": SCHEMA_ID,
                "command": "decompose",
                "point": [_pair(cfg.point[0]), _pair(cfg.point[1])],
                "coefficients": {f"a{k}": _pair(v) for k, v in enumerate(values)},
                "cr_defects": list(defects),
                "tol": patch.vanish_tol,
            }
        )
    else:
        print(f"cubic decomposition at {cfg.point[0]} {cfg.point[1]}")
        for k, (v, d) in enumerate(zip(values, defects)):
            print(f"  a{k}: value {v}   CR defect {d:.3e}")
    return 0


def _cmd_crosscheck(cfg: RunConfig) -> int:
    source = _resolve_source(cfg, expression_only=True)
    patch = build_patch(source, cfg.point, cfg.degree, cfg.tol_abs, cfg.tol_rel)
    lhs = curvature_proxy(patch)
    rhs = tresse_invariant(associated_ode(patch)).value()
    residual = cross_check(patch)
    if cfg.json_output:
        _emit_json(
            {
                "schema": SCHEMA_ID,
                "command": "crosscheck",
                "point": [_pair(cfg.point[0]), _pair(cfg.point[1])],
                "field_pipeline": _pair(lhs),
                "ode_pipeline": _pair(rhs),
                "residual": residual,
            }
        )
    else:
        print(f"field pipeline  L^4 phi(p)          = {lhs}")
        print(f"ODE pipeline    d^4 phi3/dxi^4 lift = {rhs}")
        print(f"residual {residual:.3e}")
    return 0


def _cmd_levi(cfg: RunConfig) -> int:
    source = _resolve_source(cfg)
    patch = build_patch(source, cfg.point, cfg.degree, cfg.tol_abs, cfg.tol_rel)
    if cfg.json_output:
        _emit_json(
            {
                "schema": SCHEMA_ID,
                "command": "levi",
                "point": [_pair(cfg.point[0]), _pair(cfg.point[1])],
                "levi": patch.levi,
            }
        )
    else:
        print(f"levi {patch.levi:.12g}")
    return 0


_COMMANDS = {
    "check": _cmd_check,
    "ode": _cmd_ode,
    "decompose": _cmd_decompose,
    "crosscheck": _cmd_crosscheck,
    "levi": _cmd_levi,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crsphere",
        description="Sphericity of strictly pseudoconvex hypersurfaces in C^2 "
        "via exact truncated-series invariants.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("check", "decide sphericity at a point"),
        ("ode", "extract the associated second-order ODE"),
        ("decompose", "cubic decomposition of phi and CR defects"),
        ("crosscheck", "two-pipeline identity residual"),
        ("levi", "Levi value at a point"),
    ]:
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeometryError, JetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    raise SystemExit(main())
