"""Truncated multivariate power series (jets) over complex coefficients.

Jets are the universal value type of this package: every scalar field of a
hypersurface computation (the defining function, its Wirtinger derivatives,
the tangent-slope and second-jet invariants, ODE right-hand sides) is a dense
array of Taylor coefficients up to a fixed total degree, together with a
"trust" order recording how many of those coefficients are still meaningful
after differentiations.

Trust rules, per operation:

* add / sub / mul        trust = min of operand trusts
* derive                 trust = trust - 1 (top-degree information is lost)
* invert                 trust preserved
* substitute, eliminate  trust = min over every participating jet
* implicit_solve         trust = min over the system components

Reads past the trusted order raise :class:`UntrustedRead`.  A jet whose trust
has gone negative may still be passed around, but any read of it fails.

Storage is dense, indexed by graded-lexicographic rank.  Contexts are cached
and precompute multiplication/derivation index tables; that is what keeps the
high-order pipelines cheap (a full sphericity run performs on the order of
10^3 truncated multiplications).  Jets are immutable values: all operations
are pure, so concurrent use needs no synchronization.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Jet",
    "JetContext",
    "MultiIndex",
    "conjugate",
    "eliminate",
    "implicit_solve",
    "inject",
    "permute_vars",
    "read_derivative",
    "substitute",
    "JetError",
    "ContextMismatch",
    "SingularNormalization",
    "UntrustedRead",
    "NotCentered",
    "SingularJacobian",
]

#: A multi-index is a plain tuple of non-negative exponents, one per variable.
MultiIndex = tuple

_SCALARS = (int, float, complex, np.integer, np.floating, np.complexfloating)

# Below this many nonzero terms the sparse multiplication path wins.
_SPARSE_CUTOFF = 48


class JetError(Exception):
    """Base class for series-kernel failures."""


class ContextMismatch(JetError):
    """Operands live in incompatible jet contexts."""


class SingularNormalization(JetError):
    """Inversion (or division) hit a zero constant term.

    Geometrically this signals a singular normalization: rho_w = 0 at the
    base point, or a Levi-degenerate point when the normalizing factor is a
    field derivative.
    """


class UntrustedRead(JetError):
    """A coefficient beyond the trusted order was read."""


class NotCentered(JetError):
    """A substitution argument or implicit system has a nonzero constant term."""


class SingularJacobian(JetError):
    """The implicit solver's Jacobian is singular at the base point."""


class JetContext:
    """Shared descriptor of a jet space: variable count and truncation degree.

    Instances are cached by :meth:`get`; the index tables they carry are what
    every arithmetic operation runs on, so reuse matters.
    """

    _cache: dict[tuple[int, int], "JetContext"] = {}

    @classmethod
    def get(cls, nvars: int, degree: int) -> "JetContext":
        key = (nvars, degree)
        ctx = cls._cache.get(key)
        if ctx is None:
            ctx = cls._cache[key] = cls(nvars, degree)
        return ctx

    def __init__(self, nvars: int, degree: int):
        if nvars < 1:
            raise ValueError("need at least one variable")
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.nvars = nvars
        self.degree = degree
        exps = [e for e in product(range(degree + 1), repeat=nvars) if sum(e) <= degree]
        exps.sort(key=lambda e: (sum(e), e))
        self.exponents = np.array(exps, dtype=np.int64)
        self.nterms = len(exps)
        self.degrees = self.exponents.sum(axis=1)
        # first rank of each total degree; ranks with degree <= t are [0, degree_start[t+1])
        self.degree_start = np.searchsorted(self.degrees, np.arange(degree + 2))
        self._code_weights = (degree + 1) ** np.arange(nvars, dtype=np.int64)
        codes = self.exponents @ self._code_weights
        lut = np.full((degree + 1) ** nvars, -1, dtype=np.int64)
        lut[codes] = np.arange(self.nterms)
        self._rank_lut = lut
        self.unit_ranks = tuple(
            int(lut[self._code_weights[i]]) if degree >= 1 else -1 for i in range(nvars)
        )
        self._mul_table: tuple | None = None
        self._deriv_tables: dict[int, tuple] = {}
        self._perm_tables: dict[tuple, np.ndarray] = {}
        self._split_tables: dict[int, tuple] = {}

    def __repr__(self) -> str:
        return f"JetContext(nvars={self.nvars}, degree={self.degree})"

    def compatible(self, other: "JetContext") -> bool:
        return self.nvars == other.nvars and self.degree == other.degree

    # -- rank bookkeeping ---------------------------------------------------

    def rank(self, alpha: Sequence[int]) -> int:
        """Graded-lex rank of a multi-index; raises for out-of-range indices."""
        if len(alpha) != self.nvars:
            raise ContextMismatch(f"multi-index {alpha} has wrong length for {self}")
        total = 0
        code = 0
        for i, a in enumerate(alpha):
            if a < 0:
                raise ValueError(f"negative exponent in {alpha}")
            total += a
            code += a * int(self._code_weights[i])
        if total > self.degree:
            raise ValueError(f"multi-index {alpha} exceeds degree {self.degree}")
        return int(self._rank_lut[code])

    def trusted_end(self, trust: int) -> int:
        """Number of leading ranks whose total degree is <= trust."""
        t = min(trust, self.degree)
        return int(self.degree_start[t + 1]) if t >= 0 else 0

    # -- constructors ---------------------------------------------------------

    def zero(self, trust: int | None = None) -> "Jet":
        return Jet(self, np.zeros(self.nterms, dtype=complex), self.degree if trust is None else trust)

    def constant(self, value: complex, trust: int | None = None) -> "Jet":
        coeffs = np.zeros(self.nterms, dtype=complex)
        coeffs[0] = value
        return Jet(self, coeffs, self.degree if trust is None else trust)

    def variable(self, i: int) -> "Jet":
        """The coordinate jet x_i (zero constant term, unit linear term)."""
        if not 0 <= i < self.nvars:
            raise ValueError(f"no variable {i} in {self}")
        if self.degree < 1:
            raise ValueError("degree-0 context has no variable jets")
        coeffs = np.zeros(self.nterms, dtype=complex)
        coeffs[self.unit_ranks[i]] = 1.0
        return Jet(self, coeffs, self.degree)

    def from_terms(
        self, terms: Mapping[MultiIndex, complex] | Iterable[tuple[MultiIndex, complex]], trust: int | None = None
    ) -> "Jet":
        items = terms.items() if isinstance(terms, Mapping) else terms
        coeffs = np.zeros(self.nterms, dtype=complex)
        for alpha, c in items:
            coeffs[self.rank(alpha)] += c
        return Jet(self, coeffs, self.degree if trust is None else trust)

    # -- index tables ---------------------------------------------------------

    @property
    def mul_table(self):
        if self._mul_table is None:
            i_parts, j_parts, k_parts, offsets = [], [], [], [0]
            for i in range(self.nterms):
                jmax = int(self.degree_start[self.degree - int(self.degrees[i]) + 1])
                codes = (self.exponents[:jmax] + self.exponents[i]) @ self._code_weights
                i_parts.append(np.full(jmax, i, dtype=np.int64))
                j_parts.append(np.arange(jmax, dtype=np.int64))
                k_parts.append(self._rank_lut[codes])
                offsets.append(offsets[-1] + jmax)
            self._mul_table = (
                np.concatenate(i_parts),
                np.concatenate(j_parts),
                np.concatenate(k_parts),
                np.array(offsets, dtype=np.int64),
            )
        return self._mul_table

    def deriv_table(self, var: int):
        tab = self._deriv_tables.get(var)
        if tab is None:
            src = np.nonzero(self.exponents[:, var] > 0)[0]
            shifted = self.exponents[src].copy()
            shifted[:, var] -= 1
            dst = self._rank_lut[shifted @ self._code_weights]
            mult = self.exponents[src, var].astype(float)
            tab = self._deriv_tables[var] = (src, dst, mult)
        return tab

    def perm_table(self, perm: tuple[int, ...]) -> np.ndarray:
        tab = self._perm_tables.get(perm)
        if tab is None:
            codes = self.exponents[:, list(perm)] @ self._code_weights
            tab = self._perm_tables[perm] = self._rank_lut[codes]
        return tab

    def split_table(self, var: int):
        """Group ranks by the exponent of ``var``; targets live in the reduced context."""
        tab = self._split_tables.get(var)
        if tab is None:
            red = JetContext.get(self.nvars - 1, self.degree) if self.nvars > 1 else None
            if red is None:
                raise ValueError("cannot eliminate the only variable")
            other = [v for v in range(self.nvars) if v != var]
            groups = []
            for k in range(self.degree + 1):
                src = np.nonzero(self.exponents[:, var] == k)[0]
                codes = self.exponents[np.ix_(src, other)] @ red._code_weights
                groups.append((src, red._rank_lut[codes]))
            tab = self._split_tables[var] = (red, groups)
        return tab

    # -- array-level arithmetic -----------------------------------------------

    def mul_arrays(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        nx = int(np.count_nonzero(x))
        ny = int(np.count_nonzero(y))
        out = np.zeros(self.nterms, dtype=complex)
        if nx == 0 or ny == 0:
            return out
        mi, mj, mk, offsets = self.mul_table
        if min(nx, ny) <= _SPARSE_CUTOFF:
            if ny < nx:
                x, y = y, x
            for i in np.nonzero(x)[0]:
                s, e = offsets[i], offsets[i + 1]
                out[mk[s:e]] += x[i] * y[mj[s:e]]
            return out
        prod = x[mi] * y[mj]
        out.real = np.bincount(mk, weights=prod.real, minlength=self.nterms)
        out.imag = np.bincount(mk, weights=prod.imag, minlength=self.nterms)
        return out


class Jet:
    """A truncated power series with trust-order tracking.

    Immutable; arithmetic returns new jets.  ``coeffs[r]`` is the Taylor
    coefficient of the monomial ``ctx.exponents[r]``.
    """

    __slots__ = ("ctx", "coeffs", "trust")

    def __init__(self, ctx: JetContext, coeffs: np.ndarray, trust: int):
        self.ctx = ctx
        arr = np.asarray(coeffs, dtype=complex)
        arr.setflags(write=False)
        self.coeffs = arr
        self.trust = min(int(trust), ctx.degree)

    # -- inspection -----------------------------------------------------------

    def __repr__(self) -> str:
        nnz = int(np.count_nonzero(self.coeffs))
        return f"Jet(nvars={self.ctx.nvars}, degree={self.ctx.degree}, trust={self.trust}, nnz={nnz})"

    def value(self) -> complex:
        """Series value at the base point (the constant coefficient)."""
        if self.trust < 0:
            raise UntrustedRead("jet has negative trust; its values are meaningless")
        return complex(self.coeffs[0])

    def coefficient(self, alpha: Sequence[int]) -> complex:
        """Trusted Taylor coefficient at ``alpha``."""
        if sum(alpha) > self.trust:
            raise UntrustedRead(f"coefficient {tuple(alpha)} is beyond trust order {self.trust}")
        return complex(self.coeffs[self.ctx.rank(alpha)])

    def max_trusted_abs(self) -> float:
        """Largest coefficient magnitude within the trusted range."""
        if self.trust < 0:
            raise UntrustedRead("jet has negative trust")
        end = self.ctx.trusted_end(self.trust)
        return float(np.abs(self.coeffs[:end]).max()) if end else 0.0

    def is_trusted_zero(self, tol: float) -> bool:
        return self.max_trusted_abs() <= tol

    def terms(self, trusted_only: bool = True) -> list[tuple[MultiIndex, complex]]:
        """Nonzero terms as (multi-index, coefficient) pairs, graded order."""
        end = self.ctx.trusted_end(self.trust) if trusted_only else self.ctx.nterms
        out = []
        for r in np.nonzero(self.coeffs[:end])[0]:
            out.append((tuple(int(e) for e in self.ctx.exponents[r]), complex(self.coeffs[r])))
        return out

    def with_trust(self, trust: int) -> "Jet":
        """Override trust.  The caller asserts the coefficients support it."""
        return Jet(self.ctx, self.coeffs, trust)

    # -- ring arithmetic --------------------------------------------------------

    def _check_ctx(self, other: "Jet") -> None:
        if self.ctx is not other.ctx and not self.ctx.compatible(other.ctx):
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")

    def __add__(self, other):
        if isinstance(other, _SCALARS):
            coeffs = self.coeffs.copy()
            coeffs[0] += other
            return Jet(self.ctx, coeffs, self.trust)
        if not isinstance(other, Jet):
            return NotImplemented
        self._check_ctx(other)
        return Jet(self.ctx, self.coeffs + other.coeffs, min(self.trust, other.trust))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.ctx, -self.coeffs, self.trust)

    def __sub__(self, other):
        if isinstance(other, _SCALARS):
            return self + (-other)
        if not isinstance(other, Jet):
            return NotImplemented
        self._check_ctx(other)
        return Jet(self.ctx, self.coeffs - other.coeffs, min(self.trust, other.trust))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return Jet(self.ctx, self.coeffs * other, self.trust)
        if not isinstance(other, Jet):
            return NotImplemented
        self._check_ctx(other)
        ctx = self.ctx
        return Jet(ctx, ctx.mul_arrays(self.coeffs, other.coeffs), min(self.trust, other.trust))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, _SCALARS):
            return self * (1.0 / other)
        if not isinstance(other, Jet):
            return NotImplemented
        return self * other.invert()

    def __rtruediv__(self, other):
        if isinstance(other, _SCALARS):
            return self.invert() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("jet powers take non-negative integer exponents")
        result = self.ctx.constant(1.0)
        base = self
        k = int(n)
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus ----------------------------------------------------------------

    def derive(self, var: int) -> "Jet":
        """Formal partial derivative; trust drops by one."""
        src, dst, mult = self.ctx.deriv_table(var)
        coeffs = np.zeros(self.ctx.nterms, dtype=complex)
        coeffs[dst] = self.coeffs[src] * mult
        return Jet(self.ctx, coeffs, self.trust - 1)

    def invert(self) -> "Jet":
        """Multiplicative inverse by Newton iteration; trust preserved."""
        if self.trust < 0:
            raise UntrustedRead("cannot invert a jet with negative trust")
        c0 = complex(self.coeffs[0])
        if c0 == 0:
            raise SingularNormalization("cannot invert a jet with zero constant term")
        ctx = self.ctx
        b = np.zeros(ctx.nterms, dtype=complex)
        b[0] = 1.0 / c0
        for _ in range(max(1, math.ceil(math.log2(ctx.degree + 1))) if ctx.degree else 0):
            ab = ctx.mul_arrays(self.coeffs, b)
            ab *= -1.0
            ab[0] += 2.0
            b = ctx.mul_arrays(b, ab)
        return Jet(ctx, b, self.trust)


# -- structural operations ---------------------------------------------------------


def permute_vars(a: Jet, perm: tuple[int, ...]) -> Jet:
    """Rename variables: variable ``j`` of the result is variable ``perm[j]`` of ``a``."""
    if len(perm) != a.ctx.nvars:
        raise ContextMismatch("permutation length must match the variable count")
    coeffs = np.zeros(a.ctx.nterms, dtype=complex)
    coeffs[a.ctx.perm_table(tuple(perm))] = a.coeffs
    return Jet(a.ctx, coeffs, a.trust)


def conjugate(a: Jet, perm: tuple[int, ...]) -> Jet:
    """Formal conjugate: conjugate coefficients and swap conjugate-paired variables."""
    if len(perm) != a.ctx.nvars:
        raise ContextMismatch("permutation length must match the variable count")
    coeffs = np.zeros(a.ctx.nterms, dtype=complex)
    coeffs[a.ctx.perm_table(tuple(perm))] = np.conj(a.coeffs)
    return Jet(a.ctx, coeffs, a.trust)


def inject(a: Jet, out_ctx: JetContext, var_map: Sequence[int]) -> Jet:
    """Re-embed ``a`` into ``out_ctx``, sending variable ``i`` to ``var_map[i]``.

    Terms whose total degree exceeds the target degree are dropped; trust is
    capped by the target degree accordingly.
    """
    if len(var_map) != a.ctx.nvars or len(set(var_map)) != len(var_map):
        raise ContextMismatch("var_map must injectively map source variables")
    keep = a.ctx.degrees <= out_ctx.degree
    weights = np.zeros(a.ctx.nvars, dtype=np.int64)
    for i, v in enumerate(var_map):
        weights[i] = out_ctx._code_weights[v]
    codes = a.ctx.exponents[keep] @ weights
    coeffs = np.zeros(out_ctx.nterms, dtype=complex)
    coeffs[out_ctx._rank_lut[codes]] = a.coeffs[keep]
    return Jet(out_ctx, coeffs, min(a.trust, out_ctx.degree))


def to_degree(a: Jet, degree: int) -> Jet:
    """Same variables, different truncation degree."""
    out_ctx = JetContext.get(a.ctx.nvars, degree)
    return inject(a, out_ctx, tuple(range(a.ctx.nvars)))


def eliminate(a: Jet, var: int, replacement: Jet) -> Jet:
    """Substitute ``replacement`` (a jet in the remaining variables) for one variable.

    Horner evaluation in the eliminated variable; the replacement may carry a
    nonzero constant term, in which case this is a re-expansion and the caller
    owns the accuracy heuristics.
    """
    red_ctx, groups = a.ctx.split_table(var)
    if replacement.ctx is not red_ctx and not replacement.ctx.compatible(red_ctx):
        raise ContextMismatch(f"replacement must live in {red_ctx}")
    layers = []
    for src, dst in groups:
        arr = np.zeros(red_ctx.nterms, dtype=complex)
        arr[dst] = a.coeffs[src]
        layers.append(arr)
    kmax = max((k for k, arr in enumerate(layers) if arr.any()), default=0)
    acc = layers[kmax]
    for k in range(kmax - 1, -1, -1):
        acc = red_ctx.mul_arrays(acc, replacement.coeffs)
        acc = acc + layers[k]
    return Jet(red_ctx, acc, min(a.trust, replacement.trust))


def substitute(a: Jet, args: Sequence[Jet], allow_constant: bool = False) -> Jet:
    """Multivariate composition ``a(args[0], ..., args[m-1])``.

    All arguments must share one context, which becomes the result context.
    Arguments must be centered (zero constant term) unless ``allow_constant``
    is set, in which case the result is a re-expansion about a shifted base
    point and the caller owns the accuracy heuristics.
    """
    if len(args) != a.ctx.nvars:
        raise ContextMismatch(f"expected {a.ctx.nvars} substitution arguments")
    out_ctx = args[0].ctx
    for g in args:
        if g.ctx is not out_ctx and not g.ctx.compatible(out_ctx):
            raise ContextMismatch("substitution arguments must share a context")
        if not allow_constant and g.coeffs[0] != 0:
            raise NotCentered("substitution argument has a nonzero constant term")
    trust = min([a.trust] + [g.trust for g in args] + [out_ctx.degree])
    # powers[i][k] holds args[i]^(k+1); the zeroth power never materializes
    powers: list[list[np.ndarray]] = [[] for _ in range(a.ctx.nvars)]

    def power(i: int, k: int) -> np.ndarray:
        cache = powers[i]
        while len(cache) < k:
            if not cache:
                cache.append(args[i].coeffs)
            else:
                cache.append(out_ctx.mul_arrays(cache[-1], args[i].coeffs))
        return cache[k - 1]

    acc = np.zeros(out_ctx.nterms, dtype=complex)
    for r in np.nonzero(a.coeffs)[0]:
        alpha = a.ctx.exponents[r]
        if not allow_constant and int(a.ctx.degrees[r]) > out_ctx.degree:
            continue  # centered args: such terms contribute nothing below the cutoff
        prod = None
        for i, e in enumerate(alpha):
            if e:
                p = power(i, int(e))
                prod = p if prod is None else out_ctx.mul_arrays(prod, p)
        if prod is None:
            acc[0] += a.coeffs[r]
        else:
            acc = acc + a.coeffs[r] * prod
    return Jet(out_ctx, acc, trust)


def read_derivative(a: Jet, alpha: Sequence[int]) -> complex:
    """Mixed partial derivative at the base point: coefficient times multi-factorial."""
    if sum(alpha) > a.trust:
        raise UntrustedRead(f"derivative {tuple(alpha)} is beyond trust order {a.trust}")
    factor = 1.0
    for e in alpha:
        factor *= math.factorial(e)
    return complex(a.coeffs[a.ctx.rank(alpha)]) * factor


# -- implicit function solver -----------------------------------------------------


def _gauss_solve(jmat: list[list[Jet]], rhs: list[Jet]) -> list[Jet]:
    """Solve a small linear system over the jet ring (Gauss-Jordan, constant-term pivoting)."""
    q = len(rhs)
    a = [row[:] for row in jmat]
    b = rhs[:]
    for col in range(q):
        piv = max(range(col, q), key=lambda r: abs(a[r][col].coeffs[0]))
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = a[col][col].invert()
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col] * inv
        for r in range(q):
            if r == col:
                continue
            f = a[r][col]
            if not f.coeffs.any():
                continue
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            b[r] = b[r] - f * b[col]
    return b


def implicit_solve(system: Sequence[Jet], unknowns: Sequence[int]) -> list[Jet]:
    """Solve ``F_i(x, y) = 0`` for the unknown block ``y`` as jets in the kept variables.

    ``system`` holds q jets in n+q variables; ``unknowns`` names the q solved
    variables.  Requirements: every component vanishes at the base point and
    the q-by-q Jacobian in the unknown block is invertible there (for a
    defining function this is exactly Levi-nondegeneracy).  Newton iteration
    doubles the correct degree each step, so ``ceil(log2(D+1)) + 1`` rounds
    saturate the truncation.  Result trust is the minimum system trust.
    """
    system = list(system)
    q = len(system)
    if q == 0:
        raise ValueError("empty system")
    ctx = system[0].ctx
    for f in system:
        if f.ctx is not ctx and not f.ctx.compatible(ctx):
            raise ContextMismatch("system components must share a context")
    unknowns = list(unknowns)
    if len(set(unknowns)) != q or not all(0 <= u < ctx.nvars for u in unknowns):
        raise ValueError("unknowns must be q distinct variable indices")
    kept = [v for v in range(ctx.nvars) if v not in unknowns]
    if not kept:
        raise ValueError("no free variables left")
    trust_out = min(f.trust for f in system)
    if trust_out < 0:
        raise UntrustedRead("cannot solve an untrusted system")
    out_ctx = JetContext.get(len(kept), ctx.degree)
    scale = max(1.0, max(float(np.abs(f.coeffs).max()) for f in system))

    centered = []
    for f in system:
        c0 = complex(f.coeffs[0])
        if abs(c0) > 1e-9 * scale:
            raise NotCentered(f"system component has constant term {c0!r}")
        centered.append(f - c0 if c0 != 0 else f)

    j0 = np.array(
        [[f.coeffs[ctx.unit_ranks[u]] for u in unknowns] for f in centered], dtype=complex
    )
    sv = np.linalg.svd(j0, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, float(sv[0])):
        raise SingularJacobian("Jacobian in the unknown block is singular at the base point")

    dsys = [[f.derive(u) for u in unknowns] for f in centered]
    elim_order = sorted(unknowns, reverse=True)
    ys = [out_ctx.zero(trust=trust_out) for _ in range(q)]

    def eval_full(g: Jet) -> Jet:
        cur = g
        cur_vars = list(range(ctx.nvars))
        for u in elim_order:
            pos = cur_vars.index(u)
            red_vars = cur_vars[:pos] + cur_vars[pos + 1 :]
            red_ctx = JetContext.get(len(red_vars), ctx.degree)
            var_map = [red_vars.index(v) for v in kept]
            cur = eliminate(cur, pos, inject(ys[unknowns.index(u)], red_ctx, var_map))
            cur_vars = red_vars
        return cur

    for _ in range(max(1, math.ceil(math.log2(ctx.degree + 1))) + 1):
        residual = [eval_full(f) for f in centered]
        jac = [[eval_full(dsys[i][j]) for j in range(q)] for i in range(q)]
        delta = _gauss_solve(jac, residual)
        new_ys = []
        for y, d in zip(ys, delta):
            ny = y - d
            c0 = complex(ny.coeffs[0])
            if c0 != 0:
                ny = ny - c0
            new_ys.append(ny.with_trust(trust_out))
        ys = new_ys

    worst = max(eval_full(f).max_trusted_abs() for f in centered)
    if worst > 1e-8 * scale:
        raise JetError(f"implicit solve failed to converge (residual {worst:.3e})")
    return ys
