"""Independent oracles: brute-force series recursion, finite differences.

These implementations deliberately avoid the jet kernel so they can stand as
independent checks of it.
"""

from __future__ import annotations

import math
import random

import numpy as np

from crsphere.expr import Abs2, Add, Conj, Div, ExprAst, Im, Lit, Mul, Pow, Re, Sub, Var, evaluate


# -- brute-force series recursion ----------------------------------------------


def _poly_mul(p: list[complex], q: list[complex], degree: int) -> list[complex]:
    out = [0j] * (degree + 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            if i + j > degree:
                break
            out[i + j] += a * b
    return out


def solve_y_equals_x_plus_y_squared(degree: int) -> list[complex]:
    """Coefficients of y(x) with y = x + y^2 by plain recursive substitution.

    The fixed-point iteration gains one correct order per step, so ``degree``
    rounds suffice starting from y = 0.
    """
    y = [0j] * (degree + 1)
    for _ in range(degree):
        y2 = _poly_mul(y, y, degree)
        y = [y2[k] for k in range(degree + 1)]
        y[1] += 1.0
    return y


# -- central finite differences ------------------------------------------------

_FD_OFFSETS = np.arange(-4, 5)


def _fd_weights(order: int) -> np.ndarray:
    """Stencil weights on offsets -4..4 for the m-th derivative (order >= 6 accurate)."""
    n = len(_FD_OFFSETS)
    a = np.zeros((n, n))
    for k in range(n):
        a[k] = _FD_OFFSETS**k / math.factorial(k)
    rhs = np.zeros(n)
    rhs[order] = 1.0
    return np.linalg.solve(a, rhs)


def fd_mixed_derivative(
    ast: ExprAst,
    base: tuple[complex, complex, complex, complex],
    alpha: tuple[int, int, int, int],
    h: float = 0.05,
) -> complex:
    """Mixed partial derivative of the polarized expression by nested central stencils.

    The four variables are perturbed independently (zbar is not tied to z),
    matching the formal-variable semantics of jet expansion.
    """

    def recurse(vals: tuple[complex, ...], remaining: tuple[int, ...]) -> complex:
        for i, m in enumerate(remaining):
            if m > 0:
                weights = _fd_weights(m)
                rest = remaining[:i] + (0,) + remaining[i + 1 :]
                total = 0j
                for off, w in zip(_FD_OFFSETS, weights):
                    if w == 0:
                        continue
                    shifted = vals[:i] + (vals[i] + off * h,) + vals[i + 1 :]
                    total += w * recurse(shifted, rest)
                return total / h**m
        return evaluate(ast, vals)

    return recurse(base, alpha)


def fd_second_jet_value(ast: ExprAst, q: tuple[complex, complex], h: float = 0.02) -> complex:
    """Finite-difference evaluation of the bordered-determinant invariant at a point.

    Assembles rho and its holomorphic derivatives up to order two from
    central differences and forms det/(rho_w)^3 directly, independent of the
    jet pipeline.
    """
    base = (q[0], q[0].conjugate(), q[1], q[1].conjugate())

    def d(alpha):
        return fd_mixed_derivative(ast, base, alpha, h)

    rho = evaluate(ast, base)
    rz = d((1, 0, 0, 0))
    rw = d((0, 0, 1, 0))
    rzz = d((2, 0, 0, 0))
    rzw = d((1, 0, 1, 0))
    rww = d((0, 0, 2, 0))
    det = rho * (rzz * rww - rzw * rzw) - rz * (rz * rww - rzw * rw) + rw * (rz * rzw - rzz * rw)
    return det / rw**3


# -- random rational expressions -------------------------------------------------


def random_rational_ast(rng: random.Random, max_terms: int = 5) -> ExprAst:
    """A rational expression whose denominator stays near 1 on the test polydisc."""

    def monomial(max_total: int) -> ExprAst:
        exps = [0, 0, 0, 0]
        for _ in range(rng.randint(1, max_total)):
            exps[rng.randrange(4)] += 1
        node: ExprAst = Lit(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
        for name, e in zip(("z", "zbar", "w", "wbar"), exps):
            if e:
                node = Mul(node, Pow(Var(name), e))
        return node

    num: ExprAst = monomial(3)
    for _ in range(rng.randint(1, max_terms - 1)):
        num = Add(num, monomial(3))
    den: ExprAst = Lit(1)
    for _ in range(rng.randint(1, 3)):
        den = Add(den, Mul(Lit(0.15), monomial(2)))
    return Div(num, den)


def random_polynomial_ast(rng: random.Random, holomorphic: bool = False, depth: int = 3) -> ExprAst:
    """A small random polynomial AST; holomorphic mode restricts to z, w."""
    names = ("z", "w") if holomorphic else ("z", "zbar", "w", "wbar")
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return Lit(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
        return Var(rng.choice(names))
    kind = rng.randrange(4 if holomorphic else 6)
    if kind == 0:
        return Add(random_polynomial_ast(rng, holomorphic, depth - 1), random_polynomial_ast(rng, holomorphic, depth - 1))
    if kind == 1:
        return Sub(random_polynomial_ast(rng, holomorphic, depth - 1), random_polynomial_ast(rng, holomorphic, depth - 1))
    if kind == 2:
        return Mul(random_polynomial_ast(rng, holomorphic, depth - 1), random_polynomial_ast(rng, holomorphic, depth - 1))
    if kind == 3:
        return Pow(random_polynomial_ast(rng, holomorphic, depth - 1), rng.randint(0, 3))
    if kind == 4:
        return Conj(random_polynomial_ast(rng, holomorphic, depth - 1))
    return rng.choice((Re, Im, Abs2))(random_polynomial_ast(rng, holomorphic, depth - 1))
