"""Kernel tests: ring arithmetic, inversion, derivation, composition,
the implicit solver, and trust bookkeeping."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crsphere.jets import (
    ContextMismatch,
    Jet,
    JetContext,
    NotCentered,
    SingularJacobian,
    SingularNormalization,
    UntrustedRead,
    conjugate,
    eliminate,
    implicit_solve,
    inject,
    permute_vars,
    read_derivative,
    substitute,
)

from _oracles import solve_y_equals_x_plus_y_squared


def max_diff(a: Jet, b: Jet) -> float:
    return (a - b).max_trusted_abs()


# -- ring arithmetic ----------------------------------------------------------


def test_polynomial_identity_truncates():
    ctx = JetContext.get(1, 3)
    z = ctx.variable(0)
    prod = (1 + z) * (1 - z)
    assert prod.coefficient((0,)) == 1
    assert prod.coefficient((1,)) == 0
    assert prod.coefficient((2,)) == -1
    assert prod.coefficient((3,)) == 0


def test_four_variable_products():
    ctx = JetContext.get(4, 4)
    z, zb, w, wb = (ctx.variable(i) for i in range(4))
    j = z * zb + w * wb
    assert j.coefficient((1, 1, 0, 0)) == 1
    assert j.coefficient((0, 0, 1, 1)) == 1
    assert j.max_trusted_abs() == 1


def test_scalar_scaling():
    ctx = JetContext.get(1, 2)
    j = ctx.variable(0) * 1j
    assert j.coefficient((1,)) == 1j
    assert (2 - j).coefficient((0,)) == 2


def test_context_mismatch_raises():
    a = JetContext.get(1, 3).variable(0)
    b = JetContext.get(2, 3).variable(0)
    with pytest.raises(ContextMismatch):
        _ = a + b


# -- inversion ------------------------------------------------------------------


def test_invert_geometric_series():
    ctx = JetContext.get(1, 4)
    inv = (1 - ctx.variable(0)).invert()
    assert np.allclose(inv.coeffs, np.ones(5))


def test_invert_constant():
    assert JetContext.get(1, 3).constant(2.0).invert().value() == 0.5


def test_invert_zero_constant_term_raises():
    with pytest.raises(SingularNormalization):
        JetContext.get(1, 3).variable(0).invert()


# -- derivation --------------------------------------------------------------------


def test_derive_examples():
    ctx = JetContext.get(4, 4)
    z, zb, w = ctx.variable(0), ctx.variable(1), ctx.variable(2)
    assert (z * z).derive(0).coefficient((1, 0, 0, 0)) == 2
    assert (z * zb * w).derive(1).coefficient((1, 0, 1, 0)) == 1
    assert ctx.constant(3.0).derive(2).max_trusted_abs() == 0
    assert (z * z).derive(0).trust == ctx.degree - 1


# -- substitution ---------------------------------------------------------------------


def test_substitute_square_of_sum():
    sq = JetContext.get(1, 3).variable(0) ** 2
    ctx = JetContext.get(2, 3)
    out = substitute(sq, [ctx.variable(0) + ctx.variable(1)])
    assert out.coefficient((2, 0)) == 1
    assert out.coefficient((1, 1)) == 2
    assert out.coefficient((0, 2)) == 1


def test_substitute_identity_cases():
    one_plus = 1 + JetContext.get(1, 3).variable(0)
    ctx = JetContext.get(2, 3)
    assert substitute(one_plus, [ctx.zero()]).value() == 1
    prod = JetContext.get(2, 4).variable(0) * JetContext.get(2, 4).variable(1)
    ctx4 = JetContext.get(1, 4)
    z = ctx4.variable(0)
    assert substitute(prod, [z, z]).coefficient((2,)) == 1


def test_substitute_rejects_uncentered_args():
    sq = JetContext.get(1, 3).variable(0) ** 2
    ctx = JetContext.get(2, 3)
    with pytest.raises(NotCentered):
        substitute(sq, [ctx.constant(1.0)])
    # the recentering escape hatch is explicit
    out = substitute(sq, [1 + ctx.variable(0)], allow_constant=True)
    assert out.value() == 1
    assert out.coefficient((1, 0)) == 2


def test_eliminate_matches_substitute():
    ctx = JetContext.get(3, 5)
    x, y, z = (ctx.variable(i) for i in range(3))
    f = x * y + z * z * y + 2 * x
    ctx2 = JetContext.get(2, 5)
    repl = ctx2.variable(0) * ctx2.variable(1)  # z := x*y
    via_elim = eliminate(f, 2, repl)
    via_subst = substitute(f, [ctx2.variable(0), ctx2.variable(1), repl])
    assert max_diff(via_elim, via_subst) == 0


def test_inject_reindexes():
    ctx2 = JetContext.get(2, 4)
    f = ctx2.variable(0) * ctx2.variable(1)
    ctx4 = JetContext.get(4, 4)
    g = inject(f, ctx4, (3, 1))
    assert g.coefficient((0, 1, 0, 1)) == 1


def test_permute_and_conjugate():
    ctx = JetContext.get(4, 3)
    j = ctx.variable(0) * (2 + 1j)
    swapped = permute_vars(j, (2, 3, 0, 1))
    assert swapped.coefficient((0, 0, 1, 0)) == 2 + 1j
    conj = conjugate(j, (1, 0, 3, 2))
    assert conj.coefficient((0, 1, 0, 0)) == 2 - 1j


# -- implicit solver -----------------------------------------------------------------


def test_implicit_solve_catalan_against_brute_force():
    # oracle first: plain recursive substitution, frozen expected values
    oracle = solve_y_equals_x_plus_y_squared(6)
    assert [round(c.real) for c in oracle[1:6]] == [1, 1, 2, 5, 14]

    ctx = JetContext.get(2, 6)
    x, y = ctx.variable(0), ctx.variable(1)
    sol = implicit_solve([y - x - y * y], unknowns=[1])[0]
    for k in range(7):
        assert abs(sol.coefficient((k,)) - oracle[k]) < 1e-12


def test_implicit_solve_identity():
    ctx = JetContext.get(2, 5)
    x, y = ctx.variable(0), ctx.variable(1)
    sol = implicit_solve([y - x], unknowns=[1])[0]
    assert sol.coefficient((1,)) == 1
    assert sol.max_trusted_abs() == 1


def test_implicit_solve_singular_jacobian():
    ctx = JetContext.get(2, 5)
    x, y = ctx.variable(0), ctx.variable(1)
    with pytest.raises(SingularJacobian):
        implicit_solve([y * y - x], unknowns=[1])


def test_implicit_solve_two_unknowns():
    # u = x + v^2, v = 2x + u^2 has a unique low-order solution
    ctx = JetContext.get(3, 6)
    x, u, v = (ctx.variable(i) for i in range(3))
    sols = implicit_solve([u - x - v * v, v - 2 * x - u * u], unknowns=[1, 2])
    su, sv = sols
    assert abs(su.coefficient((1,)) - 1) < 1e-12
    assert abs(sv.coefficient((1,)) - 2) < 1e-12
    assert abs(su.coefficient((2,)) - 4) < 1e-12  # u2 = v1^2
    assert abs(sv.coefficient((2,)) - 1) < 1e-12  # v2 = u1^2


def test_implicit_solve_rejects_uncentered_system():
    ctx = JetContext.get(2, 4)
    x, y = ctx.variable(0), ctx.variable(1)
    with pytest.raises(NotCentered):
        implicit_solve([y - x + 1], unknowns=[1])


# -- reads and trust ------------------------------------------------------------------


def test_read_derivative_examples():
    ctx = JetContext.get(1, 4)
    z = ctx.variable(0)
    assert read_derivative(z * z, (2,)) == 2
    ctx4 = JetContext.get(4, 4)
    zz = ctx4.variable(0) * ctx4.variable(1)
    assert read_derivative(zz, (1, 1, 0, 0)) == 1


def test_reads_beyond_trust_error():
    ctx = JetContext.get(1, 4)
    j = ctx.variable(0).with_trust(0)
    with pytest.raises(UntrustedRead):
        read_derivative(j, (1,))
    negative = j.with_trust(-1)
    with pytest.raises(UntrustedRead):
        negative.value()
    with pytest.raises(UntrustedRead):
        negative.max_trusted_abs()
    with pytest.raises(UntrustedRead):
        negative.invert()


def test_trust_bookkeeping_is_monotone():
    ctx = JetContext.get(2, 6)
    a = (1 + ctx.variable(0)).with_trust(4)
    b = (2 + ctx.variable(1)).with_trust(3)
    assert (a + b).trust == 3
    assert (a * b).trust == 3
    assert a.derive(0).trust == 3
    assert a.invert().trust == 4
    assert substitute(a, [ctx.variable(0), ctx.variable(1)]).trust == 4


# -- property tests ---------------------------------------------------------------------


_CTX = JetContext.get(2, 5)


@st.composite
def jets_(draw, ctx=_CTX, min_const=None):
    n = draw(st.integers(1, 5))
    coeffs = np.zeros(ctx.nterms, dtype=complex)
    for _ in range(n):
        r = draw(st.integers(0, ctx.nterms - 1))
        coeffs[r] += complex(
            draw(st.floats(-2, 2, allow_nan=False)), draw(st.floats(-2, 2, allow_nan=False))
        )
    if min_const is not None and abs(coeffs[0]) < min_const:
        coeffs[0] = min_const * (1 + 1j)
    return Jet(ctx, coeffs, ctx.degree)


@settings(max_examples=40, deadline=None)
@given(jets_(), jets_(), jets_())
def test_ring_laws(a, b, c):
    scale = max(1.0, a.max_trusted_abs(), b.max_trusted_abs(), c.max_trusted_abs())
    assert max_diff((a * b) * c, a * (b * c)) <= 1e-12 * scale**3
    assert max_diff(a * (b + c), a * b + a * c) <= 1e-12 * scale**2
    # summation order may differ between operand roles
    assert max_diff(a * b, b * a) <= 1e-14 * scale**2


@settings(max_examples=40, deadline=None)
@given(jets_(min_const=0.1))
def test_invert_is_two_sided_inverse(a):
    inv = a.invert()
    residual = a * inv - 1
    # scale by the largest coefficient that participates: the inverse of a
    # barely-nonsingular jet legitimately has large entries
    scale = max(1.0, float(np.abs(a.coeffs).max()), float(np.abs(inv.coeffs).max()))
    assert residual.max_trusted_abs() <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(jets_(), jets_(), jets_())
def test_chain_rule(a, g0, g1):
    # strip constant terms so the composition is centered
    g0 = g0 - complex(g0.coeffs[0])
    g1 = g1 - complex(g1.coeffs[0])
    args = [g0, g1]
    lhs = substitute(a, args).derive(0)
    rhs = substitute(a.derive(0), args) * g0.derive(0) + substitute(a.derive(1), args) * g1.derive(0)
    scale = max(1.0, float(np.abs(a.coeffs).max())) * max(
        1.0, float(np.abs(g0.coeffs).max()), float(np.abs(g1.coeffs).max())
    ) ** 5
    assert max_diff(lhs, rhs) <= 1e-10 * scale
