"""Parser and jet expansion for the defining-function DSL.

The language describes real-valued defining functions of hypersurfaces in C^2
as expressions in the four formal variables ``z, zbar, w, wbar`` with complex
literals (``i`` is the imaginary unit), the operators ``+ - * / ^`` and the
unary functions ``conj, Re, Im, abs2``.  Precedence is ``^`` above unary
minus above ``* /`` above ``+ -``; exponents are integer literals and a
negative exponent is lowered to a division at parse time.  The full grammar
ships in ``docs/grammar.ebnf``.

Expansion to jets never differentiates symbolically: the AST is evaluated
bottom-up in jet arithmetic after recentering every variable at the base
point, so jets are always centered at 0 in offset coordinates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .jets import Jet, JetContext, conjugate

__all__ = [
    "ExprAst",
    "Var",
    "Lit",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Conj",
    "Re",
    "Im",
    "Abs2",
    "ParseError",
    "parse",
    "to_string",
    "expand_at",
    "evaluate",
    "check_real",
]

VAR_NAMES = ("z", "zbar", "w", "wbar")

#: Variable permutation realizing formal conjugation (z <-> zbar, w <-> wbar).
CONJ_PERM = (1, 0, 3, 2)


class ExprAst:
    """Base class for expression nodes.  Nodes are frozen and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(ExprAst):
    name: str

    @property
    def index(self) -> int:
        return VAR_NAMES.index(self.name)


@dataclass(frozen=True)
class Lit(ExprAst):
    value: complex


@dataclass(frozen=True)
class Add(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Sub(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Mul(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Div(ExprAst):
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Pow(ExprAst):
    base: ExprAst
    exponent: int  # non-negative; negative powers are lowered to Div at parse time


@dataclass(frozen=True)
class Conj(ExprAst):
    arg: ExprAst


@dataclass(frozen=True)
class Re(ExprAst):
    arg: ExprAst


@dataclass(frozen=True)
class Im(ExprAst):
    arg: ExprAst


@dataclass(frozen=True)
class Abs2(ExprAst):
    arg: ExprAst


_FUNCTIONS = {"conj": Conj, "Re": Re, "Im": Im, "abs2": Abs2}


class ParseError(Exception):
    """Parse diagnostic: byte offset into the input plus a message."""

    def __init__(self, position: int, message: str):
        super().__init__(f"at offset {position}: {message}")
        self.position = position
        self.message = message


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(at, f"unexpected character {stripped[0]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ParseError(pos, f"expected {op!r}")

    def parse(self) -> ExprAst:
        kind, _, pos = self.peek()
        if kind == "end":
            raise ParseError(pos, "empty input")
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(pos, f"unexpected {text!r}")
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                right = self.term()
                node = Add(node, right) if text == "+" else Sub(node, right)
            else:
                return node

    def term(self) -> ExprAst:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                right = self.unary()
                node = Mul(node, right) if text == "*" else Div(node, right)
            else:
                return node

    def unary(self) -> ExprAst:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Mul(Lit(-1), self.unary())
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            n = self.exponent()
            if n < 0:
                return Div(Lit(1), Pow(base, -n))
            return Pow(base, n)
        return base

    def exponent(self) -> int:
        sign = 1
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            sign = -1
            kind, text, pos = self.peek()
        if kind != "num" or not text.isdigit():
            raise ParseError(pos, "expected an integer exponent")
        self.advance()
        return sign * int(text)

    def atom(self) -> ExprAst:
        kind, text, pos = self.advance()
        if kind == "num":
            return Lit(complex(float(text)))
        if kind == "ident":
            if text == "i":
                return Lit(1j)
            if text in VAR_NAMES:
                return Var(text)
            if text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return _FUNCTIONS[text](arg)
            raise ParseError(pos, f"unknown identifier {text!r}")
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise ParseError(pos, "unexpected end of input")
        raise ParseError(pos, f"unexpected {text!r}")


def parse(text: str) -> ExprAst:
    """Parse a DSL string into an AST; raises :class:`ParseError` with an offset."""
    return _Parser(text).parse()


def to_string(ast: ExprAst) -> str:
    """Render an AST back to parseable DSL text (fully parenthesized)."""
    match ast:
        case Var(name):
            return name
        case Lit(value):
            if value == 1j:
                return "i"
            if value.imag == 0:
                v = value.real
                return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(v)
            re_s = to_string(Lit(complex(value.real)))
            im_s = to_string(Lit(complex(value.imag)))
            return f"({re_s} + {im_s}*i)"
        case Add(a, b):
            return f"({to_string(a)} + {to_string(b)})"
        case Sub(a, b):
            return f"({to_string(a)} - {to_string(b)})"
        case Mul(a, b):
            return f"({to_string(a)} * {to_string(b)})"
        case Div(a, b):
            return f"({to_string(a)} / {to_string(b)})"
        case Pow(base, n):
            return f"({to_string(base)})^{n}"
        case Conj(arg):
            return f"conj({to_string(arg)})"
        case Re(arg):
            return f"Re({to_string(arg)})"
        case Im(arg):
            return f"Im({to_string(arg)})"
        case Abs2(arg):
            return f"abs2({to_string(arg)})"
    raise TypeError(f"not an expression node: {ast!r}")


def expand_at(ast: ExprAst, point: tuple[complex, complex], ctx: JetContext) -> Jet:
    """Degree-D Taylor jet of the expression at ``point``.

    The four variables are treated as independent formal variables, centered
    at ``(p, conj(p))``: the jet's variable i is the offset of ``VAR_NAMES[i]``
    from its base value.  Division requires the denominator jet to have a
    nonzero constant term.
    """
    if ctx.nvars != 4:
        raise ValueError("expansion needs a 4-variable context (z, zbar, w, wbar)")
    if ctx.degree < 2:
        raise ValueError("expansion context must have degree >= 2")
    z0, w0 = complex(point[0]), complex(point[1])
    base = (z0, z0.conjugate(), w0, w0.conjugate())

    def walk(node: ExprAst) -> Jet:
        match node:
            case Var():
                return ctx.variable(node.index) + base[node.index]
            case Lit(value):
                return ctx.constant(value)
            case Add(a, b):
                return walk(a) + walk(b)
            case Sub(a, b):
                return walk(a) - walk(b)
            case Mul(a, b):
                return walk(a) * walk(b)
            case Div(a, b):
                return walk(a) * walk(b).invert()
            case Pow(b, n):
                return walk(b) ** n
            case Conj(arg):
                return conjugate(walk(arg), CONJ_PERM)
            case Re(arg):
                j = walk(arg)
                return (j + conjugate(j, CONJ_PERM)) * 0.5
            case Im(arg):
                j = walk(arg)
                return (j - conjugate(j, CONJ_PERM)) * -0.5j
            case Abs2(arg):
                j = walk(arg)
                return j * conjugate(j, CONJ_PERM)
        raise TypeError(f"not an expression node: {node!r}")

    return walk(ast)


def evaluate(ast: ExprAst, values: tuple[complex, complex, complex, complex]) -> complex:
    """Numeric evaluation with the four variables treated as independent.

    On the real slice (``zbar = conj(z)``, ``wbar = conj(w)``) this is the
    ordinary value of the expression.  Off the slice it is the polarized
    extension, which is what finite-difference oracles of mixed Wirtinger
    derivatives need; conjugation nodes then act by the reflection
    ``conj(f)(x) = conj(f(conj(x_swapped)))``.
    """
    x = tuple(complex(v) for v in values)

    def reflect(vals):
        return (
            vals[1].conjugate(),
            vals[0].conjugate(),
            vals[3].conjugate(),
            vals[2].conjugate(),
        )

    def walk(node: ExprAst, vals) -> complex:
        match node:
            case Var():
                return vals[node.index]
            case Lit(value):
                return complex(value)
            case Add(a, b):
                return walk(a, vals) + walk(b, vals)
            case Sub(a, b):
                return walk(a, vals) - walk(b, vals)
            case Mul(a, b):
                return walk(a, vals) * walk(b, vals)
            case Div(a, b):
                return walk(a, vals) / walk(b, vals)
            case Pow(b, n):
                return walk(b, vals) ** n
            case Conj(arg):
                return walk(arg, reflect(vals)).conjugate()
            case Re(arg):
                return 0.5 * (walk(arg, vals) + walk(arg, reflect(vals)).conjugate())
            case Im(arg):
                return -0.5j * (walk(arg, vals) - walk(arg, reflect(vals)).conjugate())
            case Abs2(arg):
                return walk(arg, vals) * walk(arg, reflect(vals)).conjugate()
        raise TypeError(f"not an expression node: {node!r}")

    return walk(ast, x)


def check_real(jet: Jet, tol: float) -> bool:
    """True iff the jet is a real-valued series in the paired variables.

    Coefficientwise: ``coeff(z^a zbar^b w^c wbar^d)`` must equal the conjugate
    of ``coeff(z^b zbar^a w^d wbar^c)`` within ``tol``.
    """
    if jet.ctx.nvars != 4:
        raise ValueError("reality check needs a 4-variable context")
    return (jet - conjugate(jet, CONJ_PERM)).max_trusted_abs() <= tol
