"""Arithmetic expression trees for implicit surface definitions.

Grammar (EBNF):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)*          # integer exponents only, right assoc
    base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base

Identifiers are either coordinate variables (``x, y, z`` or ``x1..x4``),
bound parameters, or one of the supported function names
(sqrt, sin, cos, exp, log).  Exponents must be integer literals so that
derivative propagation stays closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


FUNCTIONS = ("sqrt", "sin", "cos", "exp", "log")

#: coordinate aliases accepted per dimension
VARIABLE_NAMES = {
    2: (("x", "y"), ("x1", "x2")),
    3: (("x", "y", "z"), ("x1", "x2", "x3")),
    4: (("x1", "x2", "x3", "x4"),),
}


class ParseError(ValueError):
    """Malformed expression text.

    Carries the character offset and a short description of what was
    expected there.
    """

    def __init__(self, message, position, expected=None):
        self.position = position
        self.expected = expected
        detail = f"{message} at offset {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class NonIntegerExponentError(ParseError):
    """'^' exponent was not an integer literal."""


class UnknownIdentifierError(ValueError):
    """Identifier is neither a declared variable nor a bound parameter."""


# AST nodes ------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Num | Name | Neg | BinOp | Pow | Call


# Tokenizer ------------------------------------------------------------------

_OPS = "+-*/^()"


def _tokenize(text):
    """Yield (kind, value, position) triples; kinds: num, ident, op."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            seen_e = False
            while j < n:
                cj = text[j]
                if cj.isdigit() or cj == ".":
                    j += 1
                elif cj in "eE" and not seen_e and j + 1 < n and (
                    text[j + 1].isdigit() or text[j + 1] in "+-"
                ):
                    seen_e = True
                    j += 2 if text[j + 1] in "+-" else 1
                else:
                    break
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ParseError(f"bad number literal '{lit}'", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character '{c}'", i)
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, position = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"found '{value or 'end of input'}'", position, expected=f"'{op}'")
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, position = self.peek()
        if kind != "eof":
            raise ParseError(f"trailing input '{value}'", position, expected="end of input")
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.factor())
            else:
                return node

    def factor(self):
        node = self.base()
        exponents = []
        while True:
            kind, value, position = self.peek()
            if kind == "op" and value == "^":
                self.advance()
                exponents.append((self.exponent_literal(), position))
            else:
                break
        if exponents:
            # right associativity: x^2^3 == x^(2^3); the folded tower must
            # stay an integer (2^-1 in exponent position is rejected)
            acc = exponents[-1][0]
            for e, position in reversed(exponents[:-1]):
                acc = e ** acc
                if acc != int(acc):
                    raise NonIntegerExponentError(
                        f"exponent tower evaluates to {acc}", position,
                        expected="integer exponent")
            node = Pow(node, int(acc))
        return node

    def exponent_literal(self):
        kind, value, position = self.peek()
        negate = False
        if kind == "op" and value == "-":
            negate = True
            self.advance()
            kind, value, position = self.peek()
        if kind != "num":
            raise NonIntegerExponentError(
                f"found '{value or 'end of input'}'", position, expected="integer literal"
            )
        if value != int(value):
            raise NonIntegerExponentError(
                f"non-integer exponent {value}", position, expected="integer literal"
            )
        self.advance()
        exponent = int(value)
        return -exponent if negate else exponent

    def base(self):
        kind, value, position = self.advance()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "-":
            return Neg(self.base_or_power())
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if value not in FUNCTIONS:
                    raise UnknownIdentifierError(
                        f"unknown function '{value}' at offset {position}; "
                        f"supported: {', '.join(FUNCTIONS)}"
                    )
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            return Name(value)
        raise ParseError(f"found '{value or 'end of input'}'", position,
                         expected="number, identifier or '('")

    def base_or_power(self):
        # '-' binds looser than '^': -x^2 is -(x^2)
        node = self.base()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            node = Pow(node, self.exponent_literal())
        return node


def parse_expression(text):
    """Parse expression text into an AST.

    Raises ParseError (with position), NonIntegerExponentError, or
    UnknownIdentifierError for unknown function names.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0, expected="expression")
    return _Parser(text).parse()


# Unparser -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Pow):
        return _PREC["^"]
    return _PREC["atom"]


def unparse(node):
    """Render an AST back to text; parse(unparse(t)) is structurally t."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    if isinstance(node, Neg):
        inner = unparse(node.arg)
        if _prec(node.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        inner = unparse(node.base)
        if _prec(node.base) <= _PREC["^"]:
            inner = f"({inner})"
        exp = str(node.exponent) if node.exponent >= 0 else f"-{-node.exponent}"
        return f"{inner}^{exp}"
    if isinstance(node, BinOp):
        left = unparse(node.left)
        right = unparse(node.right)
        if _prec(node.left) < _PREC[node.op]:
            left = f"({left})"
        # left-associative: parenthesize right child at equal precedence
        if _prec(node.right) <= _PREC[node.op]:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


# Analysis helpers -----------------------------------------------------------


def identifiers(node):
    """Set of identifier names referenced by the tree (excludes functions)."""
    if isinstance(node, Name):
        return {node.ident}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return identifiers(node.arg)
    if isinstance(node, Call):
        return identifiers(node.arg)
    if isinstance(node, Pow):
        return identifiers(node.base)
    return identifiers(node.left) | identifiers(node.right)


def check_bindings(node, variables, params):
    """Verify every identifier is a declared variable or bound parameter."""
    free = identifiers(node) - set(variables) - set(params)
    if free:
        raise UnknownIdentifierError(
            f"unbound identifier(s): {', '.join(sorted(free))}"
        )


def canonicalize_variables(node, dimension):
    """Rewrite coordinate aliases (x1, x2, ...) to the canonical names.

    After this pass a dimension-3 tree only refers to x, y, z, so
    differentiation and compilation need a single name per axis.
    """
    canonical = VARIABLE_NAMES[dimension][0]
    rename = {}
    for alias_tuple in VARIABLE_NAMES[dimension]:
        for axis, name in enumerate(alias_tuple):
            rename[name] = canonical[axis]

    def rec(n):
        if isinstance(n, Name) and n.ident in rename:
            return Name(rename[n.ident])
        if isinstance(n, Neg):
            return Neg(rec(n.arg))
        if isinstance(n, Call):
            return Call(n.func, rec(n.arg))
        if isinstance(n, Pow):
            return Pow(rec(n.base), n.exponent)
        if isinstance(n, BinOp):
            return BinOp(n.op, rec(n.left), rec(n.right))
        return n

    return rec(node)


def differentiate(node, ident):
    """Structural partial derivative with respect to one identifier.

    No simplification beyond constant folding of literal zeros and ones;
    used for fast gradient callables, not symbolic work.
    """
    zero = Num(0.0)
    if isinstance(node, Num):
        return zero
    if isinstance(node, Name):
        return Num(1.0) if node.ident == ident else zero
    if isinstance(node, Neg):
        return _neg(differentiate(node.arg, ident))
    if isinstance(node, BinOp):
        dl = differentiate(node.left, ident)
        dr = differentiate(node.right, ident)
        if node.op == "+":
            return _add(dl, dr)
        if node.op == "-":
            return _sub(dl, dr)
        if node.op == "*":
            return _add(_mul(dl, node.right), _mul(node.left, dr))
        # quotient rule
        num = _sub(_mul(dl, node.right), _mul(node.left, dr))
        return BinOp("/", num, Pow(node.right, 2)) if not _is_zero(num) else zero
    if isinstance(node, Pow):
        db = differentiate(node.base, ident)
        if _is_zero(db) or node.exponent == 0:
            return zero
        factor = _mul(Num(float(node.exponent)), Pow(node.base, node.exponent - 1))
        return _mul(factor, db)
    if isinstance(node, Call):
        da = differentiate(node.arg, ident)
        if _is_zero(da):
            return zero
        outer = {
            "sqrt": BinOp("/", Num(0.5), Call("sqrt", node.arg)),
            "sin": Call("cos", node.arg),
            "cos": Neg(Call("sin", node.arg)),
            "exp": Call("exp", node.arg),
            "log": BinOp("/", Num(1.0), node.arg),
        }[node.func]
        return _mul(outer, da)
    raise TypeError(f"not an expression node: {node!r}")


def _is_zero(node):
    return isinstance(node, Num) and node.value == 0.0


def _is_one(node):
    return isinstance(node, Num) and node.value == 1.0


def _neg(a):
    return a if _is_zero(a) else Neg(a)


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_zero(b):
        return a
    if _is_zero(a):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return Num(0.0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return BinOp("*", a, b)


def to_callable(node, variables, params=None):
    """Compile the tree to a numpy-vectorized function of the variables.

    Returns f with signature f(points) where points has shape (N,) or
    (N, B).  Parameter values are baked in at compile time.
    """
    import numpy as np  # local to keep module import light

    params = dict(params or {})
    check_bindings(node, variables, params)
    names = {name: f"v[{i}]" for i, name in enumerate(variables)}

    def emit(n):
        if isinstance(n, Num):
            return repr(n.value)
        if isinstance(n, Name):
            if n.ident in names:
                return names[n.ident]
            return repr(float(params[n.ident]))
        if isinstance(n, Neg):
            return f"(-{emit(n.arg)})"
        if isinstance(n, BinOp):
            return f"({emit(n.left)} {n.op} {emit(n.right)})"
        if isinstance(n, Pow):
            return f"({emit(n.base)} ** {n.exponent})"
        if isinstance(n, Call):
            return f"np.{n.func}({emit(n.arg)})"
        raise TypeError(repr(n))

    source = f"lambda v: ({emit(node)}) + 0.0 * v[0]"
    return eval(source, {"np": np, "math": math})  # noqa: S307 (own AST only)
