"""Text syntax for generalized polynomials.

Expressions use Python syntax in the single variable ``n``; square brackets
denote the nearest-integer bracket::

    >>> parse_gp("1/2*n*[1/3*n]").evaluate(3)
    Fraction(3, 2)
    >>> parse_gp("[2/3*n**2] - n/5").degree
    2

Numeric literals must be integers; ``1/3`` is read as an exact rational.
``^`` is accepted as a synonym for ``**``.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from typing import List, Tuple

from .genpoly import Bracket, GPExpr, Mono, Prod, Scale, Sum

__all__ = ["GPSyntaxError", "parse_gp", "parse_rational_expr", "format_gp"]


class GPSyntaxError(ValueError):
    pass


# a factor list: coefficient, power of n, bracketed children, general factors
_Factors = Tuple[Fraction, int, List[GPExpr], List[GPExpr]]


def _const(node) -> Fraction:
    """Evaluate a constant sub-expression exactly, or raise."""
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return Fraction(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _const(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _const(node.left), _const(node.right)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(node.op, ast.Div):
            if b == 0:
                raise GPSyntaxError("division by zero")
            return a / b
        if isinstance(node.op, ast.Pow) and b.denominator == 1 and b >= 0:
            return a ** int(b)
    raise GPSyntaxError(f"not a rational constant: {ast.unparse(node)}")


def _is_const(node) -> bool:
    try:
        _const(node)
    except GPSyntaxError:
        return False
    return True


def _factors(node) -> _Factors:
    if _is_const(node):
        return _const(node), 0, [], []
    if isinstance(node, ast.Name):
        if node.id != "n":
            raise GPSyntaxError(f"unknown variable {node.id!r}; only 'n' is allowed")
        return Fraction(1), 1, [], []
    if isinstance(node, ast.List):
        if len(node.elts) != 1:
            raise GPSyntaxError("a bracket must hold exactly one expression")
        return Fraction(1), 0, [_build(node.elts[0])], []
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        c, p, br, other = _factors(node.operand)
        return -c, p, br, other
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Mult):
            c1, p1, b1, o1 = _factors(node.left)
            c2, p2, b2, o2 = _factors(node.right)
            return c1 * c2, p1 + p2, b1 + b2, o1 + o2
        if isinstance(node.op, ast.Div):
            if not _is_const(node.right):
                raise GPSyntaxError("only division by a constant is allowed")
            c, p, br, other = _factors(node.left)
            divisor = _const(node.right)
            if divisor == 0:
                raise GPSyntaxError("division by zero")
            return c / divisor, p, br, other
        if isinstance(node.op, ast.Pow):
            if not _is_const(node.right):
                raise GPSyntaxError("exponents must be constant")
            e = _const(node.right)
            if e.denominator != 1 or e < 0:
                raise GPSyntaxError("exponents must be nonnegative integers")
            c, p, br, other = _factors(node.left)
            if other:
                raise GPSyntaxError("cannot raise a sum to a power")
            e = int(e)
            return c**e, p * e, br * e, []
        if isinstance(node.op, (ast.Add, ast.Sub)):
            return Fraction(1), 0, [], [_build(node)]
    if isinstance(node, ast.Constant):
        raise GPSyntaxError(f"literal {node.value!r} is not an integer; write rationals as p/q")
    raise GPSyntaxError(f"unsupported syntax: {ast.unparse(node)}")


def _from_factors(c: Fraction, p: int, brackets: List[GPExpr], other: List[GPExpr]) -> GPExpr:
    if other:
        if len(other) > 1 or p or brackets:
            raise GPSyntaxError("products of sums are not supported; expand them first")
        return other[0] if c == 1 else Scale(c, other[0])
    if not brackets:
        if p == 0 and c != 0:
            raise GPSyntaxError("nonzero constant terms are not generalized polynomials")
        return Mono(c, p)
    if c == 1 and p == 0 and len(brackets) == 1:
        return Bracket(brackets[0])
    return Prod(c, p, tuple(brackets))


def _terms(node, sign=1) -> List[Tuple[int, ast.AST]]:
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub)) and not _is_const(node):
        right_sign = sign if isinstance(node.op, ast.Add) else -sign
        return _terms(node.left, sign) + _terms(node.right, right_sign)
    return [(sign, node)]


def _build(node) -> GPExpr:
    terms = _terms(node)
    built = []
    for sign, term in terms:
        c, p, br, other = _factors(term)
        built.append(_from_factors(sign * c, p, br, other))
    return built[0] if len(built) == 1 else Sum(tuple(built))


def parse_gp(text: str) -> GPExpr:
    """Parse ``text`` into a :class:`~nilbohr.genpoly.GPExpr` tree."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise GPSyntaxError(f"cannot parse {text!r}: {exc.msg}") from exc
    return _build(tree.body)


def parse_rational_expr(text: str) -> Fraction:
    """Exact value of a constant expression such as ``"3/10"`` or ``"-1/2+1/3"``."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise GPSyntaxError(f"cannot parse {text!r}: {exc.msg}") from exc
    return _const(tree.body)


def format_gp(expr: GPExpr) -> str:
    """Render ``expr`` back into the text syntax (round-trips through :func:`parse_gp`)."""
    if isinstance(expr, Mono):
        return _mono(expr.coeff, expr.power)
    if isinstance(expr, Bracket):
        return f"[{format_gp(expr.child)}]"
    if isinstance(expr, Scale):
        return f"({expr.coeff})*({format_gp(expr.child)})"
    if isinstance(expr, Sum):
        return " + ".join(f"({format_gp(c)})" for c in expr.children)
    if isinstance(expr, Prod):
        parts = [_mono(expr.coeff, expr.power) if expr.power else f"({expr.coeff})"]
        parts.extend(f"[{format_gp(b)}]" for b in expr.brackets)
        return "*".join(parts)
    raise TypeError(f"unknown node {type(expr).__name__}")


def _mono(c: Fraction, p: int) -> str:
    if p == 0:
        return f"({c})"
    return f"({c})*n**{p}"
