"""Generalized polynomials built from monomials and the nearest-integer bracket.

All scalars are :class:`fractions.Fraction`.  The bracket ``[x]`` is the
smallest integer closest to ``x``, so ties go down (``[1/2] = 0``,
``[-1/2] = -1``) and the residual ``x - [x]`` lies in ``(-1/2, 1/2]``.

Expression trees are plain frozen dataclasses with no canonicalization;
two trees that describe the same function are compared by evaluation only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple, Union

RationalLike = Union[Fraction, int, str]

__all__ = [
    "as_rational",
    "nearest_int",
    "dist_to_int",
    "residual",
    "eval_L",
    "GPExpr",
    "Mono",
    "Bracket",
    "Scale",
    "Sum",
    "Prod",
    "eval_gp",
    "gp_degree",
    "SGPSpec",
    "eval_sgp",
    "compositions_of",
    "alpha_block",
    "eval_U",
    "eval_P",
    "LevelSetSpec",
    "level_set",
]


def as_rational(x: RationalLike) -> Fraction:
    """Coerce ``x`` to an exact Fraction.

    Strings are parsed as ``"p/q"`` or decimal literals; floats are refused
    because they would silently smuggle rounding into exact computations.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational {x!r}") from exc
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass 'p/q' strings or Fractions")
    # numbers.Rational duck-typing (e.g. gmpy2.mpq)
    return Fraction(int(x.numerator), int(x.denominator))


def nearest_int(x) -> int:
    """Smallest integer at minimal distance from ``x``."""
    if isinstance(x, float):
        return math.ceil(x - 0.5)
    x = as_rational(x)
    p, q = x.numerator, x.denominator
    # ceil((2p - q) / 2q)
    return -((q - 2 * p) // (2 * q))


def residual(x):
    """``x - nearest_int(x)``, always in ``(-1/2, 1/2]``."""
    return x - nearest_int(x)


def dist_to_int(x):
    return abs(residual(x))


def eval_L(values: Sequence):
    """Nested bracket word ``L(a1, ..., al) = a1 * [L(a2, ..., al)]``."""
    if not values:
        raise ValueError("eval_L needs at least one value")
    acc = values[-1]
    for a in reversed(values[:-1]):
        acc = a * nearest_int(acc)
    return acc


# ---------------------------------------------------------------------------
# expression trees


class GPExpr:
    """Base class of generalized-polynomial expression nodes."""

    def evaluate(self, n: int, exact: bool = True):
        raise NotImplementedError

    @property
    def degree(self) -> int:
        raise NotImplementedError

    def __call__(self, n: int):
        return self.evaluate(n)


def _coeff(c, exact):
    return c if exact else float(c)


@dataclass(frozen=True)
class Mono(GPExpr):
    """``coeff * n**power``."""

    coeff: Fraction
    power: int

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_rational(self.coeff))
        if self.power < 0:
            raise ValueError("monomial power must be >= 0")
        if self.power == 0 and self.coeff != 0:
            raise ValueError("a constant monomial must be zero (GP vanish at 0)")

    def evaluate(self, n, exact=True):
        return _coeff(self.coeff, exact) * n**self.power

    @property
    def degree(self):
        return self.power


@dataclass(frozen=True)
class Bracket(GPExpr):
    """``[child]``, the nearest integer to the child."""

    child: GPExpr

    def evaluate(self, n, exact=True):
        return nearest_int(self.child.evaluate(n, exact))

    @property
    def degree(self):
        return self.child.degree


@dataclass(frozen=True)
class Scale(GPExpr):
    coeff: Fraction
    child: GPExpr

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_rational(self.coeff))

    def evaluate(self, n, exact=True):
        return _coeff(self.coeff, exact) * self.child.evaluate(n, exact)

    @property
    def degree(self):
        return self.child.degree


@dataclass(frozen=True)
class Sum(GPExpr):
    children: Tuple[GPExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("Sum needs at least one child")

    def evaluate(self, n, exact=True):
        return sum((c.evaluate(n, exact) for c in self.children), 0 if exact else 0.0)

    @property
    def degree(self):
        return max(c.degree for c in self.children)


@dataclass(frozen=True)
class Prod(GPExpr):
    """``coeff * n**power * [f1] * ... * [fk]``."""

    coeff: Fraction
    power: int
    brackets: Tuple[GPExpr, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_rational(self.coeff))
        object.__setattr__(self, "brackets", tuple(self.brackets))
        if self.power < 0:
            raise ValueError("power must be >= 0")
        if self.power == 0 and not self.brackets and self.coeff != 0:
            raise ValueError("a constant product must be zero (GP vanish at 0)")

    def evaluate(self, n, exact=True):
        value = _coeff(self.coeff, exact) * n**self.power
        for f in self.brackets:
            value *= nearest_int(f.evaluate(n, exact))
        return value

    @property
    def degree(self):
        return self.power + sum(f.degree for f in self.brackets)


def eval_gp(expr: GPExpr, n: int, exact: bool = True):
    """Evaluate ``expr`` at the integer ``n``.

    ``exact=False`` switches to floats; it is a fast path for large scans
    and its brackets can disagree with the exact ones near half-integers.
    """
    return expr.evaluate(n, exact)


def gp_degree(expr: GPExpr) -> int:
    return expr.degree


# ---------------------------------------------------------------------------
# special generalized polynomials and the master polynomial


@dataclass(frozen=True)
class SGPSpec:
    """``L(n**j1 * a1, ..., n**jl * al)`` given as ``((j1, a1), ...)``."""

    terms: Tuple[Tuple[int, Fraction], ...]

    def __post_init__(self):
        terms = tuple((int(j), as_rational(a)) for j, a in self.terms)
        if not terms:
            raise ValueError("SGPSpec needs at least one term")
        if any(j < 1 for j, _ in terms):
            raise ValueError("SGP powers must be >= 1")
        object.__setattr__(self, "terms", terms)

    @property
    def degree(self) -> int:
        return sum(j for j, _ in self.terms)


def eval_sgp(spec: SGPSpec, n: int) -> Fraction:
    return eval_L([n**j * a for j, a in spec.terms])


@lru_cache(maxsize=None)
def compositions_of(d: int) -> Tuple[Tuple[int, ...], ...]:
    """Ordered compositions of ``d``, largest first.

    The order compares tuples at their first differing position; since all
    tuples sum to ``d`` no tuple is a proper prefix of another, so this is
    reverse lexicographic order.  ``(d,)`` comes first, ``(1,) * d`` last.
    """
    if d < 1:
        raise ValueError("d must be >= 1")

    def build(rest):
        if rest == 0:
            yield ()
            return
        for first in range(1, rest + 1):
            for tail in build(rest - first):
                yield (first,) + tail

    return tuple(sorted(build(d), reverse=True))


def _check_alpha(alpha) -> Tuple[Fraction, ...]:
    alpha = tuple(as_rational(a) for a in alpha)
    if not alpha:
        raise ValueError("alpha must have at least one entry")
    return alpha


@lru_cache(maxsize=256)
def _scaled_segments(alpha: Tuple[Fraction, ...]):
    """``(start, length) -> alpha[start] * ... * alpha[start+length-1] / length!``."""
    table = {}
    for start in range(len(alpha)):
        prod = Fraction(1)
        for length in range(1, len(alpha) - start + 1):
            prod *= alpha[start + length - 1]
            table[start, length] = prod / math.factorial(length)
    return table


def alpha_block(n: int, alpha: Sequence[Fraction], start: int, length: int) -> Fraction:
    """``n**length / length! * alpha[start] * ... * alpha[start+length-1]`` (0-based)."""
    return n**length * _scaled_segments(tuple(alpha))[start, length]


def _blocks(n, alpha, js):
    segments = _scaled_segments(alpha)
    out = []
    start = 0
    for j in js:
        out.append(n**j * segments[start, j])
        start += j
    return out


def eval_U(n: int, j: Sequence[int], alpha: Sequence) -> Fraction:
    """Chained residual product: each stage is the fractional residual of the
    previous stage times the next monomial block."""
    alpha = _check_alpha(alpha)
    j = tuple(j)
    if not j or any(t < 1 for t in j):
        raise ValueError("j must be a nonempty tuple of positive integers")
    if sum(j) > len(alpha):
        raise ValueError(f"sum(j) = {sum(j)} exceeds d = {len(alpha)}")
    blocks = _blocks(n, alpha, j)
    value = blocks[0]
    for b in blocks[1:]:
        value = residual(value) * b
    return value


def eval_P(n: int, alpha: Sequence) -> Fraction:
    """Alternating sum of bracket words over all compositions of ``d = len(alpha)``."""
    alpha = _check_alpha(alpha)
    total = Fraction(0)
    for js in compositions_of(len(alpha)):
        term = eval_L(_blocks(n, alpha, js))
        total += term if len(js) % 2 == 1 else -term
    return total


# ---------------------------------------------------------------------------
# level sets


@dataclass(frozen=True)
class LevelSetSpec:
    """Conjunction of constraints ``||expr(n)|| < epsilon``."""

    constraints: Tuple[Tuple[GPExpr, Fraction], ...] = ()

    def __post_init__(self):
        cons = tuple((expr, as_rational(eps)) for expr, eps in self.constraints)
        for _, eps in cons:
            if eps <= 0:
                raise ValueError("epsilon must be positive")
        object.__setattr__(self, "constraints", cons)

    def __add__(self, other: "LevelSetSpec") -> "LevelSetSpec":
        return LevelSetSpec(self.constraints + other.constraints)

    def contains(self, n: int, exact: bool = True) -> bool:
        for expr, eps in self.constraints:
            value = expr.evaluate(n, exact)
            if dist_to_int(value) >= (eps if exact else float(eps)):
                return False
        return True


def level_set(spec: LevelSetSpec, window, exact: bool = True):
    """Members ``n`` of ``window`` satisfying every constraint of ``spec``."""
    from .setfam import IndexSet, as_window

    lo, hi = as_window(window)
    return IndexSet(lo, hi, [n for n in range(lo, hi + 1) if spec.contains(n, exact)])

