"""Exact arithmetic in the unipotent upper-triangular group G_d.

A group element is stored by its strictly upper entries ``a[i, k]`` where
``k`` is the superdiagonal (1..d) and ``i`` the row (1..d-k+1); the full
matrix is ``(d+1) x (d+1)`` with ones on the diagonal.  The integer lattice
``Gamma`` consists of the elements whose entries are all integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterator, List, NamedTuple, Sequence, Tuple

from .genpoly import as_rational, nearest_int

__all__ = [
    "binomial",
    "entry_index",
    "UTMatrix",
    "NilpotentUT",
    "identity",
    "mul",
    "inv",
    "pow_closed",
    "pow_iterated",
    "pow_general",
    "pow_polynomial",
    "power_coefficients",
    "Norm",
    "frobenius_norm",
    "ReducedPoint",
    "reduce_mod_lattice",
    "exp_nilpotent",
    "log_unipotent",
    "lie_bracket",
    "cbh",
    "MetricReport",
    "metric_bounds_check",
]

Matrix = List[List[Fraction]]


def binomial(n: int, k: int) -> int:
    """Polynomial binomial ``n (n-1) ... (n-k+1) / k!``; valid for negative ``n``."""
    if k < 0:
        return 0
    if n >= 0:
        return math.comb(n, k)
    return (-1) ** k * math.comb(k - n - 1, k)


@lru_cache(maxsize=None)
def entry_index(d: int) -> Tuple[Tuple[int, int], ...]:
    """Storage order ``(i, k)``: by superdiagonal ``k``, then row ``i``."""
    return tuple((i, k) for k in range(1, d + 1) for i in range(1, d - k + 2))


class _Triangular:
    """Shared storage for UTMatrix and NilpotentUT."""

    d: int
    entries: Tuple[Fraction, ...]

    _diag = 1

    def _init(self):
        if self.d < 1:
            raise ValueError("dimension d must be >= 1")
        entries = tuple(as_rational(x) for x in self.entries)
        if len(entries) != self.d * (self.d + 1) // 2:
            raise ValueError(
                f"expected {self.d * (self.d + 1) // 2} entries for d = {self.d}, got {len(entries)}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_dict(cls, d: int, values: Dict[Tuple[int, int], Fraction]):
        return cls(d, [values.get(ik, 0) for ik in entry_index(d)])

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence]):
        d = len(rows) - 1
        return cls(d, [rows[i - 1][i - 1 + k] for i, k in entry_index(d)])

    @cached_property
    def _lookup(self) -> Dict[Tuple[int, int], Fraction]:
        return dict(zip(entry_index(self.d), self.entries))

    def __getitem__(self, ik: Tuple[int, int]) -> Fraction:
        i, k = ik
        if k == 0:
            return Fraction(self._diag)
        return self._lookup[ik]

    def items(self) -> Iterator[Tuple[Tuple[int, int], Fraction]]:
        return iter(self._lookup.items())

    def to_matrix(self) -> Matrix:
        size = self.d + 1
        rows = [[Fraction(0)] * size for _ in range(size)]
        for r in range(size):
            rows[r][r] = Fraction(self._diag)
        for (i, k), v in self.items():
            rows[i - 1][i - 1 + k] = v
        return rows

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries)


@dataclass(frozen=True)
class UTMatrix(_Triangular):
    """Element of G_d: unipotent, upper triangular, size ``d + 1``."""

    d: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        self._init()

    def __matmul__(self, other: "UTMatrix") -> "UTMatrix":
        return mul(self, other)

    def __pow__(self, n: int) -> "UTMatrix":
        return pow_general(self, n)

    @cached_property
    def _power_coefficients(self):
        return _compute_power_coefficients(self)


@dataclass(frozen=True)
class NilpotentUT(_Triangular):
    """Strictly upper-triangular Lie algebra element of size ``d + 1``."""

    d: int
    entries: Tuple[Fraction, ...]

    _diag = 0

    def __post_init__(self):
        self._init()

    def __add__(self, other):
        _same_dim(self, other)
        return NilpotentUT(self.d, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        _same_dim(self, other)
        return NilpotentUT(self.d, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return NilpotentUT(self.d, [-a for a in self.entries])

    def __rmul__(self, c):
        c = as_rational(c)
        return NilpotentUT(self.d, [c * a for a in self.entries])

    @classmethod
    def zero(cls, d: int) -> "NilpotentUT":
        return cls(d, [0] * (d * (d + 1) // 2))


def _same_dim(A, B):
    if A.d != B.d:
        raise ValueError(f"dimension mismatch: {A.d} != {B.d}")


def identity(d: int) -> UTMatrix:
    return UTMatrix(d, [0] * (d * (d + 1) // 2))


def mul(A: UTMatrix, B: UTMatrix) -> UTMatrix:
    """Product through the superdiagonal convolution
    ``c[i,k] = sum_{j=0..k} a[i,k-j] * b[i+k-j, j]`` with ``a[., 0] = b[., 0] = 1``."""
    _same_dim(A, B)
    out = []
    for i, k in entry_index(A.d):
        c = A[i, k] + B[i, k]
        for j in range(1, k):
            c += A[i, k - j] * B[i + k - j, j]
        out.append(c)
    return UTMatrix(A.d, out)


def _mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    size = len(X)
    return [[sum((X[r][t] * Y[t][c] for t in range(r, c + 1)), Fraction(0))
             for c in range(size)] for r in range(size)]


def _mat_add(X: Matrix, Y: Matrix, scale=1) -> Matrix:
    return [[x + scale * y for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def _eye(size: int) -> Matrix:
    return [[Fraction(int(r == c)) for c in range(size)] for r in range(size)]


def inv(A: UTMatrix) -> UTMatrix:
    """Inverse by back-substitution on the convolution; ``A @ inv(A) = I``."""
    # solve c with mul(A, C) = I entry by entry in order of increasing k
    c: Dict[Tuple[int, int], Fraction] = {}
    for i, k in entry_index(A.d):
        s = A[i, k]
        for j in range(1, k):
            s += A[i, k - j] * c[i + k - j, j]
        c[i, k] = -s
    return UTMatrix.from_dict(A.d, c)


@lru_cache(maxsize=256)
def _superdiagonal_products(alpha: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    out = []
    for i, k in entry_index(len(alpha)):
        v = Fraction(1)
        for a in alpha[i - 1:i - 1 + k]:
            v *= a
        out.append(v)
    return tuple(out)


def pow_closed(alpha: Sequence, n: int) -> UTMatrix:
    """``M(x)**n`` for the generator with first superdiagonal ``alpha`` and
    zeros above: entry ``(i, k)`` is ``C(n, k) * alpha_i * ... * alpha_{i+k-1}``."""
    alpha = tuple(as_rational(a) for a in alpha)
    if not alpha:
        raise ValueError("alpha must have at least one entry")
    prods = _superdiagonal_products(alpha)
    return UTMatrix(len(alpha), [binomial(n, k) * p
                                 for (_, k), p in zip(entry_index(len(alpha)), prods)])


def _compositions(k: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (k,)
        return
    for first in range(1, k - parts + 2):
        for rest in _compositions(k - first, parts - 1):
            yield (first,) + rest


def power_coefficients(A: UTMatrix) -> Dict[Tuple[int, int], Tuple[Fraction, ...]]:
    """Table ``(i, k) -> (P_1, ..., P_k)`` with ``P_l`` the sum over
    compositions ``(s_1..s_l)`` of ``k`` of ``a[i,s1] a[i+s1,s2] ...``."""
    return A._power_coefficients


def _compute_power_coefficients(A):
    table = {}
    for i, k in entry_index(A.d):
        row = []
        for parts in range(1, k + 1):
            total = Fraction(0)
            for s in _compositions(k, parts):
                term = Fraction(1)
                pos = i
                for step in s:
                    term *= A[pos, step]
                    if not term:
                        break
                    pos += step
                total += term
            row.append(total)
        table[i, k] = tuple(row)
    return table



def pow_general(A: UTMatrix, n: int) -> UTMatrix:
    """``A**n`` for any integer ``n`` as ``x[i,k](n) = sum_l C(n, l) P_l(i, k)``.

    Negative powers go through :func:`inv`; the polynomial formula itself is
    also valid there, and :func:`pow_polynomial` exposes it for cross-checks.
    """
    if n < 0:
        return inv(pow_general(A, -n))
    return pow_polynomial(A, n)


def pow_polynomial(A: UTMatrix, n: int) -> UTMatrix:
    table = power_coefficients(A)
    binoms = [binomial(n, l) for l in range(A.d + 1)]
    out = []
    for ik in entry_index(A.d):
        v = Fraction(0)
        for l, p in enumerate(table[ik], start=1):
            if p and binoms[l]:
                v += binoms[l] * p
        out.append(v)
    return UTMatrix(A.d, out)


def pow_iterated(A: UTMatrix, n: int) -> UTMatrix:
    """Repeated multiplication; slow reference for :func:`pow_general`."""
    base = A if n >= 0 else inv(A)
    out = identity(A.d)
    for _ in range(abs(n)):
        out = mul(out, base)
    return out


# ---------------------------------------------------------------------------
# norms and the fundamental domain


class Norm(NamedTuple):
    squared: Fraction
    value: float


def _sq(rows: Matrix) -> Fraction:
    return sum((x * x for row in rows for x in row), Fraction(0))


def frobenius_norm(A) -> Norm:
    """Frobenius norm of the full matrix (diagonal included)."""
    rows = A if isinstance(A, list) else A.to_matrix()
    s = _sq(rows)
    return Norm(s, math.sqrt(s))


@dataclass(frozen=True)
class ReducedPoint:
    """Fundamental-domain representative ``rep = original @ lattice``."""

    rep: UTMatrix
    lattice: UTMatrix

    @property
    def max_abs(self) -> Fraction:
        return max((abs(x) for x in self.rep.entries), default=Fraction(0))


def reduce_mod_lattice(W: UTMatrix) -> ReducedPoint:
    """Representative of ``W Gamma`` with every entry in ``(-1/2, 1/2]``.

    Integers ``h[i,k] = [w[i,k] - sum_{j<k} w[i,j] h[i+j,k-j]]`` are found in
    order of increasing ``k``; the witness is ``M(-h)``.
    """
    h: Dict[Tuple[int, int], int] = {}
    for i, k in entry_index(W.d):
        u = W[i, k]
        for j in range(1, k):
            u -= W[i, j] * h[i + j, k - j]
        h[i, k] = nearest_int(u)
    C = UTMatrix.from_dict(W.d, {ik: -v for ik, v in h.items()})
    return ReducedPoint(mul(W, C), C)


# ---------------------------------------------------------------------------
# exponential, logarithm, Campbell-Baker-Hausdorff


def exp_nilpotent(N: NilpotentUT) -> UTMatrix:
    """``sum_{i=0..d} N**i / i!``."""
    X = N.to_matrix()
    size = N.d + 1
    out = _eye(size)
    term = _eye(size)
    for i in range(1, size):
        term = _mat_mul(term, X)
        out = _mat_add(out, term, Fraction(1, math.factorial(i)))
    return UTMatrix.from_matrix(out)


def log_unipotent(A: UTMatrix) -> NilpotentUT:
    """``sum_{i=1..d} (-1)**(i+1) (A - I)**i / i``."""
    size = A.d + 1
    X = _mat_add(A.to_matrix(), _eye(size), -1)
    out = [[Fraction(0)] * size for _ in range(size)]
    term = _eye(size)
    for i in range(1, size):
        term = _mat_mul(term, X)
        out = _mat_add(out, term, Fraction((-1) ** (i + 1), i))
    return NilpotentUT.from_matrix(out)


def lie_bracket(X: NilpotentUT, Y: NilpotentUT) -> NilpotentUT:
    _same_dim(X, Y)
    x, y = X.to_matrix(), Y.to_matrix()
    return NilpotentUT.from_matrix(_mat_add(_mat_mul(x, y), _mat_mul(y, x), -1))


def cbh(X: NilpotentUT, Y: NilpotentUT) -> NilpotentUT:
    """Campbell-Baker-Hausdorff series truncated after the weight-4 brackets.

    Exact whenever 5-fold brackets vanish, i.e. for ``d <= 4``.
    """
    XY = lie_bracket(X, Y)
    XXY = lie_bracket(X, XY)
    YXY = lie_bracket(Y, XY)
    return (X + Y
            + Fraction(1, 2) * XY
            + Fraction(1, 12) * XXY
            - Fraction(1, 12) * YXY
            - Fraction(1, 48) * lie_bracket(Y, XXY)
            - Fraction(1, 48) * lie_bracket(X, YXY))


class MetricReport(NamedTuple):
    """Squared values of ``|A-B|/|B|``, ``|AB^-1 - I|`` and ``|A-B| |B^-1|``."""

    lower_sq: Fraction
    middle_sq: Fraction
    upper_sq: Fraction
    passed: bool

    @property
    def values(self) -> Tuple[float, float, float]:
        return tuple(math.sqrt(v) for v in (self.lower_sq, self.middle_sq, self.upper_sq))


def metric_bounds_check(A: UTMatrix, B: UTMatrix) -> MetricReport:
    """Check ``|A-B|/|B| <= |AB^-1 - I| <= |A-B| |B^-1|`` on exact squares."""
    _same_dim(A, B)
    size = A.d + 1
    Binv = inv(B)
    diff = _mat_add(A.to_matrix(), B.to_matrix(), -1)
    ab = _mat_add(mul(A, Binv).to_matrix(), _eye(size), -1)
    diff_sq = _sq(diff)
    lower = diff_sq / frobenius_norm(B).squared
    middle = _sq(ab)
    upper = diff_sq * frobenius_norm(Binv).squared
    return MetricReport(lower, middle, upper, lower <= middle <= upper)
