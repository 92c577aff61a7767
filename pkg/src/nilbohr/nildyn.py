"""Nilrotations on G_d / Gamma and affine skew products on the torus.

Neighbourhoods of the identity coset are entrywise: a coset is within
``epsilon`` of ``Gamma`` when every entry of its reduced representative has
absolute value below ``epsilon``.  Multiple-return sets are computed by
searching a finite list of starting points, so every returned ``n`` is a
genuine member while some true members may be missed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .genpoly import as_rational, nearest_int
from .setfam import IndexSet, as_window
from .unipotent import (
    UTMatrix,
    _superdiagonal_products,
    binomial,
    entry_index,
    mul,
    pow_closed,
    reduce_mod_lattice,
)

__all__ = [
    "NilRotation",
    "FZTables",
    "fz_tables",
    "nil_return_set",
    "TorusAffine",
    "TorusPoint",
    "Box",
    "torus_step",
    "torus_step_inverse",
    "torus_iterate",
    "vandermonde_weights",
    "multi_return_constant",
    "torus_grid_witnesses",
    "multi_return_set",
    "nil_witnesses",
    "nil_multi_return_set",
]


@dataclass(frozen=True)
class NilRotation:
    """Translation by ``A = M(x)`` with ``x[i,1] = alpha_i`` and zeros above."""

    alpha: Tuple[Fraction, ...]

    def __post_init__(self):
        alpha = tuple(as_rational(a) for a in self.alpha)
        if not alpha:
            raise ValueError("alpha must have at least one entry")
        object.__setattr__(self, "alpha", alpha)

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def generator(self) -> UTMatrix:
        return pow_closed(self.alpha, 1)

    def power(self, n: int) -> UTMatrix:
        return pow_closed(self.alpha, n)


@dataclass(frozen=True)
class FZTables:
    """Integer table ``f`` and residual table ``z``, both keyed by ``(i, k)``."""

    d: int
    f: Dict[Tuple[int, int], int]
    z: Dict[Tuple[int, int], Fraction]

    @property
    def witness(self) -> UTMatrix:
        """``M(-f)``, the lattice element carrying ``A**n`` to its representative."""
        return UTMatrix.from_dict(self.d, {ik: -v for ik, v in self.f.items()})

    @property
    def rep(self) -> UTMatrix:
        return UTMatrix.from_dict(self.d, self.z)

    @property
    def max_abs(self) -> Fraction:
        return max(abs(v) for v in self.z.values())


def fz_tables(rot: NilRotation, n: int) -> FZTables:
    """The ``f``/``z`` recursion for ``x(n) = A**n``.

    ``f[i,1] = [n alpha_i]`` and for ``k >= 2``
    ``f[i,k] = [x[i,k] - sum_{j=1}^{k-1} x[i,k-j] f[i+k-j,j]]``;
    ``z`` is the bracketed quantity minus its bracket.
    """
    # x(n) = A**n entrywise, C(n, k) alpha_i ... alpha_{i+k-1}
    x = {ik: binomial(n, ik[1]) * p
         for ik, p in zip(entry_index(rot.d), _superdiagonal_products(rot.alpha))}
    f: Dict[Tuple[int, int], int] = {}
    z: Dict[Tuple[int, int], Fraction] = {}
    for k in range(1, rot.d + 1):
        for i in range(1, rot.d - k + 2):
            u = x[i, k]
            for j in range(1, k):
                u -= x[i, k - j] * f[i + k - j, j]
            f[i, k] = nearest_int(u)
            z[i, k] = u - f[i, k]
    return FZTables(rot.d, f, z)


def nil_return_set(rot: NilRotation, epsilon, window) -> IndexSet:
    """``{n : max |z[i,k](n)| < epsilon}``: returns of ``Gamma`` to its
    entrywise ``epsilon``-neighbourhood."""
    eps = as_rational(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    lo, hi = as_window(window)
    return IndexSet(lo, hi, [n for n in range(lo, hi + 1)
                             if fz_tables(rot, n).max_abs < eps])


# ---------------------------------------------------------------------------
# torus skew product T(t1, ..., td) = (t1 + a, t2 + t1, ..., td + t(d-1))


def _mod1(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass(frozen=True)
class TorusAffine:
    d: int
    alpha: Fraction

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        object.__setattr__(self, "alpha", as_rational(self.alpha))


@dataclass(frozen=True)
class TorusPoint:
    """Point of the d-torus, coordinates kept in ``[0, 1)``."""

    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(_mod1(as_rational(c)) for c in self.coords))

    @classmethod
    def origin(cls, d: int) -> "TorusPoint":
        return cls((0,) * d)

    def centered(self) -> Tuple[Fraction, ...]:
        """Coordinates as representatives in ``(-1/2, 1/2]``."""
        return tuple(c - nearest_int(c) for c in self.coords)


@dataclass(frozen=True)
class Box:
    """Symmetric open box ``prod (-w_i, w_i)`` around the origin of the torus."""

    half_widths: Tuple[Fraction, ...]

    def __post_init__(self):
        widths = tuple(as_rational(w) for w in self.half_widths)
        if any(not 0 < w <= Fraction(1, 2) for w in widths):
            raise ValueError("half-widths must lie in (0, 1/2]")
        object.__setattr__(self, "half_widths", widths)

    @classmethod
    def cube(cls, d: int, eps) -> "Box":
        return cls((as_rational(eps),) * d)

    def __contains__(self, p: TorusPoint) -> bool:
        return all(abs(c) < w for c, w in zip(p.centered(), self.half_widths))


def _check_dim(T: TorusAffine, p: TorusPoint):
    if len(p.coords) != T.d:
        raise ValueError(f"point has {len(p.coords)} coordinates, map has d = {T.d}")


def torus_step(T: TorusAffine, p: TorusPoint) -> TorusPoint:
    _check_dim(T, p)
    prev = (T.alpha,) + p.coords[:-1]
    return TorusPoint(tuple(c + s for c, s in zip(p.coords, prev)))


def torus_step_inverse(T: TorusAffine, p: TorusPoint) -> TorusPoint:
    _check_dim(T, p)
    out = []
    prev = T.alpha
    for c in p.coords:
        prev = c - prev
        out.append(prev)
    return TorusPoint(tuple(out))


def torus_iterate(T: TorusAffine, p: TorusPoint, n: int) -> TorusPoint:
    """Closed form: coordinate ``k`` of ``T**n p`` is
    ``sum_{i=0}^{k} C(n, k-i) theta_i`` with ``theta_0 = alpha``."""
    _check_dim(T, p)
    theta = (T.alpha,) + p.coords
    coords = []
    for k in range(1, T.d + 1):
        coords.append(sum((binomial(n, k - i) * theta[i] for i in range(k + 1)), Fraction(0)))
    return TorusPoint(tuple(coords))


def _nullspace_vector(rows: List[List[Fraction]], ncols: int) -> List[Fraction]:
    """A nonzero vector spanning the (assumed one-dimensional) kernel."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    if len(free) != 1:
        raise ArithmeticError(f"kernel has dimension {len(free)}, expected 1")
    vec = [Fraction(0)] * ncols
    vec[free[0]] = Fraction(1)
    for row, c in zip(rows, pivots):
        vec[c] = -row[free[0]]
    return vec


def vandermonde_weights(d: int) -> Tuple[Tuple[int, ...], int]:
    """Integers ``lambda_1..lambda_d`` and ``lam > 0`` with
    ``sum_m lambda_m m**j = 0`` for ``1 <= j < d`` and ``= lam`` for ``j = d``.

    Normalized to coprime weights, which makes ``lam`` the least positive choice.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    rows = [[Fraction(m**j) for m in range(1, d + 1)] for j in range(1, d)]
    vec = _nullspace_vector(rows, d)
    scale = math.lcm(*(v.denominator for v in vec))
    ints = [int(v * scale) for v in vec]
    g = math.gcd(*ints)
    ints = [v // g for v in ints]
    lam = sum(l * m**d for m, l in enumerate(ints, start=1))
    if lam < 0:
        ints = [-v for v in ints]
        lam = -lam
    return tuple(ints), lam


def multi_return_constant(d: int) -> int:
    """``K_d = d! * sum |lambda_i|``."""
    weights, _ = vandermonde_weights(d)
    return math.factorial(d) * sum(abs(w) for w in weights)


def torus_grid_witnesses(box: Box, grid: int) -> List[TorusPoint]:
    """Origin first, then every ``(k_1/g, ..., k_d/g)`` inside ``box``."""
    if grid < 1:
        raise ValueError("grid must be >= 1")
    axes = []
    for w in box.half_widths:
        kmax = math.ceil(w * grid) - 1
        axes.append([Fraction(k, grid) for k in range(-kmax, kmax + 1)
                     if abs(Fraction(k, grid)) < w])
    origin = TorusPoint.origin(len(box.half_widths))
    points = [origin]
    points.extend(p for p in (TorusPoint(c) for c in product(*axes)) if p != origin)
    return points


def _scaled_iterate_rows(T: TorusAffine, theta: Sequence[Fraction], denom: int):
    """Integer polynomial coefficients so that coordinate ``k`` of ``T**n theta``
    times ``denom`` is ``sum_i C(n, k-i) c[i]``."""
    return [int(t * denom) for t in (T.alpha,) + tuple(theta)]


def multi_return_set(T: TorusAffine, U: Box, d: int, window, grid: int) -> IndexSet:
    """Witnessed members of ``{n : U & T^-n U & ... & T^-dn U != {}}``.

    ``n`` is returned when some witness ``theta`` (the origin or a point of the
    ``1/grid`` lattice inside ``U``) has ``T**(i n) theta`` in ``U`` for
    ``i = 0..d``.  Arithmetic is done on integers over a common denominator,
    which is exact.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if len(U.half_widths) != T.d:
        raise ValueError("box and map dimensions differ")
    lo, hi = as_window(window)
    witnesses = torus_grid_witnesses(U, grid)
    denom = math.lcm(T.alpha.denominator, grid)
    widths = [w * denom for w in U.half_widths]
    scaled = [_scaled_iterate_rows(T, p.coords, denom) for p in witnesses]

    def inside(c, n):
        for k in range(1, T.d + 1):
            v = sum(binomial(n, k - i) * c[i] for i in range(k + 1)) % denom
            if v * 2 > denom:
                v -= denom
            if not abs(v) < widths[k - 1]:
                return False
        return True

    out = []
    for n in range(lo, hi + 1):
        for c in scaled:
            # witnesses lie in U already, so start at i = 1
            if all(inside(c, i * n) for i in range(1, d + 1)):
                out.append(n)
                break
    return IndexSet(lo, hi, out)


def nil_witnesses(rot: NilRotation, epsilon, powers: Iterable[int] = (0,),
                  grid: Optional[int] = None) -> List[UTMatrix]:
    """Starting elements ``A**m @ B`` for ``m`` in ``powers``.

    ``B`` runs over the identity and, when ``grid`` is given, every element
    with a single nonzero entry ``k/grid`` of absolute value below ``epsilon``.
    """
    eps = as_rational(epsilon)
    perturbations = [pow_closed([0] * rot.d, 0)]
    if grid:
        for ik in entry_index(rot.d):
            for k in range(-grid, grid + 1):
                v = Fraction(k, grid)
                if k and abs(v) < eps:
                    perturbations.append(UTMatrix.from_dict(rot.d, {ik: v}))
    return [mul(rot.power(m), B) for m in powers for B in perturbations]


def nil_multi_return_set(rot: NilRotation, epsilon, d: int, window,
                         powers: Iterable[int] = (0,), grid: Optional[int] = None) -> IndexSet:
    """Witnessed members of ``{n : U & T^-n U & ... & T^-dn U != {}}`` on G/Gamma
    with ``U`` the entrywise ``epsilon``-neighbourhood of the identity coset."""
    eps = as_rational(epsilon)
    if d < 1:
        raise ValueError("d must be >= 1")
    lo, hi = as_window(window)
    starts = [W for W in nil_witnesses(rot, eps, powers, grid)
              if reduce_mod_lattice(W).max_abs < eps]

    def lands(W, m):
        return reduce_mod_lattice(mul(rot.power(m), W)).max_abs < eps

    out = []
    for n in range(lo, hi + 1):
        if any(all(lands(W, i * n) for i in range(1, d + 1)) for W in starts):
            out.append(n)
    return IndexSet(lo, hi, out)
