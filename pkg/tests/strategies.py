"""Shared hypothesis strategies."""
from fractions import Fraction

from hypothesis import strategies as st

from nilbohr import genpoly as G
from nilbohr import unipotent as U


def rationals(num=50, den=20):
    return st.builds(Fraction, st.integers(-num, num), st.integers(1, den))


def alphas(d_min=1, d_max=4, num=20, den=12):
    return st.integers(d_min, d_max).flatmap(
        lambda d: st.lists(rationals(num, den), min_size=d, max_size=d).map(tuple))


def ut_matrices(d, num=20, den=12):
    return st.lists(rationals(num, den), min_size=d * (d + 1) // 2,
                    max_size=d * (d + 1) // 2).map(lambda e: U.UTMatrix(d, e))


def nil_elements(d, num=20, den=12):
    return st.lists(rationals(num, den), min_size=d * (d + 1) // 2,
                    max_size=d * (d + 1) // 2).map(lambda e: U.NilpotentUT(d, e))


monos = st.builds(G.Mono, rationals(9, 9), st.integers(1, 3))


def _extend(children):
    return st.one_of(
        st.builds(G.Bracket, children),
        st.builds(G.Scale, rationals(9, 9), children),
        st.lists(children, min_size=1, max_size=3).map(lambda cs: G.Sum(tuple(cs))),
        st.builds(lambda c, p, bs: G.Prod(c, p, tuple(bs)), rationals(9, 9), st.integers(0, 2),
                  st.lists(children, min_size=1, max_size=2)),
    )


gp_exprs = st.recursive(monos, _extend, max_leaves=6)
