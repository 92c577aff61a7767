import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nilbohr import genpoly as G
from nilbohr import nildyn as N
from nilbohr import unipotent as U
from strategies import alphas, rationals

Q = Fraction
half = Q(1, 2)


def test_rotation_generator_shape():
    rot = N.NilRotation(("1/2", Q(1, 3)))
    assert rot.d == 2 and rot.alpha == (half, Q(1, 3))
    assert rot.generator == U.UTMatrix(2, [half, Q(1, 3), 0])
    with pytest.raises(ValueError):
        N.NilRotation(())


def test_fz_examples():
    rot = N.NilRotation((half, half))
    tab = N.fz_tables(rot, 0)
    assert set(tab.f.values()) == {0} and set(tab.z.values()) == {0}
    tab = N.fz_tables(rot, 2)
    assert (tab.f[1, 1], tab.f[2, 1], tab.f[1, 2]) == (1, 1, -1)
    assert (tab.z[1, 1], tab.z[2, 1], tab.z[1, 2]) == (0, 0, Q(1, 4))
    assert N.fz_tables(rot, 4).z[1, 2] == half


@settings(max_examples=80)
@given(alphas(1, 4), st.integers(-60, 60))
def test_fz_agrees_with_reduction(alpha, n):
    rot = N.NilRotation(alpha)
    tab = N.fz_tables(rot, n)
    red = U.reduce_mod_lattice(U.pow_closed(alpha, n))
    assert tab.rep == red.rep
    assert tab.witness == red.lattice
    assert all(-half < z <= half for z in tab.z.values())
    assert all(tab.f[i, 1] == G.nearest_int(n * a) for i, a in enumerate(alpha, 1))


@settings(max_examples=80)
@given(rationals(), rationals(), st.integers(-3000, 3000))
def test_bridging_identity_degree_two(a1, a2, n):
    z = N.fz_tables(N.NilRotation((a1, a2)), n).z[1, 2]
    assert (G.eval_P(n, (a1, a2)) - z - n * a1 * a2 / 2).denominator == 1


def test_nil_return_set_examples():
    rot = N.NilRotation((half, half))
    assert N.nil_return_set(rot, Q(3, 10), (1, 8)).members == (2, 6, 8)
    zero = N.NilRotation((0, 0, 0))
    assert N.nil_return_set(zero, Q(1, 100), (-5, 5)).members == tuple(range(-5, 6))
    assert N.nil_return_set(N.NilRotation((Q(1, 7), Q(2, 9))), Q(3, 5), (-5, 5)).members == tuple(range(-5, 6))
    with pytest.raises(ValueError):
        N.nil_return_set(rot, 0, (1, 8))


@settings(max_examples=30)
@given(alphas(1, 3), rationals(10, 20).filter(lambda e: e > 0), rationals(10, 20).filter(lambda e: e > 0))
def test_nil_return_set_monotone_in_epsilon(alpha, e1, e2):
    lo, hi = sorted((e1, e2))
    rot = N.NilRotation(alpha)
    assert N.nil_return_set(rot, lo, (-30, 30)) <= N.nil_return_set(rot, hi, (-30, 30))


def test_torus_examples():
    T = N.TorusAffine(1, Q(1, 3))
    assert N.torus_step(T, N.TorusPoint.origin(1)) == N.TorusPoint((Q(1, 3),))
    T = N.TorusAffine(2, Q(1, 4))
    assert N.torus_step(T, N.TorusPoint((0, 0))) == N.TorusPoint((Q(1, 4), 0))
    assert N.torus_step(T, N.TorusPoint((Q(3, 4), half))) == N.TorusPoint((0, Q(1, 4)))
    p = N.TorusPoint((Q(1, 5), Q(7, 9)))
    assert N.torus_iterate(T, p, 0) == p
    assert N.torus_iterate(T, p, 1) == N.torus_step(T, p)
    assert N.torus_iterate(T, N.TorusPoint((0, 0)), 3) == N.TorusPoint((Q(3, 4), Q(3, 4)))


def test_torus_point_is_reduced_mod_one():
    p = N.TorusPoint((Q(5, 4), Q(-1, 3)))
    assert p.coords == (Q(1, 4), Q(2, 3))
    assert p.centered() == (Q(1, 4), Q(-1, 3))


@settings(max_examples=40)
@given(st.integers(1, 4).flatmap(lambda d: st.tuples(
    st.just(d), rationals(), st.lists(rationals(), min_size=d, max_size=d))), st.integers(0, 60))
def test_torus_iterate_matches_steps(args, n):
    d, a, theta = args
    T, p = N.TorusAffine(d, a), N.TorusPoint(theta)
    fwd = bwd = p
    for _ in range(n):
        fwd = N.torus_step(T, fwd)
        bwd = N.torus_step_inverse(T, bwd)
    assert N.torus_iterate(T, p, n) == fwd
    assert N.torus_iterate(T, p, -n) == bwd
    assert N.torus_step_inverse(T, N.torus_step(T, p)) == p


def test_box_validation():
    with pytest.raises(ValueError):
        N.Box((Q(0),))
    with pytest.raises(ValueError):
        N.Box((Q(3, 5),))
    box = N.Box.cube(2, Q(1, 8))
    assert N.TorusPoint((Q(1, 10), Q(-1, 10))) in box
    assert N.TorusPoint((Q(1, 8), 0)) not in box


def test_vandermonde_examples():
    assert N.vandermonde_weights(1) == ((1,), 1)
    assert N.vandermonde_weights(2) == ((-2, 1), 2)
    assert N.vandermonde_weights(3) == ((3, -3, 1), 6)
    assert [N.multi_return_constant(d) for d in range(1, 5)] == [1, 6, 42, 360]


@pytest.mark.parametrize("d", range(1, 7))
def test_vandermonde_identities(d):
    w, lam = N.vandermonde_weights(d)
    assert math.gcd(*w) == 1 and lam > 0
    for j in range(1, d):
        assert sum(l * m**j for m, l in enumerate(w, 1)) == 0
    assert sum(l * m**d for m, l in enumerate(w, 1)) == lam
    fact = math.factorial(d)
    for n in range(-100, 101):
        assert sum(l * fact * U.binomial(m * n, d) for m, l in enumerate(w, 1)) == lam * n**d


def slow_witnessed(T, box, d, n, grid):
    # Fraction-based oracle over the same witness list
    for theta in N.torus_grid_witnesses(box, grid):
        if all(N.torus_iterate(T, theta, i * n) in box for i in range(d + 1)):
            return theta
    return None


def test_multi_return_examples():
    T = N.TorusAffine(1, Q(1, 4))
    got = N.multi_return_set(T, N.Box.cube(1, Q(1, 8)), 1, (0, 8), 4)
    assert got.members == (0, 4, 8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), rationals(30, 40), st.integers(1, 16), st.integers(1, 3), st.sampled_from([2, 4, 8]))
def test_multi_return_is_sound_and_matches_oracle(dim, a, width, d, grid):
    T = N.TorusAffine(dim, a)
    box = N.Box.cube(dim, Q(width, 40))
    window = (-25, 25)
    got = N.multi_return_set(T, box, d, window, grid)
    assert 0 in got
    expected = [n for n in range(-25, 26) if slow_witnessed(T, box, d, n, grid) is not None]
    assert list(got) == expected
    smaller = N.multi_return_set(T, N.Box.cube(dim, Q(width, 80)), d, window, grid)
    # the smaller box's witnesses are also witnesses of the larger one
    assert smaller <= got


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.builds(Fraction, st.integers(0, 999), st.integers(1, 1000)),
       st.integers(1, 99))
def test_containment_with_starting_point_allowance(d, alpha, k):
    # every witnessed n obeys ||alpha n^d|| < (K_d + d!) eps1
    K = N.multi_return_constant(d)
    eps1 = Q(k, 100) / (2 * K)
    _, lam = N.vandermonde_weights(d)
    found = N.multi_return_set(N.TorusAffine(d, alpha / lam), N.Box.cube(d, eps1), d, (-200, 200), 16)
    bound = (K + math.factorial(d)) * eps1
    assert all(G.dist_to_int(alpha * n**d) < bound for n in found)


def test_containment_bound_without_allowance_fails_here():
    # a witness theta with last coordinate theta_d shifts the top coefficient
    # by d! theta_d sum(lambda); K_d eps1 alone does not cover it
    d, alpha, eps1 = 1, half, Q(3, 10)
    T = N.TorusAffine(d, alpha)
    theta = N.TorusPoint((Q(-1, 4),))
    box = N.Box.cube(d, eps1)
    assert theta in box and N.torus_iterate(T, theta, 1) in box
    assert 1 in N.multi_return_set(T, box, d, (1, 1), 4)
    assert G.dist_to_int(alpha * 1) >= N.multi_return_constant(d) * eps1


def test_nil_multi_return_examples():
    rot = N.NilRotation((half, half))
    got = N.nil_multi_return_set(rot, Q(3, 10), 2, (-8, 8))
    assert 0 in got
    assert got <= N.nil_return_set(rot, Q(3, 10), (-8, 8))
    zero = N.NilRotation((0, 0))
    assert N.nil_multi_return_set(zero, Q(1, 10), 2, (-4, 4)).members == tuple(range(-4, 5))


@settings(max_examples=15, deadline=None)
@given(alphas(1, 3, 9, 9), st.integers(1, 3), st.sampled_from([None, 4]))
def test_nil_multi_return_sound(alpha, d, grid):
    rot = N.NilRotation(alpha)
    eps = Q(1, 5)
    got = N.nil_multi_return_set(rot, eps, d, (-12, 12), powers=(0, 1), grid=grid)
    starts = [W for W in N.nil_witnesses(rot, eps, (0, 1), grid)
              if U.reduce_mod_lattice(W).max_abs < eps]
    for n in got:
        assert any(all(U.reduce_mod_lattice(U.mul(U.pow_closed(alpha, i * n), W)).max_abs < eps
                       for i in range(d + 1)) for W in starts)
    assert got <= N.nil_multi_return_set(rot, eps, 1, (-12, 12), powers=(0, 1), grid=grid)
