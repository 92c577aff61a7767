from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilbohr import genpoly as G
from nilbohr.syntax import GPSyntaxError, format_gp, parse_gp, parse_rational_expr
from strategies import gp_exprs

Q = Fraction


@pytest.mark.parametrize("text, n, value, degree", [
    ("1/2*n*[1/3*n]", 3, Q(3, 2), 2),
    ("[2/3*n**2] - n/5", 3, Q(27, 5), 2),
    ("n^2/3", 3, Q(3), 2),
    ("2*[n/2]*[n/3]", 3, Q(2), 2),
    ("-[[n/3]/2]", 3, Q(0), 1),
    ("3*(n + [n/2])", 3, Q(12), 1),
])
def test_parse_examples(text, n, value, degree):
    expr = parse_gp(text)
    assert expr.evaluate(n) == value
    assert expr.degree == degree
    assert expr.evaluate(0) == 0


@pytest.mark.parametrize("text", ["1 + n", "n*(n+1)", "m*n", "[n, n]", "n**n", "n/n", "n +", "0.5*n"])
def test_parse_rejects(text):
    with pytest.raises(GPSyntaxError):
        parse_gp(text)


def test_rational_expr():
    assert parse_rational_expr("3/10") == Q(3, 10)
    assert parse_rational_expr("-1/2+1/3") == Q(-1, 6)
    for bad in ("0.3", "1/0", "n"):
        with pytest.raises(GPSyntaxError):
            parse_rational_expr(bad)


@given(gp_exprs, st.integers(-30, 30))
def test_format_round_trips(expr, n):
    again = parse_gp(format_gp(expr))
    assert again.evaluate(n) == expr.evaluate(n)
    assert G.gp_degree(again) == G.gp_degree(expr)
