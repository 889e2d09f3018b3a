from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacecurve.polycore import (
    GaussianRational,
    ParseError,
    Polynomial,
    PolynomialSystem,
    evaluate,
    jacobian,
    parse_polynomial,
    parse_system,
    support,
)

from conftest import FIXTURES, load


def test_parse_and_print_canonical():
    p = parse_polynomial("x2^2 + x1^2 - 2*x1")
    assert str(p) == "x1^2 + x2^2 - 2*x1"


def test_decimal_is_exact():
    p = parse_polynomial("0.5*x1 + 1.25")
    assert p.coefficient((1,)) == GaussianRational(Fraction(1, 2))
    assert p.coefficient((0,)) == GaussianRational(Fraction(5, 4))


def test_imaginary_unit_and_powers():
    p = parse_polynomial("(1/2 + 3/4*i)*x1**2")
    assert p.coefficient((2,)) == GaussianRational(Fraction(1, 2), Fraction(3, 4))


def test_comments_and_separators():
    s = parse_system("# header\nx1 + x2;  x1 - \n x2\n")
    assert len(s) == 2 and s.nvars == 2


@pytest.mark.parametrize("text", ["", "# only a comment\n", "x1^-2", "x0 + 1", "x1 +", "x1 / x2"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_system(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_system("x1 + x2;\nx1 ^ ^ 2")
    assert err.value.line == 2


def test_expanded_products():
    s = load("viviani")
    assert s[1] == parse_polynomial("x1^2 - 2*x1 + x2^2", 3)


def test_zero_polynomial_support_raises():
    with pytest.raises(ValueError):
        support(Polynomial.zero(2))


def test_exact_evaluation_stays_exact():
    p = parse_polynomial("x1^2 + 1/3*x2")
    val = evaluate(p, [Fraction(1, 2), 3])
    assert val == GaussianRational(Fraction(5, 4))


def test_mixing_exact_and_float_rejected():
    with pytest.raises(TypeError):
        GaussianRational(1) + 0.5
    with pytest.raises(TypeError):
        Polynomial({(1,): 1, (0,): 0.5 + 0j}, 1)


def test_numeric_precision_ladder():
    p = parse_polynomial("x1^2 - 2")
    assert isinstance(p.evaluate([1.5]), complex)
    hi = p.to_numeric(128).evaluate([1.5], 128)
    assert abs(complex(hi) - 0.25) < 1e-15


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    s = load("eq5")
    jac = jacobian(s)
    for _ in range(20):
        x = rng.normal(size=3) + 1j * rng.normal(size=3)
        h = 1e-6
        for i, p in enumerate(s.polys):
            for j in range(3):
                e = np.zeros(3, complex)
                e[j] = h
                fd = (complex(p.evaluate(list(x + e))) - complex(p.evaluate(list(x - e)))) / (2 * h)
                assert abs(fd - complex(jac[i][j].evaluate(list(x)))) < 1e-6 * (1 + abs(fd))


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.pol")), ids=lambda p: p.stem)
def test_serialize_roundtrip_fixtures(path):
    s = parse_system(path.read_text())
    again = parse_system(s.serialize(), s.nvars)
    assert again == s


exps = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
coefs = st.tuples(st.integers(-20, 20), st.integers(1, 9), st.integers(-5, 5))


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(exps, coefs, min_size=1, max_size=6))
def test_serialize_roundtrip_random(terms):
    p = Polynomial({e: GaussianRational(Fraction(a, b), c) for e, (a, b, c) in terms.items()}, 3)
    if p.is_zero():
        return
    assert parse_polynomial(str(p), 3) == p


def test_ring_arithmetic():
    x = Polynomial.variable(0, 2)
    y = Polynomial.variable(1, 2)
    assert (x + y) ** 2 == x * x + 2 * x * y + y * y
    assert ((x - y) * (x + y)).substitute({1: x}).is_zero()
    assert (x ** 3).derivative(0) == 3 * x ** 2


def test_system_shape_helpers():
    s = load("eq5")
    assert not s.is_curve_shaped()
    assert load("eq4").is_curve_shaped()
    assert isinstance(s, PolynomialSystem) and s.exact
