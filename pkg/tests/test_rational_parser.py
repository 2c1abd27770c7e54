import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmcsurf.errors import BadParameter, DegreeCap, ExpressionSyntaxError, InputError, NonRational
from cmcsurf.parser import MAX_DEGREE, parse_rational
from cmcsurf.rational import RationalMap, poly_eval


def coeffs(m):
    return [complex(c) for c in m.numerator], [complex(c) for c in m.denominator]


def test_identity_map():
    num, den = coeffs(parse_rational("z"))
    assert num == [0, 1] and den == [1]


def test_mobius_read_off():
    num, den = coeffs(parse_rational("(z^2 - 1)/(z^2 + 1)"))
    assert num == [-1, 0, 1] and den == [1, 0, 1]


def test_common_denominator(rng):
    m = parse_rational("1/z + z")
    num, den = coeffs(m)
    assert num == [1, 0, 1] and den == [0, 1]
    pts = rng.normal(size=10) + 1j * rng.normal(size=10)
    np.testing.assert_allclose(m(pts), 1 / pts + pts, rtol=1e-13)


@pytest.mark.parametrize("text,value", [
    ("2i", 2j), ("1+2i", 1 + 2j), ("-3.5", -3.5), ("1.5e2", 150.0), ("2^3", 8.0),
    ("-2^2", -4.0), ("(1-i)*(1+i)", 2.0), ("2e-1i", 0.2j),
])
def test_constant_literals(text, value):
    m = parse_rational(text)
    assert m.degree == 0
    assert complex(m(0.3)) == pytest.approx(value)


def test_precedence_and_associativity():
    z = 0.7 - 0.4j
    cases = {
        "z - 1 - 2": z - 3,
        "z / 2 / 4": z / 8,
        "2 * z ^ 2": 2 * z ** 2,
        "-z^2": -(z ** 2),
        "(z + 1)^-2": (z + 1) ** -2,
        "z^2^3": (z ** 2) ** 3,
        "1 + 2*z - z/(z - 3i)": 1 + 2 * z - z / (z - 3j),
    }
    for text, value in cases.items():
        assert complex(parse_rational(text)(z)) == pytest.approx(value, rel=1e-12), text


def test_common_factor_cancels():
    m = parse_rational("(z^2 - 1)/(z - 1)")
    num, den = coeffs(m)
    assert den == [1]
    np.testing.assert_allclose(num, [1, 1], atol=1e-12)


def test_poles_and_derivative():
    m = parse_rational("1/(z^2 + 1)")
    assert sorted(np.round(m.poles(), 12), key=lambda c: c.imag) == [-1j, 1j]
    z = np.array([0.3 + 0.2j, -1.1 + 0.5j])
    np.testing.assert_allclose(m.derivative()(z), -2 * z / (z ** 2 + 1) ** 2, rtol=1e-12)


@pytest.mark.parametrize("text,pos", [("z +", 3), ("(z", 2), ("z ^ 1.5", 4), ("2 ** z", 3), ("w", 0),
                                      ("z)", 1), ("", 0), ("3 z", 2)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_rational(text)
    assert info.value.position == pos
    assert isinstance(info.value, InputError)


def test_non_rational_and_degree_cap():
    with pytest.raises(NonRational):
        parse_rational("1/(z - z)")
    with pytest.raises(DegreeCap):
        parse_rational(f"z^{MAX_DEGREE + 1}")
    assert parse_rational(f"z^{MAX_DEGREE}").degree == MAX_DEGREE


def test_print_parse_round_trip_examples():
    for text in ["z", "(z^2 - 1)/(z^2 + 1)", "1/z + z", "(1+2i)*z^3 - 0.5i", "1e-3*z^2/(z - 0.25i)"]:
        m = parse_rational(text)
        again = parse_rational(m.to_text())
        assert again.numerator == m.numerator and again.denominator == m.denominator


def test_out_of_range_coefficients_are_refused():
    with pytest.raises(BadParameter):
        RationalMap([1j], [2.225073858507e-311j])
    with pytest.raises(BadParameter):
        RationalMap([float("inf")], [1.0])
    # a tiny leading numerator term is fine and survives the text round trip
    m = RationalMap([1j, 2.2e-311], [1.0])
    assert parse_rational(m.to_text()).numerator == m.numerator


def test_dict_round_trip():
    m = parse_rational("(2i*z - 1)/(z^3 + 4)")
    assert RationalMap.from_dict(m.to_dict()) == m


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


@settings(max_examples=60, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=6), st.lists(cplx, min_size=1, max_size=4))
def test_round_trip_is_coefficient_identical(num, den):
    if all(c == 0 for c in den):
        den = [1.0]
    try:
        m = RationalMap(num, den)
    except BadParameter:
        # only maps whose monic form overflows may be refused
        lead = next(c for c in reversed(den) if c != 0)
        with np.errstate(all="ignore"):
            scaled = [c / lead for c in num + den]
        assert not all(np.isfinite(scaled))
        return
    again = parse_rational(m.to_text())
    assert again.numerator == m.numerator
    assert again.denominator == m.denominator


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5), st.complex_numbers(max_magnitude=3))
def test_polynomial_text_evaluates_like_horner(cs, z):
    text = " + ".join(f"({c})*z^{k}" for k, c in enumerate(cs))
    m = parse_rational(text)
    assert complex(m(z)) == pytest.approx(poly_eval([complex(c) for c in cs], z), abs=1e-9 * (1 + abs(z)) ** 5)
