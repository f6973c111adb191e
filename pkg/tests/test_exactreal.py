from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from spiraldelone.exactreal import (GOLDEN, CertInterval, QuadExt, StreamExhausted,
                                    eval_theta, fixed_point_frac, frac_q_theta,
                                    nearest_frac, parse_theta, sign)

getcontext().prec = 80

rats = st.fractions(max_denominator=10**6).filter(lambda f: abs(f) < 10**6)
quads = st.builds(QuadExt, rats, rats, st.sampled_from([2, 3, 5, 6, 7, 13, 1001]))


def dec(x: QuadExt) -> Decimal:
    return (Decimal(x.a.numerator) / x.a.denominator
            + Decimal(x.b.numerator) / x.b.denominator * Decimal(x.D).sqrt())


@pytest.mark.parametrize("x, expected", [
    (QuadExt(3, -2, 2), 1),
    (QuadExt(0, 0, 5), 0),
    (QuadExt(1, -1, 2), -1),
])
def test_sign_examples(x, expected):
    assert sign(x) == expected


def test_squarefree_normalisation():
    assert QuadExt(0, 1, 8) == QuadExt(0, 2, 2)
    assert QuadExt(1, 3, 9) == QuadExt(10)
    assert QuadExt(1, 0, 5).D == 0


@given(quads)
def test_sign_matches_decimal(x):
    d = dec(x)
    if abs(d) > Decimal(10) ** -40:
        assert sign(x) == (1 if d > 0 else -1)


@given(quads)
def test_nearest_frac_invariant(x):
    m, f = nearest_frac(x)
    assert Fraction(-1, 2) <= f < Fraction(1, 2)
    assert x - f == QuadExt(m)


@given(rats, rats, rats, rats, st.sampled_from([2, 5, 1001]))
def test_field_operations(a, b, c, d, D):
    x, y = QuadExt(a, b, D), QuadExt(c, d, D)
    assert (x + y) - y == x
    if y != QuadExt(0):
        assert (x * y) / y == x


def test_nearest_frac_examples():
    m, f = nearest_frac(GOLDEN)
    assert m == 2 and float(f) == pytest.approx(-0.3819660, abs=1e-7)
    assert nearest_frac(Fraction(7, 2)) == (4, QuadExt(Fraction(-1, 2)))
    assert nearest_frac(0) == (0, QuadExt(0))


def test_floor_and_float():
    assert GOLDEN.floor() == 1
    assert QuadExt(0, -1, 2).floor() == -2
    assert float(GOLDEN) == 1.618033988749895
    big = QuadExt(10**30, 1, 2)
    assert float(big - 10**30) == pytest.approx(2 ** 0.5, rel=1e-15)


def test_eval_theta_examples():
    iv = eval_theta(parse_theta("golden"), Fraction(1, 1000))
    assert iv.width <= Fraction(1, 1000) and GOLDEN in iv
    assert eval_theta(parse_theta("rat:22/7"), Fraction(1, 10)) == CertInterval(Fraction(22, 7), Fraction(22, 7))
    with pytest.raises(StreamExhausted):
        eval_theta(parse_theta("cf:0,1,2"), Fraction(1, 10**9))


def test_eval_theta_nested_for_streams():
    th = parse_theta("cf-rule:arith")
    outer = eval_theta(th, Fraction(1, 10**3))
    for e in range(4, 30, 3):
        inner = eval_theta(th, Fraction(1, 10**e))
        assert outer.lo <= inner.lo <= inner.hi <= outer.hi
        outer = inner


def test_frac_q_theta_examples():
    g = parse_theta("golden")
    assert float(frac_q_theta(g, 1)) == pytest.approx(-0.3819660, abs=1e-7)
    assert frac_q_theta(parse_theta("rat:1/3"), 3) == QuadExt(0)
    assert float(frac_q_theta(g, 5)) == pytest.approx(0.0901699, abs=1e-7)


def test_frac_q_theta_surd_agrees_with_interval_route():
    th = parse_theta("surd:(1+sqrt(2))/1")
    iv = eval_theta(th, Fraction(1, 1 << 80))
    for q in range(1, 10_001, 37):
        exact = frac_q_theta(th, q)
        m = round(iv.mid * q)
        assert exact in CertInterval(iv.lo * q - m, iv.hi * q - m)


def test_frac_q_theta_stream_interval():
    iv = frac_q_theta(parse_theta("cf-rule:const:1"), 5)
    assert isinstance(iv, CertInterval)
    assert float(iv) == pytest.approx(5 * 0.6180339887498949 - 3, abs=1e-12)


def test_fixed_point_frac():
    g = parse_theta("golden")
    assert fixed_point_frac(g, 1, 64) == ((GOLDEN - 1) * (1 << 64)).floor()
    v = fixed_point_frac(g, 10**15 + 7, 96) / 2**96
    f = float(frac_q_theta(g, 10**15 + 7)) % 1.0
    assert v == pytest.approx(f, abs=1e-15)


@pytest.mark.parametrize("text", ["0.618", "pi", "surd:(1+sqrt(5))/0", "cf:", "cf-rule:fib"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_theta(text)


def test_parse_surd_that_is_rational():
    th = parse_theta("surd:(1+sqrt(4))/3")
    assert th.exact() == QuadExt(1)
