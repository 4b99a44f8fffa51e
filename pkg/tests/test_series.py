import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import earliest_difference
from viikit.errors import ExpressionError, FixtureError, NonUnit, OrderMismatch
from viikit.series import (
    FactorizationFixture,
    PolyMap,
    TruncatedSeries,
    compose_chain,
    format_series,
    invert_unit,
    parse_expression,
    synthetic_fixture,
    verify_factorization,
)

Z, ZETA = sympy.symbols("z zeta")


def series(d, n):
    return TruncatedSeries(d, n)


def z(n):
    return TruncatedSeries.monomial(1, 0, n)


def zeta(n):
    return TruncatedSeries.monomial(0, 1, n)


def to_sympy(s):
    return sum(sympy.Rational(c.numerator, c.denominator) * Z ** a * ZETA ** b for (a, b), c in s.coeffs.items())


def truncate_sympy(expr, n):
    poly = sympy.Poly(sympy.expand(expr), Z, ZETA)
    return sum(c * Z ** a * ZETA ** b for (a, b), c in poly.terms() if a + b <= n)


def test_invert_unit_examples():
    assert format_series(invert_unit(series({(0, 0): 1, (0, 1): 1}, 3))) == "1 - zeta + zeta^2 - zeta^3"
    A = series({(0, 0): 1, (0, 2): 5, (1, 3): 2}, 4)
    assert invert_unit(A).coeffs == {(0, 0): 1, (0, 2): -5, (1, 3): -2, (0, 4): 25}
    with pytest.raises(NonUnit):
        invert_unit(series({(1, 0): 1}, 3))


def test_compose_chain_trivial():
    inner = (z(5), zeta(5))
    assert compose_chain([], inner, 5) == inner
    out = compose_chain([PolyMap("u*v", "v")], inner, 5)
    assert out[0].coeffs == {(1, 1): 1} and out[1] == zeta(5)
    with pytest.raises(OrderMismatch):
        compose_chain([], inner, 6)


def test_compose_against_sympy():
    rng = random.Random(2)
    maps = [PolyMap("v", "u*v"), PolyMap("u*v + 2", "v"), PolyMap("(u + 1)*v", "v")]
    x = {(rng.randint(0, 2), rng.randint(0, 2)): rng.randint(-3, 3) for _ in range(5)}
    y = {(0, 1): 1, (1, 1): 2}
    out = compose_chain(maps, (series(x, 8), series(y, 8)), 8)
    u, v = to_sympy(series(x, 8)), to_sympy(series(y, 8))
    u, v = (u + 1) * v, v
    u, v = u * v + 2, v
    u, v = v, u * v
    assert sympy.expand(to_sympy(out[0]) - truncate_sympy(u, 8)) == 0
    assert sympy.expand(to_sympy(out[1]) - truncate_sympy(v, 8)) == 0


small = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                        st.fractions(min_value=-5, max_value=5, max_denominator=4), max_size=6)


@settings(max_examples=50)
@given(small, small, small)
def test_ring_laws(a, b, c):
    x, y, w = series(a, 6), series(b, 6), series(c, 6)
    assert x + y == y + x and x * y == y * x
    assert (x * y) * w == x * (y * w)
    assert x * (y + w) == x * y + x * w


@settings(max_examples=30)
@given(small, small)
def test_truncation_coherence(a, b):
    x, y = series(a, 8), series(b, 8)
    assert (x * y).truncate(5) == x.truncate(5) * y.truncate(5)


def test_invert_unit_roundtrip_random():
    rng = random.Random(99)
    for _ in range(50):
        coeffs = {(a, b): F(rng.randint(-4, 4), rng.randint(1, 3))
                  for a in range(4) for b in range(4 - a) if rng.random() < 0.5}
        coeffs[(0, 0)] = F(rng.choice([1, 2, -3]), rng.randint(1, 4))
        s = series(coeffs, 12)
        assert s * invert_unit(s) == TruncatedSeries.constant(1, 12)


def test_parser():
    assert parse_expression("A^-3 - 1") == ("-", ("^", ("name", "A"), -3), ("num", 1))
    for bad in ("", "1 +", "(u", "u $ v", "u^v"):
        with pytest.raises(ExpressionError):
            parse_expression(bad)
    with pytest.raises(ExpressionError):
        PolyMap("1/u", "v")


def test_divisibility_violation_is_reported():
    fixture = FactorizationFixture.from_json({
        "target": {"expressions": ["z", "zeta"]},
        "intermediates": [{"name": "B", "numerator": "1 + zeta", "divide_by": "zeta"}],
        "sigma": ["B", "zeta"], "chain": []})
    report = verify_factorization(fixture, 5)
    assert not report.passed and "violated" in report.error
    with pytest.raises(FixtureError):
        FactorizationFixture.from_json({"sigma": ["z"]})


def test_synthetic_pass_at_every_order():
    fixture = FactorizationFixture.from_json(synthetic_fixture(7))
    for n in range(3, 13):
        assert verify_factorization(fixture, n).passed


@pytest.mark.parametrize("seed", [7, 8, 9])
def test_perturbation_is_localized(seed):
    fx = synthetic_fixture(seed, perturb=True)
    verdict = verify_factorization(FactorizationFixture.from_json(fx), 12).results[0][1]
    assert verdict.verdict == "Mismatch"
    _, mono, comp = earliest_difference(fx)
    assert (verdict.monomial, verdict.component) == (mono, comp)
    assert verdict.actual - verdict.expected != 0


def _ex2(c3=5, lam=2, chain=None):
    return {"assignment": {"lambda": str(lam), "c3": str(c3)},
            "target": {"germ": {"k": 3, "s": 4, "j": 1, "coeffs": {"1": "1", "3": "c3"}, "lambda": "lambda"}},
            "intermediates": [{"name": "A", "expression": "lambda*z*zeta^3 + 1 + c3*zeta^2"},
                              {"name": "B", "numerator": "A^-3 - 1", "divide_by": "zeta^2"},
                              {"name": "C", "numerator": "B*A^-2 + 3*c3", "divide_by": "zeta"}],
            "sigma": ["C*A^-1", "zeta*A"],
            "chain": chain or [["v", "u*v"], ["u*v", "v"], ["u*v", "v"], ["u*v + 1", "v"], ["u*v", "v"],
                               ["u*v - 3*c3", "v"]]}


def test_ex2_chain_against_direct_expansion():
    report = verify_factorization(FactorizationFixture.from_json(_ex2()), 10)
    assert report.passed
    # the target expansion itself, checked by hand: (2 z zeta^4 + zeta + 5 zeta^3, zeta^3)
    target = FactorizationFixture.from_json(_ex2()).target_series(10)
    assert target[0].coeffs == {(1, 4): 2, (0, 1): 1, (0, 3): 5} and target[1].coeffs == {(0, 3): 1}


def test_ex2_other_parameters_and_broken_chain():
    assert verify_factorization(FactorizationFixture.from_json(_ex2(c3=-1, lam=3)), 9).passed
    broken = _ex2(chain=[["v", "u*v"], ["u*v", "v"], ["u*v", "v"], ["u*v + 2", "v"], ["u*v", "v"],
                         ["u*v - 3*c3", "v"]])
    assert not verify_factorization(FactorizationFixture.from_json(broken), 9).passed
