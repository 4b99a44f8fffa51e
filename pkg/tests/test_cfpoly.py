import itertools
import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from viikit.cfpoly import (
    SparsePolynomial,
    derivative_probe,
    eval_Delta,
    eval_P,
    eval_Q,
    expand_Delta,
    expand_P,
    expand_Q,
    q_closed_form_probe,
    verify_identities,
)
from viikit.errors import ArityCapExceeded, ArityTooSmall

X = sympy.symbols("X0:13")

# reference expansions, used verbatim
REFERENCE = {
    ("P", 2): "X0*X1-1",
    ("P", 3): "X0*X1*X2-X0-X2",
    ("P", 4): "X0*X1*X2*X3-X0*X1-X0*X3-X2*X3 +1",
    ("P", 5): "X0*X1*X2*X3*X4 - X0*X1*X2 - X2*X3*X4 - X3*X4*X0 - X4*X0*X1+X0+X2+X4",
    ("P", 6): ("X0*X1*X2*X3*X4*X5 -X0*X1*X2*X3 - X2*X3*X4*X5 - X3*X4*X5*X0 - X4*X5*X0*X1 - X5*X0*X1*X2"
               " + X0*X1 + X2*X3 + X4*X5 + X5*X0 + X0*X3 + X2*X5 -1"),
    ("Q", 2): "X0*X1-2",
    ("Q", 3): "X0*X1*X2-X0-X1-X2",
    ("Q", 4): "X0*X1*X2*X3-X0*X1-X1*X2-X2*X3-X3*X0 +2",
    ("Q", 5): ("X0*X1*X2*X3*X4 - X0*X1*X2 - X1*X2*X3 - X2*X3*X4 - X3*X4*X0 - X4*X0*X1"
               " + X0+X1+X2+X3+X4"),
    ("Q", 6): ("X0*X1*X2*X3*X4*X5 -X0*X1*X2*X3-X1*X2*X3*X4 - X2*X3*X4*X5 - X3*X4*X5*X0 - X4*X5*X0*X1"
               " -X5*X0*X1*X2 +X0*X1+X1*X2+X2*X3+X3*X4+X4*X5+X5*X0+X0*X3+X1*X4+X2*X5 -2"),
}


def to_sympy(poly: SparsePolynomial):
    expr = 0
    for mono, c in poly.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for i, e in enumerate(mono):
            term *= X[i] ** e
        expr += term
    return sympy.expand(expr)


def sympy_P(xs):
    """Independent oracle: P_n as the signed sum over matchings of the path."""
    n = len(xs)
    total = 0
    for k in range(n // 2 + 1):
        for starts in itertools.combinations(range(n - 1), k):
            if any(b - a < 2 for a, b in zip(starts, starts[1:])):
                continue
            removed = {s for s in starts} | {s + 1 for s in starts}
            term = (-1) ** k
            for i in range(n):
                if i not in removed:
                    term *= xs[i]
            total += term
    return sympy.expand(total)


rats = st.fractions(min_value=-20, max_value=20, max_denominator=30)


def test_eval_P_examples():
    assert eval_P([]) == 1
    assert eval_P([2, 2, 2]) == 4
    assert eval_P([2, F(11, 4), 2]) == 7
    assert eval_P([2, 2, F(11, 4)]) == F(25, 4)


def test_eval_Q_examples():
    assert eval_Q([2, 2]) == 2
    assert eval_Q([2, F(11, 4), 2]) == F(17, 4)
    for p in range(2, 13):
        assert eval_Q([2] * p) == 2
    with pytest.raises(ArityTooSmall):
        eval_Q([3])


def test_eval_Delta_examples():
    assert eval_Delta([2, 2, 2]) == 0
    assert eval_Delta([2, F(11, 4), 2]) == F(225, 16)
    assert eval_Q([0, 1]) == -2
    assert eval_Delta([0, 1]) == 0
    with pytest.raises(ArityTooSmall):
        eval_Delta([1])


@pytest.mark.parametrize("kind, n", sorted(REFERENCE))
def test_expansions_match_reference(kind, n):
    poly = expand_P(n) if kind == "P" else expand_Q(n)
    assert to_sympy(poly) == sympy.expand(sympy.sympify(REFERENCE[(kind, n)]))


def test_expand_small_cases():
    assert expand_P(0) == SparsePolynomial.constant(0, 1)
    assert str(expand_P(2)) == "X0*X1 - 1"
    assert len(expand_P(6)) == 13


@pytest.mark.parametrize("n", range(0, 11))
def test_expand_P_against_matching_oracle(n):
    assert to_sympy(expand_P(n)) == sympy_P(X[:n])
    assert expand_P(n).is_multilinear()


def test_expand_Delta_against_sympy():
    for p in range(2, 7):
        P = sympy_P(X[:p])
        mid = sympy_P(X[1:p - 1])
        expected = sympy.expand((P + mid) ** 2 - 4 * sympy_P(X[:p - 1]) * sympy_P(X[1:p]))
        assert to_sympy(expand_Delta(p)) == expected


def test_arity_cap():
    with pytest.raises(ArityCapExceeded):
        expand_P(13)
    assert len(expand_P(13, cap=13)) == 377


@settings(max_examples=60)
@given(st.integers(0, 12).flatmap(lambda n: st.lists(rats, min_size=n, max_size=n)))
def test_reversal(x):
    assert eval_P(x) == eval_P(x[::-1])


@settings(max_examples=60)
@given(st.integers(2, 12).flatmap(lambda n: st.lists(rats, min_size=n, max_size=n)))
def test_cyclic_and_discriminant(x):
    q = eval_Q(x)
    d = eval_Delta(x)
    for r in range(len(x)):
        rot = x[r:] + x[:r]
        assert eval_Q(rot) == q
        assert eval_Delta(rot) == d
    assert eval_P(x) * eval_P(x[1:-1]) - eval_P(x[:-1]) * eval_P(x[1:]) == -1


@settings(max_examples=40)
@given(st.integers(0, 8).flatmap(lambda n: st.lists(rats, min_size=n, max_size=n)))
def test_expand_eval_agreement(x):
    assert expand_P(len(x)).evaluate(x) == eval_P(x)


def test_closed_values_at_two():
    for p in range(0, 13):
        assert eval_P([2] * p) == p + 1
    for p in range(2, 13):
        assert eval_Delta([2] * p) == 0


def test_growth_bounds_random():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(2, 12)
        d = [2 + F(rng.randint(0, 50), rng.randint(1, 50)) for _ in range(n)]
        for i in range(n):
            for j in range(n - i):
                window = d[i:i + j + 1]
                assert eval_P(window) / eval_P(window[:-1]) >= F(j + 2, j + 1)
                assert eval_P(window) >= j + 2
        for p in range(2, n + 1):
            assert eval_P(d[:p]) - eval_P(d[1:p - 1]) >= 2


def test_elementary_sum_p2_by_hand():
    from viikit.cfpoly import _elementary_sum_sides

    x0, x1 = SparsePolynomial.variable(2, 0), SparsePolynomial.variable(2, 1)
    lhs, rhs = _elementary_sum_sides([x0, x1])
    expected = 3 + 2 * x0 + 2 * x1 + x0 * x1
    assert lhs == expected and rhs == expected


def test_verify_identities_small():
    report = verify_identities(4, 10, seed=3)
    assert report.passed
    names = {(c.identity, c.mode) for c in report.checks}
    assert ("elementary_sum", "symbolic") in names and ("a_p_minus_one", "random") in names


def test_verify_identities_deterministic():
    a = verify_identities(5, 5, seed=9).to_json()
    b = verify_identities(5, 5, seed=9).to_json()
    assert a == b


def test_verify_identities_rejects_small_pmax():
    with pytest.raises(ValueError):
        verify_identities(1, 1, seed=1)


def test_derivative_probe_reports_interior_case():
    probe = derivative_probe()
    assert probe["holds"] is False
    case = probe["interior_j3"]
    assert case["derivative"] == "X0*X2"
    assert case["omitted_form"] == "X0*X2 - 1"
    assert case["agrees"] is False


def test_derivative_probe_consecutive_blocks_agree():
    # differentiating an end variable of P_j yields P_{j-1} of the rest
    P = expand_P(5)
    assert P.derivative(0) == SparsePolynomial(5, {}) + _shift(expand_P(4), 5, 1)


def _shift(poly, arity, offset):
    return SparsePolynomial(arity, {(0,) * offset + m + (0,) * (arity - offset - len(m)): c
                                    for m, c in poly.terms.items()})


def test_q_closed_form_probe():
    probe = q_closed_form_probe()
    row = probe["points"][0]
    assert row["point"] == ["3", "3"] and row["value"] == "7" and row["closed_form"] == "8"
    assert probe["holds"] is False
