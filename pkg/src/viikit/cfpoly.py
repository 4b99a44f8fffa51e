"""The continued-fraction polynomials P_n, their cyclic symmetrization Q_p and
the discriminant Delta_p.

``P_0 = 1``, ``P_1(x_1) = x_1`` and
``P_n(x_1..x_n) = x_1 P_{n-1}(x_2..x_n) - P_{n-2}(x_3..x_n)``.

Values are computed with the recurrence over suffixes; symbolic expansion is
a separate, capped operation. :func:`verify_identities` checks the algebraic
identities these polynomials satisfy, both symbolically and at seeded random
rational points, and runs two probes whose outcome is reported, not asserted.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import ArityCapExceeded, ArityTooSmall
from .exact import format_rational, to_rational

DEFAULT_ARITY_CAP = 12

Monomial = Tuple[int, ...]


# ---------------------------------------------------------------- evaluation

def eval_P(x: Sequence) -> Fraction:
    """P_n at the point ``x`` (n = len(x)); ``eval_P([]) == 1``."""
    return _suffix_values(x)[0]


def _suffix_values(x: Sequence) -> List:
    """``vals[k] = P_{n-k}(x[k:])`` for k = 0..n."""
    n = len(x)
    vals = [None] * (n + 2)
    vals[n + 1] = 0  # P_{-1}
    vals[n] = 1
    for k in range(n - 1, -1, -1):
        vals[k] = x[k] * vals[k + 1] - vals[k + 2]
    return vals[: n + 1]


def eval_Q(x: Sequence) -> Fraction:
    """Q_p(x) = P_p(x_0..x_{p-1}) - P_{p-2}(x_1..x_{p-2})."""
    if len(x) < 2:
        raise ArityTooSmall(f"Q_p needs p >= 2, got {len(x)}")
    return eval_P(x) - eval_P(x[1:-1])


def eval_Delta(x: Sequence, checked: bool = True) -> Fraction:
    """Discriminant ``(P_p + P_{p-2})^2 - 4 P_{p-1}(x[:-1]) P_{p-1}(x[1:])``.

    With ``checked`` the value is compared with ``Q_p(x)^2 - 4``.
    """
    if len(x) < 2:
        raise ArityTooSmall(f"Delta_p needs p >= 2, got {len(x)}")
    full = eval_P(x)
    middle = eval_P(x[1:-1])
    value = (full + middle) ** 2 - 4 * eval_P(x[:-1]) * eval_P(x[1:])
    if checked:
        alt = (full - middle) ** 2 - 4
        if alt != value:
            raise ArithmeticError(f"discriminant forms disagree at {list(x)}: {value} != {alt}")
    return value


# ---------------------------------------------------------------- symbolic

class SparsePolynomial:
    """Polynomial in ``arity`` variables with exact rational coefficients.

    Terms are stored as ``{exponent tuple: Fraction}`` without zeros. The P and
    Q families are multilinear; products such as the discriminant are not.
    """

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Optional[Dict[Monomial, Fraction]] = None):
        self.arity = arity
        self.terms: Dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            if len(mono) != arity:
                raise ValueError(f"monomial {mono} does not have arity {arity}")
            coeff = to_rational(coeff)
            if coeff:
                self.terms[tuple(mono)] = coeff

    @classmethod
    def constant(cls, arity: int, c) -> "SparsePolynomial":
        return cls(arity, {(0,) * arity: c})

    @classmethod
    def variable(cls, arity: int, i: int) -> "SparsePolynomial":
        mono = [0] * arity
        mono[i] = 1
        return cls(arity, {tuple(mono): 1})

    def _check(self, other):
        if isinstance(other, (int, Fraction)):
            return SparsePolynomial.constant(self.arity, other)
        if not isinstance(other, SparsePolynomial):
            raise TypeError(f"cannot combine SparsePolynomial with {type(other).__name__}")
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return SparsePolynomial(self.arity, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePolynomial(self.arity, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(e1 + e2 for e1, e2 in zip(m1, m2))
                out[mono] = out.get(mono, 0) + c1 * c2
        return SparsePolynomial(self.arity, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = SparsePolynomial.constant(self.arity, 1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SparsePolynomial.constant(self.arity, other)
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def is_multilinear(self) -> bool:
        return all(e <= 1 for mono in self.terms for e in mono)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def evaluate(self, point: Sequence):
        if len(point) != self.arity:
            raise ValueError("point has wrong arity")
        total = 0
        for mono, c in self.terms.items():
            term = c
            for xi, e in zip(point, mono):
                if e:
                    term = term * xi ** e
            total = total + term
        return total

    def derivative(self, i: int) -> "SparsePolynomial":
        out = {}
        for mono, c in self.terms.items():
            e = mono[i]
            if e:
                m = list(mono)
                m[i] = e - 1
                out[tuple(m)] = c * e
        return SparsePolynomial(self.arity, out)

    def permute(self, perm: Sequence[int]) -> "SparsePolynomial":
        """Substitute ``X_i -> X_{perm[i]}``."""
        out = {}
        for mono, c in self.terms.items():
            m = [0] * self.arity
            for i, e in enumerate(mono):
                m[perm[i]] += e
            out[tuple(m)] = out.get(tuple(m), 0) + c
        return SparsePolynomial(self.arity, out)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), [-e for e in t[0]]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            names = []
            for i, e in enumerate(mono):
                if e == 1:
                    names.append(f"X{i}")
                elif e > 1:
                    names.append(f"X{i}^{e}")
            body = "*".join(names)
            mag = abs(c)
            if not body:
                text = format_rational(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{format_rational(mag)}*{body}"
            parts.append(("-" if c < 0 else "+", text))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out

    __repr__ = __str__

    def to_json(self):
        return {"arity": self.arity,
                "terms": [[list(m), format_rational(c)] for m, c in self.sorted_terms()]}


def _check_cap(n: int, cap: int):
    if n > cap:
        raise ArityCapExceeded(f"symbolic arity {n} exceeds cap {cap}")


def symbolic_P(indices: Sequence[int], arity: int) -> SparsePolynomial:
    """P_n over the variables ``X_{indices[0]}, ..., X_{indices[n-1]}``."""
    n = len(indices)
    vals: List[SparsePolynomial] = [None] * (n + 2)
    vals[n + 1] = SparsePolynomial(arity)
    vals[n] = SparsePolynomial.constant(arity, 1)
    for k in range(n - 1, -1, -1):
        vals[k] = SparsePolynomial.variable(arity, indices[k]) * vals[k + 1] - vals[k + 2]
    return vals[0]


def expand_P(n: int, cap: int = DEFAULT_ARITY_CAP) -> SparsePolynomial:
    _check_cap(n, cap)
    return symbolic_P(range(n), n)


def expand_Q(p: int, cap: int = DEFAULT_ARITY_CAP) -> SparsePolynomial:
    if p < 2:
        raise ArityTooSmall(f"Q_p needs p >= 2, got {p}")
    _check_cap(p, cap)
    return symbolic_P(range(p), p) - symbolic_P(range(1, p - 1), p)


def expand_Delta(p: int, cap: int = DEFAULT_ARITY_CAP) -> SparsePolynomial:
    if p < 2:
        raise ArityTooSmall(f"Delta_p needs p >= 2, got {p}")
    _check_cap(p, cap)
    full = symbolic_P(range(p), p)
    middle = symbolic_P(range(1, p - 1), p)
    return (full + middle) ** 2 - 4 * symbolic_P(range(p - 1), p) * symbolic_P(range(1, p), p)


# ---------------------------------------------------------------- identities

def _elementary_sum_sides(x: Sequence):
    """Both sides of sum_j (p+1-j) e_j(x) = prod(1+x_i) + sum_k prod_{i!=k}(1+x_i).

    Works for numbers and for SparsePolynomial entries alike.
    """
    p = len(x)
    one = x[0] * 0 + 1
    # e[j] = elementary symmetric polynomial of degree j
    e = [one] + [one * 0] * p
    for xi in x:
        for j in range(p, 0, -1):
            e[j] = e[j] + e[j - 1] * xi
    lhs = one * 0
    for j in range(p + 1):
        lhs = lhs + e[j] * (p + 1 - j)
    factors = [xi + 1 for xi in x]
    rhs = one
    for f in factors:
        rhs = rhs * f
    for k in range(p):
        prod = one
        for i, f in enumerate(factors):
            if i != k:
                prod = prod * f
        rhs = rhs + prod
    return lhs, rhs


def _identity_sides(name: str, x: Sequence, p: int):
    """(lhs, rhs, list of rotations/extra checks) for identity ``name`` at ``x``."""
    if name == "reversal":
        return [(eval_P(x), eval_P(x[::-1]))]
    if name == "cyclic":
        base = eval_Q(x)
        return [(base, eval_Q(list(x[r:]) + list(x[:r]))) for r in range(1, p)]
    if name == "a_p_minus_one":
        return [(eval_P(x) * eval_P(x[1:-1]) - eval_P(x[:-1]) * eval_P(x[1:]), Fraction(-1))]
    if name == "delta_forms":
        full, middle = eval_P(x), eval_P(x[1:-1])
        return [((full + middle) ** 2 - 4 * eval_P(x[:-1]) * eval_P(x[1:]), (full - middle) ** 2 - 4)]
    if name == "elementary_sum":
        return [_elementary_sum_sides(list(x))]
    raise KeyError(name)


def _symbolic_sides(name: str, p: int):
    if name == "reversal":
        P = expand_P(p)
        return [(P, P.permute([p - 1 - i for i in range(p)]))]
    if name == "cyclic":
        Q = expand_Q(p)
        return [(Q, Q.permute([(i - r) % p for i in range(p)])) for r in range(1, p)]
    if name == "a_p_minus_one":
        lhs = (symbolic_P(range(p), p) * symbolic_P(range(1, p - 1), p)
               - symbolic_P(range(p - 1), p) * symbolic_P(range(1, p), p))
        return [(lhs, SparsePolynomial.constant(p, -1))]
    if name == "delta_forms":
        full = symbolic_P(range(p), p)
        middle = symbolic_P(range(1, p - 1), p)
        return [(expand_Delta(p), (full - middle) ** 2 - 4)]
    if name == "elementary_sum":
        xs = [SparsePolynomial.variable(p, i) for i in range(p)]
        return [_elementary_sum_sides(xs)]
    raise KeyError(name)


IDENTITIES = {
    # name: minimal p
    "reversal": 1,
    "cyclic": 2,
    "a_p_minus_one": 2,
    "delta_forms": 2,
    "elementary_sum": 1,
}


def random_rational(rng: random.Random, lo: int = 1, hi: int = 50) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(lo, hi))


@dataclass
class IdentityCheck:
    identity: str
    p: int
    mode: str  # "symbolic" or "random"
    passed: bool
    trials: int
    counterexample: Optional[dict] = None

    def to_json(self):
        out = {"identity": self.identity, "p": self.p, "mode": self.mode,
               "status": "pass" if self.passed else "fail", "trials": self.trials}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class IdentityReport:
    p_max: int
    trials: int
    seed: int
    checks: List[IdentityCheck] = field(default_factory=list)
    probes: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return {"p_max": self.p_max, "trials": self.trials, "seed": self.seed,
                "status": "pass" if self.passed else "fail",
                "checks": [c.to_json() for c in self.checks],
                "probes": self.probes}


def _jsonable(v):
    if isinstance(v, SparsePolynomial):
        return str(v)
    return format_rational(v)


def verify_identities(p_max: int, trials: int, seed: int,
                      symbolic_max: int = 8, probe_max: int = 6) -> IdentityReport:
    """Check the P/Q/Delta identities for every p <= p_max.

    Symbolic checks run for p <= min(p_max, symbolic_max); each identity is
    also evaluated at ``trials`` seeded random rational points. The derivative
    and closed-form probes are appended to ``report.probes``.
    """
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    _check_cap(min(p_max, symbolic_max), DEFAULT_ARITY_CAP)
    report = IdentityReport(p_max=p_max, trials=trials, seed=seed)
    rng = random.Random(seed)
    for p in range(1, p_max + 1):
        for name, p_min in IDENTITIES.items():
            if p < p_min:
                continue
            if p <= symbolic_max:
                bad = next(((l, r) for l, r in _symbolic_sides(name, p) if l != r), None)
                cex = None if bad is None else {"lhs": str(bad[0]), "rhs": str(bad[1])}
                report.checks.append(IdentityCheck(name, p, "symbolic", bad is None, 1, cex))
            cex = None
            for t in range(trials):
                x = [random_rational(rng) for _ in range(p)]
                for lhs, rhs in _identity_sides(name, x, p):
                    if lhs != rhs and cex is None:
                        cex = {"trial": t, "input": [format_rational(v) for v in x],
                               "lhs": _jsonable(lhs), "rhs": _jsonable(rhs)}
            report.checks.append(IdentityCheck(name, p, "random", cex is None, trials, cex))
    report.probes.append(derivative_probe(probe_max))
    report.probes.append(q_closed_form_probe())
    report.probes.append(p_closed_form_probe())
    return report


# ---------------------------------------------------------------- probes

def derivative_probe(j_max: int = 6) -> dict:
    """Compare d^|q| P_j / dX_q with P_{j-|q|} of the remaining variables.

    Every non-empty 0/1 selection q for 1 <= j <= j_max is tried. The result
    records how many selections agree and the first disagreement, plus the
    j = 3 interior case (differentiate X_1 only) spelled out.
    """
    total = agree = 0
    first = None
    for j in range(1, j_max + 1):
        P = expand_P(j)
        for size in range(1, j + 1):
            for q in itertools.combinations(range(j), size):
                deriv = P
                for i in q:
                    deriv = deriv.derivative(i)
                rest = [i for i in range(j) if i not in q]
                expected = symbolic_P(rest, j)
                total += 1
                if deriv == expected:
                    agree += 1
                elif first is None:
                    first = {"j": j, "q": list(q), "derivative": str(deriv), "omitted_form": str(expected)}
    P3 = expand_P(3)
    interior = {"j": 3, "q": [1], "derivative": str(P3.derivative(1)),
                "omitted_form": str(symbolic_P([0, 2], 3)),
                "agrees": P3.derivative(1) == symbolic_P([0, 2], 3)}
    return {"probe": "derivative_omission", "j_max": j_max, "selections": total,
            "agreeing": agree, "holds": agree == total,
            "first_mismatch": first, "interior_j3": interior}


def q_closed_form_probe(points: Iterable[Sequence] = ((3, 3), (2, 2), (3, 2, 4))) -> dict:
    """Compare Q_p(d) with 2 * prod(d_i - 1) at a few points."""
    rows = []
    for pt in points:
        pt = [to_rational(v) for v in pt]
        closed = 2
        for v in pt:
            closed *= v - 1
        actual = eval_Q(pt)
        rows.append({"point": [format_rational(v) for v in pt], "value": format_rational(actual),
                     "closed_form": format_rational(closed), "agrees": actual == closed})
    return {"probe": "q_closed_form", "holds": all(r["agrees"] for r in rows), "points": rows}


def p_closed_form_probe(points: Iterable[Sequence] = ((3, 3), (2, 3, 4), (3, 3, 3))) -> dict:
    """Compare P_n(d) with prod(d_i - 1) + sum_k prod_{i!=k}(d_i - 1)."""
    rows = []
    for pt in points:
        pt = [to_rational(v) for v in pt]
        shifted = [v - 1 for v in pt]
        closed = 1
        for v in shifted:
            closed *= v
        for k in range(len(pt)):
            prod = 1
            for i, v in enumerate(shifted):
                if i != k:
                    prod *= v
            closed += prod
        actual = eval_P(pt)
        rows.append({"point": [format_rational(v) for v in pt], "value": format_rational(actual),
                     "closed_form": format_rational(closed), "agrees": actual == closed})
    return {"probe": "p_closed_form", "holds": all(r["agrees"] for r in rows), "points": rows}
