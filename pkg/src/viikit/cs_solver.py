"""Exact solution of the cyclic Camacho-Sad system

    alpha_i + 1/alpha_{i+1} = delta_i,   i mod p.

Everything here uses the sign-flipped convention: ``alpha_i`` is minus the
Camacho-Sad index, so ``alpha_i > 0`` means the index is negative. Negation
back to actual indices happens only when certificates are rendered.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from .cfpoly import eval_P
from .errors import (
    ComplexRoots,
    DegenerateSystem,
    ForbiddenValue,
    IndexOutOfRange,
    InvalidChain,
    InvalidConfiguration,
)
from .exact import QuadraticNumber, format_rational, quad_solve, scalar_to_json, to_rational


def _P(values) -> Fraction:
    """P_n with the convention P_{-1} = 0 (signalled by ``None``)."""
    if values is None:
        return Fraction(0)
    return eval_P(values)


@dataclass(frozen=True)
class DeltaSystem:
    delta: Tuple[Fraction, ...]
    provenance: Optional[object] = None

    def __post_init__(self):
        delta = tuple(to_rational(d) for d in self.delta)
        if not delta:
            raise ValueError("a cyclic system needs p >= 1")
        object.__setattr__(self, "delta", delta)

    @property
    def p(self) -> int:
        return len(self.delta)

    def window(self, start: int, length: int):
        """``delta_start, ..., delta_{start+length-1}`` read cyclically; None if length < 0."""
        if length < 0:
            return None
        return [self.delta[(start + i) % self.p] for i in range(length)]

    def to_json(self):
        return [format_rational(d) for d in self.delta]


@dataclass(frozen=True)
class QuadraticEquation:
    a: Fraction
    b: Fraction
    c: Fraction
    index: int

    @property
    def discriminant(self) -> Fraction:
        return self.b * self.b - 4 * self.a * self.c

    def primitive(self) -> Tuple[int, int, int]:
        """Integer multiple with coprime coefficients and positive leading term."""
        den = 1
        for q in (self.a, self.b, self.c):
            den = den * q.denominator // gcd(den, q.denominator)
        ints = [int(q * den) for q in (self.a, self.b, self.c)]
        g = gcd(gcd(abs(ints[0]), abs(ints[1])), abs(ints[2])) or 1
        sign = -1 if ints[0] < 0 else 1
        return tuple(sign * v // g for v in ints)

    def __call__(self, x):
        return self.a * x * x + self.b * x + self.c

    def to_json(self):
        return {"index": self.index, "a": format_rational(self.a), "b": format_rational(self.b),
                "c": format_rational(self.c), "primitive": list(self.primitive())}


@dataclass(frozen=True)
class CSSolution:
    alpha: Tuple[QuadraticNumber, ...]
    branch: str  # "plus" or "minus"
    mu: QuadraticNumber
    discriminant: Fraction

    def rotated(self, start: int) -> Tuple[QuadraticNumber, ...]:
        """The alpha vector read cyclically from ``start``."""
        p = len(self.alpha)
        return tuple(self.alpha[(start + i) % p] for i in range(p))

    def to_json(self):
        return {"branch": self.branch, "alpha": [scalar_to_json(a) for a in self.alpha],
                "mu": scalar_to_json(self.mu), "discriminant": format_rational(self.discriminant)}


@dataclass(frozen=True)
class Certificate:
    signs: Tuple[int, ...]
    verdict: str
    mu: QuadraticNumber
    mu_at_least_one: bool

    @property
    def all_negative(self) -> bool:
        return self.verdict == "AllNegativeCS"

    def to_json(self):
        return {"verdict": self.verdict,
                "alpha_signs": list(self.signs),
                "cs_index_signs": [-s for s in self.signs],
                "mu": scalar_to_json(self.mu),
                "mu_at_least_one": self.mu_at_least_one}


def coefficients(system: DeltaSystem, j: int) -> QuadraticEquation:
    """The quadratic ``a_j X^2 + b_j X + c_j`` satisfied by ``alpha_j``.

    For p = 1 the same formulas (with P_{-1} = 0) give X^2 - delta_0 X + 1.
    """
    p = system.p
    if not 0 <= j < p:
        raise IndexOutOfRange(f"index {j} outside 0..{p - 1}")
    a = _P(system.window(j + 1, p - 1))
    c = _P(system.window(j, p - 1))
    b = -(_P(system.window(j, p)) + _P(system.window(j + 1, p - 2)))
    if c == 0:
        raise DegenerateSystem([j])
    return QuadraticEquation(a, b, c, j)


def check_degenerate(system: DeltaSystem) -> None:
    """Raise DegenerateSystem listing every j with c_j(delta) = 0."""
    p = system.p
    bad = [j for j in range(p) if _P(system.window(j, p - 1)) == 0]
    if bad:
        raise DegenerateSystem(bad)


def propagate(alpha0, system: DeltaSystem) -> List[QuadraticNumber]:
    """Extend a root of (E_0) to the whole vector.

    The closed form in terms of P-polynomials and the plain recurrence
    ``alpha_{i+1} = 1/(delta_i - alpha_i)`` are both evaluated and must agree.
    """
    alpha0 = QuadraticNumber.coerce(alpha0)
    d = system.delta
    p = system.p
    closed = [alpha0]
    for i in range(p):
        num = alpha0 * _P(d[1:i] if i >= 1 else None) - _P(d[:i])
        den = alpha0 * _P(d[1:i + 1]) - _P(d[:i + 1])
        if den == 0:
            raise ForbiddenValue(f"alpha_0 = {alpha0} equals the excluded ratio at i = {i}")
        closed.append(num / den)
    sequential = [alpha0]
    for i in range(p):
        gap = d[i] - sequential[-1]
        if gap == 0:
            raise ForbiddenValue(f"delta_{i} - alpha_{i} vanishes")
        sequential.append(1 / gap)
    if closed != sequential:
        raise ArithmeticError("closed-form and sequential propagation disagree")
    if closed[p] != alpha0:
        raise ValueError(f"{alpha0} is not a root of the cyclic system")
    return closed[:p]


def torsion(solution: CSSolution) -> QuadraticNumber:
    """mu = prod(alpha_i), exact in the field of the discriminant."""
    return _product(solution.alpha)


def _product(values) -> QuadraticNumber:
    mu = QuadraticNumber(1)
    for a in values:
        mu = mu * a
    return mu


def solve_system(system: DeltaSystem) -> Tuple[CSSolution, CSSolution]:
    """Both exact solution vectors, plus-branch (mu >= 1) first.

    When the two roots of (E_0) coincide the same solution object is returned
    twice.
    """
    check_degenerate(system)
    eq = coefficients(system, 0)
    disc = eq.discriminant
    if disc < 0:
        raise ComplexRoots(disc)
    roots = quad_solve(eq.a, eq.b, eq.c)
    vectors = [tuple(propagate(r, system)) for r in (roots.larger, roots.smaller)]
    mus = [_product(v) for v in vectors]
    if roots.larger == roots.smaller:
        only = CSSolution(vectors[0], "plus", mus[0], disc)
        return only, only
    if mus[0] < mus[1]:
        vectors.reverse()
        mus.reverse()
    return (CSSolution(vectors[0], "plus", mus[0], disc),
            CSSolution(vectors[1], "minus", mus[1], disc))


def verify_negativity(solution: CSSolution) -> Certificate:
    signs = tuple(a.sign() for a in solution.alpha)
    verdict = "AllNegativeCS" if all(s > 0 for s in signs) else "NotAllNegativeCS"
    mu = torsion(solution)
    return Certificate(signs, verdict, mu, mu >= 1)


# ---------------------------------------------------------------- branches

def branch_contribution(chain: Sequence[int]) -> Fraction:
    """Minus the Camacho-Sad index that a chain induces on the cycle curve.

    ``chain`` lists self-intersections from the top curve C_0 to the curve
    meeting the cycle. ``beta_0 = -C_0^2``, ``beta_{i+1} = -C_{i+1}^2 - 1/beta_i``
    and the result is ``1/beta_{k-1}``; an empty chain contributes 0.
    """
    if not chain:
        return Fraction(0)
    for c in chain:
        if c > -2:
            raise InvalidChain(f"self-intersection {c} > -2 in chain {list(chain)}")
    beta = Fraction(-chain[0])
    for c in chain[1:]:
        beta = -c - 1 / beta
    return 1 / beta


def chain_bounds(chain: Sequence[int]) -> Tuple[Fraction, Fraction]:
    """Interval ``[-1/C_{k-1}^2, k/(k+1)]`` containing branch_contribution."""
    k = len(chain)
    return Fraction(1, -chain[-1]), Fraction(k, k + 1)


def build_delta(config) -> DeltaSystem:
    """delta_j = -D_j^2 - branch_contribution(branch at j), in cycle order."""
    chains = {br.attach: br.chain for br in config.branches}
    delta = []
    for j, curve in enumerate(config.cycle):
        delta.append(Fraction(-curve.self_int) - branch_contribution(chains.get(j, ())))
    if any(d <= 1 for d in delta):
        raise InvalidConfiguration(f"delta entries must exceed 1, got {delta}")
    return DeltaSystem(tuple(delta), provenance=config)
