"""Contracting germs in normal form and their reduction to index one.

A germ is ``F(z, zeta) = (lambda z zeta^s + P(zeta) + c zeta^{sk/(k-1)}, zeta^k)``
with ``P(zeta) = sum_{p=j}^{s} c_p zeta^p`` and ``c_j = 1``. Coefficients may be
exact rationals or named symbolic markers (``"c3"``, ``"lambda"``); markers
count as nonzero and pass through reduction untouched.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .errors import InvalidGerm, InvalidReduction, NotPerfectSquare, SingularMatrix
from .exact import format_rational, to_rational

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Marker:
    """A named symbolic coefficient, assumed nonzero."""
    name: str

    def __str__(self):
        return self.name


Scalar = Union[Fraction, Marker]


def parse_scalar(value) -> Scalar:
    if isinstance(value, Marker):
        return value
    if isinstance(value, str) and _NAME.match(value.strip()):
        return Marker(value.strip())
    return to_rational(value)


def scalar_text(value: Scalar) -> str:
    return value.name if isinstance(value, Marker) else format_rational(value)


def _nonzero(value: Scalar) -> bool:
    return isinstance(value, Marker) or value != 0


def instantiate(value: Scalar, assignment: Dict[str, Fraction]) -> Fraction:
    """Replace a marker by its assigned rational."""
    if isinstance(value, Marker):
        if value.name not in assignment:
            raise KeyError(f"no value assigned to {value.name}")
        return to_rational(assignment[value.name])
    return value


@dataclass(frozen=True)
class Germ:
    k: int
    s: int
    j: int
    coefficients: Tuple[Tuple[int, Scalar], ...]
    lam: Scalar = Marker("lambda")
    c_extra: Fraction = Fraction(0)

    @classmethod
    def make(cls, k, s, j, coefficients: Dict[int, object], lam="lambda", c_extra=0) -> "Germ":
        coeffs = tuple(sorted((int(p), parse_scalar(c)) for p, c in coefficients.items()))
        return cls(int(k), int(s), int(j), coeffs, parse_scalar(lam), to_rational(c_extra))

    @property
    def coeffs(self) -> Dict[int, Scalar]:
        return dict(self.coefficients)

    def violations(self) -> List[str]:
        out = []
        k, s, j = self.k, self.s, self.j
        if k <= 1:
            out.append(f"k = {k} must exceed 1")
        if s <= 0:
            out.append(f"s = {s} must be positive")
        if not 0 < j < k:
            out.append(f"j = {j} must satisfy 0 < j < k")
        if j > s:
            out.append(f"j = {j} exceeds s = {s}")
        coeffs = self.coeffs
        for p in coeffs:
            if not j <= p <= s:
                out.append(f"coefficient c_{p} outside j..s")
        if coeffs.get(j) != 1:
            out.append(f"c_j = c_{j} must be 1")
        if not _nonzero(self.lam):
            out.append("lambda must be nonzero")
        support = [p for p, c in coeffs.items() if _nonzero(c)]
        if k > 1 and math.gcd(k, *support) != 1:
            out.append(f"gcd of k and the support {sorted(support)} is {math.gcd(k, *support)}, not 1")
        if self.c_extra != 0:
            if k > 1 and (s * k) % (k - 1) != 0:
                out.append("c must vanish when (k-1) does not divide sk")
            if self.lam != 1:
                out.append("c must vanish unless lambda = 1")
        return out

    def to_json(self) -> dict:
        return {"k": self.k, "s": self.s, "j": self.j,
                "coeffs": {str(p): scalar_text(c) for p, c in self.coefficients},
                "lambda": scalar_text(self.lam), "c_extra": format_rational(self.c_extra)}

    @classmethod
    def from_json(cls, obj) -> "Germ":
        try:
            return cls.make(obj["k"], obj["s"], obj["j"], {int(p): c for p, c in obj["coeffs"].items()},
                            obj.get("lambda", "lambda"), obj.get("c_extra", "0"))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidGerm([f"malformed germ: {exc}"]) from exc

    def polynomial_text(self, var: str = "zeta") -> str:
        terms = []
        for p, c in self.coefficients:
            mono = var if p == 1 else f"{var}^{p}"
            if isinstance(c, Marker):
                terms.append(f"{c.name}*{mono}")
            elif c == 1:
                terms.append(mono)
            elif c != 0:
                terms.append(f"{format_rational(c)}*{mono}")
        return " + ".join(terms) or "0"

    def __str__(self):
        first = f"{scalar_text(self.lam)}*z*zeta^{self.s} + {self.polynomial_text()}"
        if self.c_extra:
            first += f" + {format_rational(self.c_extra)}*zeta^{self.s * self.k // (self.k - 1)}"
        return f"({first}, zeta^{self.k})"


def validate(germ: Germ) -> bool:
    problems = germ.violations()
    if problems:
        raise InvalidGerm(problems)
    return True


def index_m(germ: Germ) -> int:
    """m = (k-1)/gcd(k-1, s)."""
    return (germ.k - 1) // math.gcd(germ.k - 1, germ.s)


@dataclass(frozen=True)
class Reduction:
    germ: Germ
    q: int
    r: int
    gcd_ok: bool
    exponent_map: Tuple[Tuple[int, int], ...]

    def to_json(self):
        return {"q": self.q, "r": self.r, "germ": self.germ.to_json(), "k_preserved": True,
                "index": index_m(self.germ), "gcd_condition": self.gcd_ok,
                "exponent_map": {str(a): b for a, b in self.exponent_map}}


def reduce_detail(germ: Germ, q: int) -> Reduction:
    """Reduction with the bookkeeping used to produce it."""
    validate(germ)
    k, s, j = germ.k, germ.s, germ.j
    if q < 1:
        raise InvalidReduction(f"q = {q} must be positive")
    if q == 1:
        return Reduction(germ, 1, 0, True, tuple((p, p) for p, _ in germ.coefficients))
    if (k - 1) % q:
        raise InvalidReduction(f"q = {q} does not divide k - 1 = {k - 1}")
    if (q * s) % (k - 1):
        raise InvalidReduction(f"k - 1 = {k - 1} does not divide q*s = {q * s}")
    r = q * j // k
    s2 = q * s - r * (k - 1)
    j2 = q * j - r * k
    emap = tuple((p, q * p - r * k) for p, _ in germ.coefficients)
    coeffs = {q * p - r * k: c for p, c in germ.coefficients}
    new = Germ(k, s2, j2, tuple(sorted(coeffs.items())), germ.lam, germ.c_extra)
    # the exponent of c maps to q*sk/(k-1) - r*k = s'k/(k-1), so c stays the normal-form c
    problems = new.violations()
    gcd_ok = not any(p.startswith("gcd") for p in problems)
    hard = [p for p in problems if not p.startswith("gcd")]
    if hard:
        raise InvalidReduction(f"reduced germ violates the normal form: {hard}")
    return Reduction(new, q, r, gcd_ok, emap)


def reduce(germ: Germ, q: int) -> Germ:
    """The reduced germ (k, s', j', P'); q = 1 returns the germ unchanged."""
    return reduce_detail(germ, q).germ


# ---------------------------------------------------------------- consistency

@dataclass
class ConsistencyReport:
    checks: List[dict] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    cross_pairing: bool = False

    @property
    def passed(self) -> bool:
        return not self.errors and all(c["passed"] for c in self.checks)

    def to_json(self):
        return {"passed": self.passed, "cross_pairing": self.cross_pairing,
                "checks": self.checks, "errors": self.errors}


def cross_check(config, germ: Germ, geometric: bool = True) -> ConsistencyReport:
    """Compare k and m computed from a configuration with those of a germ."""
    from . import surface

    report = ConsistencyReport(cross_pairing=not geometric)
    try:
        validate(germ)
    except InvalidGerm as exc:
        report.errors.append(f"InvalidGerm: {exc.violations}")
        return report
    M = surface.intersection_matrix(config).matrix
    try:
        k = surface.torsion_k(M)
        report.checks.append({"name": "k", "configuration": k, "germ": germ.k, "passed": k == germ.k})
    except NotPerfectSquare as exc:
        report.errors.append(f"NotPerfectSquare: det = {exc.det}")
    try:
        m = surface.anticanonical(config).m
        gm = index_m(germ)
        report.checks.append({"name": "m", "configuration": m, "germ": gm, "passed": m == gm})
    except SingularMatrix as exc:
        report.errors.append(f"SingularMatrix: {exc}")
    return report


# ---------------------------------------------------------------- bracket patterns

def bracket_one_tree(a1: int, s_minus_j: int) -> List[int]:
    """[a1+1, 2 x (a1-2), 2 x (s-j+1)]."""
    return [a1 + 1] + [2] * (a1 - 2) + [2] * (s_minus_j + 1)


def bracket_two_blocks(a1: int, a2: int, s_minus_j: int) -> List[int]:
    """[a1+2, 2 x (a1-1), a2+1, 2 x (a2-2), 2 x (s-j+1)]."""
    return [a1 + 2] + [2] * (a1 - 1) + [a2 + 1] + [2] * (a2 - 2) + [2] * (s_minus_j + 1)


def match_bracket(sequence, pattern: str, bound: int = 12) -> List[dict]:
    """All small parameter choices reproducing ``sequence`` under a pattern."""
    target = list(sequence)
    hits = []
    if pattern == "one_tree":
        for a1 in range(2, bound):
            for d in range(0, bound):
                if bracket_one_tree(a1, d) == target:
                    hits.append({"a1": a1, "s_minus_j": d})
    elif pattern == "two_blocks":
        for a1 in range(1, bound):
            for a2 in range(2, bound):
                for d in range(0, bound):
                    if bracket_two_blocks(a1, a2, d) == target:
                        hits.append({"a1": a1, "a2": a2, "s_minus_j": d})
    else:
        raise ValueError(f"unknown bracket pattern {pattern!r}")
    return hits
