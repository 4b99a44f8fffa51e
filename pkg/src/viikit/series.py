"""Truncated bivariate power series in (z, zeta) over the rationals.

Used to check factorizations ``F' = Pi_0 o ... o Pi_n o sigma`` of contracting
germs coefficient by coefficient up to a total degree N.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ExpressionError, FixtureError, NonUnit, OrderMismatch
from .exact import format_rational, to_rational

Monomial = Tuple[int, int]
DEFAULT_ORDER = 10


class TruncatedSeries:
    """Coefficients of z^a zeta^b for a + b <= order; zeros are never stored."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Optional[Dict[Monomial, object]] = None, order: int = DEFAULT_ORDER):
        if order < 0:
            raise OrderMismatch(f"negative truncation order {order}")
        self.order = order
        self.coeffs: Dict[Monomial, Fraction] = {}
        for (a, b), c in (coeffs or {}).items():
            c = Fraction(c)
            if c and a + b <= order:
                if a < 0 or b < 0:
                    raise ValueError(f"negative exponent in monomial {(a, b)}")
                self.coeffs[(a, b)] = c

    @classmethod
    def constant(cls, c, order: int) -> "TruncatedSeries":
        return cls({(0, 0): c}, order)

    @classmethod
    def monomial(cls, a: int, b: int, order: int, c=1) -> "TruncatedSeries":
        return cls({(a, b): c}, order)

    def coefficient(self, a: int, b: int) -> Fraction:
        if a + b > self.order:
            raise OrderMismatch(f"coefficient of degree {a + b} beyond order {self.order}")
        return self.coeffs.get((a, b), Fraction(0))

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderMismatch(f"cannot raise truncation order {self.order} to {order}")
        return TruncatedSeries(self.coeffs, order)

    def is_unit(self) -> bool:
        return (0, 0) in self.coeffs

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(to_rational(other), self.order)

    def __add__(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return TruncatedSeries(out, order)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries({m: -c for m, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        out: Dict[Monomial, Fraction] = {}
        for (a, b), c in self.coeffs.items():
            room = order - a - b
            if room < 0:
                continue
            for (x, y), d in other.coeffs.items():
                if x + y <= room:
                    key = (a + x, b + y)
                    out[key] = out.get(key, 0) + c * d
        return TruncatedSeries(out, order)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("series powers must be integers")
        base = self
        if n < 0:
            base, n = invert_unit(self), -n
        result = TruncatedSeries.constant(1, self.order)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * invert_unit(other)

    def __rtruediv__(self, other):
        return self._coerce(other) * invert_unit(self)

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.order == other.order and self.coeffs == other.coeffs
        return NotImplemented

    def __repr__(self):
        return f"TruncatedSeries({format_series(self)}, order={self.order})"

    def divide_monomial(self, a: int, b: int) -> "TruncatedSeries":
        """Exact division by z^a zeta^b; lowers the known order by a + b."""
        out = {}
        for (x, y), c in self.coeffs.items():
            if x < a or y < b:
                raise FixtureError(f"coefficient {format_rational(c)} of z^{x}*zeta^{y} "
                                   f"prevents division by z^{a}*zeta^{b}")
            out[(x - a, y - b)] = c
        return TruncatedSeries(out, self.order - a - b)

    def sorted_terms(self):
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0]))


def invert_unit(s: TruncatedSeries) -> TruncatedSeries:
    """t with s*t = 1 up to the truncation order."""
    c0 = s.coeffs.get((0, 0), Fraction(0))
    if c0 == 0:
        raise NonUnit("constant coefficient is zero")
    inv0 = 1 / c0
    t: Dict[Monomial, Fraction] = {(0, 0): inv0}
    rest = [(m, c) for m, c in s.coeffs.items() if m != (0, 0)]
    for d in range(1, s.order + 1):
        for a in range(d + 1):
            b = d - a
            acc = Fraction(0)
            for (i, j), c in rest:
                if i <= a and j <= b:
                    acc += c * t.get((a - i, b - j), 0)
            if acc:
                t[(a, b)] = -inv0 * acc
    return TruncatedSeries(t, s.order)


def format_series(s: TruncatedSeries, names=("z", "zeta")) -> str:
    parts = []
    for (a, b), c in s.sorted_terms():
        factors = []
        if a:
            factors.append(names[0] if a == 1 else f"{names[0]}^{a}")
        if b:
            factors.append(names[1] if b == 1 else f"{names[1]}^{b}")
        mono = "*".join(factors)
        if not mono:
            text = format_rational(c)
        elif c == 1:
            text = mono
        elif c == -1:
            text = f"-{mono}"
        else:
            text = f"{format_rational(c)}*{mono}"
        parts.append(text)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


# ---------------------------------------------------------------- expressions

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_ζ][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num)))
        elif name is not None:
            tokens.append(("name", "zeta" if name == "ζ" else name))
        elif op in "+-*/^()":
            tokens.append(("op", op))
        else:
            raise ExpressionError(f"unexpected character {op!r} in {text!r}")
        pos = m.end()
    return tokens


class _Parser:
    """expr := term (+|- term)*; term := unary (*|/ unary)*; unary := -unary | power;
    power := atom (^ [-] int)?; atom := int | name | ( expr )."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ExpressionError(f"unexpected {tok[1]!r} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ExpressionError("empty expression")
        node = self.expr()
        if self.i != len(self.tokens):
            raise ExpressionError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            node = ("^", node, sign * self.take("num")[1])
        return node

    def atom(self):
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return ("num", value)
        if kind == "name":
            self.take()
            return ("name", value)
        if (kind, value) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExpressionError(f"unexpected {value!r} in {self.text!r}")


def parse_expression(text: str):
    """Parse to a small tuple AST."""
    if not isinstance(text, str):
        raise ExpressionError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text).parse()


def _names(node) -> set:
    tag = node[0]
    if tag == "name":
        return {node[1]}
    if tag == "num":
        return set()
    if tag == "neg":
        return _names(node[1])
    if tag == "^":
        return _names(node[1])
    return _names(node[1]) | _names(node[2])


def evaluate(node, env: Dict[str, object], order: int) -> TruncatedSeries:
    """Evaluate an AST; names resolve to series or rationals in ``env``."""
    tag = node[0]
    if tag == "num":
        return TruncatedSeries.constant(node[1], order)
    if tag == "name":
        if node[1] not in env:
            raise ExpressionError(f"unknown name {node[1]!r}")
        value = env[node[1]]
        if isinstance(value, TruncatedSeries):
            return value
        return TruncatedSeries.constant(value, order)
    if tag == "neg":
        return -evaluate(node[1], env, order)
    if tag == "^":
        return evaluate(node[1], env, order) ** node[2]
    left = evaluate(node[1], env, order)
    right = evaluate(node[2], env, order)
    if tag == "+":
        return left + right
    if tag == "-":
        return left - right
    if tag == "*":
        return left * right
    return left / right


def _is_polynomial(node) -> bool:
    tag = node[0]
    if tag in ("num", "name"):
        return True
    if tag == "neg":
        return _is_polynomial(node[1])
    if tag == "^":
        return node[2] >= 0 and _is_polynomial(node[1])
    if tag == "/":
        return _is_polynomial(node[1]) and not (_names(node[2]) & {"u", "v"}) and _is_polynomial(node[2])
    return _is_polynomial(node[1]) and _is_polynomial(node[2])


@dataclass(frozen=True)
class PolyMap:
    """A polynomial map (u, v) -> (first, second)."""
    first: str
    second: str

    def __post_init__(self):
        for text in (self.first, self.second):
            if not _is_polynomial(parse_expression(text)):
                raise ExpressionError(f"map component {text!r} is not a polynomial in u, v")

    def apply(self, pair, params: Dict[str, Fraction]):
        u, v = pair
        order = min(u.order, v.order)
        env = dict(params)
        env.update(u=u, v=v)
        return (evaluate(parse_expression(self.first), env, order),
                evaluate(parse_expression(self.second), env, order))

    def to_json(self):
        return [self.first, self.second]


def compose_chain(maps: Sequence[PolyMap], inner, order: int, params=None):
    """``maps[0] o maps[1] o ... o maps[-1]`` applied to the pair ``inner``."""
    params = params or {}
    for s in inner:
        if s.order < order:
            raise OrderMismatch(f"inner series known to order {s.order} < {order}")
    pair = tuple(s.truncate(order) for s in inner)
    for pi in reversed(maps):
        pair = pi.apply(pair, params)
    return pair


# ---------------------------------------------------------------- fixtures

@dataclass(frozen=True)
class Equal:
    order: int

    verdict = "Equal"

    def to_json(self):
        return {"verdict": "Equal", "order": self.order}


@dataclass(frozen=True)
class Mismatch:
    component: int
    monomial: Monomial
    expected: Fraction
    actual: Fraction

    verdict = "Mismatch"

    def to_json(self):
        a, b = self.monomial
        return {"verdict": "Mismatch", "component": self.component,
                "monomial": {"z": a, "zeta": b}, "expected": format_rational(self.expected),
                "actual": format_rational(self.actual)}


def compare(target, actual, order: int):
    """Equal, or the first differing coefficient by (total degree, monomial, component)."""
    diffs = []
    for comp, (t, s) in enumerate(zip(target, actual)):
        for m in set(t.coeffs) | set(s.coeffs):
            if sum(m) <= order and t.coeffs.get(m, 0) != s.coeffs.get(m, 0):
                diffs.append((sum(m), m, comp))
    if not diffs:
        return Equal(order)
    _, m, comp = min(diffs)
    return Mismatch(comp, m, target[comp].coeffs.get(m, Fraction(0)), actual[comp].coeffs.get(m, Fraction(0)))


@dataclass
class FactorizationFixture:
    name: str
    assignment: Dict[str, Fraction]
    target: object  # a Germ or a pair of expression strings
    sigma: Tuple[str, str]
    chains: List[Tuple[str, List[PolyMap]]]
    intermediates: List[dict] = field(default_factory=list)
    notes: str = ""

    @classmethod
    def from_json(cls, obj) -> "FactorizationFixture":
        from .germ import Germ

        try:
            assignment = {k: to_rational(v) for k, v in obj.get("assignment", {}).items()}
            tgt = obj["target"]
            target = Germ.from_json(tgt["germ"]) if "germ" in tgt else tuple(tgt["expressions"])
            if "chains" in obj:
                chains = [(c["label"], [PolyMap(*m) for m in c["maps"]]) for c in obj["chains"]]
            else:
                chains = [("chain", [PolyMap(*m) for m in obj["chain"]])]
            sigma = tuple(obj["sigma"])
            if len(sigma) != 2:
                raise ValueError("sigma needs two components")
            return cls(obj.get("name", "factorization"), assignment, target, sigma, chains,
                       list(obj.get("intermediates", [])), obj.get("notes", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureError(f"malformed factorization fixture: {exc}") from exc

    def margin(self) -> int:
        """Orders lost to exact monomial divisions in the intermediates."""
        total = 0
        for item in self.intermediates:
            if "divide_by" in item:
                total += sum(_monomial_of(item["divide_by"]))
        return total

    def target_series(self, order: int):
        from .germ import Germ, instantiate

        env = dict(self.assignment)
        if isinstance(self.target, Germ):
            g = self.target
            lam = instantiate(g.lam, env)
            first = {(1, g.s): lam}
            for p, c in g.coefficients:
                first[(0, p)] = first.get((0, p), 0) + instantiate(c, env)
            if g.c_extra:
                e = g.s * g.k // (g.k - 1)
                first[(0, e)] = first.get((0, e), 0) + g.c_extra
            return (TruncatedSeries(first, order), TruncatedSeries.monomial(0, g.k, order))
        env.update(_base_env(order))
        return tuple(evaluate(parse_expression(t), env, order) for t in self.target)

    def sigma_series(self, order: int):
        env = dict(self.assignment)
        env.update(_base_env(order))
        for item in self.intermediates:
            name = item["name"]
            if "expression" in item:
                value = evaluate(parse_expression(item["expression"]), env, order)
            else:
                value = evaluate(parse_expression(item["numerator"]), env, order)
                a, b = _monomial_of(item["divide_by"])
                value = value.divide_monomial(a, b)
            env[name] = value
        return tuple(evaluate(parse_expression(t), env, order) for t in self.sigma)


def _base_env(order):
    return {"z": TruncatedSeries.monomial(1, 0, order), "zeta": TruncatedSeries.monomial(0, 1, order)}


def _monomial_of(text: str) -> Monomial:
    s = evaluate(parse_expression(text), _base_env(32), 32)
    if len(s.coeffs) != 1 or next(iter(s.coeffs.values())) != 1:
        raise FixtureError(f"divide_by must be a monic monomial, got {text!r}")
    return next(iter(s.coeffs))


@dataclass
class FactorizationReport:
    name: str
    order: int
    results: List[Tuple[str, object]]
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and any(isinstance(v, Equal) for _, v in self.results)

    def to_json(self):
        out = {"fixture": self.name, "order": self.order, "passed": self.passed,
               "chains": [{"label": lab, **v.to_json()} for lab, v in self.results]}
        if self.error:
            out["error"] = self.error
        return out


def verify_factorization(fixture: FactorizationFixture, order: int = DEFAULT_ORDER) -> FactorizationReport:
    """Compare every candidate chain applied to sigma against the target.

    Divisibility failures in the intermediates are reported as an error.
    """
    if order < 3:
        raise OrderMismatch("verification order must be at least 3")
    working = order + fixture.margin()
    try:
        sigma = fixture.sigma_series(working)
    except FixtureError as exc:
        return FactorizationReport(fixture.name, order, [], f"fixture relation violated: {exc}")
    target = fixture.target_series(order)
    results = []
    for label, maps in fixture.chains:
        composed = compose_chain(maps, sigma, order, fixture.assignment)
        results.append((label, compare(target, composed, order)))
    return FactorizationReport(fixture.name, order, results)


# ---------------------------------------------------------------- synthetic fixtures

_MAP_SHAPES = [
    lambda r: ("v", "u*v"),
    lambda r: ("u*v", "v"),
    lambda r: (f"u*v + {r.randint(1, 4)}", "v"),
    lambda r: (f"u*v - {r.randint(1, 4)}", "v"),
    lambda r: (f"(u + {r.randint(1, 3)})*v", "v"),
]


def _random_poly(rng: random.Random, degree: int, zeta_factor: bool) -> Dict[Monomial, int]:
    coeffs = {}
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            if rng.random() < 0.5:
                coeffs[(a, b + (1 if zeta_factor else 0))] = rng.randint(-3, 3)
    return {m: c for m, c in coeffs.items() if c}


def synthetic_fixture(seed: int, perturb: bool = False, order: int = 12) -> dict:
    """A fixture whose target is its own chain applied to a polynomial sigma."""
    rng = random.Random(seed)
    first = _random_poly(rng, 2, False)
    second = _random_poly(rng, 2, True) or {(0, 1): 1}
    second[(0, 1)] = 1
    sigma_series = (TruncatedSeries(first, order), TruncatedSeries(second, order))
    maps = [PolyMap(*shape(rng)) for shape in rng.sample(_MAP_SHAPES, 4)]
    target = compose_chain(maps, sigma_series, order)
    sigma = [format_series(s) for s in sigma_series]
    if perturb:
        bumped = dict(sigma_series[0].coeffs)
        mono = min(bumped, key=lambda m: (sum(m), m)) if bumped else (0, 0)
        bumped[mono] = bumped.get(mono, 0) + 1
        sigma[0] = format_series(TruncatedSeries(bumped, order))
    return {
        "name": f"synthetic_{'perturbed' if perturb else 'pass'}_{seed}",
        "notes": "target is the chain applied to sigma, expanded to total degree 12"
                 + ("; sigma's first component has one coefficient raised by 1" if perturb else ""),
        "target": {"expressions": [format_series(t) for t in target]},
        "sigma": sigma,
        "chain": [m.to_json() for m in maps],
    }


def load_fixture(path) -> FactorizationFixture:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ExpressionError(f"not JSON: {exc}") from exc
    return FactorizationFixture.from_json(obj.get("payload", obj))
