import random
from fractions import Fraction as F

import sympy

from viikit.exact import QuadraticNumber
from viikit.surface import Branch, Curve, CurveConfiguration


def to_sympy(x):
    """QuadraticNumber or Fraction to an exact sympy number."""
    if isinstance(x, QuadraticNumber):
        return sympy.Rational(x.a.numerator, x.a.denominator) + \
            sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(int(x.d))
    x = F(x)
    return sympy.Rational(x.numerator, x.denominator)


def brute_force_roots(delta):
    """Fixed points of the composed map x -> 1/(delta_i - x), solved by sympy."""
    x = sympy.symbols("x")
    expr = x
    for d in delta:
        expr = 1 / (to_sympy(d) - expr)
    num, _ = sympy.fraction(sympy.together(expr - x))
    roots = sympy.solve(sympy.expand(num), x)
    return [r for r in roots if r.is_real]


def random_configuration(rng: random.Random) -> CurveConfiguration:
    """Cycle of 2..8 curves, up to 3 branches of length <= 3 on curves with D^2 <= -3."""
    p = rng.randint(2, 8)
    cycle = [rng.randint(-6, -2) for _ in range(p)]
    hosts = [j for j, s in enumerate(cycle) if s <= -3]
    rng.shuffle(hosts)
    branches = []
    for j in sorted(hosts[:rng.randint(0, 3)]):
        branches.append(Branch(j, tuple(rng.randint(-6, -2) for _ in range(rng.randint(1, 3)))))
    return CurveConfiguration(tuple(Curve(s) for s in cycle), tuple(branches))


def cofactor_det(M):
    """Laplace expansion along the first row."""
    n = len(M)
    if n == 0:
        return 1
    if n == 1:
        return M[0][0]
    total = 0
    for c in range(n):
        if M[0][c]:
            minor = [row[:c] + row[c + 1:] for row in M[1:]]
            total += (-1) ** c * M[0][c] * cofactor_det(minor)
    return total


def earliest_difference(fx):
    """Independent oracle: compose with sympy and find the first differing monomial."""
    names = dict(zip(("z", "zeta"), sympy.symbols("z zeta")))

    def parse(text, **extra):
        return sympy.sympify(text.replace("^", "**"), locals={**names, **extra})

    u, v = (parse(e) for e in fx["sigma"])
    for first, second in reversed(fx["chain"]):
        u, v = parse(first, u=u, v=v), parse(second, u=u, v=v)
    diffs = []
    for comp, (got, want) in enumerate(zip((u, v), fx["target"]["expressions"])):
        d = sympy.Poly(sympy.expand(got - parse(want)), *names.values())
        diffs += [(a + b, (a, b), comp) for (a, b), c in d.terms() if c != 0 and a + b <= 12]
    return min(diffs)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title}  ({detail})")
