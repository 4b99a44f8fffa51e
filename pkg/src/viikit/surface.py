"""Curve configurations: a cycle of rational curves with chains attached.

Provides the opposite intersection matrix M(S), its determinant, the torsion
k(S) = sqrt(det M) + 1, the numerically anticanonical divisor and its index,
the end-to-end analysis report, and a brute-force search for configurations
with prescribed invariants.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import cs_solver
from .errors import (
    ComplexRoots,
    DegenerateSystem,
    InvalidConfiguration,
    NotPerfectSquare,
    SingularMatrix,
    SizeCapExceeded,
    ViikitError,
)
from .exact import format_rational, is_perfect_square, scalar_to_json

SEARCH_SIZE_CAP = 8


@dataclass(frozen=True)
class Curve:
    self_int: int
    node: int = 0
    label: Optional[str] = None


@dataclass(frozen=True)
class Branch:
    attach: int
    chain: Tuple[int, ...]  # from the top C_0 to the curve meeting the cycle
    labels: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class CurveConfiguration:
    cycle: Tuple[Curve, ...]
    branches: Tuple[Branch, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cycle", tuple(self.cycle))
        object.__setattr__(self, "branches", tuple(self.branches))
        self.validate()

    @property
    def p(self) -> int:
        return len(self.cycle)

    @property
    def size(self) -> int:
        return self.p + sum(len(b.chain) for b in self.branches)

    def validate(self) -> None:
        problems = []
        if not self.cycle:
            problems.append("cycle must contain at least one curve")
        for j, c in enumerate(self.cycle):
            if c.self_int > -2:
                problems.append(f"cycle curve {j} has self-intersection {c.self_int} > -2")
            if c.node not in (0, 1):
                problems.append(f"cycle curve {j} has node count {c.node}")
            if c.node and len(self.cycle) != 1:
                problems.append("a nodal curve is only allowed in a cycle of length 1")
        seen = set()
        for br in self.branches:
            if not 0 <= br.attach < len(self.cycle):
                problems.append(f"branch attached at {br.attach} outside the cycle")
            if br.attach in seen:
                problems.append(f"more than one branch at cycle index {br.attach}")
            seen.add(br.attach)
            if not br.chain:
                problems.append("empty branch")
            if any(c > -2 for c in br.chain):
                problems.append(f"branch at {br.attach} has a self-intersection > -2")
            if br.labels is not None and len(br.labels) != len(br.chain):
                problems.append(f"branch at {br.attach} has {len(br.labels)} labels for {len(br.chain)} curves")
        if problems:
            raise InvalidConfiguration("; ".join(problems))

    def labels(self) -> List[str]:
        """Row labels: cycle curves first, then each branch top to bottom."""
        out = [c.label or f"cycle{j}" for j, c in enumerate(self.cycle)]
        for b, br in enumerate(self.branches):
            for i in range(len(br.chain)):
                out.append(br.labels[i] if br.labels else f"branch{b}.{i}")
        return out

    def self_intersections(self) -> List[int]:
        out = [c.self_int for c in self.cycle]
        for br in self.branches:
            out.extend(br.chain)
        return out

    def nodes(self) -> List[int]:
        return [c.node for c in self.cycle] + [0] * sum(len(br.chain) for br in self.branches)

    @classmethod
    def from_json(cls, obj: dict) -> "CurveConfiguration":
        if not isinstance(obj, dict) or "cycle" not in obj:
            raise InvalidConfiguration("configuration needs a 'cycle' list")
        try:
            cycle = tuple(Curve(int(c["self"]), int(c.get("node", 0)), c.get("label")) for c in obj["cycle"])
            branches = tuple(
                Branch(int(b["attach"]), tuple(int(v) for v in b["chain"]),
                       tuple(b["labels"]) if b.get("labels") is not None else None)
                for b in obj.get("branches", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfiguration(f"malformed configuration: {exc}") from exc
        return cls(cycle, branches)

    def to_json(self) -> dict:
        cycle = []
        for c in self.cycle:
            entry = {"self": c.self_int, "node": c.node}
            if c.label:
                entry["label"] = c.label
            cycle.append(entry)
        branches = []
        for br in self.branches:
            entry = {"attach": br.attach, "chain": list(br.chain)}
            if br.labels:
                entry["labels"] = list(br.labels)
            branches.append(entry)
        return {"cycle": cycle, "branches": branches}


@dataclass(frozen=True)
class IntersectionData:
    matrix: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...]

    def to_json(self):
        return {"labels": list(self.labels), "matrix": [list(r) for r in self.matrix]}


@dataclass(frozen=True)
class AnticanonicalResult:
    lambda_: Tuple[Fraction, ...]
    m: int
    k: Optional[int]
    rhs: Tuple[int, ...]

    def to_json(self, labels: Optional[Sequence[str]] = None):
        out = {"lambda": [format_rational(v) for v in self.lambda_], "m": self.m, "k": self.k,
               "rhs": list(self.rhs)}
        if labels is not None:
            out["lambda_by_label"] = {lab: format_rational(v) for lab, v in zip(labels, self.lambda_)}
        return out


def intersection_matrix(config: CurveConfiguration) -> IntersectionData:
    """Opposite intersection matrix, rows ordered cycle first then branches."""
    n = config.size
    M = [[0] * n for _ in range(n)]
    for i, s in enumerate(config.self_intersections()):
        M[i][i] = -s
    p = config.p
    if p == 2:
        M[0][1] = M[1][0] = -2
    elif p >= 3:
        for j in range(p):
            k = (j + 1) % p
            M[j][k] = M[k][j] = -1
    row = p
    for br in config.branches:
        idx = list(range(row, row + len(br.chain)))
        for a, b in zip(idx, idx[1:]):
            M[a][b] = M[b][a] = -1
        bottom = idx[-1]
        M[bottom][br.attach] = M[br.attach][bottom] = -1
        row += len(br.chain)
    return IntersectionData(tuple(tuple(r) for r in M), tuple(config.labels()))


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    A = [list(map(int, r)) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def torsion_from_det(det: int) -> int:
    if det < 0:
        raise NotPerfectSquare(det)
    root = is_perfect_square(det)
    if root is None:
        raise NotPerfectSquare(det)
    return root + 1


def torsion_k(M: Sequence[Sequence[int]]) -> int:
    """k(S) = sqrt(det M) + 1."""
    return torsion_from_det(determinant(M))


def solve_exact(M: Sequence[Sequence[int]], b: Sequence[int]) -> List[Fraction]:
    """Solve ``M x = b`` over the rationals by Gauss-Jordan elimination."""
    n = len(M)
    A = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(M, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix("matrix is singular")
        A[col], A[pivot] = A[pivot], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [v - f * w for v, w in zip(A[r], A[col])]
    return [A[r][n] for r in range(n)]


def anticanonical_rhs(config: CurveConfiguration) -> List[int]:
    """Adjunction: K.D = -D^2 - 2 for smooth rational D, -D^2 with one node."""
    return [-s - 2 + 2 * node for s, node in zip(config.self_intersections(), config.nodes())]


def anticanonical(config: CurveConfiguration) -> AnticanonicalResult:
    """Coefficients of the numerically anticanonical divisor and the index m."""
    data = intersection_matrix(config)
    b = anticanonical_rhs(config)
    lam = solve_exact(data.matrix, b)
    m = 1
    for v in lam:
        m = m * v.denominator // math.gcd(m, v.denominator)
    try:
        k = torsion_k(data.matrix)
    except NotPerfectSquare:
        k = None
    return AnticanonicalResult(tuple(lam), m, k, tuple(b))


# ---------------------------------------------------------------- analysis

@dataclass
class AnalysisReport:
    configuration: CurveConfiguration
    intersection: IntersectionData
    det: int
    k: Optional[int] = None
    k_error: Optional[str] = None
    anticanonical: Optional[AnticanonicalResult] = None
    anticanonical_error: Optional[str] = None
    delta: Optional[cs_solver.DeltaSystem] = None
    delta_error: Optional[str] = None
    equations: List[cs_solver.QuadraticEquation] = field(default_factory=list)
    solutions: Optional[Tuple[cs_solver.CSSolution, cs_solver.CSSolution]] = None
    cs_status: str = "not run"
    cs_error: Optional[dict] = None

    def certificates(self):
        if self.solutions is None:
            return None
        return tuple(cs_solver.verify_negativity(s) for s in self.solutions)

    def to_json(self) -> dict:
        labels = list(self.intersection.labels)
        out = {
            "configuration": self.configuration.to_json(),
            "intersection": self.intersection.to_json(),
            "det": self.det,
            "k": self.k,
        }
        if self.k_error:
            out["k_error"] = self.k_error
        if self.anticanonical is not None:
            out["anticanonical"] = self.anticanonical.to_json(labels)
        else:
            out["anticanonical"] = {"error": self.anticanonical_error}
        cs = {"status": self.cs_status}
        if self.delta is not None:
            cs["delta"] = self.delta.to_json()
        if self.delta_error:
            cs["delta_error"] = self.delta_error
        if self.equations:
            cs["equations"] = [e.to_json() for e in self.equations]
        if self.cs_error:
            cs["error"] = self.cs_error
        if self.solutions is not None:
            plus, minus = self.solutions
            certs = self.certificates()
            cs["discriminant"] = format_rational(plus.discriminant)
            cs["collapsed"] = plus is minus
            cs["plus"] = plus.to_json()
            cs["minus"] = minus.to_json()
            cs["certificates"] = {"plus": certs[0].to_json(), "minus": certs[1].to_json()}
            cs["mu_product"] = scalar_to_json(plus.mu * minus.mu)
            if self.k is not None:
                cs["mu_plus_vs_k"] = {"mu_plus": scalar_to_json(plus.mu), "k": self.k,
                                      "equal": plus.mu == self.k}
        out["cs"] = cs
        return out


def analyze(config: CurveConfiguration) -> AnalysisReport:
    """Run every stage; failures of one stage are recorded, not raised."""
    data = intersection_matrix(config)
    det = determinant(data.matrix)
    report = AnalysisReport(config, data, det)
    try:
        report.k = torsion_from_det(det)
    except NotPerfectSquare as exc:
        report.k_error = f"NotPerfectSquare: {exc}"
    if det == 0:
        report.anticanonical_error = "SingularMatrix: det M = 0"
    else:
        report.anticanonical = anticanonical(config)
    try:
        report.delta = cs_solver.build_delta(config)
    except ViikitError as exc:
        report.delta_error = f"{type(exc).__name__}: {exc}"
        report.cs_status = "unavailable"
        return report
    system = report.delta
    try:
        cs_solver.check_degenerate(system)
        report.equations = [cs_solver.coefficients(system, j) for j in range(system.p)]
        report.solutions = cs_solver.solve_system(system)
        report.cs_status = "ok"
    except ComplexRoots as exc:
        report.cs_status = "ComplexRoots"
        report.cs_error = {"type": "ComplexRoots", "discriminant": format_rational(exc.discriminant)}
    except DegenerateSystem as exc:
        report.cs_status = "DegenerateSystem"
        report.cs_error = {"type": "DegenerateSystem", "indices": exc.indices}
    return report


def render_table(report: AnalysisReport) -> str:
    """Aligned plain-text rendering of an analysis report."""
    data = report.to_json()
    lines = []
    labels = data["intersection"]["labels"]
    width = max(len(l) for l in labels)
    cellw = max(len(str(v)) for row in data["intersection"]["matrix"] for v in row) + 1
    lines.append("Intersection matrix M(S)")
    lines.append(" " * (width + 1) + "".join(l.rjust(max(cellw, len(l) + 1)) for l in labels))
    for lab, row in zip(labels, data["intersection"]["matrix"]):
        lines.append(lab.ljust(width + 1) + "".join(str(v).rjust(max(cellw, len(l) + 1))
                                                     for v, l in zip(row, labels)))
    lines.append("")
    summary = [("det M", data["det"]), ("k(S)", data["k"] if data["k"] is not None else data.get("k_error"))]
    ac = data["anticanonical"]
    if "error" in ac:
        summary.append(("D_-K", ac["error"]))
    else:
        summary.append(("index m", ac["m"]))
        summary.append(("D_-K", " + ".join(f"{v}*{lab}" for lab, v in ac["lambda_by_label"].items())))
    cs = data["cs"]
    summary.append(("delta", ", ".join(cs.get("delta", [])) or cs.get("delta_error", "")))
    summary.append(("CS status", cs["status"]))
    keyw = max(len(k) for k, _ in summary)
    lines.extend(f"{k.ljust(keyw)}  {v}" for k, v in summary)
    if cs["status"] == "ok":
        lines.append("")
        rows = [("branch", "alpha", "CS indices", "mu", "verdict")]
        for name in ("plus", "minus"):
            sol = cs[name]
            alphas = [_scalar_text(a) for a in sol["alpha"]]
            cs_idx = [_negated_text(a) for a in sol["alpha"]]
            rows.append((name, ", ".join(alphas), ", ".join(cs_idx), _scalar_text(sol["mu"]),
                         cs["certificates"][name]["verdict"]))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        for r in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    elif cs.get("error"):
        lines.append(f"  {cs['error']}")
    return "\n".join(lines)


def _scalar_text(v) -> str:
    if isinstance(v, dict):
        return f"{v['a']} + {v['b']}*sqrt({v['d']})"
    return v


def _negated_text(v) -> str:
    if isinstance(v, dict):
        return f"-({v['a']} + {v['b']}*sqrt({v['d']}))"
    return v[1:] if v.startswith("-") else f"-{v}"


# ---------------------------------------------------------------- search

def _sequences(counts: Counter, length: int) -> Iterator[Tuple[int, ...]]:
    """Distinct sequences of ``length`` drawn from the multiset ``counts``."""
    if length == 0:
        yield ()
        return
    for v in sorted(counts):
        if counts[v]:
            counts[v] -= 1
            for rest in _sequences(counts, length - 1):
                yield (v,) + rest
            counts[v] += 1


def _chain_assignments(counts: Counter, p: int, j: int = 0):
    """Assign a (possibly empty) chain to every cycle index using all of counts."""
    remaining = sum(counts.values())
    if j == p:
        if remaining == 0:
            yield ()
        return
    for length in range(remaining + 1):
        for chain in list(_sequences(counts, length)):
            for v in chain:
                counts[v] -= 1
            for rest in _chain_assignments(counts, p, j + 1):
                yield (chain,) + rest
            for v in chain:
                counts[v] += 1


def _canonical_key(cycle: Tuple[int, ...], chains: Tuple[Tuple[int, ...], ...]):
    p = len(cycle)
    keys = []
    for r in range(p):
        for flip in (False, True):
            order = [(r - i) % p if flip else (r + i) % p for i in range(p)]
            keys.append((tuple(cycle[i] for i in order), tuple(chains[i] for i in order)))
    return min(keys)


def enumerate_configurations(self_ints: Sequence[int]) -> List[CurveConfiguration]:
    """Every cycle-with-chains structure on the multiset, up to cycle symmetry.

    A single-curve cycle is taken to be nodal.
    """
    if len(self_ints) > SEARCH_SIZE_CAP:
        raise SizeCapExceeded(f"search is capped at {SEARCH_SIZE_CAP} curves")
    if any(s > -2 for s in self_ints):
        raise InvalidConfiguration("self-intersections must be <= -2")
    total = Counter(self_ints)
    seen = set()
    found = []
    for p in range(1, len(self_ints) + 1):
        for cycle in _sequences(Counter(total), p):
            rest = total - Counter(cycle)
            for chains in _chain_assignments(rest, p):
                key = _canonical_key(cycle, chains)
                if key in seen:
                    continue
                seen.add(key)
                node = 1 if p == 1 else 0
                cyc, chs = key
                found.append(CurveConfiguration(
                    tuple(Curve(s, node) for s in cyc),
                    tuple(Branch(j, ch) for j, ch in enumerate(chs) if ch)))
    return found


@dataclass(frozen=True)
class SearchMatch:
    configuration: CurveConfiguration
    det: int
    lambda_: Optional[Tuple[Fraction, ...]]
    m: Optional[int]

    def to_json(self):
        out = {"configuration": self.configuration.to_json(), "det": self.det,
               "matrix": [list(r) for r in intersection_matrix(self.configuration).matrix]}
        if self.lambda_ is not None:
            out["lambda"] = [format_rational(v) for v in self.lambda_]
            out["m"] = self.m
        return out


def search_configurations(self_ints: Sequence[int], det: Optional[int] = None,
                          anticanonical_multiset: Optional[Sequence] = None) -> List[SearchMatch]:
    """Configurations on the given self-intersections matching det and/or D_-K."""
    wanted = sorted(Fraction(v) for v in anticanonical_multiset) if anticanonical_multiset is not None else None
    matches = []
    for config in enumerate_configurations(self_ints):
        M = intersection_matrix(config).matrix
        d = determinant(M)
        if det is not None and d != det:
            continue
        lam = m = None
        if d != 0:
            res = anticanonical(config)
            lam, m = res.lambda_, res.m
        if wanted is not None and (lam is None or sorted(lam) != wanted):
            continue
        matches.append(SearchMatch(config, d, lam, m))
    return matches
