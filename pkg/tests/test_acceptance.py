"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import sympy

from conftest import ACCEPTANCE, brute_force_roots, cofactor_det, earliest_difference, random_configuration, to_sympy
from viikit import cfpoly, cs_solver, germ, series, surface
from viikit.fixtures import build_report, configuration_of, load_bundled


@contextmanager
def criterion(number, title, limit=None):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE[number] = (False, title, f"{type(exc).__name__}: {exc}"[:200])
        print(f"FAIL  criterion {number}: {title}")
        raise
    elapsed = time.perf_counter() - start
    ok = limit is None or elapsed < limit
    detail = f"{elapsed:.2f} s" + (f", limit {limit} s" if limit else "")
    ACCEPTANCE[number] = (ok, title, detail)
    print(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} ({detail})")
    assert ok, f"criterion {number} exceeded its time limit: {detail}"


def test_criterion_1_worked_example():
    with criterion(1, "end-to-end (4223) example", limit=1):
        config = configuration_of(load_bundled("ex_4223"))
        report = surface.analyze(config)
        assert report.det == 9 and report.k == 4
        assert report.delta.delta == (2, 2, F(11, 4))
        # the index just before the 11/4 entry
        j = report.delta.delta.index(F(11, 4)) - 1
        eq = report.equations[j]
        assert eq.primitive() == (6, -13, 6)
        a, b, c = eq.primitive()
        assert b * b - 4 * a * c == 25
        plus, minus = report.solutions
        assert plus.rotated(j) == (F(3, 2), 2, F(4, 3)) and plus.mu == 4 == report.k
        assert minus.rotated(j) == (F(2, 3), F(3, 4), F(1, 2)) and minus.mu == F(1, 4)
        cert = cs_solver.verify_negativity(plus)
        assert cert.all_negative and cs_solver.verify_negativity(minus).all_negative


def test_criterion_2_example_one():
    with criterion(2, "index-two example 1", limit=5):
        config = configuration_of(load_bundled("app_ex1"))
        M = surface.intersection_matrix(config).matrix
        assert surface.determinant(M) == 4 and surface.torsion_k(M) == 3
        res = surface.anticanonical(config)
        assert res.lambda_ == (F(3, 2), F(1, 2), 1) and res.m == 2
        g = germ.Germ.make(3, 1, 1, {1: 1})
        assert germ.index_m(g) == 2
        red = germ.reduce(g, 2)
        assert (red.s, red.j, red.coeffs) == (2, 2, {2: 1})
        matches = surface.search_configurations([-3, -3, -2], det=4, anticanonical_multiset=[2, 2, 1])
        assert matches and all(m.m == 1 and m.det == 4 for m in matches)


def test_criterion_3_example_two():
    with criterion(3, "index-two example 2", limit=30):
        config = configuration_of(load_bundled("app_ex2"))
        res = surface.anticanonical(config)
        labels = surface.intersection_matrix(config).labels
        lam = dict(zip(labels, res.lambda_))
        assert [lam[f"D{i}"] for i in range(4)] == [F(5, 2), F(3, 2), 3, F(7, 2)] and res.m == 2
        g = germ.Germ.make(3, 3, 2, {2: 1, 3: "c3"})
        detail = germ.reduce_detail(g, 2)
        assert detail.r == 1
        assert (detail.germ.s, detail.germ.j) == (4, 1)
        assert detail.germ.coeffs == {1: 1, 3: germ.Marker("c3")}
        matches = surface.search_configurations([-4, -2, -2, -2, -2, -2], det=4,
                                                 anticanonical_multiset=[3, 2, 4, 6, 5, 4])
        assert matches and all(m.m == 1 and m.det == 4 for m in matches)


def test_criterion_4_identity_suite():
    with criterion(4, "polynomial identity suite", limit=60):
        report = cfpoly.verify_identities(12, 100, seed=7, symbolic_max=8)
        assert report.passed
        names = {"reversal", "cyclic", "a_p_minus_one", "delta_forms", "elementary_sum"}
        for name in names:
            symbolic = {c.p for c in report.checks if c.identity == name and c.mode == "symbolic"}
            randoms = {c.p for c in report.checks if c.identity == name and c.mode == "random"}
            lo = cfpoly.IDENTITIES[name]
            assert symbolic == set(range(lo, 9)) and randoms == set(range(lo, 13))
        assert all(c.trials == 100 for c in report.checks if c.mode == "random")


def _suite_systems():
    rng = random.Random(2024)
    systems = [cs_solver.build_delta(random_configuration(rng)) for _ in range(200)]
    systems += [cs_solver.DeltaSystem((2,) * p) for p in range(2, 9)]
    return systems


def test_criterion_5_solver_properties():
    with criterion(5, "solver property suite", limit=60):
        for system in _suite_systems():
            delta = list(system.delta)
            assert cfpoly.eval_Delta(delta) >= 0
            plus, minus = cs_solver.solve_system(system)
            for sol in (plus, minus):
                assert all(a > 0 for a in sol.alpha)
                for i in range(system.p):
                    assert sol.alpha[i] + 1 / sol.alpha[(i + 1) % system.p] == delta[i]
            assert plus.mu * minus.mu == 1 and plus.mu >= 1
            assert (plus.mu == 1) == all(d == 2 for d in delta)


def test_criterion_6_oracle_equivalence():
    with criterion(6, "oracle equivalence"):
        rng = random.Random(606)
        for _ in range(40):
            p = rng.randint(1, 4)
            delta = tuple(2 + F(rng.randint(0, 10), rng.randint(1, 5)) for _ in range(p))
            plus, minus = cs_solver.solve_system(cs_solver.DeltaSystem(delta))
            ours = [to_sympy(s.alpha[0]) for s in {id(plus): plus, id(minus): minus}.values()]
            theirs = brute_force_roots(delta)
            assert len(ours) == len(theirs)
            assert all(any(sympy.simplify(r - t) == 0 for t in theirs) for r in ours)
        for _ in range(200):
            n = rng.randint(1, 6)
            M = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
            assert surface.determinant(M) == cofactor_det(M)
        for system in _suite_systems():
            for sol in set(cs_solver.solve_system(system)):
                # propagate raises if the closed form and the recurrence disagree
                assert tuple(cs_solver.propagate(sol.alpha[0], system)) == sol.alpha


def test_criterion_7_series_verifier():
    with criterion(7, "series verifier soundness", limit=30):
        fx = series.synthetic_fixture(7)
        assert series.verify_factorization(series.FactorizationFixture.from_json(fx), 12).passed
        bad = series.synthetic_fixture(7, perturb=True)
        verdict = series.verify_factorization(series.FactorizationFixture.from_json(bad), 12).results[0][1]
        _, mono, comp = earliest_difference(bad)
        assert verdict.verdict == "Mismatch" and (verdict.monomial, verdict.component) == (mono, comp)
        rng = random.Random(77)
        for _ in range(50):
            coeffs = {(a, b): F(rng.randint(-5, 5), rng.randint(1, 4)) for a in range(5) for b in range(5 - a)
                      if rng.random() < 0.4}
            coeffs[(0, 0)] = F(rng.choice([1, -1, 2, 3]), rng.randint(1, 3))
            s = series.TruncatedSeries(coeffs, 12)
            assert s * series.invert_unit(s) == series.TruncatedSeries.constant(1, 12)
        ex1 = build_report(load_bundled("app_ex1_factorization"), 10)
        assert len(ex1["chains"]) == 2 and {c["verdict"] for c in ex1["chains"]} <= {"Equal", "Mismatch"}
        ex2 = build_report(load_bundled("app_ex2_factorization"), 10)
        assert ex2["chains"][0]["verdict"] in ("Equal", "Mismatch")


def test_criterion_8_probes():
    with criterion(8, "probe reporting"):
        first = cfpoly.derivative_probe()
        assert first == cfpoly.derivative_probe()
        case = first["interior_j3"]
        assert (case["derivative"], case["omitted_form"], case["agrees"]) == ("X0*X2", "X0*X2 - 1", False)
        q = cfpoly.q_closed_form_probe()
        row = q["points"][0]
        assert (row["point"], row["value"], row["closed_form"]) == (["3", "3"], "7", "8")
        assert q == cfpoly.q_closed_form_probe()
