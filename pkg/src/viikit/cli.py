"""Command-line front end.

Exit codes: 0 pass, 1 check failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional

from . import cfpoly, fixtures, germ, series, surface
from .errors import (
    ExpressionError,
    FixtureError,
    InvalidConfiguration,
    InvalidGerm,
    InvalidReduction,
    OrderMismatch,
    SizeCapExceeded,
    ViikitError,
)
from .exact import to_rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _error(message: str, code: int) -> int:
    print(f"viikit: {message}", file=sys.stderr)
    return code


def default_seed() -> int:
    raw = os.environ.get("VIIKIT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def _pmax(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("--pmax must be at least 2")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _int_list(values: List[str]) -> List[int]:
    out = []
    for v in values:
        out.extend(int(part) for part in v.split(",") if part.strip())
    return out


# ---------------------------------------------------------------- commands

def cmd_analyze(args) -> int:
    try:
        fx = fixtures.load_path(args.file)
        if fx.kind != "configuration":
            raise FixtureError(f"{args.file} holds a {fx.kind}, not a configuration")
        config = fixtures.configuration_of(fx)
    except (FixtureError, InvalidConfiguration) as exc:
        return _error(str(exc), EXIT_USAGE)
    report = surface.analyze(config)
    data = report.to_json()
    checks = fixtures.check_expectations(data, fx.expectations)
    if args.table:
        print(surface.render_table(report))
        for c in checks:
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['path']}  {c['note']}")
    else:
        if checks:
            data["expectations"] = checks
        _emit(data)
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_FAIL


def cmd_poly_verify(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    report = cfpoly.verify_identities(args.pmax, args.trials, seed)
    out = report.to_json()
    out["probes"] = {"derivative": cfpoly.derivative_probe(),
                     "q_closed_form": cfpoly.q_closed_form_probe(),
                     "p_closed_form": cfpoly.p_closed_form_probe()}
    _emit(out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _load_germ(path):
    fx = fixtures.load_path(path)
    if fx.kind != "germ":
        raise FixtureError(f"{path} holds a {fx.kind}, not a germ")
    return fixtures.germ_of(fx)


def cmd_germ(args) -> int:
    try:
        if args.action == "crosscheck":
            if len(args.files) != 2:
                return _error("crosscheck needs a configuration file and a germ file", EXIT_USAGE)
            cfx = fixtures.load_path(args.files[0])
            config = fixtures.configuration_of(cfx)
            g = _load_germ(args.files[1])
        else:
            germs = [(path, _load_germ(path)) for path in args.files]
    except (FixtureError, InvalidConfiguration) as exc:
        return _error(str(exc), EXIT_USAGE)
    except InvalidGerm as exc:
        return _error(f"invalid germ: {exc.violations}", EXIT_USAGE)

    if args.action == "crosscheck":
        report = germ.cross_check(config, g, geometric=not args.cross_pairing)
        _emit(report.to_json())
        return EXIT_OK if report.passed else EXIT_FAIL

    status = EXIT_OK
    results = []
    for path, g in germs:
        entry = {"file": path}
        try:
            germ.validate(g)
            entry["index"] = germ.index_m(g)
            if args.action == "reduce":
                q = args.q if args.q is not None else entry["index"]
                red = germ.reduce_detail(g, q)
                entry["reduction"] = red.to_json()
                entry["reduction"]["text"] = str(red.germ)
                entry["checks"] = {"k_preserved": red.germ.k == g.k,
                                   "index_one": germ.index_m(red.germ) == 1,
                                   "gcd_condition": red.gcd_ok}
                if q == entry["index"] and not entry["checks"]["index_one"]:
                    status = EXIT_FAIL
        except InvalidGerm as exc:
            entry["error"] = {"type": "InvalidGerm", "violations": exc.violations}
            status = EXIT_FAIL
        except InvalidReduction as exc:
            entry["error"] = {"type": "InvalidReduction", "message": str(exc)}
            status = EXIT_FAIL
        results.append(entry)
    _emit(results if len(results) > 1 else results[0])
    return status


def cmd_series_verify(args) -> int:
    try:
        fx = fixtures.load_path(args.file)
        if fx.kind != "factorization":
            raise FixtureError(f"{args.file} holds a {fx.kind}, not a factorization")
        fixture = series.FactorizationFixture.from_json(fx.payload)
        fixture.name = fx.name
    except (FixtureError, ExpressionError) as exc:
        return _error(str(exc), EXIT_USAGE)
    try:
        report = series.verify_factorization(fixture, args.order)
    except (OrderMismatch, ViikitError) as exc:
        return _error(f"{type(exc).__name__}: {exc}", EXIT_FAIL)
    _emit(report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_search(args) -> int:
    try:
        self_ints = _int_list(args.self_ints)
        wanted = None
        if args.anticanonical:
            wanted = [to_rational(v) for v in args.anticanonical]
        matches = surface.search_configurations(self_ints, args.det, wanted)
    except (SizeCapExceeded, InvalidConfiguration, ValueError, TypeError) as exc:
        return _error(str(exc), EXIT_USAGE)
    _emit({"self_ints": self_ints, "det": args.det,
           "anticanonical": [str(Fraction(v)) for v in wanted] if wanted else None,
           "matches": [m.to_json() for m in matches]})
    return EXIT_OK if matches else EXIT_FAIL


def cmd_fixtures(args) -> int:
    names = fixtures.bundled_names()
    if args.action == "list":
        for name in names:
            fx = fixtures.load_bundled(name)
            print(f"{name}\t{fx.kind}\t{len(fx.expectations)} expectations")
        return EXIT_OK
    chosen = args.names or names
    unknown = [n for n in chosen if n not in names]
    if unknown:
        return _error(f"unknown fixtures: {', '.join(unknown)}", EXIT_USAGE)
    status = EXIT_OK
    for name in chosen:
        result = fixtures.run_fixture(fixtures.load_bundled(name))
        print(f"{'PASS' if result.passed else 'FAIL'}  {name} ({result.kind})")
        if result.error:
            print(f"      {result.error}")
        for c in result.checks:
            if not c["passed"]:
                print(f"      {c['path']}: expected {c['expected']}, got {c['actual']}  [{c['note']}]")
        if not result.passed:
            status = EXIT_FAIL
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viikit", description="Exact invariants of cycle configurations and contracting germs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a curve configuration")
    p.add_argument("file")
    p.add_argument("--table", action="store_true", help="human-readable tables")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("poly", help="polynomial identity suite")
    psub = p.add_subparsers(dest="action", required=True)
    v = psub.add_parser("verify")
    v.add_argument("--pmax", type=_pmax, required=True)
    v.add_argument("--trials", type=_positive, default=100)
    v.add_argument("--seed", type=int, default=None, help="defaults to $VIIKIT_SEED or 0")
    v.set_defaults(func=cmd_poly_verify)

    p = sub.add_parser("germ", help="contracting germs")
    p.add_argument("action", choices=["index", "reduce", "crosscheck"])
    p.add_argument("files", nargs="+")
    p.add_argument("--q", type=_positive, default=None, help="reduction degree (default: the index)")
    p.add_argument("--cross-pairing", action="store_true", help="mark a crosscheck pairing as non-geometric")
    p.set_defaults(func=cmd_germ)

    p = sub.add_parser("series", help="factorization verification")
    ssub = p.add_subparsers(dest="action", required=True)
    v = ssub.add_parser("verify")
    v.add_argument("file")
    v.add_argument("--order", type=_positive, default=series.DEFAULT_ORDER)
    v.set_defaults(func=cmd_series_verify)

    p = sub.add_parser("search", help="search configurations with given invariants")
    p.add_argument("--self-ints", nargs="+", required=True)
    p.add_argument("--det", type=int, default=None)
    p.add_argument("--anticanonical", nargs="+", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fixtures", help="bundled fixtures")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("names", nargs="*")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
