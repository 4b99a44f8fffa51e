"""Bundled fixtures: loading, report construction and expectation checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import List, Optional

from . import germ as germ_mod
from . import series, surface
from .errors import FixtureError, InvalidGerm, InvalidReduction, ViikitError

KINDS = ("configuration", "germ", "factorization", "pairing")


@dataclass
class Fixture:
    name: str
    kind: str
    payload: dict
    expectations: List[dict] = field(default_factory=list)
    notes: str = ""

    @classmethod
    def from_json(cls, obj, default_name="fixture") -> "Fixture":
        if not isinstance(obj, dict):
            raise FixtureError("fixture must be a JSON object")
        if "payload" not in obj:
            return cls(default_name, guess_kind(obj), obj)
        kind = obj.get("kind")
        if kind not in KINDS:
            raise FixtureError(f"unknown fixture kind {kind!r}")
        return cls(obj.get("name", default_name), kind, obj["payload"],
                   list(obj.get("expectations", [])), obj.get("notes", ""))


def guess_kind(obj: dict) -> str:
    if "cycle" in obj:
        return "configuration"
    if "k" in obj and "coeffs" in obj:
        return "germ"
    if "sigma" in obj:
        return "factorization"
    raise FixtureError("cannot tell what kind of object this file holds")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FixtureError(f"cannot read {path}: {exc}") from exc


def load_path(path) -> Fixture:
    stem = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return Fixture.from_json(read_json(path), stem)


def bundled_names() -> List[str]:
    root = resources.files("viikit") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Fixture:
    path = resources.files("viikit") / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise FixtureError(f"no bundled fixture named {name!r}")
    return Fixture.from_json(json.loads(path.read_text()), name)


# ---------------------------------------------------------------- reports

def configuration_of(fx: Fixture) -> surface.CurveConfiguration:
    return surface.CurveConfiguration.from_json(fx.payload)


def germ_of(fx: Fixture) -> germ_mod.Germ:
    return germ_mod.Germ.from_json(fx.payload.get("germ", fx.payload))


def germ_report(g: germ_mod.Germ, q: Optional[int] = None, bracket: Optional[dict] = None) -> dict:
    out = {"germ": g.to_json(), "text": str(g), "violations": g.violations()}
    out["valid"] = not out["violations"]
    if not out["valid"]:
        return out
    out["index"] = germ_mod.index_m(g)
    if q is not None:
        try:
            red = germ_mod.reduce_detail(g, q)
            out["reduction"] = red.to_json()
            out["reduction"]["text"] = str(red.germ)
            out["reduction"]["index_one"] = germ_mod.index_m(red.germ) == 1
        except InvalidReduction as exc:
            out["reduction"] = {"error": f"InvalidReduction: {exc}"}
    if bracket is not None:
        out["bracket"] = {"pattern": bracket["pattern"], "sequence": bracket["sequence"],
                          "matches": germ_mod.match_bracket(bracket["sequence"], bracket["pattern"])}
    return out


def build_report(fx: Fixture, order: Optional[int] = None) -> dict:
    if fx.kind == "configuration":
        return surface.analyze(configuration_of(fx)).to_json()
    if fx.kind == "germ":
        return germ_report(germ_of(fx), fx.payload.get("reduce_q"), fx.payload.get("bracket"))
    if fx.kind == "factorization":
        fixture = series.FactorizationFixture.from_json(fx.payload)
        fixture.name = fx.name
        return series.verify_factorization(fixture, order or series.DEFAULT_ORDER).to_json()
    if fx.kind == "pairing":
        config = configuration_of(load_bundled(fx.payload["configuration"]))
        g = germ_of(load_bundled(fx.payload["germ"]))
        return germ_mod.cross_check(config, g, fx.payload.get("geometric", True)).to_json()
    raise FixtureError(f"unknown fixture kind {fx.kind!r}")


# ---------------------------------------------------------------- expectations

_MISSING = object()


def lookup(obj, path: str):
    """Follow a dotted path through dicts and lists."""
    for part in path.split("."):
        if isinstance(obj, dict) and part in obj:
            obj = obj[part]
        elif isinstance(obj, list) and part.isdigit() and int(part) < len(obj):
            obj = obj[int(part)]
        else:
            return _MISSING
    return obj


def _as_fraction(v):
    if isinstance(v, bool):
        return None
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            return None
    return None


def same_value(expected, actual) -> bool:
    """Equality after reading numeric strings and ints as exact rationals."""
    if isinstance(expected, dict) and isinstance(actual, dict):
        return expected.keys() == actual.keys() and all(same_value(expected[k], actual[k]) for k in expected)
    if isinstance(expected, list) and isinstance(actual, list):
        return len(expected) == len(actual) and all(same_value(e, a) for e, a in zip(expected, actual))
    fe, fa = _as_fraction(expected), _as_fraction(actual)
    if fe is not None and fa is not None:
        return fe == fa
    return expected == actual and type(expected) is type(actual)


def check_expectations(report: dict, expectations: List[dict]) -> List[dict]:
    results = []
    for exp in expectations:
        actual = lookup(report, exp["path"])
        if actual is _MISSING:
            ok = False
        elif "multiset" in exp:
            ok = isinstance(actual, list) and sorted(map(Fraction, map(str, actual))) == \
                sorted(map(Fraction, map(str, exp["multiset"])))
        else:
            ok = same_value(exp["equals"], actual)
        results.append({"path": exp["path"], "expected": exp.get("equals", exp.get("multiset")),
                        "actual": None if actual is _MISSING else actual, "passed": ok,
                        "note": exp.get("note", "")})
    return results


@dataclass
class FixtureResult:
    name: str
    kind: str
    checks: List[dict]
    report: dict
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["passed"] for c in self.checks)

    def to_json(self):
        out = {"name": self.name, "kind": self.kind, "passed": self.passed, "checks": self.checks}
        if self.error:
            out["error"] = self.error
        return out


def run_fixture(fx: Fixture) -> FixtureResult:
    try:
        report = build_report(fx)
    except (ViikitError, ValueError, KeyError) as exc:
        return FixtureResult(fx.name, fx.kind, [], {}, f"{type(exc).__name__}: {exc}")
    return FixtureResult(fx.name, fx.kind, check_expectations(report, fx.expectations), report)
