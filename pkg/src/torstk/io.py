"""JSON documents for stacky fans, morphisms and constructible functions.

Integers (and rationals, written ``p/q``) are stored as decimal strings.
``serialize`` writes the canonical form: sorted keys, two-space indent, one
trailing newline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .cones import Fan, NotAFanMorphism, NotStronglyConvex, OverlappingCones, fan_validate
from .euler import ConFun, Periods
from .lattice import FinAbGroup
from .polyhedra import LCRegion
from .stacky import IncompatibleBeta, IncompatibleMorphism, StackyFan, StackyMorphism, stacky_morphism, validate_stacky

SCHEMA_VERSION = "1"
KINDS = ("stacky_fan", "morphism", "confun")


class DocumentError(Exception):
    exit_code = 4


class ParseError(DocumentError):
    exit_code = 2


class SchemaError(DocumentError):
    exit_code = 3


class ValidationError(DocumentError):
    exit_code = 4


@lru_cache(maxsize=None)
def schema() -> dict:
    text = resources.files("torstk").joinpath("schema/document-v1.json").read_text(encoding="utf-8")
    return json.loads(text)


def fixtures_dir() -> Path:
    return Path(str(resources.files("torstk").joinpath("fixtures")))


def fixture_names() -> list[str]:
    return sorted(p.name for p in fixtures_dir().glob("*.json"))


@dataclass(frozen=True)
class Document:
    kind: str
    data: dict  # canonical JSON data
    value: object  # StackyFan, StackyMorphism or ConFun

    @property
    def name(self) -> str | None:
        return self.data.get("name")


# ---------------------------------------------------------------------------
# canonical data

def _ints(rows) -> list:
    return [[str(int(x)) for x in r] for r in rows]


def _rat(x) -> str:
    return str(Fraction(x))


def _canon_region(r: dict) -> dict:
    out = {}
    for key in ("nonstrict", "strict", "equalities"):
        if key in r:
            out[key] = [[[_rat(x) for x in a], _rat(c)] for a, c in r[key]]
    return out


def _canon(data: dict) -> dict:
    kind = data["kind"]
    out = {"schema_version": data["schema_version"], "kind": kind}
    if "name" in data:
        out["name"] = data["name"]
    if kind == "stacky_fan":
        out["lattice_rank"] = str(int(data["lattice_rank"]))
        out["cones"] = [_ints(c) for c in data["cones"]]
        out["L"] = {
            "free_rank": str(int(data["L"]["free_rank"])),
            "torsion": [str(int(d)) for d in data["L"]["torsion"]],
        }
        out["beta"] = _ints(data["beta"])
    elif kind == "morphism":
        for side in ("source", "target"):
            v = data[side]
            out[side] = {"ref": v["ref"]} if "ref" in v else _canon(v)
        out["phi_N"] = _ints(data["phi_N"])
        out["phi_L"] = _ints(data["phi_L"])
    else:
        out["rank"] = str(int(data["rank"]))
        if "periods" in data:
            out["periods"] = [[_rat(x) for x in v] for v in data["periods"]]
        out["terms"] = [{"coeff": str(int(t["coeff"])), "region": _canon_region(t["region"])} for t in data["terms"]]
    return out


# ---------------------------------------------------------------------------
# building library objects

def _matrix(rows) -> list[list[int]]:
    return [[int(x) for x in r] for r in rows]


def build_stacky(data: dict) -> StackyFan:
    n = int(data["lattice_rank"])
    try:
        cones = [_matrix(c) for c in data["cones"]]
        for c in cones:
            if any(len(r) != n for r in c):
                raise ValidationError(f"ray of the wrong length in cone {c} (lattice rank {n})")
        fan = fan_validate(cones, n)
        L = FinAbGroup(int(data["L"]["free_rank"]), tuple(int(d) for d in data["L"]["torsion"]))
        return validate_stacky(fan, L, _matrix(data["beta"]), data.get("name"))
    except (IncompatibleBeta, OverlappingCones, NotStronglyConvex, ValueError) as e:
        raise ValidationError(f"{type(e).__name__}: {e}") from None


def _resolve(ref: str, base_dir: Path | None) -> dict:
    candidates = []
    if base_dir is not None:
        candidates.append(base_dir / ref)
    candidates.append(fixtures_dir() / ref)
    for p in candidates:
        if p.is_file():
            doc = parse_document(p.read_bytes(), p.parent)
            if doc.kind != "stacky_fan":
                raise ValidationError(f"reference {ref!r} is not a stacky fan document")
            return doc.data
    raise ValidationError(f"cannot resolve reference {ref!r}")


def build_morphism(data: dict, base_dir: Path | None = None) -> StackyMorphism:
    sides = []
    for side in ("source", "target"):
        v = data[side]
        sides.append(build_stacky(_resolve(v["ref"], base_dir) if "ref" in v else v))
    src, tgt = sides
    try:
        return stacky_morphism(src, tgt, _matrix(data["phi_N"]), _matrix(data["phi_L"]))
    except (IncompatibleMorphism, NotAFanMorphism, ValueError) as e:
        raise ValidationError(f"{type(e).__name__}: {e}") from None


def _region(n: int, r: dict) -> LCRegion:
    parts = {}
    for key in ("nonstrict", "strict", "equalities"):
        cons = []
        for a, c in r.get(key, []):
            if len(a) != n:
                raise ValidationError(f"constraint {a} does not have length {n}")
            cons.append((tuple(Fraction(x) for x in a), Fraction(c)))
        parts[key] = tuple(cons)
    return LCRegion(n, parts["nonstrict"], parts["strict"], parts["equalities"])


def build_confun(data: dict) -> ConFun:
    n = int(data["rank"])
    periods = None
    try:
        if "periods" in data:
            vecs = [[Fraction(x) for x in v] for v in data["periods"]]
            if any(len(v) != n for v in vecs):
                raise ValidationError("period vector of the wrong length")
            periods = Periods.of(n, vecs)
        terms = tuple((int(t["coeff"]), _region(n, t["region"])) for t in data["terms"])
        return ConFun(n, terms, periods)
    except ValueError as e:
        raise ValidationError(str(e)) from None


# ---------------------------------------------------------------------------
# entry points

def parse_document(raw: bytes, base_dir: Path | None = None) -> Document:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    kind = data.get("kind") if isinstance(data, dict) else None
    if kind not in KINDS:
        raise SchemaError(f"at (root): 'kind' must be one of {', '.join(KINDS)}")
    sub = {k: v for k, v in schema().items() if k != "oneOf"}
    sub["$ref"] = f"#/$defs/{kind}"
    errors = list(jsonschema.Draft202012Validator(sub).iter_errors(data))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        path = "/".join(str(p) for p in best.absolute_path) or "(root)"
        raise SchemaError(f"at {path}: {best.message}")
    data = _canon(data)
    kind = data["kind"]
    if kind == "stacky_fan":
        value = build_stacky(data)
    elif kind == "morphism":
        value = build_morphism(data, base_dir)
    else:
        value = build_confun(data)
    return Document(kind, data, value)


def serialize(doc: Document | dict) -> bytes:
    data = doc.data if isinstance(doc, Document) else doc
    return (json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def load(path: str | Path) -> Document:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read {p}: {e.strerror}") from None
    return parse_document(raw, p.parent)


def load_fixture(name: str) -> Document:
    if not name.endswith(".json"):
        name += ".json"
    p = fixtures_dir() / name
    if not p.is_file():
        raise ParseError(f"no fixture named {name!r}; known: {', '.join(fixture_names())}")
    return load(p)


# ---------------------------------------------------------------------------
# encoders for reports

def stacky_data(X: StackyFan, name: str | None = None) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "stacky_fan",
        "lattice_rank": str(X.N_rank),
        "cones": [_ints(c.rays) for c in X.fan.maximal_cones() if c.rays],
        "L": {"free_rank": str(X.L.free_rank), "torsion": [str(d) for d in X.L.invariant_factors]},
        "beta": _ints(X.beta.matrix),
    }
    if name or X.name:
        out["name"] = name or X.name
    return out


def fan_json(fan: Fan) -> dict:
    return {
        "lattice_rank": str(fan.ambient_rank),
        "maximal_cones": [_ints(c.rays) for c in fan.maximal_cones()],
    }


def region_json(r: LCRegion) -> dict:
    out = {}
    for key in ("nonstrict", "strict", "equalities"):
        cons = getattr(r, key)
        if cons:
            out[key] = [[[_rat(x) for x in a], _rat(c)] for a, c in cons]
    return out


def confun_data(f: ConFun, name: str | None = None) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "confun",
        "rank": str(f.rank),
        "terms": [{"coeff": str(c), "region": region_json(r.simplified())} for c, r in f.terms],
    }
    if f.periods is not None:
        out["periods"] = [[_rat(x) for x in v] for v in f.periods.basis]
    if name:
        out["name"] = name
    return out
