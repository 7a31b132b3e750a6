"""Command line front end.

Exit codes: 0 computed (or "yes"), 1 "no" for yes/no commands, 2 unreadable
JSON, 3 schema violation, 4 invalid mathematical data, 5 the computation
itself failed (unbounded Euler sums, arrangement too large, ...), 64 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import io
from .cones import ConeNotInFan, NotStronglyConvex, complete_fan, cone_from_rays, smooth_refine, star_quotient
from .euler import NotFiberFinite, UnsupportedPeriodic, canonical, confun_convolve, confun_equal, unit_chi
from .polyhedra import ArrangementTooLarge
from .skeleton import (
    CovectorPoint,
    InternalInconsistency,
    decide_left_functorial,
    decide_right_functorial,
    fltz_skeleton,
    skeleton_member,
)
from .stacky import NotConvertible, SourceNotSmoothComplete, abc_factorization, classify, factor_group_change, torus_data

EX_OK, EX_NO, EX_USAGE, EX_COMPUTE = 0, 1, 64, 5

COMPUTE_ERRORS = (
    NotFiberFinite,
    UnsupportedPeriodic,
    ArrangementTooLarge,
    SourceNotSmoothComplete,
    NotConvertible,
    InternalInconsistency,
    ConeNotInFan,
    NotStronglyConvex,
)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EX_USAGE)


def _s(x) -> str:
    return str(Fraction(x))


def _mat(rows) -> list:
    return [[_s(x) for x in r] for r in rows]


def _vector(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(t) for t in text.split(",")) if text.strip() else ()
    except ValueError:
        raise UsageError(f"cannot read vector {text!r}") from None


def _inputs(args, kinds: tuple[str, ...], count: int = 1) -> list:
    docs = [io.load(p) for p in args.inputs] + [io.load_fixture(f) for f in args.fixture or ()]
    if len(docs) != count:
        raise UsageError(f"expected {count} input document(s), got {len(docs)}")
    for d in docs:
        if d.kind not in kinds:
            raise UsageError(f"expected a {' or '.join(kinds)} document, got {d.kind}")
    return docs


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report dict, human lines)

def cmd_classify(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    c = classify(doc.value)
    rep = {"is_scheme": c.is_scheme, "is_variety": c.is_variety}
    lines = [f"scheme:  {'yes' if c.is_scheme else 'no'}", f"variety: {'yes' if c.is_variety else 'no'}"]
    if c.is_variety:
        rep["presentation"] = {"K_rank": str(c.K_rank), "Phi": _mat(c.Phi.matrix), "fan": io.fan_json(c.fan)}
        lines.append(f"presentation: K = Z^{c.K_rank}, Phi = {list(c.Phi.matrix)}")
        lines.append(f"  maximal cones: {[list(x.rays) for x in c.fan.maximal_cones()]}")
    if args.witness and c.failing_cone is not None:
        rep["failing_cone"] = _mat(c.failing_cone.rays)
        lines.append(f"beta restricted to the perp of {list(c.failing_cone.rays)} is not onto L")
    return EX_OK, rep, lines


def _torus_json(t):
    return {
        "component_group": str(t.component_group),
        "deck_lattice": _mat(t.deck_lattice),
        "compact_rank": str(t.compact_rank),
        "vector_rank": str(t.vector_rank),
    }


def _count(t) -> str:
    k = t.n_components
    if k is None:
        return "infinitely many components"
    return "1 component" if k == 1 else f"{k} components"


def cmd_torus(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    t = torus_data(doc.value)
    rep = _torus_json(t)
    lines = [
        f"component group: {t.component_group} ({_count(t)})",
        f"deck lattice: {[list(v) for v in t.deck_lattice]}",
        f"compact rank {t.compact_rank}, vector rank {t.vector_rank}",
    ]
    return EX_OK, rep, lines


def cmd_skeleton(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    sk = fltz_skeleton(doc.value)
    pieces = []
    lines = []
    for p in sk.pieces:
        pieces.append({"cone": _mat(p.cone.rays), "perp_basis": _mat(p.perp_basis)})
        lines.append(f"sigma = {[list(r) for r in p.cone.rays]}: perp basis {[list(v) for v in p.perp_basis]}, fiber -sigma")
    rep = {"pieces": pieces, "base": _torus_json(sk.base)}
    return EX_OK, rep, [f"{len(pieces)} pieces over a torus with {_count(sk.base)}"] + lines


def cmd_member(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    if args.base is None or args.covector is None:
        raise UsageError("member needs --base and --covector")
    pt = CovectorPoint(_vector(args.base), _vector(args.covector))
    n = doc.value.N_rank
    if len(pt.base_point) != n or len(pt.covector) != n:
        raise UsageError(f"--base and --covector need {n} coordinates")
    ok = skeleton_member(fltz_skeleton(doc.value), pt)
    return (EX_OK if ok else EX_NO), {"member": ok}, [f"member: {'yes' if ok else 'no'}"]


def cmd_left(args):
    (doc,) = _inputs(args, ("morphism",))
    v = decide_left_functorial(doc.value)
    rep = {"verdict": v.verdict}
    lines = [f"left-functorial: {'yes' if v.verdict else 'no'}"]
    if args.witness and v.witness is not None:
        rep["witness"] = {"base_point": [_s(x) for x in v.witness.base_point], "covector": [_s(x) for x in v.witness.covector]}
        lines.append(f"witness: {[_s(x) for x in v.witness.covector]} lies over the target fan but outside the source fan")
    return (EX_OK if v.verdict else EX_NO), rep, lines


def cmd_right(args):
    (doc,) = _inputs(args, ("morphism",))
    v = decide_right_functorial(doc.value)
    rep = {"verdict": v.verdict}
    lines = [f"right-functorial: {'yes' if v.verdict else 'no'}"]
    if v.failing_cone is not None:
        rep["failing_cone"] = _mat(v.failing_cone.rays)
        rep["failing_condition"] = v.failing_condition
        what = "its image is not a cone of the target" if v.failing_condition == 1 else "sigma-perp + phi_M(M') is not saturated"
        lines.append(f"fails at {[list(r) for r in v.failing_cone.rays]}: {what}")
    return (EX_OK if v.verdict else EX_NO), rep, lines


def cmd_factor(args):
    (doc,) = _inputs(args, ("morphism",))
    phi = doc.value
    if args.abc:
        f = abc_factorization(phi.fan_morphism)
        rep = {
            "a": _mat(f.a.map.matrix),
            "b": _mat(f.b.map.matrix),
            "c": _mat(f.c.map.matrix),
            "smooth_fan": io.fan_json(f.smooth_fan),
        }
        lines = [
            f"a = {list(f.a.map.matrix)}",
            f"b = {list(f.b.map.matrix)}",
            f"c = {list(f.c.map.matrix)}",
            f"smooth refinement of the product: {len(f.smooth_fan.maximal_cones())} maximal cones",
        ]
        return EX_OK, rep, lines
    p1, p2 = factor_group_change(phi)
    rep = {
        "intermediate": io.stacky_data(p1.target),
        "first": {"phi_N": _mat(p1.phi_N.matrix), "phi_L": _mat(p1.group_map.matrix)},
        "second": {"phi_N": _mat(p2.phi_N.matrix), "phi_L": _mat(p2.group_map.matrix)},
    }
    lines = [
        f"intermediate: rank {p1.target.N_rank} fan with L = {p1.target.L}, beta = {list(p1.target.beta.matrix)}",
        f"first:  phi_N = {list(p1.phi_N.matrix)}, identity on L",
        f"second: identity on N', phi_L = {list(p2.group_map.matrix)}",
    ]
    return EX_OK, rep, lines


def cmd_refine(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    fan = smooth_refine(doc.value.fan)
    return EX_OK, {"fan": io.fan_json(fan)}, [f"{[list(c.rays) for c in fan.maximal_cones()]}"]


def cmd_complete(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    fan, refined = complete_fan(doc.value.fan)
    rep = {"fan": io.fan_json(fan), "refined_input": refined}
    lines = [f"{[list(c.rays) for c in fan.maximal_cones()]}", f"input cones subdivided: {'yes' if refined else 'no'}"]
    return EX_OK, rep, lines


def cmd_star(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    if args.cone is None:
        raise UsageError("star needs --cone (rays separated by ';', coordinates by ',')")
    X = doc.value
    rays = [tuple(int(x) for x in _vector(r)) for r in args.cone.split(";") if r.strip()]
    tau = X.fan.cone(cone_from_rays(X.N_rank, rays).rays)
    sq = star_quotient(X.fan, tau)
    rep = {
        "star": [_mat(c.rays) for c in sq.star],
        "projection": _mat(sq.projection.matrix),
        "quotient_fan": io.fan_json(sq.quotient_fan),
    }
    lines = [
        f"star: {[list(c.rays) for c in sq.star]}",
        f"projection: {list(sq.projection.matrix)}",
        f"quotient fan: {[list(c.rays) for c in sq.quotient_fan.maximal_cones()]}",
    ]
    return EX_OK, rep, lines


def _form(a) -> str:
    parts = []
    for i, x in enumerate(a):
        if x:
            coef = "" if abs(x) == 1 else f"{abs(x)}*"
            parts.append(("- " if x < 0 else "+ ") + f"{coef}x{i}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def _region_text(r) -> str:
    r = r.simplified()
    cons = [f"{_form(a)} = {c}" for a, c in r.equalities]
    cons += [f"{_form(a)} >= {c}" for a, c in r.nonstrict]
    cons += [f"{_form(a)} > {c}" for a, c in r.strict]
    return ", ".join(cons) or "everywhere"


def _confun_lines(f) -> list[str]:
    out = [f"periodic under {[[_s(x) for x in v] for v in f.periods.basis]}"] if f.periods else []
    for c, r in f.terms:
        out.append(f"{c:+d} on {{{_region_text(r)}}}")
    return out if f.terms else out + ["0"]


def cmd_unit_chi(args):
    (doc,) = _inputs(args, ("stacky_fan",))
    f = canonical(unit_chi(doc.value))
    return EX_OK, io.confun_data(f), _confun_lines(f)


def cmd_convolve(args):
    a, b = _inputs(args, ("confun",), 2)
    f = canonical(confun_convolve(a.value, b.value))
    return EX_OK, io.confun_data(f), _confun_lines(f)


def cmd_equal(args):
    a, b = _inputs(args, ("confun",), 2)
    ok = confun_equal(a.value, b.value)
    return (EX_OK if ok else EX_NO), {"equal": ok}, [f"equal: {'yes' if ok else 'no'}"]


COMMANDS = {
    "classify": (cmd_classify, "scheme / variety classification of a stacky fan"),
    "torus": (cmd_torus, "components and deck lattice of the stacky torus"),
    "skeleton": (cmd_skeleton, "pieces of the FLTZ skeleton"),
    "member": (cmd_member, "is a covector point on the skeleton"),
    "left-functorial": (cmd_left, "decide left functoriality of a morphism"),
    "right-functorial": (cmd_right, "decide right functoriality of a morphism"),
    "factor": (cmd_factor, "split off the change of group (or, with --abc, the graph factorization)"),
    "refine": (cmd_refine, "smooth refinement by stellar subdivisions"),
    "complete": (cmd_complete, "complete the fan"),
    "star": (cmd_star, "star of a cone and its quotient fan"),
    "unit-chi": (cmd_unit_chi, "Euler characteristic of the unit object"),
    "convolve": (cmd_convolve, "convolution of two constructible functions"),
    "equal": (cmd_equal, "equality of two constructible functions"),
}


def build_parser() -> Parser:
    p = Parser(prog="torstk", description="Exact toric stack combinatorics.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=Parser)
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text, description=help_text)
        s.add_argument("inputs", nargs="*", help="input JSON documents")
        s.add_argument("--fixture", action="append", help="use a shipped fixture (repeatable)")
        s.add_argument("--json", action="store_true", help="machine-readable output")
        s.add_argument("--witness", action="store_true", help="include counterexample data")
        if name == "member":
            s.add_argument("--base", help="base point in M_R, comma separated rationals")
            s.add_argument("--covector", help="covector in N_R, comma separated rationals")
        if name == "star":
            s.add_argument("--cone", help="rays of the cone, e.g. '1,0;1,1'")
        if name == "factor":
            s.add_argument("--abc", action="store_true", help="graph factorization of the fan morphism")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EX_USAGE
    func = COMMANDS[args.command][0]
    try:
        code, rep, lines = func(args)
    except UsageError as e:
        print(f"torstk {args.command}: {e}", file=sys.stderr)
        return EX_USAGE
    except io.DocumentError as e:
        print(f"torstk: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except COMPUTE_ERRORS as e:
        print(f"torstk: {type(e).__name__}: {e}", file=sys.stderr)
        return EX_COMPUTE
    if args.json:
        print(json.dumps(rep, sort_keys=True))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
