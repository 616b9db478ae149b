"""``ainf``: command-line checks, deformations, pushforwards and cohomology for ``.ainf`` files.

Exit codes: 0 every check passed, 1 a mathematical check failed, 2 parse or
validation error, 3 precondition error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .ainfcore import check_ainf_relations, check_grading_filtration, with_params
from .basedmod import Field, parse_rational
from .errors import (
    CurvedRelationError,
    PreconditionError,
    SolveError,
    TruncationError,
    ValidationError,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_PRECONDITION = 0, 1, 2, 3
MAX_LISTED = 5


@dataclass
class Check:
    name: str
    status: str  # "pass", "fail" or "info"
    detail: str = ""
    data: dict = dc_field(default_factory=dict)
    truncation_flags: int = 0

    def to_dict(self):
        return {
            "name": self.name,
            "status": self.status,
            "detail": self.detail,
            "data": self.data,
            "truncation_flags": self.truncation_flags,
        }


@dataclass
class Report:
    """Named checks plus free-form outputs; passes when no check failed."""

    command: str
    checks: list = dc_field(default_factory=list)
    outputs: dict = dc_field(default_factory=dict)
    error: dict | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.status != "fail" for c in self.checks)

    @property
    def truncation_flags(self) -> int:
        return sum(c.truncation_flags for c in self.checks)

    def add(self, name, ok, detail="", data=None, flags=0):
        status = ok if isinstance(ok, str) else ("pass" if ok else "fail")
        self.checks.append(Check(name, status, detail, data or {}, flags))

    def overall(self) -> str:
        if self.error is not None:
            return "error"
        return "pass" if self.passed else "fail"

    def to_dict(self):
        return {
            "command": self.command,
            "overall": self.overall(),
            "truncation_flags": self.truncation_flags,
            "checks": [c.to_dict() for c in self.checks],
            "outputs": self.outputs,
            "error": self.error,
        }

    def text(self) -> str:
        lines = []
        for c in self.checks:
            line = f"{c.name}: {c.status.upper()}"
            if c.detail:
                line += f"  [{c.detail}]"
            lines.append(line)
        for k, v in self.outputs.items():
            if isinstance(v, str) and "\n" in v:
                continue
            lines.append(f"{k} = {v}")
        lines.append(f"truncation flags: {self.truncation_flags}")
        lines.append(f"overall: {self.overall().upper()}")
        return "\n".join(lines)


def _field_override():
    spec = os.environ.get("AINF_FIELD")
    if not spec:
        return None
    return Field.parse(spec)


def _load(path):
    from .dsl import load

    return load(path, _field_override())


def _relation_check(rep: Report, title: str, rr):
    listed = [v.describe() for v in rr.violations[:MAX_LISTED]]
    more = len(rr.violations) - len(listed)
    detail = f"{rr.checked} instances" if rr.passed else "; ".join(listed) + (f"; and {more} more" if more > 0 else "")
    rep.add(title, rr.passed, detail, rr.to_dict(), rr.truncation_flags)


def _mc_check(rep: Report, cat, ne):
    from .deform import check_mc
    from .dsl import format_element

    res = check_mc(cat, ne.obj, ne.element)
    rep.add(f"mc {ne.name} on {cat.name}/{ne.obj}", not res, f"residual {format_element(res)}",
            {"residual": format_element(res)})
    return res


# ---- subcommands ----------------------------------------------------------------

def cmd_check(args, rep: Report):
    from .functor import check_functor_equation

    ws = _load(args.file)
    for name in sorted(ws.categories):
        cat = ws.categories[name]
        if args.slack is not None:
            cat = with_params(cat, slack=parse_rational(args.slack))
        arity = cat.arity_cap if args.arity is None else args.arity
        _relation_check(rep, f"relations {name} (arity <= {arity})", check_ainf_relations(cat, arity))
        _relation_check(rep, f"grading/filtration {name}", check_grading_filtration(cat))
    for ne in sorted(ws.mc_elements(), key=lambda e: e.name):
        _mc_check(rep, ws.categories[ne.category], ne)
    for name in sorted(ws.functors):
        F = ws.functors[name]
        arity = min(F.arity_cap, F.source.arity_cap, F.target.arity_cap)
        if args.arity is not None:
            arity = min(arity, args.arity)
        _relation_check(rep, f"functor equation {name} (arity <= {arity})", check_functor_equation(F, arity))
    for name in sorted(ws.modules):
        _relation_check(rep, f"module relations {name}", ws.modules[name].relation_report())
    for name in sorted(ws.complexes):
        rep.add(f"complex {name}: d^2 = 0", True, "verified on load")
    for name in sorted(ws.chainmaps):
        rep.add(f"chain map {name}: d f = f d", True, "verified on load")


def cmd_mc(args, rep: Report):
    ws = _load(args.file)
    ne = ws.element(args.element)
    if not ne.is_mc:
        raise PreconditionError(f"{ne.name} is not declared with 'mc ... on OBJ'")
    _mc_check(rep, ws.categories[ne.category], ne)


def _assignments(ws, names):
    from .deform import MCAssignment

    chosen = [ws.element(n) for n in names] if names else ws.mc_elements()
    per_cat: dict = {}
    for ne in chosen:
        if not ne.is_mc:
            raise PreconditionError(f"{ne.name} is not declared with 'mc ... on OBJ'")
        slot = per_cat.setdefault(ne.category, {})
        if ne.obj in slot:
            raise PreconditionError(f"two elements on {ne.category}/{ne.obj}; pick one with --mc")
        slot[ne.obj] = ne
    return {c: (MCAssignment({o: ne.element for o, ne in slot.items()}, "B"), slot) for c, slot in per_cat.items()}


def cmd_deform(args, rep: Report):
    from .deform import deform_ops
    from .dsl import serialize, workspace_from

    ws = _load(args.file)
    out = []
    for cname, (B, slot) in sorted(_assignments(ws, args.mc).items()):
        cat = ws.categories[cname]
        for obj in sorted(slot):
            _mc_check(rep, cat, slot[obj])
        if not rep.passed:
            return
        D = deform_ops(cat, B)
        zero = all(not D.curv(o) for o in D.objects)
        rep.add(f"curvature of {D.name} vanishes", zero)
        out.append(D)
    if not out:
        raise PreconditionError("no mc elements to deform by")
    text = serialize(workspace_from(ws.field, out))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        rep.outputs["written"] = args.out
    else:
        rep.outputs["text"] = text


def cmd_push(args, rep: Report):
    from .deform import check_mc
    from .dsl import format_element
    from .functor import pushforward_mc

    ws = _load(args.file)
    if args.functor not in ws.functors:
        raise ValidationError(f"no functor named {args.functor!r}")
    F = ws.functors[args.functor]
    ne = ws.element(args.element)
    if not ne.is_mc:
        raise PreconditionError(f"{ne.name} is not declared with 'mc ... on OBJ'")
    if ne.category != F.source.name:
        raise PreconditionError(f"{ne.name} lives in {ne.category}, not in the source {F.source.name}")
    _mc_check(rep, F.source, ne)
    if not rep.passed:
        return
    img = pushforward_mc(F, ne.obj, ne.element)
    Y = F.object_map[ne.obj]
    res = check_mc(F.target, Y, img)
    rep.outputs["pushforward"] = format_element(img)
    rep.outputs["object"] = Y
    rep.add(f"pushforward {F.name}_*{ne.name} is Maurer-Cartan", not res, f"residual {format_element(res)}")


def _cohom_check(rep, C, lo, hi):
    from .chain import cohomology_ranks

    res = cohomology_ranks(C, lo, hi)
    ranks = {str(n): r for n, r in res.ranks.items()}
    flagged = res.flagged
    detail = ", ".join(f"H^{n} = {r}" for n, r in res.ranks.items())
    if flagged:
        detail += f"; window edge touches degrees {flagged}"
    rep.add(f"cohomology {C.name}", "info", detail, {"ranks": ranks, "flagged": flagged}, len(flagged))


def cmd_cohom(args, rep: Report):
    from .chain import complex_from_category
    from .deform import MCAssignment, deform_ops

    ws = _load(args.file)
    if args.mc:
        ne = ws.element(args.mc)
        cat = ws.categories[ne.category]
        res = _mc_check(rep, cat, ne)
        if res:
            return
        D = deform_ops(cat, MCAssignment({ne.obj: ne.element}, ne.name))
        _cohom_check(rep, complex_from_category(D, ne.obj, ne.obj, f"{D.name}({ne.obj},{ne.obj})"),
                     args.deg_min, args.deg_max)
        return
    for name in sorted(ws.categories):
        cat = ws.categories[name]
        if any(cat.curv(o) for o in cat.objects):
            rep.add(f"cohomology {name}", "info", "skipped: curved (deform by an mc element with --mc)")
            continue
        _cohom_check(rep, complex_from_category(cat, name=name), args.deg_min, args.deg_max)
    for name in sorted(ws.complexes):
        _cohom_check(rep, ws.complexes[name], args.deg_min, args.deg_max)


def cmd_cone(args, rep: Report):
    from .chain import is_quasi_iso, les_rank_identity, mapping_cone

    ws = _load(args.file)
    if args.map not in ws.chainmaps:
        raise ValidationError(f"no chain map named {args.map!r}")
    f = ws.chainmaps[args.map]
    cone = mapping_cone(f)
    degs = cone.degrees or [0]
    lo, hi = min(degs), max(degs)
    _cohom_check(rep, cone, lo, hi)
    les = les_rank_identity(f, lo, hi)
    rep.add("long exact sequence ranks", all(v["ok"] for v in les.values()), "",
            {str(n): v for n, v in les.items()})
    qi = is_quasi_iso(f, lo, hi + 1)
    rep.outputs["quasi_isomorphism"] = bool(qi)


def cmd_solve_cyclic(args, rep: Report):
    from .basedmod import filtration_level
    from .deform import check_mc, cyclic_residual, solve_mc_from_cyclic
    from .dsl import format_element

    ws = _load(args.file)
    if args.module not in ws.modules:
        raise ValidationError(f"no module named {args.module!r}")
    mod = ws.modules[args.module]
    ne = ws.element(args.element)
    if ne.category != mod.category.name:
        raise PreconditionError(f"{ne.name} is not an element of {mod.category.name}")
    b = solve_mc_from_cyclic(mod, ne.element)
    res = cyclic_residual(mod, b, ne.element)
    rep.outputs["b"] = format_element(b)
    rep.add("cyclic equation residual vanishes", not res, f"residual {format_element(res)}")
    lvl = filtration_level(b)
    rep.add("b is positively filtered", bool(not b or lvl > 0), f"level {lvl}")
    mc = check_mc(mod.category, mod.target, b)
    rep.add(f"b is Maurer-Cartan on {mod.target}", "info", f"residual {format_element(mc)}")


def cmd_example(args, rep: Report):
    from .worked import ExampleConfig, run_example_report

    fld = _field_override()
    cfg = ExampleConfig(N=args.window) if fld is None else ExampleConfig(N=args.window, field=fld)
    r = run_example_report(cfg)
    for s in r.steps:
        rep.add(s.name, s.passed, s.detail, s.data)
    rep.outputs["report"] = r.to_dict()
    rep.outputs["text"] = r.text()


def cmd_fmt(args, rep: Report):
    from .dsl import serialize

    ws = _load(args.file)
    text = serialize(ws)
    with open(args.file, encoding="utf-8") as fh:
        old = fh.read()
    if text != old:
        with open(args.file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    rep.add(f"canonical form of {args.file}", "info", "rewritten" if text != old else "unchanged")


# ---- driver -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as one JSON document")
    p = argparse.ArgumentParser(prog="ainf", description="Curved A-infinity toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="relations, grading, MC and functor equations")
    s.add_argument("file")
    s.add_argument("--arity", type=int)
    s.add_argument("--slack", help="filtration slack P/Q overriding the file")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("mc", parents=[common], help="Maurer-Cartan residual of one element")
    s.add_argument("file")
    s.add_argument("--element", required=True)
    s.set_defaults(fn=cmd_mc)

    s = sub.add_parser("deform", parents=[common], help="deform categories by their mc elements")
    s.add_argument("file")
    s.add_argument("--out")
    s.add_argument("--mc", action="append", help="element to use (repeatable); default all")
    s.set_defaults(fn=cmd_deform)

    s = sub.add_parser("push", parents=[common], help="push an MC element along a functor")
    s.add_argument("file")
    s.add_argument("--functor", required=True)
    s.add_argument("--element", required=True)
    s.set_defaults(fn=cmd_push)

    s = sub.add_parser("cohom", parents=[common], help="windowed cohomology ranks")
    s.add_argument("file")
    s.add_argument("--mc")
    s.add_argument("--deg-min", type=int, required=True)
    s.add_argument("--deg-max", type=int, required=True)
    s.set_defaults(fn=cmd_cohom)

    s = sub.add_parser("cone", parents=[common], help="mapping cone of a chain map")
    s.add_argument("file")
    s.add_argument("--map", required=True)
    s.set_defaults(fn=cmd_cone)

    s = sub.add_parser("solve-cyclic", parents=[common], help="MC element from a cyclic module element")
    s.add_argument("file")
    s.add_argument("--module", required=True)
    s.add_argument("--element", required=True)
    s.set_defaults(fn=cmd_solve_cyclic)

    s = sub.add_parser("example", parents=[common], help="the three-fiber worked example")
    s.add_argument("--window", type=int, default=8)
    s.set_defaults(fn=cmd_example)

    s = sub.add_parser("fmt", parents=[common], help="rewrite a file in canonical form")
    s.add_argument("file")
    s.set_defaults(fn=cmd_fmt)
    return p


def _classify(exc):
    from .dsl import DslError

    if isinstance(exc, (PreconditionError, TruncationError, SolveError)):
        kind, code = "precondition", EXIT_PRECONDITION
    elif isinstance(exc, CurvedRelationError):
        kind, code = "relation", EXIT_FAIL
    elif isinstance(exc, (ValidationError, OSError, UnicodeDecodeError)):
        kind, code = "invalid", EXIT_INVALID
    else:
        raise exc
    err = {"kind": kind, "message": str(exc)}
    if isinstance(exc, DslError):
        err["diagnostics"] = [{"line": ln, "col": col, "message": msg} for ln, col, msg in exc.diagnostics]
    if isinstance(exc, SolveError):
        err["level"] = None if exc.level is None else str(exc.level)
    return err, code


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    rep = Report(args.command)
    code = None
    try:
        args.fn(args, rep)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes, unknown errors re-raised
        rep.error, code = _classify(exc)
        if isinstance(exc, ValidationError) and hasattr(exc, "diagnostics"):
            for ln, col, msg in exc.diagnostics:
                print(f"{args.file}:{ln}:{col}: {msg}", file=stderr)
        else:
            print(f"ainf {args.command}: {rep.error['kind']} error: {exc}", file=stderr)
    if code is None:
        code = EXIT_OK if rep.passed else EXIT_FAIL
    if args.json:
        stdout.write(json.dumps(rep.to_dict(), sort_keys=True, indent=2, default=_jsonable) + "\n")
    elif rep.error is None:
        if args.command == "example":
            stdout.write(rep.outputs["text"] + "\n")
        elif args.command == "deform" and "text" in rep.outputs:
            stdout.write(rep.outputs["text"])
            print(rep.text(), file=stderr)
        else:
            stdout.write(rep.text() + "\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
