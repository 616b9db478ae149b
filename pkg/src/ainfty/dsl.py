"""The ``.ainf`` text format: a line-based presentation of categories, functors, modules and complexes.

Grammar (one statement per line, ``#`` starts a comment)::

    field Q | field Fp <prime>
    category NAME
      cap INT | slack RATIONAL | window RATIONAL
      object NAME shift INT
      gen NAME : OBJ -> OBJ deg INT filt RATIONAL
      op K : g_k ... g_1 => combo | 0 | trunc        (inputs listed x_k first)
      op 0 @ OBJ : => combo                          (curvature)
      mc NAME on OBJ = combo
      elem NAME = combo
    functor NAME : CAT -> CAT
      cap INT
      maps OBJ -> OBJ
      term K : g_k ... g_1 => combo
      term 0 @ OBJ : => combo
    module NAME : CAT hom OBJ -> OBJ
    complex NAME
      cgen NAME deg INT [filt RATIONAL]
      d NAME => combo
    chainmap NAME : COMPLEX -> COMPLEX
      f NAME => combo

A combo is a signed sum of ``[scalar*]generator`` terms; the scalar is an
integer or ``p/q`` and defaults to 1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

from .ainfcore import TRUNC, CurvedCategory, structurally_equal
from .basedmod import QQ, Element, Field, Generator, accumulate, format_rational
from .basedmod import format_combo as format_element
from .errors import ValidationError

HEADER = "# ainf presentation; op and term inputs are listed x_k first, as in m^k(x_k, ..., x_1)"

_IDENT = r"[A-Za-z0-9_](?:[A-Za-z0-9_.]|\^-?[0-9]+)*"
IDENT_RE = re.compile(_IDENT)
IDENT_FULL = re.compile(rf"^{_IDENT}$")
RATIONAL_RE = re.compile(r"^-?[0-9]+(?:/[0-9]+)?$")


class DslError(ValidationError):
    """Parse or validation failure with a 1-based line and column."""

    def __init__(self, message, line=None, col=None, diagnostics=None):
        self.line = line
        self.col = col
        self.diagnostics = diagnostics or [(line, col, message)]
        loc = f"{line}:{col}: " if line is not None else ""
        super().__init__(loc + message)


def _valid_ident(name: str) -> bool:
    return bool(IDENT_FULL.match(name)) and not RATIONAL_RE.match(name) or name == "1"


# ---- combos ----------------------------------------------------------------

def _scan_combo(text: str, col0: int = 1):
    """Split a combo into ``(sign, scalar_text, ident, column)`` terms."""
    terms = []
    i, n = 0, len(text)
    sign, need_sign = 1, False
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-":
            if need_sign:
                sign, need_sign = 1, False
            sign = -sign if ch == "-" else sign
            i += 1
            continue
        if need_sign:
            raise DslError(f"expected '+' or '-' before {text[i:]!r}", None, col0 + i)
        m = re.match(r"([0-9]+(?:/[0-9]+)?)\s*\*\s*", text[i:])
        scalar = None
        if m:
            scalar = m.group(1)
            i += m.end()
        m2 = IDENT_RE.match(text, i)
        if not m2:
            raise DslError(f"expected a generator name at {text[i:]!r}", None, col0 + i)
        terms.append((sign, scalar, m2.group(0), col0 + i))
        i = m2.end()
        sign, need_sign = 1, True
    if not need_sign:
        raise DslError("dangling sign at end of combo", None, col0 + n)
    return terms


def parse_combo(text: str, lookup: Callable[[str], object], field: Field = QQ, line=None, col0: int = 1) -> Element:
    """Parse ``"x1 + 2*x3 - 1/2*y21"``; ``0`` is the zero element.  ``lookup`` maps ids to generators."""
    stripped = text.strip()
    if stripped == "0":
        return Element.zero(field)
    if not stripped:
        raise DslError("empty combo", line, col0)
    try:
        terms = _scan_combo(text, col0)
    except DslError as exc:
        raise DslError(str(exc).split(": ", 1)[-1], line, exc.col) from None
    out: dict = {}
    for sign, scalar, ident, col in terms:
        try:
            g = lookup(ident)
        except (KeyError, ValidationError):
            raise DslError(f"unknown identifier {ident!r}", line, col) from None
        try:
            c = field(Fraction(scalar) if scalar else 1)
        except (ValueError, ZeroDivisionError, ValidationError):
            raise DslError(f"bad scalar {scalar!r}", line, col) from None
        accumulate(out, g, field.norm(sign * c), field)
    return Element._raw(field, out)


def format_scalar_text(c, field: Field) -> str:
    return format_rational(Fraction(field.signed(c)))


def format_vector(v: dict, field: Field) -> str:
    if not v:
        return "0"
    parts = []
    for k in sorted(v):
        c = Fraction(field.signed(v[k]))
        neg = c < 0
        a = -c if neg else c
        parts.append((neg, k if a == 1 else f"{format_rational(a)}*{k}"))
    text = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        text += (" - " if neg else " + ") + body
    return text


# ---- workspace ----------------------------------------------------------------

@dataclass
class NamedElement:
    name: str
    category: str
    obj: str | None
    element: Element
    is_mc: bool = True


@dataclass
class Workspace:
    field: Field = QQ
    categories: dict = dc_field(default_factory=dict)
    functors: dict = dc_field(default_factory=dict)
    modules: dict = dc_field(default_factory=dict)
    complexes: dict = dc_field(default_factory=dict)
    chainmaps: dict = dc_field(default_factory=dict)
    elements: dict = dc_field(default_factory=dict)

    def mc_elements(self, category: str | None = None):
        return [e for e in self.elements.values() if e.is_mc and (category is None or e.category == category)]

    def element(self, name: str) -> NamedElement:
        try:
            return self.elements[name]
        except KeyError:
            raise ValidationError(f"no element named {name!r}") from None

    def __eq__(self, other):
        if not isinstance(other, Workspace):
            return NotImplemented
        if self.field != other.field:
            return False
        if set(self.categories) != set(other.categories):
            return False
        for n, c in self.categories.items():
            if not structurally_equal(c, other.categories[n]):
                return False
        for attr in ("functors", "modules", "complexes", "chainmaps"):
            if set(getattr(self, attr)) != set(getattr(other, attr)):
                return False
        for n, F in self.functors.items():
            G = other.functors[n]
            if (F.source.name, F.target.name, F.object_map, F.terms, F.zeroth, F.arity_cap) != (
                G.source.name, G.target.name, G.object_map, G.terms, G.zeroth, G.arity_cap
            ):
                return False
        for n, M in self.modules.items():
            N = other.modules[n]
            if (M.category.name, M.source, M.target) != (N.category.name, N.source, N.target):
                return False
        for n, C in self.complexes.items():
            D = other.complexes[n]
            if (C.degree, C.filtration, C.d) != (D.degree, D.filtration, D.d):
                return False
        for n, f in self.chainmaps.items():
            g = other.chainmaps[n]
            if (f.source.name, f.target.name, f.f) != (g.source.name, g.target.name, g.f):
                return False
        if set(self.elements) != set(other.elements):
            return False
        for n, e in self.elements.items():
            o = other.elements[n]
            if (e.category, e.obj, e.element, e.is_mc) != (o.category, o.obj, o.element, o.is_mc):
                return False
        return True


# ---- parser -------------------------------------------------------------------

class _Block:
    def __init__(self, kind, name, line, **kw):
        self.kind = kind
        self.name = name
        self.line = line
        self.__dict__.update(kw)


class _Parser:
    def __init__(self, text: str, field_override: Field | None):
        self.lines = text.split("\n")
        self.override = field_override
        self.field: Field | None = None
        self.ws = Workspace()
        self.errors: list = []
        self.block = None
        self.names: set = set()

    # diagnostics
    def err(self, msg, line, col=1):
        raise DslError(msg, line, col)

    def run(self) -> Workspace:
        for n, raw in enumerate(self.lines, start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            try:
                self.statement(line, n)
            except DslError as exc:
                self.errors.append((exc.line if exc.line is not None else n, exc.col or 1, str(exc).split(": ", 1)[-1] if exc.line is not None else str(exc)))
                if len(self.errors) >= 50:
                    break
        if not self.errors:
            try:
                self.close_block()
            except DslError as exc:
                self.errors.append((exc.line, exc.col or 1, str(exc).split(": ", 1)[-1]))
        if self.errors:
            ln, col, msg = self.errors[0]
            raise DslError(msg, ln, col, diagnostics=list(self.errors))
        if self.field is None:
            self.field = self.override or QQ
        self.ws.field = self.field
        return self.ws

    def col_of(self, line_text, token, start=0):
        i = line_text.find(token, start)
        return (i + 1) if i >= 0 else 1

    def need_field(self, n):
        if self.field is None:
            self.field = self.override or QQ
        return self.field

    def statement(self, text, n):
        words = text.split()
        head = words[0]
        if head == "field":
            if self.field is not None:
                self.err("field declared twice", n)
            spec = " ".join(words[1:])
            try:
                fld = Field.parse(spec)
            except ValidationError as exc:
                self.err(str(exc), n, self.col_of(text, words[1] if len(words) > 1 else "field"))
            self.field = self.override or fld
            return
        if head in ("category", "functor", "module", "complex", "chainmap"):
            self.close_block()
            getattr(self, f"h_{head}")(text, words, n)
            return
        if self.block is None:
            self.err(f"statement {head!r} outside of a block", n)
        handler = getattr(self, f"s_{self.block.kind}_{head}", None)
        if handler is None:
            self.err(f"unknown statement {head!r} in {self.block.kind} block", n)
        handler(text, words, n)

    def declare(self, name, n, text):
        if not _valid_ident(name):
            self.err(f"bad name {name!r}", n, self.col_of(text, name))
        if name in self.names:
            self.err(f"duplicate name {name!r}", n, self.col_of(text, name))
        self.names.add(name)

    # ---- category
    def h_category(self, text, words, n):
        if len(words) != 2:
            self.err("expected: category NAME", n)
        self.declare(words[1], n, text)
        self.need_field(n)
        self.block = _Block("category", words[1], n, objects={}, gens={}, ops={}, curv={},
                            cap=None, slack=Fraction(0), window=None, elems=[], first_op=None)

    def _rational(self, tok, text, n, what):
        if not RATIONAL_RE.match(tok):
            self.err(f"expected a rational for {what}, got {tok!r}", n, self.col_of(text, tok))
        return Fraction(tok)

    def _int(self, tok, text, n, what):
        if not re.match(r"^-?[0-9]+$", tok):
            self.err(f"expected an integer for {what}, got {tok!r}", n, self.col_of(text, tok))
        return int(tok)

    def s_category_cap(self, text, words, n):
        if len(words) != 2:
            self.err("expected: cap INT", n)
        self.block.cap = self._int(words[1], text, n, "cap")

    def s_category_slack(self, text, words, n):
        if len(words) != 2:
            self.err("expected: slack RATIONAL", n)
        self.block.slack = self._rational(words[1], text, n, "slack")

    def s_category_window(self, text, words, n):
        if len(words) != 2:
            self.err("expected: window RATIONAL", n)
        self.block.window = self._rational(words[1], text, n, "window")

    def s_category_object(self, text, words, n):
        if len(words) != 4 or words[2] != "shift":
            self.err("expected: object NAME shift INT", n)
        name = words[1]
        if not _valid_ident(name):
            self.err(f"bad object name {name!r}", n, self.col_of(text, name))
        if name in self.block.objects:
            self.err(f"duplicate object {name!r}", n, self.col_of(text, name))
        self.block.objects[name] = self._int(words[3], text, n, "shift")

    def s_category_gen(self, text, words, n):
        m = re.match(r"^\s*gen\s+(\S+)\s*:\s*(\S+)\s*->\s*(\S+)\s+deg\s+(\S+)\s+filt\s+(\S+)\s*$", text)
        if not m:
            self.err("expected: gen NAME : OBJ -> OBJ deg INT filt RATIONAL", n)
        gid, s, t, deg, filt = m.groups()
        if not _valid_ident(gid):
            self.err(f"bad generator name {gid!r}", n, m.start(1) + 1)
        if gid in self.block.gens:
            self.err(f"duplicate generator {gid!r}", n, m.start(1) + 1)
        for obj, pos in ((s, m.start(2)), (t, m.start(3))):
            if obj not in self.block.objects:
                self.err(f"unknown object {obj!r}", n, pos + 1)
        self.block.gens[gid] = Generator(gid, s, t, self._int(deg, text, n, "deg"), self._rational(filt, text, n, "filt"))

    def _lookup(self, gens):
        def f(ident):
            return gens[ident]
        return f

    def _key_and_rhs(self, text, n, kw, gens):
        m = re.match(rf"^\s*{kw}\s+(\S+)\s*(?:@\s*(\S+)\s*)?:(.*?)=>(.*)$", text)
        if not m:
            self.err(f"expected: {kw} K : inputs => combo", n)
        k = self._int(m.group(1), text, n, "arity")
        obj = m.group(2)
        ins_text = m.group(3)
        ins_col = m.start(3)
        ids = []
        for mm in re.finditer(r"\S+", ins_text):
            tok = mm.group(0)
            col = ins_col + mm.start() + 1
            if tok not in gens:
                self.err(f"unknown identifier {tok!r}", n, col)
            ids.append((tok, col))
        rhs = m.group(4)
        rhs_col = m.start(4) + 1
        return k, obj, ids, rhs, rhs_col, m

    def _check_tuple(self, ids, gens, n):
        for (left, lc), (right, rc) in zip(ids, ids[1:]):
            if gens[right].target != gens[left].source:
                self.err(f"non-composable tuple: {right} ends at {gens[right].target}, {left} starts at {gens[left].source}", n, lc)

    def _rhs(self, rhs, rhs_col, n, gens, hom):
        if rhs.strip() == "trunc":
            return TRUNC
        e = parse_combo(rhs, self._lookup(gens), self.field, n, rhs_col)
        for g in e.terms:
            if (g.source, g.target) != hom:
                self.err(f"output {g.id} is not in hom {hom[0]} -> {hom[1]}", n, self.col_of(rhs, g.id) + rhs_col - 1)
        return e

    def s_category_op(self, text, words, n):
        B = self.block
        k, obj, ids, rhs, rhs_col, m = self._key_and_rhs(text, n, "op", B.gens)
        if B.first_op is None:
            B.first_op = n
        if k == 0:
            if obj is None or ids:
                self.err("curvature is written: op 0 @ OBJ : => combo", n)
            if obj not in B.objects:
                self.err(f"unknown object {obj!r}", n, m.start(2) + 1)
            if obj in B.curv:
                self.err(f"duplicate curvature for {obj}", n, m.start(2) + 1)
            e = self._rhs(rhs, rhs_col, n, B.gens, (obj, obj))
            if e is TRUNC:
                self.err("curvature cannot be truncated", n, rhs_col)
            B.curv[obj] = (e, n)
            return
        if obj is not None:
            self.err("'@ OBJ' is only allowed for arity 0", n, m.start(2) + 1)
        if len(ids) != k:
            self.err(f"arity mismatch: op {k} lists {len(ids)} inputs", n, m.start(1) + 1)
        self._check_tuple(ids, B.gens, n)
        key = tuple(i for i, _ in ids)
        tab = B.ops.setdefault(k, {})
        if key in tab:
            self.err(f"duplicate op key {' '.join(key)}", n, ids[0][1])
        hom = (B.gens[key[-1]].source, B.gens[key[0]].target)
        tab[key] = (self._rhs(rhs, rhs_col, n, B.gens, hom), n)

    def s_category_mc(self, text, words, n):
        m = re.match(r"^\s*mc\s+(\S+)\s+on\s+(\S+)\s*=(.*)$", text)
        if not m:
            self.err("expected: mc NAME on OBJ = combo", n)
        name, obj = m.group(1), m.group(2)
        self.declare(name, n, text)
        if obj not in self.block.objects:
            self.err(f"unknown object {obj!r}", n, m.start(2) + 1)
        e = parse_combo(m.group(3), self._lookup(self.block.gens), self.field, n, m.start(3) + 1)
        self.block.elems.append(NamedElement(name, self.block.name, obj, e, True))

    def s_category_elem(self, text, words, n):
        m = re.match(r"^\s*elem\s+(\S+)\s*=(.*)$", text)
        if not m:
            self.err("expected: elem NAME = combo", n)
        name = m.group(1)
        self.declare(name, n, text)
        e = parse_combo(m.group(2), self._lookup(self.block.gens), self.field, n, m.start(2) + 1)
        self.block.elems.append(NamedElement(name, self.block.name, None, e, False))

    def close_category(self, B):
        ops = {k: {key: v for key, (v, _) in t.items()} for k, t in B.ops.items()}
        curv = {o: e for o, (e, _) in B.curv.items()}
        try:
            cat = CurvedCategory(B.name, self.field, B.objects, B.gens.values(), ops, curv,
                                 arity_cap=B.cap, slack=B.slack, window=B.window)
        except ValidationError as exc:
            self.err(str(exc), B.first_op or B.line)
        self.ws.categories[B.name] = cat
        for e in B.elems:
            self.ws.elements[e.name] = e

    # ---- functor
    def h_functor(self, text, words, n):
        m = re.match(r"^\s*functor\s+(\S+)\s*:\s*(\S+)\s*->\s*(\S+)\s*$", text)
        if not m:
            self.err("expected: functor NAME : CAT -> CAT", n)
        name, a, b = m.groups()
        self.declare(name, n, text)
        for c, pos in ((a, m.start(2)), (b, m.start(3))):
            if c not in self.ws.categories:
                self.err(f"unknown category {c!r}", n, pos + 1)
        self.block = _Block("functor", name, n, source=self.ws.categories[a], target=self.ws.categories[b],
                            maps={}, terms={}, zeroth={}, cap=None)

    def s_functor_cap(self, text, words, n):
        if len(words) != 2:
            self.err("expected: cap INT", n)
        self.block.cap = self._int(words[1], text, n, "cap")

    def s_functor_maps(self, text, words, n):
        m = re.match(r"^\s*maps\s+(\S+)\s*->\s*(\S+)\s*$", text)
        if not m:
            self.err("expected: maps OBJ -> OBJ", n)
        a, b = m.groups()
        if a not in self.block.source.objects:
            self.err(f"unknown object {a!r}", n, m.start(1) + 1)
        if b not in self.block.target.objects:
            self.err(f"unknown object {b!r}", n, m.start(2) + 1)
        if a in self.block.maps:
            self.err(f"object {a} mapped twice", n, m.start(1) + 1)
        self.block.maps[a] = b

    def s_functor_term(self, text, words, n):
        B = self.block
        src, tgt = B.source.generators, B.target.generators
        k, obj, ids, rhs, rhs_col, m = self._key_and_rhs(text, n, "term", src)
        if k == 0:
            if obj is None or ids:
                self.err("zeroth term is written: term 0 @ OBJ : => combo", n)
            if obj not in B.source.objects:
                self.err(f"unknown object {obj!r}", n, m.start(2) + 1)
            if obj not in B.maps:
                self.err(f"object {obj} must be mapped before its zeroth term", n, m.start(2) + 1)
            Y = B.maps[obj]
            B.zeroth[obj] = self._rhs(rhs, rhs_col, n, tgt, (Y, Y))
            return
        if len(ids) != k:
            self.err(f"arity mismatch: term {k} lists {len(ids)} inputs", n, m.start(1) + 1)
        self._check_tuple(ids, src, n)
        key = tuple(i for i, _ in ids)
        s, t = src[key[-1]].source, src[key[0]].target
        if s not in B.maps or t not in B.maps:
            self.err("objects must be mapped before terms that use them", n, ids[0][1])
        tab = B.terms.setdefault(k, {})
        if key in tab:
            self.err(f"duplicate term key {' '.join(key)}", n, ids[0][1])
        tab[key] = self._rhs(rhs, rhs_col, n, tgt, (B.maps[s], B.maps[t]))

    def close_functor(self, B):
        from .functor import CurvedFunctor

        try:
            F = CurvedFunctor(B.name, B.source, B.target, B.maps, B.terms, B.zeroth, arity_cap=B.cap)
        except ValidationError as exc:
            self.err(str(exc), B.line)
        self.ws.functors[B.name] = F

    # ---- module
    def h_module(self, text, words, n):
        from .deform import CurvedModule

        m = re.match(r"^\s*module\s+(\S+)\s*:\s*(\S+)\s+hom\s+(\S+)\s*->\s*(\S+)\s*$", text)
        if not m:
            self.err("expected: module NAME : CAT hom OBJ -> OBJ", n)
        name, c, p, q = m.groups()
        self.declare(name, n, text)
        if c not in self.ws.categories:
            self.err(f"unknown category {c!r}", n, m.start(2) + 1)
        cat = self.ws.categories[c]
        for o, pos in ((p, m.start(3)), (q, m.start(4))):
            if o not in cat.objects:
                self.err(f"unknown object {o!r}", n, pos + 1)
        self.ws.modules[name] = CurvedModule(name, cat, p, q)
        self.block = None

    # ---- complexes
    def h_complex(self, text, words, n):
        if len(words) != 2:
            self.err("expected: complex NAME", n)
        self.declare(words[1], n, text)
        self.need_field(n)
        self.block = _Block("complex", words[1], n, gens={}, d={})

    def s_complex_cgen(self, text, words, n):
        m = re.match(r"^\s*cgen\s+(\S+)\s+deg\s+(\S+)(?:\s+filt\s+(\S+))?\s*$", text)
        if not m:
            self.err("expected: cgen NAME deg INT [filt RATIONAL]", n)
        gid = m.group(1)
        if not _valid_ident(gid):
            self.err(f"bad generator name {gid!r}", n, m.start(1) + 1)
        if gid in self.block.gens:
            self.err(f"duplicate generator {gid!r}", n, m.start(1) + 1)
        filt = self._rational(m.group(3), text, n, "filt") if m.group(3) else None
        self.block.gens[gid] = (gid, self._int(m.group(2), text, n, "deg"), filt)

    def _vec(self, text, n, col, gens):
        e = parse_combo(text, lambda i: _Token(i) if i in gens else gens[i], self.field, n, col)
        return {g.id: c for g, c in e.terms.items()}

    def s_complex_d(self, text, words, n):
        m = re.match(r"^\s*d\s+(\S+)\s*=>(.*)$", text)
        if not m:
            self.err("expected: d NAME => combo", n)
        gid = m.group(1)
        if gid not in self.block.gens:
            self.err(f"unknown identifier {gid!r}", n, m.start(1) + 1)
        if gid in self.block.d:
            self.err(f"d({gid}) given twice", n, m.start(1) + 1)
        self.block.d[gid] = (self._vec(m.group(2), n, m.start(2) + 1, self.block.gens), n)

    def close_complex(self, B):
        from .chain import ChainComplex

        try:
            C = ChainComplex(B.name, self.field, list(B.gens.values()), {k: v for k, (v, _) in B.d.items()})
        except ValidationError as exc:
            self.err(str(exc), B.line)
        self.ws.complexes[B.name] = C

    def h_chainmap(self, text, words, n):
        m = re.match(r"^\s*chainmap\s+(\S+)\s*:\s*(\S+)\s*->\s*(\S+)\s*$", text)
        if not m:
            self.err("expected: chainmap NAME : COMPLEX -> COMPLEX", n)
        name, a, b = m.groups()
        self.declare(name, n, text)
        for c, pos in ((a, m.start(2)), (b, m.start(3))):
            if c not in self.ws.complexes:
                self.err(f"unknown complex {c!r}", n, pos + 1)
        self.block = _Block("chainmap", name, n, source=self.ws.complexes[a], target=self.ws.complexes[b], f={})

    def s_chainmap_f(self, text, words, n):
        m = re.match(r"^\s*f\s+(\S+)\s*=>(.*)$", text)
        if not m:
            self.err("expected: f NAME => combo", n)
        gid = m.group(1)
        if gid not in self.block.source.degree:
            self.err(f"unknown identifier {gid!r}", n, m.start(1) + 1)
        if gid in self.block.f:
            self.err(f"f({gid}) given twice", n, m.start(1) + 1)
        self.block.f[gid] = self._vec(m.group(2), n, m.start(2) + 1, self.block.target.degree)

    def close_chainmap(self, B):
        from .chain import ChainMap

        try:
            f = ChainMap(B.name, B.source, B.target, B.f)
        except ValidationError as exc:
            self.err(str(exc), B.line)
        self.ws.chainmaps[B.name] = f

    def close_block(self):
        B = self.block
        self.block = None
        if B is None:
            return
        getattr(self, f"close_{B.kind}")(B)


class _Token:
    """Stand-in generator for complexes, whose bases are plain ids."""

    __slots__ = ("id",)

    def __init__(self, gid):
        self.id = gid

    def __hash__(self):
        return hash(self.id)

    def __eq__(self, other):
        return isinstance(other, _Token) and other.id == self.id


def parse(text: str, field_override: Field | None = None) -> Workspace:
    """Parse a presentation; raises DslError carrying every diagnostic found (line, column, message)."""
    return _Parser(text, field_override).run()


def load(path, field_override: Field | None = None) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), field_override)


# ---- serializer ------------------------------------------------------------------

def _ops_lines(kw, tables, zeroth):
    lines = []
    for obj in sorted(zeroth):
        lines.append(f"{kw} 0 @ {obj} : => {format_element(zeroth[obj])}")
    for k in sorted(tables):
        for key in sorted(tables[k]):
            out = tables[k][key]
            rhs = "trunc" if out is TRUNC else format_element(out)
            lines.append(f"{kw} {k} : {' '.join(key)} => {rhs}")
    return lines


def serialize_category(cat: CurvedCategory, elements=()) -> list[str]:
    lines = [f"category {cat.name}", f"cap {cat.arity_cap}", f"slack {format_rational(cat.slack)}"]
    if cat.window is not None:
        lines.append(f"window {format_rational(cat.window)}")
    for o in sorted(cat.objects):
        lines.append(f"object {o} shift {cat.objects[o]}")
    for gid in sorted(cat.generators):
        g = cat.generators[gid]
        lines.append(f"gen {g.id} : {g.source} -> {g.target} deg {g.degree} filt {format_rational(g.filtration)}")
    lines += _ops_lines("op", cat.ops, cat.curvature)
    for e in sorted(elements, key=lambda e: (not e.is_mc, e.name)):
        if e.is_mc:
            lines.append(f"mc {e.name} on {e.obj} = {format_element(e.element)}")
        else:
            lines.append(f"elem {e.name} = {format_element(e.element)}")
    return lines


def serialize(ws: Workspace) -> str:
    """Canonical text: deterministic order, LF endings, trailing newline."""
    out = [HEADER, f"field {ws.field.name}"]
    for name in sorted(ws.categories):
        out.append("")
        elems = [e for e in ws.elements.values() if e.category == name]
        out += serialize_category(ws.categories[name], elems)
    for name in sorted(ws.functors):
        F = ws.functors[name]
        out += ["", f"functor {name} : {F.source.name} -> {F.target.name}", f"cap {F.arity_cap}"]
        for X in sorted(F.object_map):
            out.append(f"maps {X} -> {F.object_map[X]}")
        out += _ops_lines("term", F.terms, F.zeroth)
    for name in sorted(ws.modules):
        M = ws.modules[name]
        out += ["", f"module {name} : {M.category.name} hom {M.source} -> {M.target}"]
    for name in sorted(ws.complexes):
        C = ws.complexes[name]
        out += ["", f"complex {name}"]
        for gid in sorted(C.degree):
            filt = C.filtration[gid]
            out.append(f"cgen {gid} deg {C.degree[gid]}" + ("" if filt is None else f" filt {format_rational(filt)}"))
        for gid in sorted(C.d):
            out.append(f"d {gid} => {format_vector(C.d[gid], C.field)}")
    for name in sorted(ws.chainmaps):
        f = ws.chainmaps[name]
        out += ["", f"chainmap {name} : {f.source.name} -> {f.target.name}"]
        for gid in sorted(f.f):
            out.append(f"f {gid} => {format_vector(f.f[gid], f.source.field)}")
    return "\n".join(out) + "\n"


def canonical_form(text: str) -> str:
    return serialize(parse(text))


def workspace_from(field: Field, categories=(), elements=(), functors=(), modules=(), complexes=(), chainmaps=()) -> Workspace:
    ws = Workspace(field)
    for c in categories:
        ws.categories[c.name] = c
    for e in elements:
        ws.elements[e.name] = e
    for F in functors:
        ws.functors[F.name] = F
    for M in modules:
        ws.modules[M.name] = M
    for C in complexes:
        ws.complexes[C.name] = C
    for f in chainmaps:
        ws.chainmaps[f.name] = f
    return ws


def example_workspace(cfg=None) -> Workspace:
    """Workspace holding the worked-example category and its element b."""
    from .worked import build_fiber_category

    cat, B = build_fiber_category(cfg)
    return workspace_from(cat.field, [cat], [NamedElement("b", cat.name, "L", B["L"], True)])
