"""Maurer-Cartan elements and everything built by inserting them.

Insertion of a degree-1 element carries no sign in the reduced-degree
convention (its shifted degree is 0), so every formula here is a plain sum
over positions.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field as dc_field
from typing import Mapping

from .ainfcore import (
    TRUNC,
    CurvedCategory,
    RelationReport,
    check_ainf_relations,
    check_grading_filtration,
    restrict,
)
from .basedmod import PLUS_INF, Element, accumulate, filtration_level
from .errors import (
    CurvedRelationError,
    PreconditionError,
    SolveError,
    TruncationError,
    ValidationError,
)
from .linalg import solve_square

log = logging.getLogger(__name__)


@dataclass
class MCAssignment:
    """A collection B: one candidate Maurer-Cartan element per object."""

    elements: dict = dc_field(default_factory=dict)
    label: str = "B"

    def __getitem__(self, obj):
        return self.elements[obj]

    def __contains__(self, obj):
        return obj in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def items(self):
        return sorted(self.elements.items())

    def objects(self):
        return sorted(self.elements)


def validate_mc_candidate(cat: CurvedCategory, X: str, b: Element) -> None:
    """Raise PreconditionError unless b is a degree-1, positively filtered endomorphism of X."""
    if X not in cat.objects:
        raise PreconditionError(f"unknown object {X!r}")
    for g in b.terms:
        if cat.generators.get(g.id) != g:
            raise PreconditionError(f"{g.id} is not a generator of {cat.name}")
        if (g.source, g.target) != (X, X):
            raise PreconditionError(f"{g.id} is not an endomorphism of {X}")
        if g.degree != 1:
            raise PreconditionError(f"MC element must have degree 1; {g.id} has degree {g.degree}")
    lvl = filtration_level(b)
    if not lvl > 0:
        raise PreconditionError(f"MC element must lie in F^>0; filtration level is {lvl}")


def mc_sum(cat: CurvedCategory, X: str, b: Element, arities=None):
    """sum_k m^k(b, ..., b) by table lookup; returns ``(element, truncated_keys)``."""
    f = cat.field
    supp = {g.id: c for g, c in b.terms.items()}
    lam = filtration_level(b)
    ceiling = cat.filtration_ceiling
    out: dict = {}
    for g, v in cat.curv(X).terms.items():
        accumulate(out, g, v, f)
    flagged = []
    for k in sorted(cat.ops):
        if arities is not None and k not in arities:
            continue
        if lam is not PLUS_INF and k * lam - cat.slack > ceiling:
            break
        if not supp:
            break
        for key, val in cat.ops[k].items():
            if not all(gid in supp for gid in key):
                continue
            if val is TRUNC:
                flagged.append(key)
                continue
            c = 1
            for gid in key:
                c = c * supp[gid]
            c = f.norm(c)
            for h, w in val.terms.items():
                accumulate(out, h, c * w, f)
    return Element._raw(f, out), flagged


def check_mc(cat: CurvedCategory, X: str, b: Element) -> Element:
    """Residual of the Maurer-Cartan equation for ``b`` on object X; zero means MC."""
    validate_mc_candidate(cat, X, b)
    res, flagged = mc_sum(cat, X, b)
    if flagged:
        raise TruncationError(f"MC sum touches truncated entry {flagged[0]}", key=flagged[0])
    return res


def verify_assignment(cat: CurvedCategory, B: MCAssignment) -> None:
    for X, b in B.items():
        res = check_mc(cat, X, b)
        if res:
            raise PreconditionError(f"element for {X} is not Maurer-Cartan; residual {res}")


def insertion_table(cat: CurvedCategory, table: Mapping, B: Mapping[str, Element], gens, kept):
    """Insert elements of B into every slot of every key of ``table``.

    ``gens`` looks up source generators; only keys whose remaining slots live
    between objects in ``kept`` survive.  Returns ``(new_table, zeroth)``
    with ``zeroth[X]`` the fully inserted terms at object X.
    """
    f = cat.field
    supp = {X: {g.id: c for g, c in b.terms.items()} for X, b in B.items()}
    new: dict = {}
    zeroth: dict = {}
    for key, val in table.items():
        slots = []
        for gid in key:
            g = gens[gid]
            c = supp.get(g.source, {}).get(gid) if g.source == g.target else None
            slots.append(c)
        ins = [p for p, c in enumerate(slots) if c is not None]
        for r in range(len(ins) + 1):
            for chosen in itertools.combinations(ins, r):
                rest = tuple(gid for p, gid in enumerate(key) if p not in chosen)
                if any(gens[g].source not in kept or gens[g].target not in kept for g in rest):
                    continue
                coeff = 1
                for p in chosen:
                    coeff = coeff * slots[p]
                coeff = f.norm(coeff)
                if rest:
                    acc = new.setdefault(rest, {})
                else:
                    obj = gens[key[-1]].source
                    acc = zeroth.setdefault(obj, {})
                if acc is TRUNC:
                    continue
                if val is TRUNC:
                    if rest:
                        new[rest] = TRUNC
                    else:
                        zeroth[obj] = TRUNC
                    continue
                for h, w in val.terms.items():
                    accumulate(acc, h, coeff * w, f)
    return new, zeroth


def deform_raw(cat: CurvedCategory, B: Mapping[str, Element], name: str | None = None) -> CurvedCategory:
    """Insertion deformation without verifying the Maurer-Cartan equation.

    Useful for producing curved categories from flat ones.
    """
    B = dict(B.elements) if isinstance(B, MCAssignment) else dict(B)
    kept = [o for o in cat.objects if o in B]
    dropped = [o for o in cat.objects if o not in B]
    if dropped:
        log.warning("objects without a Maurer-Cartan element dropped: %s", ", ".join(sorted(dropped)))
    keep = set(kept)
    f = cat.field
    ops: dict = {}
    curv: dict = {}
    for X in kept:
        curv[X] = dict(cat.curv(X).terms)
    for k in sorted(cat.ops):
        new, zeroth = insertion_table(cat, cat.ops[k], B, cat.generators, keep)
        for key, acc in new.items():
            tab = ops.setdefault(len(key), {})
            cur = tab.get(key)
            if cur is TRUNC or acc is TRUNC:
                tab[key] = TRUNC
                continue
            cur = cur if cur is not None else {}
            for h, w in acc.items():
                accumulate(cur, h, w, f)
            tab[key] = cur
        for X, acc in zeroth.items():
            if acc is TRUNC:
                raise TruncationError(f"curvature of the deformation at {X} touches a truncated entry")
            for h, w in acc.items():
                accumulate(curv[X], h, w, f)
    ops = {
        k: {key: (v if v is TRUNC else Element._raw(f, v)) for key, v in t.items()}
        for k, t in ops.items()
    }
    gens = [g for g in cat.generators.values() if g.source in keep and g.target in keep]
    return CurvedCategory(
        name or f"{cat.name}_deformed",
        f,
        {o: cat.objects[o] for o in kept},
        gens,
        ops,
        {X: Element._raw(f, c) for X, c in curv.items()},
        arity_cap=cat.arity_cap,
        slack=cat.slack,
        window=cat.window,
    )


def deform_ops(cat: CurvedCategory, B: MCAssignment, name: str | None = None) -> CurvedCategory:
    """The B-deformation: structure maps m^{k; b_k, ..., b_0}.

    Every element of B is checked against the Maurer-Cartan equation first;
    objects absent from B are dropped with a warning.
    """
    verify_assignment(cat, B)
    return deform_raw(cat, B, name)


def build_gauge_functors(cat: CurvedCategory, B: MCAssignment):
    """``(T_B, S_B)`` between the deformation A(B) and the full subcategory A_B.

    T_B: A(B) -> A_B has zeroth term b and identity first term; S_B goes back
    with zeroth term -b.
    """
    from .functor import CurvedFunctor

    verify_assignment(cat, B)
    AB = deform_raw(cat, B)
    A_B = restrict(cat, B.objects(), name=f"{cat.name}_sub")
    ident = {(gid,): Element._raw(cat.field, {g: 1}) for gid, g in A_B.generators.items()}
    objmap = {X: X for X in A_B.objects}
    T = CurvedFunctor(
        f"T_{B.label}", AB, A_B, objmap, {1: dict(ident)},
        {X: b for X, b in B.items()}, arity_cap=cat.arity_cap,
    )
    S = CurvedFunctor(
        f"S_{B.label}", A_B, AB, objmap, {1: dict(ident)},
        {X: -b for X, b in B.items()}, arity_cap=cat.arity_cap,
    )
    return T, S


# ---- modules ----------------------------------------------------------------

@dataclass
class CurvedModule:
    """The hom-space ``hom(P, Q)`` of a curved category, seen as a module.

    Left action by End(Q), right action by End(P):
    ``n^{k0,k1}(a_{k0}, ..., a_1, x, a'_{k1}, ..., a'_1) = m^{k0+1+k1}(...)``.
    Module degrees and filtrations are the generator ones, so all table
    contracts are inherited from the enclosing category.
    """

    name: str
    category: CurvedCategory
    source: str
    target: str

    def __post_init__(self):
        for o in (self.source, self.target):
            if o not in self.category.objects:
                raise ValidationError(f"module {self.name}: unknown object {o!r}")

    @property
    def basis(self):
        return self.category.hom(self.source, self.target)

    @property
    def algebra_basis(self):
        return self.category.hom(self.target, self.target)

    def n(self, left: list[Element], x: Element, right: list[Element] | None = None) -> Element:
        from .ainfcore import apply_m

        right = right or []
        return apply_m(self.category, len(left) + 1 + len(right), list(left) + [x] + list(right))

    def relation_report(self) -> RelationReport:
        """Relation and grading instances whose inputs are shaped (End Q)*, hom(P,Q), (End P)*."""
        cat = self.category
        P, Q = self.source, self.target
        sub = restrict(cat, {P, Q}, name=f"{cat.name}|{self.name}")
        rel = check_ainf_relations(sub, sub.arity_cap - 1 if sub.arity_cap > 2 else sub.arity_cap)
        grad = check_grading_filtration(sub)
        report = RelationReport(f"module relations of {self.name}")
        report.truncation_flags = rel.truncation_flags + grad.truncation_flags
        report.checked = rel.checked + grad.checked
        for v in rel.violations + grad.violations:
            if self._module_shaped(v.inputs):
                report.violations.append(v)
        return report.finalize()

    def _module_shaped(self, key) -> bool:
        gens = self.category.generators
        P, Q = self.source, self.target
        for p, gid in enumerate(key):
            g = gens[gid]
            if (g.source, g.target) != (P, Q):
                continue
            left_ok = all((gens[a].source, gens[a].target) == (Q, Q) for a in key[:p])
            right_ok = all((gens[a].source, gens[a].target) == (P, P) for a in key[p + 1:])
            if left_ok and right_ok:
                return True
        return False


def module_insertion(mod: CurvedModule, b0: Element, b1: Element, max_left=None):
    """``x -> sum n^{k0,k1}(b0, ..., b0, x, b1, ..., b1)`` on every module generator.

    Returns ``(table, truncated)`` where ``table[x.id]`` is a dict of terms.
    """
    cat = mod.category
    f = cat.field
    s0 = {g.id: c for g, c in b0.terms.items()}
    s1 = {g.id: c for g, c in b1.terms.items()}
    table = {g.id: {} for g in mod.basis}
    truncated = set()
    for k in sorted(cat.ops):
        for key, val in cat.ops[k].items():
            for p, gid in enumerate(key):
                if gid not in table:
                    continue
                left, right = key[:p], key[p + 1:]
                if max_left is not None and len(left) > max_left:
                    continue
                if not all(a in s1 for a in right):
                    continue
                if not all(a in s0 for a in left):
                    continue
                if val is TRUNC:
                    truncated.add(gid)
                    continue
                c = 1
                for a in left:
                    c = c * s0[a]
                for a in right:
                    c = c * s1[a]
                c = f.norm(c)
                for h, w in val.terms.items():
                    accumulate(table[gid], h, c * w, f)
    return table, truncated


def deform_bimodule(mod: CurvedModule, b0: Element, b1: Element):
    """Deformed differential ``d_{b0,b1}`` on hom(P, Q) as a chain complex.

    ``b0`` acts on the left (object Q), ``b1`` on the right (object P).  The
    inputs are validated: both elements must be Maurer-Cartan, and the module
    data must satisfy its relations; otherwise CurvedRelationError carries
    the report.
    """
    from .chain import ChainComplex

    cat = mod.category
    P, Q = mod.source, mod.target
    for X, b in ((Q, b0), (P, b1)):
        res = check_mc(cat, X, b)
        if res:
            raise PreconditionError(f"element on {X} is not Maurer-Cartan; residual {res}")
    rep = mod.relation_report()
    if not rep.passed:
        raise CurvedRelationError(
            f"module {mod.name} violates the curved relations: {rep.violations[0].describe()}", rep
        )
    table, truncated = module_insertion(mod, b0, b1)
    f = cat.field
    d = {gid: Element._raw(f, acc) for gid, acc in table.items() if acc}
    bad = []
    for gid, e in d.items():
        want = cat.generators[gid].degree + 1
        if any(h.degree != want for h in e.terms):
            bad.append(gid)
    if bad:
        raise CurvedRelationError(f"deformed differential is not of degree +1 on {', '.join(sorted(bad))}")
    try:
        cx = ChainComplex(
            f"{mod.name}_deformed",
            f,
            [(g.id, g.degree, g.filtration) for g in mod.basis],
            {gid: {h.id: c for h, c in e.terms.items()} for gid, e in d.items()},
            truncated=sorted(truncated),
        )
    except ValidationError as exc:
        raise CurvedRelationError(f"deformed differential does not square to zero: {exc}") from exc
    return cx


def cyclic_residual(mod: CurvedModule, b: Element, e: Element) -> Element:
    """``sum_k n^k(b, ..., b; e)`` for the left module structure."""
    cat = mod.category
    f = cat.field
    zero = Element.zero(f)
    total: dict = {}
    for eg, ec in e.terms.items():
        table, truncated = module_insertion(_SingleGen(mod, eg), b, zero)
        if truncated:
            raise TruncationError(f"cyclic equation touches a truncated entry at {eg.id}")
        for h, w in table.get(eg.id, {}).items():
            accumulate(total, h, ec * w, f)
    return Element._raw(f, total)


class _SingleGen(CurvedModule):
    """Module view restricted to one generator (speeds up the cyclic residual)."""

    def __init__(self, mod, g):
        self.name, self.category, self.source, self.target = mod.name, mod.category, mod.source, mod.target
        self._g = g

    @property
    def basis(self):
        return [self._g]


def solve_mc_from_cyclic(mod: CurvedModule, e: Element, max_steps: int = 10_000) -> Element:
    """Unique positively filtered b with ``sum_k n^k(b, ..., b; e) = 0``.

    Proceeds by ascending filtration: at the lowest level mu of the current
    residual, the level ``mu - level(e)`` part of b is the unique preimage of
    minus that residual component under the leading map ``v -> n^1(v; e)``.
    """
    cat = mod.category
    f = cat.field
    if not e:
        raise PreconditionError("cyclic element must be nonzero")
    for g in e.terms:
        if (g.source, g.target) != (mod.source, mod.target):
            raise PreconditionError(f"{g.id} is not in the module {mod.name}")
    lam_e = filtration_level(e)
    deg_e = e.degree
    if deg_e is None:
        raise PreconditionError("cyclic element must be homogeneous")
    Q = mod.target
    alg = [g for g in cat.hom(Q, Q) if g.degree == 1 and g.filtration > 0]
    targets = [g for g in mod.basis if g.degree == deg_e + 1]
    ceiling = cat.filtration_ceiling
    b = Element.zero(f)
    last = None
    for _ in range(max_steps):
        r = cyclic_residual(mod, b, e)
        if not r:
            return b
        mu = filtration_level(r)
        if last is not None and not mu > last:
            raise SolveError(f"residual level did not increase past {last}", level=mu - lam_e)
        last = mu
        lam = mu - lam_e
        if not lam > 0:
            raise SolveError(f"residual at level {mu} needs b at non-positive level {lam}", level=lam)
        if mu > ceiling:
            raise SolveError(f"no solution within the filtration ceiling {ceiling}", level=lam)
        bad = [g.id for g in r.terms if g.filtration == mu and g.degree != deg_e + 1]
        if bad:
            raise SolveError(f"residual has wrong degree on {', '.join(sorted(bad))}", level=lam)
        dom = [g for g in alg if g.filtration == lam]
        cod = [g for g in targets if g.filtration == mu]
        if len(dom) != len(cod) or not dom:
            raise SolveError(
                f"leading map at level {lam} is {len(cod)}x{len(dom)}, not invertible", level=lam
            )
        cols = []
        for v in dom:
            img = cyclic_leading(mod, v, e)
            cols.append([img.coeff(w) if w.filtration == mu else 0 for w in cod])
        rhs = [f.norm(-r.coeff(w)) for w in cod]
        sol = solve_square(f, cols, rhs)
        if sol is None:
            raise SolveError(f"leading map at level {lam} is singular", level=lam)
        b = b + Element(f, {v: c for v, c in zip(dom, sol)})
    raise SolveError("step limit reached", level=None)


def cyclic_leading(mod: CurvedModule, v, e: Element) -> Element:
    """``n^1(v; e)``."""
    f = mod.category.field
    from .ainfcore import apply_m

    return apply_m(mod.category, 2, [Element._raw(f, {v: 1}), e])
