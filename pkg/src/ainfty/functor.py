"""Curved A-infinity functors: the functor equation, composition, pushforward and deformation.

Conventions (reduced degrees): the side of the functor equation built from
target operations carries no sign,

    sum m_B^s(F^{l_s}(...), ..., F^{l_1}(...)) = sum (-1)^s F(x_k, ..., m_A(...), x_i, ..., x_1),

with the same sign ``s = sum_{q <= i}(deg x_q - 1)`` as the category
relation.  Composition ``(G o F)^k = sum G^m(F^{l_m}, ..., F^{l_1})`` is
sign-free as well.
"""
from __future__ import annotations

import itertools
from typing import Mapping

from .ainfcore import (
    TRUNC,
    CurvedCategory,
    RelationReport,
    Violation,
    _objects_of,
    _sign,
)
from .basedmod import Element, Generator, accumulate, filtration_level
from .deform import (
    MCAssignment,
    check_mc,
    deform_raw,
    insertion_table,
    validate_mc_candidate,
    verify_assignment,
)
from .errors import PreconditionError, TruncationError, ValidationError


class CurvedFunctor:
    """Object map plus sparse term tables ``terms[k][(g_k, ..., g_1)]`` and zeroth terms per object."""

    def __init__(
        self,
        name: str,
        source: CurvedCategory,
        target: CurvedCategory,
        object_map: Mapping[str, str],
        terms: Mapping[int, Mapping] | None = None,
        zeroth: Mapping[str, Element] | None = None,
        arity_cap: int | None = None,
    ):
        self.name = name
        self.source = source
        self.target = target
        if source.field != target.field:
            raise ValidationError("functor between categories over different fields")
        self.field = source.field
        self.object_map = dict(object_map)
        for X in source.objects:
            if X not in self.object_map:
                raise ValidationError(f"functor {name}: object {X!r} is not mapped")
        for X, Y in self.object_map.items():
            if X not in source.objects or Y not in target.objects:
                raise ValidationError(f"functor {name}: bad object map {X} -> {Y}")
        self.terms: dict = {}
        for k, table in (terms or {}).items():
            k = int(k)
            if k < 1:
                raise ValidationError("arity-0 terms belong in the zeroth map")
            tab = {}
            for key, out in table.items():
                key = tuple(g.id if isinstance(g, Generator) else g for g in key)
                if len(key) != k:
                    raise ValidationError(f"key {key} listed under arity {k}")
                source._check_key(key)
                if out is TRUNC:
                    tab[key] = TRUNC
                    continue
                s, t = source.key_hom(key)
                target._check_output(out, (self.object_map[s], self.object_map[t]), f"{name}{k}{key}")
                if out:
                    tab[key] = out
            if tab:
                self.terms[k] = tab
        present = max(self.terms, default=1)
        self.arity_cap = max(present, 1) if arity_cap is None else int(arity_cap)
        if present > self.arity_cap:
            raise ValidationError(f"functor {name}: arity {present} above cap {self.arity_cap}")
        self.zeroth: dict = {}
        for X, e in (zeroth or {}).items():
            if X not in source.objects:
                raise ValidationError(f"functor {name}: zeroth term on unknown object {X!r}")
            Y = self.object_map[X]
            target._check_output(e, (Y, Y), f"{name}0@{X}")
            if e:
                self.zeroth[X] = e

    def table(self, k):
        return self.terms.get(k, {})

    def f0(self, X) -> Element:
        return self.zeroth.get(X, Element.zero(self.field))

    def producers(self):
        """Target generator id -> list of (source key, coefficient); zeroth terms use ('@', X)."""
        prod: dict = {}
        for X, e in self.zeroth.items():
            for g, v in e.terms.items():
                prod.setdefault(g.id, []).append((("@", X), v))
        for k in sorted(self.terms):
            for key, out in self.terms[k].items():
                if out is TRUNC:
                    continue
                for g, v in out.terms.items():
                    prod.setdefault(g.id, []).append((key, v))
        return prod

    def apply(self, k: int, inputs: list[Element], obj: str | None = None) -> Element:
        """Multilinear ``F^k(x_k, ..., x_1)``; ``F^0`` needs ``obj``."""
        if k == 0:
            if obj is None:
                raise ValidationError("F0 needs an object")
            return self.f0(obj)
        f = self.field
        table = self.table(k)
        out: dict = {}
        for combo in itertools.product(*[list(e.terms.items()) for e in inputs]):
            key = tuple(g.id for g, _ in combo)
            val = table.get(key)
            if val is None:
                continue
            if val is TRUNC:
                raise TruncationError(f"{self.name}{k}{key} is truncated", key=key)
            c = 1
            for _, v in combo:
                c = c * v
            c = f.norm(c)
            for h, w in val.terms.items():
                accumulate(out, h, c * w, f)
        return Element._raw(f, out)

    def __repr__(self):
        sizes = {k: len(t) for k, t in sorted(self.terms.items())}
        return f"CurvedFunctor({self.name!r}: {self.source.name} -> {self.target.name}, terms={sizes}, zeroth={sorted(self.zeroth)})"


def functors_equal(F: CurvedFunctor, G: CurvedFunctor) -> bool:
    """Term-by-term equality of two functors (names and category names ignored)."""
    return (
        F.object_map == G.object_map
        and F.terms == G.terms
        and F.zeroth == G.zeroth
    )


def table_difference(F: CurvedFunctor, G: CurvedFunctor) -> list[str]:
    """Human-readable list of entries where two functors differ."""
    diffs = []
    for X in sorted(set(F.zeroth) | set(G.zeroth)):
        a, b = F.f0(X), G.f0(X)
        if a != b:
            diffs.append(f"zeroth@{X}: {a} vs {b}")
    for k in sorted(set(F.terms) | set(G.terms)):
        ta, tb = F.table(k), G.table(k)
        for key in sorted(set(ta) | set(tb)):
            a, b = ta.get(key), tb.get(key)
            if a != b:
                diffs.append(f"{k}{key}: {a} vs {b}")
    return diffs


def identity_functor(cat: CurvedCategory, name: str | None = None, arity_cap: int | None = None) -> CurvedFunctor:
    ident = {(gid,): Element._raw(cat.field, {g: 1}) for gid, g in cat.generators.items()}
    return CurvedFunctor(
        name or f"id_{cat.name}", cat, cat, {X: X for X in cat.objects}, {1: ident},
        arity_cap=arity_cap or cat.arity_cap,
    )


def _preimage_words(F: CurvedFunctor, okey, prod, max_len):
    """Ways to write a target key as ``F^{l_m}(...) ... F^{l_1}(...)``.

    Yields ``(source_tuple, source_object_or_None, coefficient, truncated)``
    where each slot of ``okey`` is matched either by a table key of F whose
    output contains it or by a zeroth term.
    """
    src = F.source.generators
    f = F.field
    # process slots from the rightmost (applied first)
    slots = list(reversed(okey))

    def rec(i, cur_obj, acc_tuple, coeff):
        if i == len(slots):
            yield acc_tuple, cur_obj, coeff
            return
        for pkey, c in prod.get(slots[i], ()):
            if pkey and pkey[0] == "@":
                X = pkey[1]
                if cur_obj is not None and cur_obj != X:
                    continue
                yield from rec(i + 1, X, acc_tuple, f.norm(coeff * c))
            else:
                if len(acc_tuple) + len(pkey) > max_len:
                    continue
                first = src[pkey[-1]]
                if cur_obj is not None and first.source != cur_obj:
                    continue
                yield from rec(i + 1, src[pkey[0]].target, pkey + acc_tuple, f.norm(coeff * c))

    yield from rec(0, None, (), 1)


def check_functor_equation(F: CurvedFunctor, max_arity: int | None = None) -> RelationReport:
    """Residuals of the curved functor equation on every source tuple of length <= ``max_arity``."""
    A, B = F.source, F.target
    if max_arity is None:
        max_arity = min(A.arity_cap, B.arity_cap)
    if max_arity > min(A.arity_cap, B.arity_cap):
        raise ValidationError(f"max arity {max_arity} above the categories' caps")
    f = F.field
    gens = A.generators
    report = RelationReport(f"functor equation of {F.name} (arity <= {max_arity})")
    residuals: dict = {}
    flagged: set = set()

    def add(rk, c, val):
        acc = residuals.setdefault(rk, {})
        for h, w in val.terms.items():
            accumulate(acc, h, c * w, f)

    # target side: sum m_B^s(F(...), ..., F(...))
    fprod = F.producers()
    for X in A.objects:
        Y = F.object_map[X]
        c = B.curv(Y)
        if c:
            add((X, ()), 1, c)
    for s in sorted(B.ops):
        for okey, oval in B.ops[s].items():
            for tup, obj, coeff in _preimage_words(F, okey, fprod, max_arity):
                src = gens[tup[-1]].source if tup else obj
                rk = (src, tup)
                if oval is TRUNC:
                    flagged.add(rk)
                    continue
                add(rk, coeff, oval)

    # source side: F(..., m_A(...), ...) with the relation sign
    aprod = A.producers()
    for r in sorted(F.terms):
        for okey, oval in F.terms[r].items():
            for p, h in enumerate(okey):
                after = okey[p + 1:]
                base = sum(gens[x].degree - 1 for x in after)
                for ikey, c in aprod.get(h, ()):
                    if ikey and ikey[0] == "@":
                        inner, obj = (), ikey[1]
                    else:
                        inner, obj = ikey, None
                    tup = okey[:p] + inner + after
                    if len(tup) > max_arity:
                        continue
                    src = gens[tup[-1]].source if tup else obj
                    rk = (src, tup)
                    if oval is TRUNC:
                        flagged.add(rk)
                        continue
                    add(rk, f.norm(-_sign(base) * c), oval)

    trunc_inner = set(A.truncated_keys()) | {k for t in F.terms.values() for k, v in t.items() if v is TRUNC}

    def touches(tup):
        n = len(tup)
        return any(tup[i:i + j] in trunc_inner for j in range(1, n + 1) for i in range(n - j + 1))

    report.checked = len(residuals)
    count = len(flagged)
    for rk, acc in residuals.items():
        if not acc:
            continue
        if rk in flagged or touches(rk[1]):
            if rk not in flagged:
                count += 1
            continue
        src, tup = rk
        report.violations.append(Violation("functor", _objects_of(A, tup, src), tup, Element._raw(f, dict(acc))))
    report.truncation_flags = count
    return report.finalize()


def compose(G: CurvedFunctor, F: CurvedFunctor, name: str | None = None, arity_cap: int | None = None) -> CurvedFunctor:
    """``G o F``; terms are computed exactly up to the arity cap (default: the larger factor cap)."""
    if F.target is not G.source and not _same_category(F.target, G.source):
        raise ValidationError(f"cannot compose {G.name} after {F.name}: categories differ")
    for X, e in F.zeroth.items():
        if not filtration_level(e) > 0:
            raise PreconditionError(f"{F.name} zeroth term at {X} is not positively filtered")
    cap = arity_cap or max(F.arity_cap, G.arity_cap)
    f = F.field
    terms: dict = {}
    zeroth: dict = {}
    objmap = {X: G.object_map[Y] for X, Y in F.object_map.items()}
    for X in F.source.objects:
        g0 = G.f0(F.object_map[X])
        if g0:
            zeroth[X] = dict(g0.terms)
    fprod = F.producers()
    for m in sorted(G.terms):
        for okey, oval in G.terms[m].items():
            for tup, obj, coeff in _preimage_words(F, okey, fprod, cap):
                if tup:
                    acc = terms.setdefault(len(tup), {}).setdefault(tup, {})
                else:
                    acc = zeroth.setdefault(obj, {})
                if oval is TRUNC or acc is TRUNC:
                    if tup:
                        terms[len(tup)][tup] = TRUNC
                        continue
                    raise TruncationError(f"zeroth term of {G.name} o {F.name} is truncated")
                for h, w in oval.terms.items():
                    accumulate(acc, h, coeff * w, f)
    tables = {
        k: {key: (v if v is TRUNC else Element._raw(f, v)) for key, v in t.items()}
        for k, t in terms.items()
    }
    return CurvedFunctor(
        name or f"{G.name}o{F.name}",
        F.source,
        G.target,
        objmap,
        tables,
        {X: Element._raw(f, v) for X, v in zeroth.items()},
        arity_cap=cap,
    )


def _same_category(a: CurvedCategory, b: CurvedCategory) -> bool:
    from .ainfcore import structurally_equal

    return structurally_equal(a, b, ignore_name=True)


def push_sum(F: CurvedFunctor, X: str, b: Element) -> Element:
    """``F^0(1) + sum_k F^k(b, ..., b)`` by table lookup over keys supported in b."""
    f = F.field
    supp = {g.id: c for g, c in b.terms.items()}
    out = dict(F.f0(X).terms)
    if supp:
        for k in sorted(F.terms):
            for key, val in F.terms[k].items():
                if not all(g in supp for g in key):
                    continue
                if val is TRUNC:
                    raise TruncationError(f"pushforward touches truncated term {key}", key=key)
                c = 1
                for g in key:
                    c = c * supp[g]
                c = f.norm(c)
                for h, w in val.terms.items():
                    accumulate(out, h, c * w, f)
    return Element._raw(f, out)


def pushforward_mc(F: CurvedFunctor, X: str, b: Element) -> Element:
    """``F_* b``; b must be Maurer-Cartan on X and the image is re-verified in the target."""
    res = check_mc(F.source, X, b)
    if res:
        raise PreconditionError(f"element on {X} is not Maurer-Cartan; residual {res}")
    out = push_sum(F, X, b)
    Y = F.object_map[X]
    validate_mc_candidate(F.target, Y, out)
    res = check_mc(F.target, Y, out)
    if res:
        raise PreconditionError(
            f"pushforward along {F.name} is not Maurer-Cartan (the functor equation fails); residual {res}"
        )
    return out


def pushforward_assignment(F: CurvedFunctor, B: MCAssignment) -> MCAssignment:
    out: dict = {}
    for X, b in B.items():
        Y = F.object_map[X]
        pb = pushforward_mc(F, X, b)
        if Y in out and out[Y] != pb:
            raise PreconditionError(f"objects mapping to {Y} push forward to different elements")
        out[Y] = pb
    return MCAssignment(out, f"{F.name}_*{B.label}")


def deform_functor(F: CurvedFunctor, B: MCAssignment, name: str | None = None) -> CurvedFunctor:
    """``F_B``: insert b's into every slot of every term; an ordinary functor A(B) -> B(F_*B)."""
    A = F.source
    verify_assignment(A, B)
    FB = pushforward_assignment(F, B)
    src = deform_raw(A, B)
    tgt = deform_raw(F.target, FB)
    kept = set(src.objects)
    f = F.field
    terms: dict = {}
    for k in sorted(F.terms):
        new, zeroth = insertion_table(A, F.terms[k], B.elements, A.generators, kept)
        for key, acc in new.items():
            tab = terms.setdefault(len(key), {})
            cur = tab.get(key, {})
            if cur is TRUNC or acc is TRUNC:
                tab[key] = TRUNC
                continue
            for h, w in acc.items():
                accumulate(cur, h, w, f)
            tab[key] = cur
    # zeroth term: sum F^m(b, ..., b) - F_* b, zero by construction; recomputed as a check
    for X, b in B.items():
        z = push_sum(F, X, b) - FB[F.object_map[X]]
        if z:
            raise PreconditionError(f"deformed zeroth term at {X} does not vanish: {z}")
    tables = {
        k: {key: (v if v is TRUNC else Element._raw(f, v)) for key, v in t.items()}
        for k, t in terms.items()
    }
    objmap = {X: F.object_map[X] for X in src.objects}
    return CurvedFunctor(name or f"{F.name}_{B.label}", src, tgt, objmap, tables, {}, arity_cap=F.arity_cap)


# ---- bar construction --------------------------------------------------------

def _tensor_power(e: Element, n: int, f) -> dict:
    out: dict = {(): 1} if n == 0 else {}
    if n == 0:
        return out
    items = list(e.terms.items())
    for combo in itertools.product(items, repeat=n):
        c = 1
        for _, v in combo:
            c = c * v
        key = tuple(g.id for g, _ in combo)
        accumulate(out, key, f.norm(c), f)
    return out


def _bar_image_of_exp(F: CurvedFunctor, X: str, b: Element, n: int) -> dict:
    """Length-n tensor component of ``F-hat(e^b)``, expanding e^b word by word.

    ``F-hat(b^{(x)K})`` sums over splittings of the K letters into n
    consecutive (possibly empty) blocks, each block fed to ``F^{l}``.
    """
    f = F.field
    out: dict = {}
    maxK = n * F.arity_cap
    cache: dict = {}

    def Fblock(l):
        if l not in cache:
            cache[l] = F.apply(l, [b] * l, X) if l else F.f0(X)
        return cache[l]

    for K in range(0, maxK + 1):
        for cuts in itertools.combinations_with_replacement(range(K + 1), n - 1):
            bounds = (0,) + cuts + (K,)
            lengths = [bounds[i + 1] - bounds[i] for i in range(n)]
            if any(l > F.arity_cap for l in lengths):
                continue
            parts = [Fblock(l) for l in lengths]
            if any(not p for p in parts):
                continue
            for combo in itertools.product(*[list(p.terms.items()) for p in parts]):
                c = 1
                for _, v in combo:
                    c = c * v
                key = tuple(g.id for g, _ in combo)
                accumulate(out, key, f.norm(c), f)
    return out


def check_bar_identity(F: CurvedFunctor, X: str, b: Element, tensor_cap: int = 3) -> RelationReport:
    """Compare ``exp(F_* b)`` with ``F-hat(exp b)`` tensor length by tensor length."""
    res = check_mc(F.source, X, b)
    if res:
        raise PreconditionError(f"element on {X} is not Maurer-Cartan; residual {res}")
    report = RelationReport(f"bar identity for {F.name} at {X} (tensor length <= {tensor_cap})")
    f = F.field
    pb = push_sum(F, X, b)
    for n in range(0, tensor_cap + 1):
        lhs = _tensor_power(pb, n, f)
        rhs = _bar_image_of_exp(F, X, b, n) if n else {(): 1}
        report.checked += 1
        if lhs != rhs:
            diff = dict(lhs)
            for k, v in rhs.items():
                accumulate(diff, k, -v, f)
            first = min(diff)
            report.violations.append(
                Violation("bar", (X,), first, None, f"tensor length {n}: coefficient differs by {diff[first]}")
            )
            break
    return report.finalize()
