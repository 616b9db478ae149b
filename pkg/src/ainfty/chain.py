"""Cochain complexes over a Field: cones, exact cohomology, quasi-isomorphism certificates."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Mapping

from .ainfcore import TRUNC, CurvedCategory, apply_m_flagged
from .basedmod import Element, Field, accumulate, format_rational
from .errors import PreconditionError, ValidationError
from .linalg import Echelon, in_span, nullspace


def _compose(f: Field, outer: Mapping[str, dict], inner: Mapping[str, dict], x: str) -> dict:
    out: dict = {}
    for y, c in inner.get(x, {}).items():
        for z, w in outer.get(y, {}).items():
            accumulate(out, z, c * w, f)
    return out


class ChainComplex:
    """Graded basis with a degree +1 differential; ``d`` squaring to zero is checked on construction.

    ``gens`` is a list of ``(id, degree)`` or ``(id, degree, filtration)``;
    ``d[id]`` is a dict ``id -> scalar``.  Generators listed in ``truncated``
    have a differential that is not fully known (window edge).
    """

    def __init__(self, name: str, field: Field, gens: Iterable, d: Mapping[str, Mapping] | None = None, truncated=()):
        self.name = name
        self.field = field
        self.degree: dict[str, int] = {}
        self.filtration: dict = {}
        for g in gens:
            gid, deg = g[0], int(g[1])
            if gid in self.degree:
                raise ValidationError(f"duplicate generator {gid!r} in complex {name}")
            self.degree[gid] = deg
            self.filtration[gid] = Fraction(g[2]) if len(g) > 2 and g[2] is not None else None
        self.truncated = frozenset(truncated)
        self.d: dict[str, dict] = {}
        for x, img in (d or {}).items():
            if x not in self.degree:
                raise ValidationError(f"d of unknown generator {x!r}")
            row = {}
            for y, c in img.items():
                if y not in self.degree:
                    raise ValidationError(f"d({x}) uses unknown generator {y!r}")
                if self.degree[y] != self.degree[x] + 1:
                    raise ValidationError(f"d({x}) has a term {y} of the wrong degree")
                accumulate(row, y, field(c), field)
            if row:
                self.d[x] = row
        for x in self.d:
            dd = _compose(field, self.d, self.d, x)
            if dd:
                raise ValidationError(f"d^2({x}) = {_fmt(dd, field)} is not zero in complex {name}")

    def gens_in(self, n: int) -> list[str]:
        return sorted(g for g, k in self.degree.items() if k == n)

    @property
    def degrees(self):
        return sorted(set(self.degree.values()))

    def apply(self, v: Mapping[str, object]) -> dict:
        out: dict = {}
        for x, c in v.items():
            for y, w in self.d.get(x, {}).items():
                accumulate(out, y, c * w, self.field)
        return out

    def boundary_rows(self, n: int) -> list[dict]:
        """Images ``d(x)`` for x in degree n."""
        return [dict(self.d.get(x, {})) for x in self.gens_in(n)]

    def subcomplex(self, keep: Iterable[str], name: str | None = None) -> "ChainComplex":
        keep = set(keep)
        for x in keep:
            for y in self.d.get(x, {}):
                if y not in keep:
                    raise ValidationError(f"{x} leaves the subcomplex via {y}")
        return ChainComplex(
            name or f"{self.name}_sub",
            self.field,
            [(g, self.degree[g], self.filtration[g]) for g in sorted(keep)],
            {x: self.d[x] for x in keep if x in self.d},
            truncated=[g for g in self.truncated if g in keep],
        )

    def __repr__(self):
        return f"ChainComplex({self.name!r}, dims={ {n: len(self.gens_in(n)) for n in self.degrees} })"


def _fmt(v: Mapping, f: Field) -> str:
    if not v:
        return "0"
    parts = []
    for k in sorted(v):
        c = Fraction(f.signed(v[k]))
        s = "" if c == 1 else ("-" if c == -1 else format_rational(c) + "*")
        parts.append(f"{s}{k}")
    return " + ".join(parts).replace("+ -", "- ")


class ChainMap:
    """Degree-0 map between complexes; commuting with d is checked on construction."""

    def __init__(self, name: str, source: ChainComplex, target: ChainComplex, f: Mapping[str, Mapping]):
        if source.field != target.field:
            raise ValidationError("chain map between complexes over different fields")
        self.name = name
        self.source = source
        self.target = target
        F = source.field
        self.f: dict[str, dict] = {}
        for x, img in f.items():
            if x not in source.degree:
                raise ValidationError(f"map {name}: unknown source generator {x!r}")
            row = {}
            for y, c in img.items():
                if y not in target.degree:
                    raise ValidationError(f"map {name}: unknown target generator {y!r}")
                if target.degree[y] != source.degree[x]:
                    raise ValidationError(f"map {name}: {x} -> {y} changes degree")
                accumulate(row, y, F(c), F)
            if row:
                self.f[x] = row
        for x in source.degree:
            lhs = _compose(F, target.d, self.f, x)
            rhs = _compose(F, self.f, source.d, x)
            for k, v in rhs.items():
                accumulate(lhs, k, -v, F)
            if lhs:
                raise ValidationError(f"map {name} is not a chain map: (d f - f d)({x}) = {_fmt(lhs, F)}")

    def apply(self, v: Mapping[str, object]) -> dict:
        out: dict = {}
        for x, c in v.items():
            for y, w in self.f.get(x, {}).items():
                accumulate(out, y, c * w, self.source.field)
        return out


def identity_map(C: ChainComplex) -> ChainMap:
    return ChainMap(f"id_{C.name}", C, C, {x: {x: 1} for x in C.degree})


def zero_map(C: ChainComplex, D: ChainComplex) -> ChainMap:
    return ChainMap(f"0_{C.name}_{D.name}", C, D, {})


def mapping_cone(f: ChainMap, name: str | None = None) -> ChainComplex:
    """``cone(f) = A[1] + B`` with ``d(a) = -d_A a + f(a)`` and ``d(b) = d_B b``.

    In degree n the cone is ``A^{n+1} + B^n``; the matrix of d is lower
    triangular with f in the off-diagonal slot.  Source generators get the
    prefix ``s.`` and target generators ``t.``.
    """
    A, B = f.source, f.target
    F = A.field
    gens = [(f"s.{x}", A.degree[x] - 1, A.filtration[x]) for x in sorted(A.degree)]
    gens += [(f"t.{y}", B.degree[y], B.filtration[y]) for y in sorted(B.degree)]
    d: dict = {}
    for x in A.degree:
        row = {f"s.{y}": F.norm(-c) for y, c in A.d.get(x, {}).items()}
        for y, c in f.f.get(x, {}).items():
            row[f"t.{y}"] = c
        d[f"s.{x}"] = row
    for y in B.degree:
        d[f"t.{y}"] = {f"t.{z}": c for z, c in B.d.get(y, {}).items()}
    trunc = [f"s.{x}" for x in A.truncated] + [f"t.{y}" for y in B.truncated]
    return ChainComplex(name or f"cone({f.name})", F, gens, d, truncated=trunc)


@dataclass
class DegreeCohomology:
    degree: int
    rank: int
    cycles: int
    boundaries: int
    representatives: list = dc_field(default_factory=list)
    flagged: bool = False


@dataclass
class CohomologyResult:
    complex: str
    degrees: dict = dc_field(default_factory=dict)

    def rank(self, n: int) -> int:
        return self.degrees[n].rank

    @property
    def ranks(self) -> dict:
        return {n: r.rank for n, r in sorted(self.degrees.items())}

    @property
    def flagged(self) -> list:
        return [n for n, r in sorted(self.degrees.items()) if r.flagged]


def _degree_flag(C: ChainComplex, n: int) -> bool:
    return any(C.degree[g] in (n - 1, n) for g in C.truncated)


def cohomology_degree(C: ChainComplex, n: int) -> DegreeCohomology:
    F = C.field
    cols = C.gens_in(n)
    rows = {}
    # matrix of d_n: one row per target generator, one column per source generator
    for x in cols:
        for y, c in C.d.get(x, {}).items():
            rows.setdefault(y, {})[x] = c
    ker = nullspace(F, list(rows.values()), cols)
    image = [r for r in C.boundary_rows(n - 1) if r]
    ech = Echelon(F)
    for r in image:
        ech.add(r)
    b = ech.rank
    reps = []
    for v in ker:
        rem, _ = ech.reduce(v)
        if rem and ech.add(rem):
            reps.append(rem)
    reps = [_normalize(F, r) for r in reps]
    return DegreeCohomology(n, len(ker) - b, len(ker), b, reps, _degree_flag(C, n))


def _normalize(F: Field, v: dict) -> dict:
    lead = min(v)
    inv = F.inv(v[lead])
    return {k: F.norm(inv * c) for k, c in v.items()}


def cohomology_ranks(C: ChainComplex, deg_min: int, deg_max: int) -> CohomologyResult:
    """Exact ranks of H^n for ``deg_min <= n <= deg_max`` with representative cycles."""
    if deg_min > deg_max:
        raise PreconditionError("empty degree window")
    res = CohomologyResult(C.name)
    for n in range(deg_min, deg_max + 1):
        res.degrees[n] = cohomology_degree(C, n)
    return res


def is_cycle(C: ChainComplex, v: Mapping) -> bool:
    return not C.apply(v)


def is_boundary(C: ChainComplex, v: Mapping, n: int | None = None):
    """Preimage ``w`` with ``d w = v`` or None."""
    if not v:
        return {}
    if n is None:
        n = C.degree[next(iter(v))]
    srcs = C.gens_in(n - 1)
    coeffs = in_span(C.field, [dict(C.d.get(x, {})) for x in srcs], dict(v))
    if coeffs is None:
        return None
    return {srcs[i]: c for i, c in coeffs.items() if c}


def class_nonzero(C: ChainComplex, v: Mapping) -> bool:
    """True when v is a cycle that is not a boundary."""
    if not v:
        return False
    if not is_cycle(C, v):
        raise PreconditionError("not a cycle")
    return is_boundary(C, v) is None


@dataclass
class QuasiIsoResult:
    value: bool
    certificate: dict = dc_field(default_factory=dict)
    flagged: list = dc_field(default_factory=list)

    def __bool__(self):
        return self.value


def induced_rank(f: ChainMap, n: int) -> tuple[int, int, int]:
    """``(dim H^n(A), dim H^n(B), rank H^n(f))``."""
    A, B = f.source, f.target
    ha = cohomology_degree(A, n)
    hb = cohomology_degree(B, n)
    F = A.field
    ech = Echelon(F)
    for r in B.boundary_rows(n - 1):
        if r:
            ech.add(r)
    base = ech.rank
    for rep in ha.representatives:
        img = f.apply(rep)
        if img:
            ech.add(img)
    return ha.rank, hb.rank, ech.rank - base


def is_quasi_iso(f: ChainMap, deg_min: int, deg_max: int) -> QuasiIsoResult:
    """Whether H(f) is bijective in every degree of the window, with per-degree ranks as certificate."""
    cert = {}
    ok = True
    flagged = []
    for n in range(deg_min, deg_max + 1):
        a, b, r = induced_rank(f, n)
        cert[n] = {"dim_source": a, "dim_target": b, "rank": r}
        if not (a == b == r):
            ok = False
        if _degree_flag(f.source, n) or _degree_flag(f.target, n):
            flagged.append(n)
    return QuasiIsoResult(ok, cert, flagged)


def les_rank_identity(f: ChainMap, deg_min: int, deg_max: int) -> dict:
    """Per degree n: ``dim H^n(cone f)`` against ``coker H^n(f) + ker H^{n+1}(f)``.

    Both sides are computed independently (the cone by its own elimination),
    so agreement in every degree is a check of the long exact sequence.
    """
    cone = mapping_cone(f)
    out = {}
    for n in range(deg_min, deg_max + 1):
        a_n, b_n, r_n = induced_rank(f, n)
        a_up, _, r_up = induced_rank(f, n + 1)
        lhs = cohomology_degree(cone, n).rank
        rhs = (b_n - r_n) + (a_up - r_up)
        out[n] = {"cone": lhs, "coker": b_n - r_n, "ker": a_up - r_up, "ok": lhs == rhs}
    return out


# ---- complexes from categories ---------------------------------------------

def complex_from_category(cat: CurvedCategory, source: str | None = None, target: str | None = None,
                          name: str | None = None, min_filtration=None) -> ChainComplex:
    """``(hom(source, target), m^1)`` as a chain complex; needs zero curvature on both ends.

    With ``min_filtration`` only generators at or above that level are kept
    (a subcomplex when m^1 does not lower filtration).
    """
    gens = [
        g for g in cat.generators.values()
        if (source is None or g.source == source) and (target is None or g.target == target)
        and (min_filtration is None or g.filtration >= min_filtration)
    ]
    objs = {g.source for g in gens} | {g.target for g in gens}
    for o in objs:
        if cat.curv(o):
            raise PreconditionError(f"object {o} has nonzero curvature; m1 does not square to zero")
    ids = {g.id for g in gens}
    d = {}
    trunc = []
    table = cat.table(1)
    for g in gens:
        val = table.get((g.id,))
        if val is TRUNC:
            trunc.append(g.id)
            continue
        if val:
            row = {h.id: c for h, c in val.terms.items()}
            if any(h not in ids for h in row):
                raise ValidationError(f"m1({g.id}) leaves the selected generators")
            d[g.id] = row
    return ChainComplex(name or f"{cat.name}_m1", cat.field, [(g.id, g.degree, g.filtration) for g in gens], d, trunc)


def multiplication_map(cat: CurvedCategory, C: ChainComplex, D: ChainComplex, u: Element,
                       side: str = "left", name: str | None = None) -> ChainMap:
    """``a -> (-1)^{|a|} m^2(u, a)`` (left) or ``a -> m^2(a, u)`` (right) from C to D.

    The left sign makes the map commute with m^1 for a closed degree-0 u.
    """
    F = cat.field
    rows = {}
    for x in sorted(C.degree):
        a = Element._raw(F, {cat.gen(x): 1})
        if side == "left":
            val, flags = apply_m_flagged(cat, 2, [u, a])
            if C.degree[x] % 2:
                val = -val
        else:
            val, flags = apply_m_flagged(cat, 2, [a, u])
        if flags:
            raise PreconditionError(f"multiplication of {x} leaves the window")
        row = {h.id: c for h, c in val.terms.items()}
        for h in row:
            if h not in D.degree:
                raise PreconditionError(f"multiplication sends {x} outside the target complex ({h})")
        rows[x] = row
    return ChainMap(name or f"{side}_mult", C, D, rows)
