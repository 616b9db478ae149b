"""Random exact instances for property tests: curved categories with known MC elements, functors, complexes.

Categories start from matrix units over ``k[t, q]/(t^{T+1}, q^{Q+1})`` with
``deg t = 1``, ``filt t = 0``, ``deg q = 0``, ``filt q = lam``.  A central
curvature ``w = alpha^2 e t^2 q^2`` makes ``alpha e t q + gamma e t q^Q``
Maurer-Cartan for every gamma; deforming by a random ``b0`` moves that family
to ``c - b0``.  Higher products come from transport along a random A-infinity
isomorphism ``Phi`` with ``Phi^1 = id`` whose higher terms raise the q-degree,
so every structure map of arity k raises q-degree by at least k - 2 and the
tables vanish above arity Q + 2.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .ainfcore import TRUNC, CurvedCategory
from .basedmod import QQ, Element, Field, Generator, accumulate
from .chain import ChainComplex, ChainMap
from .deform import CurvedModule, deform_raw
from .functor import CurvedFunctor, push_sum
from .linalg import nullspace


def _coef(rng: random.Random, lo=-3, hi=3, nonzero=True):
    # denominators 2 and 3 only, so values also make sense in F_p for p > 3
    while True:
        c = Fraction(rng.randint(lo, hi), rng.choice((1, 1, 1, 2, 3)))
        if c or not nonzero:
            return c


@dataclass
class Instance:
    """A random curved category plus what is known about it."""

    cat: CurvedCategory
    qdeg: dict
    Q: int
    alpha: dict
    b0: dict
    pushes: list = dc_field(default_factory=list)

    @property
    def field(self) -> Field:
        return self.cat.field

    def base_mc(self, rng: random.Random, X: str) -> Element:
        """A Maurer-Cartan element on X of the first curved category in the chain."""
        f = self.field
        first = self.pushes[0].source if self.pushes else self.cat
        terms = {}
        a = self.alpha[X]
        if a:
            accumulate(terms, first.gen(_gid(X, X, 1, 1)), f(rng.choice((1, -1)) * a), f)
        gamma = _coef(rng, nonzero=False)
        if gamma and self.Q >= 2:
            accumulate(terms, first.gen(_gid(X, X, 1, self.Q)), f(gamma), f)
        elif gamma and self.Q == 1 and not a:
            accumulate(terms, first.gen(_gid(X, X, 1, 1)), f(gamma), f)
        c = Element._raw(f, terms)
        return c - self.b0[X]

    def mc(self, rng: random.Random, X: str) -> Element:
        """A Maurer-Cartan element on X of ``cat`` (pushed through the recorded isomorphisms)."""
        b = self.base_mc(rng, X)
        for F in self.pushes:
            b = push_sum(F, X, b)
        return b


def _gid(s, t, a, r):
    return f"e{s[1:]}{t[1:]}t{a}q{r}"


def strict_category(n_obj=1, T=2, Q=2, field: Field = QQ, rng: random.Random | None = None,
                    curved=True, name="strict"):
    """Matrix units over the truncated polynomial ring; m2 only, plus optional central curvature."""
    rng = rng or random.Random(0)
    objs = [f"X{i}" for i in range(n_obj)]
    sigma = {X: rng.randint(-1, 1) for X in objs}
    c = {X: Fraction(rng.randint(-2, 2), 2) for X in objs}
    lam = Fraction(rng.randint(1, 3), rng.randint(1, 2))
    gens, qdeg, tdeg = {}, {}, {}
    for s in objs:
        for t in objs:
            for a in range(T + 1):
                for r in range(Q + 1):
                    gid = _gid(s, t, a, r)
                    gens[gid] = Generator(gid, s, t, a + sigma[t] - sigma[s], r * lam + c[t] - c[s])
                    qdeg[gid], tdeg[gid] = r, a
    by = {(g.source, g.target, tdeg[g.id], qdeg[g.id]): g for g in gens.values()}
    m2 = {}
    for g2 in gens.values():
        for g1 in gens.values():
            if g1.target != g2.source:
                continue
            a, r = tdeg[g1.id] + tdeg[g2.id], qdeg[g1.id] + qdeg[g2.id]
            if a > T or r > Q:
                continue
            sign = -1 if g1.degree % 2 else 1
            m2[(g2.id, g1.id)] = Element._raw(field, {by[(g1.source, g2.target, a, r)]: field(sign)})
    alpha = {X: 0 for X in objs}
    curv = {}
    if curved and T >= 2 and Q >= 2:
        a0 = _coef(rng)
        alpha = {X: a0 for X in objs}
        for X in objs:
            curv[X] = Element._raw(field, {by[(X, X, 2, 2)]: field(a0 * a0)})
    cat = CurvedCategory(name, field, {X: 0 for X in objs}, gens.values(), {2: m2}, curv, arity_cap=Q + 2)
    return cat, qdeg, alpha


def _endo_deg1(cat, qdeg, X, Q):
    return [g for g in cat.hom(X, X) if g.degree == 1 and qdeg[g.id] >= 1 and g.filtration > 0]


def random_curved(rng: random.Random, n_obj=1, T=2, Q=2, field: Field = QQ, name="A1") -> Instance:
    """Strict category deformed by a random positively filtered degree-1 element per object."""
    base, qdeg, alpha = strict_category(n_obj, T, Q, field, rng)
    b0 = {}
    for X in base.objects:
        terms = {}
        for g in _endo_deg1(base, qdeg, X, Q):
            if rng.random() < 0.7:
                accumulate(terms, g, field(_coef(rng)), field)
        b0[X] = Element._raw(field, terms)
    cat = deform_raw(base, b0, name=name)
    return Instance(cat, qdeg, Q, alpha, b0)


# ---- transport -------------------------------------------------------------------

def composable_keys(cat: CurvedCategory, k: int, qdeg: dict, budget: int):
    """Composable k-tuples (g_k first) whose total q-degree is at most ``budget``."""
    by_target: dict = {}
    for g in sorted(cat.generators.values(), key=lambda g: g.id):
        by_target.setdefault(g.target, []).append(g)
    out = []

    def rec(prefix, src, used):
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        for g in by_target.get(src, ()) if prefix else sorted(cat.generators.values(), key=lambda g: g.id):
            u = used + qdeg[g.id]
            if u > budget:
                continue
            prefix.append(g.id)
            rec(prefix, g.source, u)
            prefix.pop()

    if k > 0 and budget >= 0:
        rec([], None, 0)
    return out


def _words(F_tables, key, cache):
    """Sign-free expansion of F-hat on ``key``: dict word -> coefficient (blocks of F^s, F^1 = id)."""
    if key in cache:
        return cache[key]
    if not key:
        return {(): 1}
    out: dict = {}
    for s in range(1, len(key) + 1):
        block, rest = key[:s], key[s:]
        if s == 1:
            head = {block[0]: 1}
        else:
            val = F_tables.get(s, {}).get(block)
            if not val:
                continue
            head = {g.id: c for g, c in val.terms.items()}
        tail = _words(F_tables, rest, cache)
        for h, c in head.items():
            for w, d in tail.items():
                w2 = (h,) + w
                out[w2] = out.get(w2, 0) + c * d
    out = {w: c for w, c in out.items() if c}
    cache[key] = out
    return out


def _m_hat(cat: CurvedCategory, word, obj_if_empty=None):
    """Coderivation extension of m on a word: dict word -> coefficient, with the relation sign."""
    gens = cat.generators
    out: dict = {}
    n = len(word)
    for p in range(n + 1):
        for r in range(0, n - p + 1):
            if r == 0:
                if n == 0:
                    obj = obj_if_empty
                elif p < n:
                    obj = gens[word[p]].target
                else:
                    obj = gens[word[-1]].source
                val = cat.curvature.get(obj)
            else:
                val = cat.ops.get(r, {}).get(word[p:p + r])
            if not val:
                continue
            if val is TRUNC:
                raise ValueError("transport needs exact tables")
            right = word[p + r:]
            sign = -1 if sum(gens[y].degree - 1 for y in right) % 2 else 1
            for h, c in val.terms.items():
                w2 = word[:p] + (h.id,) + right
                out[w2] = out.get(w2, 0) + sign * c
    return {w: c for w, c in out.items() if c}


def _eval_F(F_tables, word, field):
    if len(word) == 1:
        return {word[0]: 1}
    val = F_tables.get(len(word), {}).get(word)
    return {} if not val else {g.id: c for g, c in val.terms.items()}


def random_phi2(rng: random.Random, inst: Instance, density=0.3):
    """Random second term for an isomorphism with identity linear part; raises q-degree by >= 1."""
    cat, qdeg, Q = inst.cat, inst.qdeg, inst.Q
    f = cat.field
    table = {}
    homs: dict = {}
    for g in cat.generators.values():
        homs.setdefault((g.source, g.target), []).append(g)
    for key in composable_keys(cat, 2, qdeg, Q - 1):
        if rng.random() > density:
            continue
        g2, g1 = cat.gen(key[0]), cat.gen(key[1])
        want_deg = g1.degree + g2.degree - 1
        rmin = qdeg[g1.id] + qdeg[g2.id] + 1
        cands = [h for h in homs[(g1.source, g2.target)] if h.degree == want_deg and qdeg[h.id] >= rmin]
        terms = {}
        for h in cands:
            if rng.random() < 0.6:
                accumulate(terms, h, f(_coef(rng)), f)
        if terms:
            table[key] = Element._raw(f, terms)
    return {2: table}


def transport(inst: Instance, phi: dict, name="A2"):
    """Category B on the same generators with ``Phi: B -> A`` an isomorphism; returns (Instance, Phi, Psi)."""
    A, qdeg, Q = inst.cat, inst.qdeg, inst.Q
    f = A.field
    cap = Q + 2
    # inverse Psi: sum over words of Phi-hat(key) of Psi^{|w|}(w) vanishes for |key| >= 2
    psi: dict = {}
    wcache: dict = {}
    for k in range(2, Q + 2):
        tab = {}
        for key in composable_keys(A, k, qdeg, Q - (k - 1)):
            acc: dict = {}
            for w, c in _words(phi, key, wcache).items():
                if w == key:
                    continue
                for h, d in _eval_F(psi, w, f).items():
                    acc[h] = acc.get(h, 0) + c * d
            acc = {h: f.norm(-c) for h, c in acc.items() if f.norm(c)}
            if acc:
                tab[key] = Element(f, {A.gen(h): c for h, c in acc.items()})
        if tab:
            psi[k] = tab
    # transported structure maps: pi Psi-hat m-hat Phi-hat
    ops: dict = {}
    for k in range(1, cap + 1):
        budget = Q if k <= 2 else Q + 2 - k
        tab = {}
        for key in composable_keys(A, k, qdeg, budget):
            acc: dict = {}
            for w, c in _words(phi, key, wcache).items():
                for w2, d in _m_hat(A, w).items():
                    for h, e in _eval_F(psi, w2, f).items():
                        acc[h] = acc.get(h, 0) + c * d * e
            acc = {h: f.norm(c) for h, c in acc.items() if f.norm(c)}
            if acc:
                tab[key] = Element(f, {A.gen(h): c for h, c in acc.items()})
        if tab:
            ops[k] = tab
    B = CurvedCategory(name, f, A.objects, A.generators.values(), ops, dict(A.curvature), arity_cap=cap,
                       slack=A.slack, window=A.window)
    ident = {X: X for X in A.objects}
    Phi = CurvedFunctor(f"Phi_{name}", B, A, ident, {1: _identity_table(B), **phi}, arity_cap=cap)
    Psi = CurvedFunctor(f"Psi_{name}", A, B, ident, {1: _identity_table(A), **psi}, arity_cap=cap)
    out = Instance(B, qdeg, Q, inst.alpha, inst.b0, inst.pushes + [Psi])
    return out, Phi, Psi


def _identity_table(cat):
    f = cat.field
    return {(g.id,): Element._raw(f, {g: f(1)}) for g in cat.generators.values()}


def random_instance(seed: int, n_obj=None, field: Field = QQ, transports=1) -> tuple:
    """``(Instance, [(Phi, Psi), ...])`` after the requested number of random transports."""
    rng = random.Random(seed)
    n = n_obj if n_obj is not None else rng.choice((1, 1, 2))
    inst = random_curved(rng, n, field=field)
    maps = []
    for i in range(transports):
        phi = random_phi2(rng, inst)
        inst, Phi, Psi = transport(inst, phi, name=f"A{i + 2}")
        maps.append((Phi, Psi))
    return inst, maps, rng


# ---- cyclic modules ----------------------------------------------------------------

def planted_cyclic_module(seed: int, field: Field = QQ):
    """``(module, e, b_star)``: hom(X0, X1) in a random two-object category whose m1 on e
    is redefined so that the planted b_star solves the cyclic equation."""
    from .ainfcore import apply_m

    inst, _, rng = random_instance(seed, n_obj=2, field=field)
    A = inst.cat
    f = A.field
    P, Qo = "X0", "X1"
    e_gen = A.gen(_gid(P, Qo, 0, 0))
    terms = {e_gen: f(_coef(rng))}
    for g in A.hom(P, Qo):
        if g.degree == e_gen.degree and inst.qdeg[g.id] >= 1 and rng.random() < 0.5:
            accumulate(terms, g, f(_coef(rng)), f)
    e = Element._raw(f, terms)
    bterms = {}
    for g in _endo_deg1(A, inst.qdeg, Qo, inst.Q):
        if rng.random() < 0.8:
            accumulate(bterms, g, f(_coef(rng)), f)
    b_star = Element._raw(f, bterms)
    higher = Element.zero(f)
    for k in range(1, A.arity_cap):
        higher = higher + apply_m(A, k + 1, [b_star] * k + [e])
    for g, c in e.terms.items():
        if g != e_gen:
            higher = higher + apply_m(A, 1, [Element._raw(f, {g: 1})]).scale(c)
    new_m1 = higher.scale(-f.inv(e.terms[e_gen]))
    ops = {k: dict(t) for k, t in A.ops.items()}
    ops.setdefault(1, {})[(e_gen.id,)] = new_m1
    cat = CurvedCategory(f"cyc{seed}", f, A.objects, A.generators.values(), ops, dict(A.curvature),
                         arity_cap=A.arity_cap, slack=A.slack, window=A.window)
    mod = CurvedModule(f"M{seed}", cat, P, Qo)
    return mod, _rehome(e, cat), _rehome(b_star, cat)


def _rehome(e: Element, cat: CurvedCategory) -> Element:
    return Element._raw(cat.field, {cat.gen(g.id): c for g, c in e.terms.items()})


# ---- complexes -----------------------------------------------------------------------

def random_complex(rng: random.Random, field: Field = QQ, degrees=(-1, 0, 1, 2), max_pieces=3, name="C"):
    """Sum of random acyclic pairs and cohomology classes, in a scrambled basis."""
    gens, d = [], {}
    count = 0
    pieces = []
    for n in degrees:
        for _ in range(rng.randint(0, max_pieces)):
            kind = rng.choice(("class", "pair"))
            if kind == "pair" and n + 1 not in degrees:
                kind = "class"
            count += 1
            if kind == "class":
                pieces.append((f"{name}{count}", n))
            else:
                a, b = f"{name}{count}a", f"{name}{count}b"
                pieces.append((a, n))
                pieces.append((b, n + 1))
                d[a] = {b: field(1)}
    by_deg: dict = {}
    for gid, n in pieces:
        by_deg.setdefault(n, []).append(gid)
        gens.append((gid, n))
    # scramble: new basis vector i = old_i + sum_{j<i} a_ij old_j in each degree
    P: dict = {}
    for n, ids in by_deg.items():
        for i, x in enumerate(ids):
            P[x] = {x: field(1)}
            for y in ids[:i]:
                if rng.random() < 0.5:
                    P[x][y] = field(_coef(rng))
    Pinv = _unitriangular_inverse(P, by_deg, field)
    # d' = P^{-1} d P in the new basis
    dnew = {}
    for x, _ in gens:
        acc: dict = {}
        for y, c in P[x].items():
            for z, w in d.get(y, {}).items():
                for u, v in Pinv[z].items():
                    accumulate(acc, u, c * w * v, field)
        if acc:
            dnew[x] = acc
    return ChainComplex(name, field, gens, dnew)


def _unitriangular_inverse(P, by_deg, field):
    """Inverse of the basis change P (new_x = sum P[x][y] old_y), expressed as old_z = sum Pinv[z][u] new_u."""
    inv = {}
    for n, ids in by_deg.items():
        for i, x in enumerate(ids):
            # old_x = new_x - sum_{y<x} P[x][y] old_y
            acc = {x: field(1)}
            for y, c in P[x].items():
                if y == x:
                    continue
                for u, v in inv[y].items():
                    accumulate(acc, u, -c * v, field)
            inv[x] = acc
    return inv


def random_chain_map(rng: random.Random, A: ChainComplex, B: ChainComplex, name="f") -> ChainMap:
    """A random element of the space of chain maps A -> B (exact nullspace of d f - f d)."""
    F = A.field
    unknowns = [(x, y) for x in sorted(A.degree) for y in sorted(B.degree) if A.degree[x] == B.degree[y]]
    rows: dict = {}
    # coefficient of z in (d_B f - f d_A)(x), for every pair (x, z) with deg z = deg x + 1
    for x in sorted(A.degree):
        for y in sorted(B.degree):
            if B.degree[y] != A.degree[x]:
                continue
            for z, c in B.d.get(y, {}).items():
                accumulate(rows.setdefault((x, z), {}), (x, y), c, F)
        for w, c in A.d.get(x, {}).items():
            for z in sorted(B.degree):
                if B.degree[z] == A.degree[w]:
                    accumulate(rows.setdefault((x, z), {}), (w, z), -c, F)
    basis = nullspace(F, [r for r in rows.values() if r], unknowns)
    f: dict = {}
    for v in basis:
        a = F(_coef(rng, nonzero=False))
        if not a:
            continue
        for (x, y), c in v.items():
            f.setdefault(x, {})
            accumulate(f[x], y, a * c, F)
    return ChainMap(name, A, B, f)
