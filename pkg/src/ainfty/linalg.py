"""Exact sparse Gaussian elimination over a Field.

Vectors are dicts ``index -> nonzero scalar``; matrices are lists of row
vectors.  Everything stays exact.
"""
from __future__ import annotations

from .basedmod import Field


def _axpy(f: Field, y: dict, a, x: dict) -> dict:
    """Return ``y + a*x`` as a new zero-free dict."""
    out = dict(y)
    for i, v in x.items():
        w = f.norm(out.get(i, 0) + a * v)
        if w:
            out[i] = w
        else:
            out.pop(i, None)
    return out


def _scale(f: Field, a, x: dict) -> dict:
    return {i: f.norm(a * v) for i, v in x.items()}


class Echelon:
    """Incrementally built reduced row basis keyed by pivot column.

    ``reduce(v)`` returns the remainder of v modulo the span together with
    the combination of inserted vectors that was subtracted, so membership
    tests also produce certificates.
    """

    def __init__(self, f: Field, track: bool = False):
        self.f = f
        self.rows: dict = {}      # pivot -> row with row[pivot] == 1
        self.combos: dict = {}    # pivot -> combination of original inputs
        self.track = track
        self.count = 0

    def reduce(self, v: dict):
        # rows are fully reduced, so one pass over the pivots present in v suffices
        f = self.f
        combo: dict = {}
        v = dict(v)
        for piv in [c for c in v if c in self.rows]:
            a = v.get(piv)
            if not a:
                continue
            v = _axpy(f, v, f.norm(-a), self.rows[piv])
            if self.track:
                combo = _axpy(f, combo, f.norm(-a), self.combos[piv])
        return v, combo

    def add(self, v: dict) -> bool:
        """Insert v; returns True when it was independent of the current span."""
        f = self.f
        tag = self.count
        self.count += 1
        rem, combo = self.reduce(v)
        if not rem:
            return False
        piv = min(rem, key=_order)
        inv = f.inv(rem[piv])
        row = _scale(f, inv, rem)
        if self.track:
            combo = _axpy(f, combo, 1, {tag: 1})
            combo = _scale(f, inv, combo)
        # keep rows fully reduced at the new pivot
        for p, r in list(self.rows.items()):
            a = r.get(piv)
            if a:
                self.rows[p] = _axpy(f, r, f.norm(-a), row)
                if self.track:
                    self.combos[p] = _axpy(f, self.combos[p], f.norm(-a), combo)
        self.rows[piv] = row
        if self.track:
            self.combos[piv] = combo
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def _order(c):
    return (type(c).__name__, c)


def rank(f: Field, rows) -> int:
    ech = Echelon(f)
    for r in rows:
        ech.add(r)
    return ech.rank


def nullspace(f: Field, rows, ncols) -> list[dict]:
    """Basis of ``{v : M v = 0}`` for the matrix with the given rows over columns ``ncols``.

    ``ncols`` is an ordered iterable of column indices.
    """
    cols = list(ncols)
    ech = Echelon(f)
    for r in rows:
        ech.add(r)
    pivots = set(ech.rows)
    basis = []
    for c in cols:
        if c in pivots:
            continue
        v = {c: 1}
        for p, row in ech.rows.items():
            a = row.get(c)
            if a:
                v[p] = f.norm(-a)
        basis.append(v)
    return basis


def in_span(f: Field, vectors, v: dict):
    """Coefficients expressing v in terms of ``vectors``, or None when v is outside their span."""
    ech = Echelon(f, track=True)
    for x in vectors:
        ech.add(x)
    rem, combo = ech.reduce(v)
    if rem:
        return None
    return {i: f.norm(-c) for i, c in combo.items()}


def solve_square(f: Field, cols: list[list], rhs: list):
    """Unique solution x of ``sum_j x_j cols[j] = rhs``; None if the matrix is singular."""
    n = len(cols)
    if any(len(c) != n for c in cols) or len(rhs) != n:
        return None
    vecs = [{i: v for i, v in enumerate(c) if v} for c in cols]
    ech = Echelon(f, track=True)
    for v in vecs:
        if not ech.add(v):
            return None
    target = {i: v for i, v in enumerate(rhs) if v}
    rem, combo = ech.reduce(target)
    if rem:
        return None
    x = [0] * n
    for j, c in combo.items():
        x[j] = f.norm(-c)
    return x
