"""Exact scalars, graded filtered generators and sparse elements.

Scalars are plain Python numbers: ``int``/``Fraction`` over Q, reduced ``int``
over F_p.  An :class:`Element` is a finitely supported map from
:class:`Generator` to nonzero scalars.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import HomMismatchError, ValidationError


class _PlusInfinity:
    """Filtration level of the zero element; compares above every rational."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("+inf")

    def __repr__(self):
        return "+inf"


PLUS_INF = _PlusInfinity()


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or an integer into a Fraction."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational: {text!r}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class Field:
    """The rationals (``p == 0``) or the prime field F_p."""

    __slots__ = ("p",)

    def __init__(self, p: int = 0):
        if p != 0 and not _is_prime(p):
            raise ValidationError(f"F_p needs a prime, got {p}")
        self.p = p

    @classmethod
    def parse(cls, spec: str) -> "Field":
        """Accept ``Q``, ``Fp 7``, ``Fp:7`` or ``F7``."""
        s = spec.strip().replace(":", " ")
        if s in ("Q", "QQ"):
            return cls(0)
        parts = s.split()
        try:
            if parts[0] == "Fp" and len(parts) == 2:
                return cls(int(parts[1]))
            if len(parts) == 1 and parts[0].startswith("F"):
                return cls(int(parts[0][1:]))
        except ValueError:
            pass
        raise ValidationError(f"unknown field {spec!r}")

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def name(self) -> str:
        return "Q" if self.p == 0 else f"Fp {self.p}"

    def __repr__(self):
        return f"Field({self.name})"

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __call__(self, x):
        """Coerce an int, Fraction or ``p/q`` string into this field."""
        if isinstance(x, str):
            x = parse_rational(x)
        if self.p == 0:
            if isinstance(x, int):
                return x
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else x
        if isinstance(x, int):
            return x % self.p
        x = Fraction(x)
        den = x.denominator % self.p
        if den == 0:
            raise ValidationError(f"{x} has no image in F_{self.p}")
        return x.numerator * pow(den, -1, self.p) % self.p

    def norm(self, x):
        """Reduce the result of raw Python arithmetic to canonical form."""
        if self.p:
            return x % self.p
        if type(x) is Fraction and x.denominator == 1:
            return x.numerator
        return x

    def inv(self, x):
        if self.p:
            return pow(x, -1, self.p)
        return self.norm(Fraction(1) / x)

    def signed(self, x):
        """Representative used for printing; F_p values are shown in (-p/2, p/2]."""
        if self.p and x > self.p // 2:
            return x - self.p
        return x


QQ = Field(0)


@dataclass(frozen=True, eq=True, order=False)
class Generator:
    """Basis vector of the hom-space ``source -> target``.

    ``filtration`` is the level lambda with the generator in F^{>= lambda}.
    Hashing uses the id only; ids are unique within a workspace.
    """

    id: str
    source: str
    target: str
    degree: int
    filtration: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "filtration", Fraction(self.filtration))

    def __hash__(self):
        return hash(self.id)

    def __lt__(self, other):
        return self.id < other.id

    def __repr__(self):
        return self.id


class Element:
    """Finite exact combination of generators; zero coefficients are never stored.

    Treated as immutable: arithmetic returns new elements.
    """

    __slots__ = ("field", "terms")

    def __init__(self, field: Field, terms: Mapping[Generator, object] | None = None):
        self.field = field
        self.terms: dict = {}
        if terms:
            for g, c in terms.items():
                c = field(c)
                if c:
                    self.terms[g] = c

    @classmethod
    def _raw(cls, field, terms):
        # terms already normalized and zero-free
        e = cls.__new__(cls)
        e.field = field
        e.terms = terms
        return e

    @classmethod
    def zero(cls, field: Field = QQ) -> "Element":
        return cls._raw(field, {})

    @classmethod
    def of(cls, g: Generator, c=1, field: Field = QQ) -> "Element":
        return cls(field, {g: c})

    # container protocol
    def __iter__(self) -> Iterator[Generator]:
        return iter(self.sorted_terms_gens())

    def sorted_terms_gens(self):
        return sorted(self.terms, key=lambda g: g.id)

    def sorted_terms(self) -> list[tuple[Generator, object]]:
        """Canonical form: support sorted by generator id."""
        return [(g, self.terms[g]) for g in self.sorted_terms_gens()]

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, g: Generator):
        return self.terms.get(g, 0)

    @property
    def support(self) -> list[Generator]:
        return self.sorted_terms_gens()

    # arithmetic
    def __add__(self, other: "Element") -> "Element":
        f = self.field
        out = dict(self.terms)
        for g, c in other.terms.items():
            v = f.norm(out.get(g, 0) + c)
            if v:
                out[g] = v
            else:
                out.pop(g, None)
        return Element._raw(f, out)

    def __neg__(self) -> "Element":
        f = self.field
        return Element._raw(f, {g: f.norm(-c) for g, c in self.terms.items()})

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scale(self, c) -> "Element":
        f = self.field
        c = f(c)
        if not c:
            return Element._raw(f, {})
        return Element._raw(f, {g: f.norm(c * v) for g, v in self.terms.items()})

    def __rmul__(self, c) -> "Element":
        return self.scale(c)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, Element):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # grading / filtration
    @property
    def hom(self) -> tuple[str, str] | None:
        """Common (source, target) of the support, or None for zero or mixed support."""
        homs = {(g.source, g.target) for g in self.terms}
        return homs.pop() if len(homs) == 1 else None

    def is_homogeneous(self) -> bool:
        return len({g.degree for g in self.terms}) <= 1

    @property
    def degree(self) -> int | None:
        degs = {g.degree for g in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def filtration_level(self):
        return filtration_level(self)

    def component(self, level) -> "Element":
        """Part of the element supported on generators of filtration exactly ``level``."""
        return Element._raw(self.field, {g: c for g, c in self.terms.items() if g.filtration == level})

    def __str__(self):
        return format_combo(self)

    def __repr__(self):
        return f"Element({format_combo(self)})"


def filtration_level(e: Element):
    """Minimum filtration over the support; ``PLUS_INF`` for zero."""
    if not e.terms:
        return PLUS_INF
    return min(g.filtration for g in e.terms)


def linear_combine(pairs: Iterable[tuple[object, Element]], field: Field | None = None) -> Element:
    """Exact sparse sum of ``c * e`` over ``pairs``; all elements must share one hom-pair."""
    pairs = list(pairs)
    if field is None:
        field = pairs[0][1].field if pairs else QQ
    hom = None
    out: dict = {}
    for c, e in pairs:
        h = e.hom
        if e.terms and h is None:
            raise HomMismatchError(f"element {e} spans several hom-spaces")
        if h is not None:
            if hom is not None and h != hom:
                raise HomMismatchError(f"hom mismatch: {hom} vs {h}")
            hom = h
        c = field(c)
        for g, v in e.terms.items():
            out[g] = field.norm(out.get(g, 0) + c * v)
    return Element._raw(field, {g: v for g, v in out.items() if v})


def format_scalar(c, field: Field = QQ) -> str:
    c = field.signed(c)
    return format_rational(c)


def format_combo(e: Element) -> str:
    """Canonical text of an element, e.g. ``-x1 + 2*y21 + 1/2*z21``; ``0`` for zero."""
    if not e.terms:
        return "0"
    parts = []
    for i, (g, c) in enumerate(e.sorted_terms()):
        c = Fraction(e.field.signed(c))
        neg = c < 0
        a = -c if neg else c
        body = g.id if a == 1 else f"{format_rational(a)}*{g.id}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def accumulate(out: dict, g, c, field: Field) -> None:
    """In-place ``out[g] += c`` keeping the dict zero-free."""
    v = field.norm(out.get(g, 0) + c)
    if v:
        out[g] = v
    else:
        out.pop(g, None)
