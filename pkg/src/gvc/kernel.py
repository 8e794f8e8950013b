"""Exact graded-commutative polynomial algebra in jet variables.

Expressions are polynomials with rational coefficients in even and odd
jet variables.  A monomial is stored as a sorted tuple of ``JetVar``
values, with repetition standing for powers of even variables.  Every
expression is tied to a :class:`Signature`, the ordered table of symbol
declarations that fixes parities, gradings and the canonical order.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

from .errors import GradingMismatch, ParityMismatch, UndeclaredSymbol


class Parity(IntEnum):
    EVEN = 0
    ODD = 1

    def __add__(self, other):  # mod-2 sum
        return Parity((int(self) + int(other)) % 2)

    __radd__ = __add__


class Role(str, Enum):
    BASE = "base-coordinate"
    FIELD = "field"
    GHOST = "ghost"
    NOETHER_ANTIFIELD = "noether-antifield"
    FIELD_ANTIFIELD = "field-antifield"
    CONSTANT = "constant"


ANTIFIELD_ROLES = (Role.NOETHER_ANTIFIELD, Role.FIELD_ANTIFIELD)


@dataclass(frozen=True)
class SymbolDecl:
    """One scalar symbol.  Gradings left as ``None`` are derived from role and stage.

    ``partner`` names the field or ghost an antifield is paired with.
    """

    name: str
    role: Role
    parity: Parity = Parity.EVEN
    stage: int = -1
    ghost_number: int | None = None
    antifield_number: int | None = None
    partner: str | None = None
    base_index: int | None = None

    def __post_init__(self):
        role = Role(self.role)
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "parity", Parity(int(self.parity)))
        gh = {Role.GHOST: self.stage + 1}.get(role, 0)
        af = {Role.FIELD_ANTIFIELD: 1, Role.NOETHER_ANTIFIELD: self.stage + 2}.get(role, 0)
        if self.ghost_number is None:
            object.__setattr__(self, "ghost_number", gh)
        if self.antifield_number is None:
            object.__setattr__(self, "antifield_number", af)
        self._validate(gh, af)

    def _validate(self, gh: int, af: int) -> None:
        role, where = self.role, f"symbol {self.name!r}"
        if self.stage < -1:
            raise GradingMismatch(f"{where}: stage must be >= -1")
        if role in (Role.BASE, Role.CONSTANT) and self.parity is Parity.ODD:
            raise GradingMismatch(f"{where}: {role.value} symbols are even")
        if role in (Role.GHOST, Role.NOETHER_ANTIFIELD) and self.stage < 0:
            raise GradingMismatch(f"{where}: {role.value} needs a stage >= 0")
        if role in (Role.FIELD, Role.FIELD_ANTIFIELD, Role.BASE, Role.CONSTANT) and self.stage != -1:
            raise GradingMismatch(f"{where}: {role.value} has stage -1")
        if self.ghost_number != gh or self.antifield_number != af:
            raise GradingMismatch(
                f"{where}: gradings (gh={self.ghost_number}, af={self.antifield_number}) "
                f"disagree with role {role.value} at stage {self.stage} (expected gh={gh}, af={af})"
            )
        if role is Role.BASE and self.base_index is None:
            raise GradingMismatch(f"{where}: base coordinate without an index")
        if role in ANTIFIELD_ROLES and self.partner is None:
            raise GradingMismatch(f"{where}: antifield without a partner")

    @property
    def jet_free(self) -> bool:
        return self.role in (Role.BASE, Role.CONSTANT)


MultiIndex = tuple  # sorted tuple of base indices


def multi_index(*indices: int) -> MultiIndex:
    return tuple(sorted(indices))


class JetVar(NamedTuple):
    """Symbol number (position in the signature) plus sorted multi-index."""

    sym: int
    mi: tuple = ()


Monomial_t = tuple  # sorted tuple of JetVar


@dataclass(frozen=True)
class Monomial:
    """Public view of one term: coefficient and (JetVar, exponent) pairs."""

    coefficient: Fraction
    factors: tuple


Scalar = Union[int, Fraction]


class Signature:
    """Ordered, immutable table of symbol declarations over an n-dimensional base.

    Base coordinates ``x0 .. x{n-1}`` are always the first n symbols.
    """

    __slots__ = ("dim", "symbols", "_index", "odd", "_hash")

    def __init__(self, dim: int, symbols: Iterable[SymbolDecl] = ()):
        base = [SymbolDecl(f"x{i}", Role.BASE, base_index=i) for i in range(dim)]
        decls = tuple(base) + tuple(s for s in symbols if s.role is not Role.BASE)
        index: dict[str, int] = {}
        for i, d in enumerate(decls):
            if d.name in index:
                raise GradingMismatch(f"duplicate symbol {d.name!r}")
            index[d.name] = i
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "symbols", decls)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "odd", tuple(d.parity is Parity.ODD for d in decls))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, key, value):
        raise AttributeError("Signature is immutable")

    def __eq__(self, other):
        return isinstance(other, Signature) and self.dim == other.dim and self.symbols == other.symbols

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.dim, self.symbols)))
        return self._hash

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UndeclaredSymbol(f"undeclared symbol {name!r}") from None

    def decl(self, ref: Union[str, int, JetVar]) -> SymbolDecl:
        if isinstance(ref, str):
            return self.symbols[self.index(ref)]
        if isinstance(ref, JetVar):
            ref = ref.sym
        return self.symbols[ref]

    def extended(self, extra: Iterable[SymbolDecl]) -> "Signature":
        """A new signature with ``extra`` appended (existing numbering unchanged)."""
        return Signature(self.dim, self.symbols[self.dim:] + tuple(extra))

    def jet(self, name: str, *mi: int) -> JetVar:
        i = self.index(name)
        if mi and self.symbols[i].jet_free:
            raise UndeclaredSymbol(f"{name!r} carries no jets")
        return JetVar(i, tuple(sorted(mi)))

    def var(self, name: str, *mi: int) -> "GradedExpr":
        return GradedExpr(self, {(self.jet(name, *mi),): Fraction(1)})

    def x(self, i: int) -> "GradedExpr":
        return GradedExpr(self, {(JetVar(i, ()),): Fraction(1)})

    def const(self, q: Scalar) -> "GradedExpr":
        q = Fraction(q)
        return GradedExpr(self, {(): q} if q else {})

    @property
    def zero(self) -> "GradedExpr":
        return GradedExpr(self, {})

    def names(self, role: Role | None = None) -> list[str]:
        return [d.name for d in self.symbols if role is None or d.role is role]

    def dynamic_indices(self) -> list[int]:
        """Symbol numbers of every non-constant, non-base symbol."""
        return [i for i, d in enumerate(self.symbols) if not d.jet_free]

    def jetvar_name(self, v: JetVar) -> str:
        name = self.symbols[v.sym].name
        if not v.mi:
            return name
        if all(i < 10 for i in v.mi):
            return f"{name}_{''.join(map(str, v.mi))}"
        return f"{name}_{{{','.join(map(str, v.mi))}}}"


# --- monomial level helpers -------------------------------------------------


def canon(odd: Sequence[bool], factors: Sequence[JetVar]) -> tuple[int, Monomial_t]:
    """Sort factors into canonical order; return (sign, monomial) with sign 0 on an odd square."""
    oddf = [f for f in factors if odd[f.sym]]
    sign = 1
    if len(oddf) > 1:
        for i in range(len(oddf)):
            a = oddf[i]
            for j in range(i + 1, len(oddf)):
                b = oddf[j]
                if a == b:
                    return 0, ()
                if b < a:
                    sign = -sign
    return sign, tuple(sorted(factors))


def mono_mul(odd: Sequence[bool], m1: Monomial_t, m2: Monomial_t) -> tuple[int, Monomial_t]:
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    o1 = [f for f in m1 if odd[f.sym]]
    sign = 1
    if o1:
        o2 = [f for f in m2 if odd[f.sym]]
        if o2:
            n1 = len(o1)
            swaps = 0
            for b in o2:
                k = bisect_right(o1, b)
                if k and o1[k - 1] == b:
                    return 0, ()
                swaps += n1 - k
            if swaps & 1:
                sign = -1
    return sign, tuple(sorted(m1 + m2))


def _coerce(sig: Signature, x) -> "GradedExpr":
    if isinstance(x, GradedExpr):
        if x.sig is not sig and x.sig != sig:
            raise UndeclaredSymbol("expressions over different signatures")
        return x
    if isinstance(x, (int, Fraction)):
        return sig.const(x)
    raise TypeError(f"cannot combine GradedExpr with {type(x).__name__}")


class GradedExpr:
    """Canonical polynomial: mapping from sorted monomials to nonzero rationals."""

    __slots__ = ("sig", "terms", "_hash")

    def __init__(self, sig: Signature, terms: Mapping[Monomial_t, Fraction]):
        self.sig = sig
        self.terms = terms  # treated as read-only
        self._hash = None

    # construction
    @classmethod
    def from_raw(cls, sig: Signature, raw: Iterable[tuple[Scalar, Sequence[JetVar]]]) -> "GradedExpr":
        return normalize(sig, raw)

    # inspection
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Monomial_t, Fraction]]:
        return iter(sorted(self.terms.items()))

    def monomials(self) -> list[Monomial]:
        out = []
        for m, c in self:
            pairs: list[tuple[JetVar, int]] = []
            for f in m:
                if pairs and pairs[-1][0] == f:
                    pairs[-1] = (f, pairs[-1][1] + 1)
                else:
                    pairs.append((f, 1))
            out.append(Monomial(c, tuple(pairs)))
        return out

    def mono_parity(self, m: Monomial_t) -> int:
        odd = self.sig.odd
        return sum(1 for f in m if odd[f.sym]) & 1

    def parity(self) -> Parity | None:
        """Parity of a homogeneous expression; ``None`` for mixed.  Zero is even."""
        ps = {self.mono_parity(m) for m in self.terms}
        if len(ps) > 1:
            return None
        return Parity(ps.pop()) if ps else Parity.EVEN

    def split_parity(self) -> tuple["GradedExpr", "GradedExpr"]:
        ev, od = {}, {}
        for m, c in self.terms.items():
            (od if self.mono_parity(m) else ev)[m] = c
        return GradedExpr(self.sig, ev), GradedExpr(self.sig, od)

    def ghost_numbers(self) -> set[int]:
        s = self.sig.symbols
        return {sum(s[f.sym].ghost_number for f in m) for m in self.terms}

    def antifield_numbers(self) -> set[int]:
        s = self.sig.symbols
        return {sum(s[f.sym].antifield_number for f in m) for m in self.terms}

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def jet_order(self) -> int:
        return max((len(f.mi) for m in self.terms for f in m), default=0)

    def variables(self) -> set[JetVar]:
        return {f for m in self.terms for f in m}

    def symbols_used(self) -> set[int]:
        return {f.sym for m in self.terms for f in m}

    def coefficient(self, monomial: Sequence[JetVar]) -> Fraction:
        sign, m = canon(self.sig.odd, list(monomial))
        return sign * self.terms.get(m, Fraction(0)) if sign else Fraction(0)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    # arithmetic
    def __add__(self, other) -> "GradedExpr":
        other = _coerce(self.sig, other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return GradedExpr(self.sig, out)

    __radd__ = __add__

    def __neg__(self) -> "GradedExpr":
        return GradedExpr(self.sig, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "GradedExpr":
        return self + (-_coerce(self.sig, other))

    def __rsub__(self, other) -> "GradedExpr":
        return _coerce(self.sig, other) - self

    def scale(self, q: Scalar) -> "GradedExpr":
        q = Fraction(q)
        if not q:
            return self.sig.zero
        return GradedExpr(self.sig, {m: c * q for m, c in self.terms.items()})

    def __mul__(self, other) -> "GradedExpr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return mul(self, _coerce(self.sig, other))

    def __rmul__(self, other) -> "GradedExpr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return mul(_coerce(self.sig, other), self)

    def __truediv__(self, q: Scalar) -> "GradedExpr":
        return self.scale(Fraction(1) / Fraction(q))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.sig.const(other)
        if not isinstance(other, GradedExpr):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"GradedExpr({self})"

    def __str__(self):
        return to_string(self)


def to_string(e: GradedExpr) -> str:
    if not e.terms:
        return "0"
    parts = []
    for m, c in e:
        names = []
        i = 0
        while i < len(m):
            j = i
            while j < len(m) and m[j] == m[i]:
                j += 1
            nm = e.sig.jetvar_name(m[i])
            names.append(nm if j - i == 1 else f"{nm}^{j - i}")
            i = j
        mag = abs(c)
        body = "*".join(names)
        if not body:
            txt = str(mag)
        elif mag == 1:
            txt = body
        else:
            txt = f"{mag}*{body}"
        parts.append(("- " if c < 0 else "+ ") + txt)
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


def normalize(sig: Signature, raw: Iterable[tuple[Scalar, Sequence[JetVar]]]) -> GradedExpr:
    """Build a canonical expression from (coefficient, factor list) pairs."""
    n = len(sig.symbols)
    out: dict[Monomial_t, Fraction] = {}
    for coef, factors in raw:
        factors = list(factors)
        for f in factors:
            if not isinstance(f, JetVar) or not 0 <= f.sym < n:
                raise UndeclaredSymbol(f"factor {f!r} references no declaration")
            if f.mi and sig.symbols[f.sym].jet_free:
                raise UndeclaredSymbol(f"{sig.symbols[f.sym].name!r} carries no jets")
        factors = [JetVar(f.sym, tuple(sorted(f.mi))) for f in factors]
        sign, m = canon(sig.odd, factors)
        if not sign or not coef:
            continue
        v = out.get(m, 0) + sign * Fraction(coef)
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return GradedExpr(sig, out)


def mul(a: GradedExpr, b: GradedExpr) -> GradedExpr:
    if not a.terms or not b.terms:
        return a.sig.zero
    odd = a.sig.odd
    out: dict[Monomial_t, Fraction] = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            s, m = mono_mul(odd, m1, m2)
            if not s:
                continue
            v = out.get(m, 0) + (c1 * c2 if s > 0 else -c1 * c2)
            if v:
                out[m] = v
            else:
                del out[m]
    return GradedExpr(a.sig, out)


def add_into(acc: dict, e_terms: Mapping, scale: Fraction = Fraction(1)) -> None:
    """In-place accumulation helper used by the hot loops of other modules."""
    for m, c in e_terms.items():
        v = acc.get(m, 0) + c * scale
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)


def linear_combination(sig: Signature, items: Iterable[tuple[Scalar, GradedExpr]]) -> GradedExpr:
    acc: dict = {}
    for q, e in items:
        if q:
            add_into(acc, e.terms, Fraction(q))
    return GradedExpr(sig, acc)


def expr_sum(sig: Signature, exprs: Iterable[GradedExpr]) -> GradedExpr:
    acc: dict = {}
    for e in exprs:
        add_into(acc, e.terms)
    return GradedExpr(sig, acc)


def monomial_expr(sig: Signature, m: Monomial_t, c: Scalar = 1) -> GradedExpr:
    return GradedExpr(sig, {m: Fraction(c)} if c else {})


def substitute(e: GradedExpr, bindings: Mapping[JetVar, GradedExpr]) -> GradedExpr:
    """Simultaneous replacement of jet variables, then normalization."""
    sig = e.sig
    for k, v in bindings.items():
        vp = v.parity()
        if vp is None or (v.terms and int(vp) != int(sig.odd[k.sym])):
            raise ParityMismatch(
                f"binding for {sig.jetvar_name(k)} has parity {vp}, expected {int(sig.odd[k.sym])}"
            )
    acc: dict = {}
    for m, c in e.terms.items():
        if not any(f in bindings for f in m):
            add_into(acc, {m: c})
            continue
        prod = sig.const(c)
        for f in m:
            prod = mul(prod, bindings[f] if f in bindings else GradedExpr(sig, {(f,): Fraction(1)}))
            if not prod.terms:
                break
        add_into(acc, prod.terms)
    return GradedExpr(sig, acc)


def partial_derivative(e: GradedExpr, v: JetVar, side: str = "left") -> GradedExpr:
    """Graded partial derivative by a jet variable, acting from the left or the right."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    odd = e.sig.odd
    v = JetVar(v.sym, tuple(sorted(v.mi)))
    vodd = odd[v.sym]
    out: dict[Monomial_t, Fraction] = {}
    for m, c in e.terms.items():
        if v not in m:
            continue
        i = m.index(v)
        if vodd:
            if side == "left":
                k = sum(1 for f in m[:i] if odd[f.sym])
            else:
                k = sum(1 for f in m[i + 1:] if odd[f.sym])
            coef = -c if k & 1 else c
        else:
            coef = c * m.count(v)
        nm = m[:i] + m[i + 1:]
        val = out.get(nm, 0) + coef
        if val:
            out[nm] = val
        else:
            out.pop(nm, None)
    return GradedExpr(e.sig, out)


def grading_filter(e: GradedExpr, predicate) -> GradedExpr:
    """Keep the monomials for which ``predicate(monomial)`` holds."""
    return GradedExpr(e.sig, {m: c for m, c in e.terms.items() if predicate(m)})


def ghost_degree(sig: Signature, m: Monomial_t) -> int:
    """Number of ghost factors in a monomial."""
    s = sig.symbols
    return sum(1 for f in m if s[f.sym].role is Role.GHOST)
