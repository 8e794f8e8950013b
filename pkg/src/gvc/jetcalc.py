"""Jet calculus: total derivatives, horizontal and vertical differentials,
one-contact forms and prolonged graded derivations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import DegreeOverflow, GradingMismatch
from .kernel import (
    GradedExpr,
    JetVar,
    Parity,
    Role,
    Signature,
    add_into,
    canon,
    mono_mul,
    partial_derivative,
)


def total_derivative(e: GradedExpr, lam: int) -> GradedExpr:
    """d_lam e.  Each jet s_L becomes s_{lam+L}; the base coordinate x^lam differentiates to 1."""
    sig = e.sig
    syms, odd = sig.symbols, sig.odd
    out: dict = {}
    for m, c in e.terms.items():
        for i, f in enumerate(m):
            d = syms[f.sym]
            if d.role is Role.BASE:
                if d.base_index != lam:
                    continue
                nm, s = m[:i] + m[i + 1:], 1
            elif d.role is Role.CONSTANT:
                continue
            else:
                g = JetVar(f.sym, tuple(sorted(f.mi + (lam,))))
                s, nm = canon(odd, list(m[:i]) + [g] + list(m[i + 1:]))
                if not s:
                    continue
            v = out.get(nm, 0) + (c if s > 0 else -c)
            if v:
                out[nm] = v
            else:
                out.pop(nm, None)
    return GradedExpr(sig, out)


def total_derivative_multi(e: GradedExpr, mi) -> GradedExpr:
    for lam in mi:
        if not e.terms:
            break
        e = total_derivative(e, lam)
    return e


def _insert_sign(lam: int, subset: tuple) -> tuple[int, tuple] | None:
    """dx^lam ^ dx^I = sign * dx^J with J sorted; None if lam is in I."""
    if lam in subset:
        return None
    k = sum(1 for i in subset if i < lam)
    return (-1 if k & 1 else 1), tuple(sorted(subset + (lam,)))


@dataclass(frozen=True)
class HForm:
    """Horizontal k-form  sum_I f_I dx^I  with sorted index sets I."""

    sig: Signature
    degree: int
    components: Mapping[tuple, GradedExpr] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for I, f in self.components.items():
            if len(I) != self.degree or list(I) != sorted(set(I)):
                raise ValueError(f"bad index set {I} for degree {self.degree}")
            if f.terms:
                clean[tuple(I)] = f
        object.__setattr__(self, "components", clean)

    @classmethod
    def density(cls, L: GradedExpr) -> "HForm":
        n = L.sig.dim
        return cls(L.sig, n, {tuple(range(n)): L})

    @classmethod
    def scalar(cls, f: GradedExpr) -> "HForm":
        return cls(f.sig, 0, {(): f})

    @classmethod
    def current(cls, J: Mapping[int, GradedExpr]) -> "HForm":
        """J^mu omega_mu, with omega_mu = (-1)^mu dx^0..(mu omitted)..dx^{n-1}."""
        sig = next(iter(J.values())).sig
        n = sig.dim
        comps = {}
        for mu, f in J.items():
            I = tuple(i for i in range(n) if i != mu)
            comps[I] = f if mu % 2 == 0 else -f
        return cls(sig, n - 1, comps)

    def to_current(self) -> dict[int, GradedExpr]:
        n = self.sig.dim
        if self.degree != n - 1:
            raise ValueError("not an (n-1)-form")
        out = {}
        for mu in range(n):
            I = tuple(i for i in range(n) if i != mu)
            f = self.components.get(I, self.sig.zero)
            out[mu] = f if mu % 2 == 0 else -f
        return out

    def coefficient(self, I=None) -> GradedExpr:
        if I is None:
            I = tuple(range(self.degree)) if self.degree == self.sig.dim else None
        return self.components.get(tuple(I), self.sig.zero)

    def __add__(self, other: "HForm") -> "HForm":
        assert self.degree == other.degree
        comps = dict(self.components)
        for I, f in other.components.items():
            comps[I] = comps[I] + f if I in comps else f
        return HForm(self.sig, self.degree, comps)

    def __neg__(self):
        return HForm(self.sig, self.degree, {I: -f for I, f in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other):
        return (
            isinstance(other, HForm)
            and self.degree == other.degree
            and dict(self.components) == dict(other.components)
        )

    def __str__(self):
        if not self.components:
            return "0"
        parts = []
        for I in sorted(self.components):
            dx = "^".join(f"dx{i}" for i in I)
            parts.append(f"({self.components[I]})" + (f" {dx}" if dx else ""))
        return " + ".join(parts)


def dH(w: HForm) -> HForm:
    n = w.sig.dim
    if w.degree >= n:
        raise DegreeOverflow("dH of a top-degree form")
    acc: dict[tuple, dict] = {}
    for I, f in w.components.items():
        for lam in range(n):
            ins = _insert_sign(lam, I)
            if ins is None:
                continue
            s, J = ins
            add_into(acc.setdefault(J, {}), total_derivative(f, lam).terms, Fraction(s))
    return HForm(w.sig, w.degree + 1, {J: GradedExpr(w.sig, t) for J, t in acc.items()})


@dataclass(frozen=True)
class ContactHForm:
    """One-contact form  sum theta^A_L ^ f dx^I, keyed by (symbol number, multi-index, I)."""

    sig: Signature
    degree: int
    components: Mapping[tuple, GradedExpr] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, f in self.components.items():
            sym, mi, I = key
            if self.sig.symbols[sym].jet_free:
                raise ValueError("contact forms are built on dynamic symbols only")
            if len(I) != self.degree:
                raise ValueError("bad horizontal degree")
            if f.terms:
                clean[(sym, tuple(sorted(mi)), tuple(I))] = f
        object.__setattr__(self, "components", clean)

    def __add__(self, other: "ContactHForm") -> "ContactHForm":
        assert self.degree == other.degree
        comps = dict(self.components)
        for k, f in other.components.items():
            comps[k] = comps[k] + f if k in comps else f
        return ContactHForm(self.sig, self.degree, comps)

    def __neg__(self):
        return ContactHForm(self.sig, self.degree, {k: -f for k, f in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other):
        return (
            isinstance(other, ContactHForm)
            and self.degree == other.degree
            and dict(self.components) == dict(other.components)
        )

    def __str__(self):
        if not self.components:
            return "0"
        parts = []
        for key in sorted(self.components):
            sym, mi, I = key
            th = "theta[" + self.sig.jetvar_name(JetVar(sym, mi)) + "]"
            dx = "".join(f"^dx{i}" for i in I)
            parts.append(f"{th}^({self.components[key]}){dx}")
        return " + ".join(parts)


def dV(w: HForm) -> ContactHForm:
    """Vertical differential  theta^A_L ^ (left d/ds^A_L f) dx^I."""
    comps: dict = {}
    syms = w.sig.symbols
    for I, f in w.components.items():
        for v in sorted(f.variables()):
            if syms[v.sym].jet_free:
                continue
            comps[(v.sym, v.mi, I)] = partial_derivative(f, v, "left")
    return ContactHForm(w.sig, w.degree, comps)


def dH_contact(w: ContactHForm) -> ContactHForm:
    """dH(theta_L ^ f dx^I) = -(theta_{lam+L} f + theta_L d_lam f) dx^lam ^ dx^I."""
    n = w.sig.dim
    if w.degree >= n:
        raise DegreeOverflow("dH of a top-degree contact form")
    acc: dict = {}
    for (sym, mi, I), f in w.components.items():
        for lam in range(n):
            ins = _insert_sign(lam, I)
            if ins is None:
                continue
            s, J = ins
            k1 = (sym, tuple(sorted(mi + (lam,))), J)
            add_into(acc.setdefault(k1, {}), f.terms, Fraction(-s))
            k2 = (sym, mi, J)
            add_into(acc.setdefault(k2, {}), total_derivative(f, lam).terms, Fraction(-s))
    return ContactHForm(w.sig, w.degree + 1, {k: GradedExpr(w.sig, t) for k, t in acc.items()})


# --- graded derivations ------------------------------------------------------


@dataclass(frozen=True)
class GradedDerivation:
    """Generalized vector field  v^lam d_lam + v^A d_A  (components on the left).

    ``vertical`` maps symbol numbers to components; absent symbols have component 0.
    """

    sig: Signature
    horizontal: Mapping[int, GradedExpr] = field(default_factory=dict)
    vertical: Mapping[int, GradedExpr] = field(default_factory=dict)
    parity: Parity | None = None
    ghost_number: int | None = None

    def __post_init__(self):
        h = {k: v for k, v in self.horizontal.items() if v.terms}
        vv = {k: v for k, v in self.vertical.items() if v.terms}
        object.__setattr__(self, "horizontal", h)
        object.__setattr__(self, "vertical", vv)
        syms = self.sig.symbols
        ps, ghs = set(), set()
        for lam, e in h.items():
            p = e.parity()
            ps.add(None if p is None else int(p))
            ghs |= e.ghost_numbers()
        for a, e in vv.items():
            if syms[a].jet_free:
                raise GradingMismatch(f"component on jet-free symbol {syms[a].name}")
            p = e.parity()
            ps.add(None if p is None else (int(p) + int(syms[a].parity)) % 2)
            ghs |= {g - syms[a].ghost_number for g in e.ghost_numbers()}
        if None in ps or len(ps) > 1:
            raise GradingMismatch("derivation components are not parity-homogeneous")
        inferred = Parity(ps.pop()) if ps else (self.parity if self.parity is not None else Parity.EVEN)
        if self.parity is not None and Parity(int(self.parity)) != inferred:
            raise GradingMismatch(f"declared parity {self.parity} but components are {inferred}")
        object.__setattr__(self, "parity", inferred)
        if self.ghost_number is None and len(ghs) == 1:
            object.__setattr__(self, "ghost_number", ghs.pop())
        elif self.ghost_number is None:
            object.__setattr__(self, "ghost_number", 0 if not ghs else None)

    @classmethod
    def by_name(cls, sig: Signature, vertical: Mapping[str, GradedExpr] = None,
                horizontal: Mapping[int, GradedExpr] = None, **kw) -> "GradedDerivation":
        v = {sig.index(k): e for k, e in (vertical or {}).items()}
        return cls(sig, dict(horizontal or {}), v, **kw)

    @property
    def is_vertical(self) -> bool:
        return not self.horizontal

    def component(self, sym: int) -> GradedExpr:
        return self.vertical.get(sym, self.sig.zero)

    def vertical_part(self) -> "GradedDerivation":
        """The derivation with components v^A - s^A_mu v^mu."""
        if not self.horizontal:
            return self
        sig = self.sig
        comps = {}
        for a in sig.dynamic_indices():
            acc = dict(self.vertical.get(a, sig.zero).terms)
            for mu, vmu in self.horizontal.items():
                add_into(acc, (GradedExpr(sig, {(JetVar(a, (mu,)),): Fraction(1)}) * vmu).terms, Fraction(-1))
            comps[a] = GradedExpr(sig, acc)
        return GradedDerivation(sig, {}, comps, parity=self.parity)

    def __add__(self, other: "GradedDerivation") -> "GradedDerivation":
        h = dict(self.horizontal)
        for k, e in other.horizontal.items():
            h[k] = h[k] + e if k in h else e
        v = dict(self.vertical)
        for k, e in other.vertical.items():
            v[k] = v[k] + e if k in v else e
        return GradedDerivation(self.sig, h, v)

    def __eq__(self, other):
        return (
            isinstance(other, GradedDerivation)
            and dict(self.horizontal) == dict(other.horizontal)
            and dict(self.vertical) == dict(other.vertical)
        )

    def __str__(self):
        parts = [f"({e}) d_{lam}" for lam, e in sorted(self.horizontal.items())]
        parts += [f"({e}) d/d{self.sig.symbols[a].name}" for a, e in sorted(self.vertical.items())]
        return " + ".join(parts) if parts else "0"


class Prolongation:
    """Memoized action of the infinite-order prolongation of a derivation."""

    def __init__(self, u: GradedDerivation):
        self.u = u
        self.sig = u.sig
        self.vpart = u.vertical_part()
        self._jets: dict[tuple, GradedExpr] = {}
        self._images: dict[JetVar, GradedExpr] = {}

    def _djet(self, sym: int, mi: tuple) -> GradedExpr:
        key = (sym, mi)
        if key not in self._jets:
            if not mi:
                e = self.vpart.component(sym)
            else:
                e = total_derivative(self._djet(sym, mi[:-1]), mi[-1])
            self._jets[key] = e
        return self._jets[key]

    def image(self, v: JetVar) -> GradedExpr:
        if v in self._images:
            return self._images[v]
        sig = self.sig
        d = sig.symbols[v.sym]
        if d.role is Role.BASE:
            e = self.u.horizontal.get(d.base_index, sig.zero)
        elif d.role is Role.CONSTANT:
            e = sig.zero
        else:
            e = self._djet(v.sym, v.mi)
            if self.u.horizontal:
                acc = dict(e.terms)
                for lam, ul in self.u.horizontal.items():
                    s = GradedExpr(sig, {(JetVar(v.sym, tuple(sorted(v.mi + (lam,)))),): Fraction(1)})
                    add_into(acc, mul_expr(ul, s).terms)
                e = GradedExpr(sig, acc)
        self._images[v] = e
        return e

    def __call__(self, e: GradedExpr) -> GradedExpr:
        odd = self.sig.odd
        p = int(self.u.parity)
        out: dict = {}
        for m, c in e.terms.items():
            nodd = 0
            for i, f in enumerate(m):
                img = self.image(f)
                if img.terms:
                    sign = -1 if (p and nodd & 1) else 1
                    pre, post = m[:i], m[i + 1:]
                    for t, ct in img.terms.items():
                        s1, m1 = mono_mul(odd, pre, t)
                        if not s1:
                            continue
                        s2, m2 = mono_mul(odd, m1, post)
                        if not s2:
                            continue
                        v = out.get(m2, 0) + c * ct * (sign * s1 * s2)
                        if v:
                            out[m2] = v
                        else:
                            out.pop(m2, None)
                if odd[f.sym]:
                    nodd += 1
        return GradedExpr(self.sig, out)


def mul_expr(a: GradedExpr, b: GradedExpr) -> GradedExpr:
    return a * b


def prolong_apply(u: GradedDerivation, e: GradedExpr) -> GradedExpr:
    return Prolongation(u)(e)


def superbracket(u1: GradedDerivation, u2: GradedDerivation) -> GradedDerivation:
    """[u1,u2] = u1 u2 - (-1)^{[u1][u2]} u2 u1, evaluated on the generators x^lam and s^A."""
    sig = u1.sig
    P1, P2 = Prolongation(u1), Prolongation(u2)
    sign = -1 if (int(u1.parity) and int(u2.parity)) else 1
    horiz, vert = {}, {}
    gens = [(JetVar(i, ()), True) for i in range(sig.dim)]
    gens += [(JetVar(a, ()), False) for a in sig.dynamic_indices()]
    for g, is_base in gens:
        a = P1(P2.image(g))
        b = P2(P1.image(g))
        r = a - b if sign > 0 else a + b
        if r.terms:
            if is_base:
                horiz[sig.symbols[g.sym].base_index] = r
            else:
                vert[g.sym] = r
    return GradedDerivation(sig, horiz, vert, parity=Parity((int(u1.parity) + int(u2.parity)) % 2))
