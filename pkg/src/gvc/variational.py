"""Density-level variational calculus: Euler-Lagrange operators, triviality,
d_H-antiderivatives, the eta operator, Lepage equivalents and the
variational decomposition."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Mapping, Union

from .errors import NotFound, NotTrivial
from .jetcalc import (
    ContactHForm,
    HForm,
    dH,
    dH_contact,
    dV,
    total_derivative,
    total_derivative_multi,
)
from .kernel import GradedExpr, JetVar, Signature, add_into, canon, partial_derivative
from .linsolve import solve_sparse

Density = Union[GradedExpr, HForm]


def density_coefficient(L: Density) -> GradedExpr:
    if isinstance(L, HForm):
        if L.degree != L.sig.dim:
            raise ValueError("expected a top-degree horizontal form")
        return L.coefficient()
    return L


@dataclass(frozen=True)
class EulerLagrange:
    sig: Signature
    components: Mapping[int, GradedExpr]
    max_order: int

    def __getitem__(self, name: str) -> GradedExpr:
        return self.components.get(self.sig.index(name), self.sig.zero)

    def get(self, sym: int) -> GradedExpr:
        return self.components.get(sym, self.sig.zero)

    def nonzero(self) -> dict[str, GradedExpr]:
        return {self.sig.symbols[a].name: e for a, e in sorted(self.components.items()) if e.terms}

    def is_zero(self) -> bool:
        return not any(e.terms for e in self.components.values())


def variational_derivative(L: GradedExpr, sym: int, side: str = "left") -> GradedExpr:
    """sum_L (-1)^|L| d_L (d^L_A L) for one symbol, with left or right partials."""
    acc: dict = {}
    jets = sorted({f for m in L.terms for f in m if f.sym == sym})
    for v in jets:
        term = total_derivative_multi(partial_derivative(L, v, side), v.mi)
        add_into(acc, term.terms, Fraction(-1 if len(v.mi) & 1 else 1))
    return GradedExpr(L.sig, acc)


def euler_lagrange(L: Density, side: str = "left", symbols=None) -> EulerLagrange:
    L = density_coefficient(L)
    sig = L.sig
    syms = sig.dynamic_indices() if symbols is None else [
        sig.index(s) if isinstance(s, str) else s for s in symbols
    ]
    comps = {a: variational_derivative(L, a, side) for a in syms}
    order = max((e.jet_order() for e in comps.values()), default=0)
    return EulerLagrange(sig, comps, order)


@dataclass(frozen=True)
class Triviality:
    trivial: bool
    modulo_closed_forms: bool
    residual: dict

    def __bool__(self):
        return self.trivial


def variational_triviality(phi: Density) -> Triviality:
    """EL test; even densities carry the caveat that exactness holds up to a closed form."""
    phi = density_coefficient(phi)
    el = euler_lagrange(phi)
    res = el.nonzero()
    even_part, _ = phi.split_parity()
    return Triviality(not res, bool(even_part.terms) and not res, res)


def is_variationally_trivial(phi: Density) -> bool:
    return variational_triviality(phi).trivial


# --- d_H antiderivatives ------------------------------------------------------


def _dyn_degree(n: int, m) -> int:
    return sum(1 for f in m if f.sym >= n)


def _lowered(m, lam: int, odd, n: int):
    """Monomials obtained by removing one lam from a jet factor of m.

    A field-free monomial is integrated in x^lam instead.
    """
    seen = set()
    if not _dyn_degree(n, m):
        yield tuple(sorted(m + (JetVar(lam, ()),)))
        return
    for i, f in enumerate(m):
        if lam in f.mi and (i == 0 or m[i - 1] != f):
            mi = list(f.mi)
            mi.remove(lam)
            g = JetVar(f.sym, tuple(mi))
            s, nm = canon(odd, list(m[:i]) + [g] + list(m[i + 1:]))
            if s and nm not in seen:
                seen.add(nm)
                yield nm


def dH_antiderivative(phi: Density, max_order: int | None = None, max_degree: int | None = None,
                      check_trivial: bool = True) -> HForm:
    """A horizontal form xi with dH(xi) = phi, found by an exact bounded ansatz.

    Candidate monomials for each component of xi are the monomials of phi
    with one jet index lowered; a second round closes the candidate set
    under the monomials generated by the first.  The solution is
    re-verified before it is returned.
    """
    if not isinstance(phi, HForm):
        phi = HForm.density(phi)
    sig = phi.sig
    n, k = sig.dim, phi.degree
    if k == 0:
        raise NotFound("a 0-form has no antiderivative")
    if k == n and check_trivial and not is_variationally_trivial(phi.coefficient()):
        raise NotTrivial("density has nonzero Euler-Lagrange components")
    if phi.is_zero():
        return HForm(sig, k - 1, {})
    if max_order is None:
        max_order = max(e.jet_order() for e in phi.components.values())
    if max_degree is None:
        max_degree = max(_dyn_degree(n, m) for e in phi.components.values() for m in e.terms)
    max_x = 1 + max(len(m) - _dyn_degree(n, m) for e in phi.components.values() for m in e.terms)
    odd = sig.odd

    def admissible(m):
        d = _dyn_degree(n, m)
        return d <= max_degree and len(m) - d <= max_x and all(len(f.mi) <= max_order for f in m)

    subsets = {}
    for J in phi.components:
        for lam in J:
            subsets.setdefault(tuple(i for i in J if i != lam), []).append(lam)

    cands: dict[tuple, set] = {I: set() for I in subsets}
    frontier = {J: set(e.terms) for J, e in phi.components.items()}
    for _round in range(3):
        grew = False
        for I, lams in subsets.items():
            for lam in lams:
                J = tuple(sorted(I + (lam,)))
                for m in frontier.get(J, ()):
                    for nm in _lowered(m, lam, odd, n):
                        if admissible(nm) and nm not in cands[I]:
                            cands[I].add(nm)
                            grew = True
        sol = _solve_antiderivative(sig, phi, cands)
        if sol is not None:
            return sol
        if not grew:
            break
        # monomials produced by the candidates but absent from phi must cancel
        frontier = {}
        for I, ms in cands.items():
            for m in ms:
                e = GradedExpr(sig, {m: Fraction(1)})
                for lam in range(n):
                    if lam in I:
                        continue
                    J = tuple(sorted(I + (lam,)))
                    frontier.setdefault(J, set()).update(total_derivative(e, lam).terms)
    raise NotFound(f"no antiderivative within order {max_order}, degree {max_degree}")


def _solve_antiderivative(sig, phi: HForm, cands) -> HForm | None:
    n = sig.dim
    cols = [(I, m) for I in sorted(cands) for m in sorted(cands[I])]
    row_index: dict = {}
    rows: list[dict] = []
    rhs: list[Fraction] = []

    def row(key):
        if key not in row_index:
            row_index[key] = len(rows)
            rows.append({})
            rhs.append(Fraction(0))
        return row_index[key]

    for j, (I, m) in enumerate(cols):
        e = GradedExpr(sig, {m: Fraction(1)})
        for lam in range(n):
            if lam in I:
                continue
            s = -1 if sum(1 for i in I if i < lam) & 1 else 1
            J = tuple(sorted(I + (lam,)))
            for mm, c in total_derivative(e, lam).terms.items():
                r = rows[row((J, mm))]
                r[j] = r.get(j, 0) + s * c
    for J, e in phi.components.items():
        for mm, c in e.terms.items():
            rhs[row((J, mm))] = c
    x = solve_sparse(rows, rhs)
    if x is None:
        return None
    comps: dict[tuple, dict] = {}
    for j, v in x.items():
        I, m = cols[j]
        add_into(comps.setdefault(I, {}), {m: v})
    xi = HForm(sig, phi.degree - 1, {I: GradedExpr(sig, t) for I, t in comps.items()})
    if dH(xi) != phi:
        return None
    return xi


# --- eta operator --------------------------------------------------------------


def _multiset_sub(K: tuple, L: tuple):
    ck, cl = Counter(K), Counter(L)
    for i, c in cl.items():
        if ck[i] < c:
            return None
    return tuple(sorted((ck - cl).elements()))


def _split_weight(K: tuple, L: tuple) -> int:
    """Number of ways to pick the sub-multiset L out of the ordered multi-index K."""
    ck, cl = Counter(K), Counter(L)
    w = 1
    for i, c in cl.items():
        w *= comb(ck[i], c)
    return w


def higher_euler_eta(f: Mapping[tuple, GradedExpr], lam) -> GradedExpr:
    """eta(f)^L = sum_S (-1)^{|S+L|} w(S,L) d_S f^{S+L}.

    With sorted multi-indices the combinatorial weight w splits per base
    direction as a product of binomials; in one dimension it is the
    familiar (|S+L|)!/(|S|!|L|!).
    """
    lam = tuple(sorted(lam))
    sig = next(iter(f.values())).sig if f else None
    acc: dict = {}
    for K, fk in f.items():
        K = tuple(sorted(K))
        S = _multiset_sub(K, lam)
        if S is None or not fk.terms:
            continue
        w = _split_weight(K, lam) * (-1 if len(K) & 1 else 1)
        add_into(acc, total_derivative_multi(fk, S).terms, Fraction(w))
    if sig is None:
        raise ValueError("empty coefficient family")
    return GradedExpr(sig, acc)


def eta_family(f: Mapping[tuple, GradedExpr]) -> dict[tuple, GradedExpr]:
    """eta(f) for every multi-index where it can be nonzero."""
    keys = set()
    for K in f:
        K = tuple(sorted(K))
        for sub in _submultisets(K):
            keys.add(sub)
    out = {}
    for L in sorted(keys, key=lambda t: (len(t), t)):
        e = higher_euler_eta(f, L)
        if e.terms:
            out[L] = e
    return out


def _submultisets(K: tuple):
    c = Counter(K)
    items = sorted(c.items())
    for counts in product(*[range(m + 1) for _, m in items]):
        yield tuple(i for (i, _), k in zip(items, counts) for _ in range(k))


# --- Lepage equivalent -----------------------------------------------------------


def lepage_coefficients(L: Density) -> dict[tuple[int, tuple, int], GradedExpr]:
    """F^{lam,S}_A keyed by (A, S, lam), built top-down with all free functions zero."""
    L = density_coefficient(L)
    sig = L.sig
    out: dict[tuple, GradedExpr] = {}
    by_sym: dict[int, set] = {}
    for m in L.terms:
        for f in m:
            if not sig.symbols[f.sym].jet_free and f.mi:
                by_sym.setdefault(f.sym, set()).add(f.mi)
    for a, mis in by_sym.items():
        keys = set()
        for K in mis:
            keys.update(s for s in _submultisets(K) if s)
        G: dict[tuple, GradedExpr] = {}
        for Lam in sorted(keys, key=lambda t: (-len(t), t)):
            acc = dict(partial_derivative(L, JetVar(a, Lam), "left").terms)
            for lam in range(sig.dim):
                up = tuple(sorted(Lam + (lam,)))
                if up in G:
                    F = G[up].scale(Fraction(up.count(lam), len(up)))
                    add_into(acc, total_derivative(F, lam).terms, Fraction(-1))
            G[Lam] = GradedExpr(sig, acc)
        for Lam, g in G.items():
            if not g.terms:
                continue
            for lam in set(Lam):
                S = list(Lam)
                S.remove(lam)
                out[(a, tuple(S), lam)] = g.scale(Fraction(Lam.count(lam), len(Lam)))
    return out


def lepage_equivalent(L: Density) -> ContactHForm:
    """Contact part of the Lepage equivalent: sum theta^A_S ^ F^{lam,S}_A omega_lam."""
    sig = density_coefficient(L).sig
    n = sig.dim
    comps = {}
    for (a, S, lam), F in lepage_coefficients(L).items():
        I = tuple(i for i in range(n) if i != lam)
        comps[(a, S, I)] = F if lam % 2 == 0 else -F
    return ContactHForm(sig, n - 1, comps)


def verify_variational_decomposition(L: Density) -> bool:
    """One-contact part of dL equals theta^A E_A omega - dH(contact part of the Lepage form)."""
    return not decomposition_residual(L).components


def decomposition_residual(L: Density) -> ContactHForm:
    L = density_coefficient(L)
    sig = L.sig
    n = sig.dim
    full = tuple(range(n))
    lhs = dV(HForm.density(L))
    el = euler_lagrange(L)
    delta = ContactHForm(sig, n, {(a, (), full): e for a, e in el.components.items()})
    if n == 0:
        return lhs - delta
    rhs = delta - dH_contact(lepage_equivalent(L))
    return lhs - rhs
