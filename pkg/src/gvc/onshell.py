"""Bounded ideal-membership search: express a target as sum Phi^{A,L} d_L E_A."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping

from .errors import NotFound
from .jetcalc import total_derivative
from .kernel import GradedExpr, add_into, mono_mul
from .linsolve import solve_sparse
from .variational import EulerLagrange


@dataclass(frozen=True)
class Witness:
    """Coefficients Phi keyed by (symbol number, multi-index)."""

    coefficients: Mapping[tuple, GradedExpr]

    def render(self, sig) -> dict[str, str]:
        out = {}
        for (a, mi), e in sorted(self.coefficients.items()):
            key = sig.symbols[a].name + ("" if not mi else "_" + ",".join(map(str, mi)))
            out[key] = str(e)
        return out


def _multi_indices(n: int, max_order: int):
    for k in range(max_order + 1):
        yield from combinations_with_replacement(range(n), k)


def _sub_monomials(m):
    """All distinct sub-multisets of a sorted monomial, with their complements."""
    out = {(): m}
    for f in m:
        nxt = {}
        for sub, rest in out.items():
            nxt[sub] = rest
            if f in rest:
                i = rest.index(f)
                nxt[tuple(sorted(sub + (f,)))] = rest[:i] + rest[i + 1:]
        out = nxt
    return out


class ELDerivatives:
    """Cache of d_L E_A for a fixed Euler-Lagrange operator."""

    def __init__(self, el: EulerLagrange):
        self.el = el
        self._cache: dict[tuple, GradedExpr] = {}

    def get(self, a: int, mi: tuple) -> GradedExpr:
        key = (a, mi)
        if key not in self._cache:
            if not mi:
                e = self.el.get(a)
            else:
                e = total_derivative(self.get(a, mi[:-1]), mi[-1])
            self._cache[key] = e
        return self._cache[key]


def combine(el: EulerLagrange, phi: Mapping[tuple, GradedExpr], cache: ELDerivatives | None = None) -> GradedExpr:
    cache = cache or ELDerivatives(el)
    acc: dict = {}
    for (a, mi), c in phi.items():
        add_into(acc, (c * cache.get(a, mi)).terms)
    return GradedExpr(el.sig, acc)


def find_witness(target: GradedExpr, el: EulerLagrange, max_order: int | None = None,
                 max_degree: int | None = None, symbols=None) -> Witness:
    """Phi with target == sum Phi^{A,L} d_L E_A exactly, or NotFound.

    Candidate monomials for Phi^{A,L} are quotients of target monomials by
    monomials of d_L E_A; a second round adds quotients of the monomials
    the first round introduced.  Sound but incomplete.
    """
    sig = target.sig
    if not target.terms:
        return Witness({})
    if max_order is None:
        max_order = target.jet_order()
    if max_degree is None:
        max_degree = target.degree()
    cache = ELDerivatives(el)
    syms = [a for a, e in el.components.items() if e.terms] if symbols is None else symbols
    index: dict = {}
    for a in syms:
        for mi in _multi_indices(sig.dim, max_order):
            e = cache.get(a, mi)
            if not e.terms:
                continue
            for m in e.terms:
                index.setdefault(m, []).append((a, mi))
    odd = sig.odd
    cands: dict[tuple, set] = {}
    frontier = set(target.terms)
    for _round in range(2):
        grew = False
        for t in frontier:
            for sub, rest in _sub_monomials(t).items():
                if sub not in index or len(rest) > max_degree:
                    continue
                if any(len(f.mi) > max_order for f in rest):
                    continue
                for key in index[sub]:
                    s = cands.setdefault(key, set())
                    if rest not in s:
                        s.add(rest)
                        grew = True
        sol = _solve(sig, target, cands, cache)
        if sol is not None:
            return sol
        if not grew:
            break
        new = set()
        for key, ms in cands.items():
            e = cache.get(*key)
            for q in ms:
                for m in e.terms:
                    s, pm = mono_mul(odd, q, m)
                    if s and pm not in target.terms:
                        new.add(pm)
        frontier = new
    raise NotFound(f"no on-shell witness within order {max_order}, degree {max_degree}")


def _solve(sig, target, cands, cache) -> Witness | None:
    cols = [(key, q) for key in sorted(cands) for q in sorted(cands[key])]
    rowi: dict = {}
    rows: list[dict] = []
    rhs: list[Fraction] = []
    odd = sig.odd
    for j, (key, q) in enumerate(cols):
        for m, c in cache.get(*key).terms.items():
            s, pm = mono_mul(odd, q, m)
            if not s:
                continue
            if pm not in rowi:
                rowi[pm] = len(rows)
                rows.append({})
                rhs.append(Fraction(0))
            r = rows[rowi[pm]]
            r[j] = r.get(j, 0) + s * c
    for m, c in target.terms.items():
        if m not in rowi:
            return None
        rhs[rowi[m]] = c
    x = solve_sparse(rows, rhs)
    if x is None:
        return None
    phi: dict[tuple, dict] = {}
    for j, v in x.items():
        key, q = cols[j]
        add_into(phi.setdefault(key, {}), {q: v})
    w = {k: GradedExpr(sig, t) for k, t in phi.items() if t}
    if combine(cache.el, w, cache) != target:
        return None
    return Witness(w)
