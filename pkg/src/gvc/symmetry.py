"""First Noether theorem: Lie derivatives, symmetry tests, currents, weak
conservation and superpotentials."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping

from .errors import NotGaugeCurrent, PreconditionFailed
from .jetcalc import GradedDerivation, HForm, Prolongation, total_derivative
from .kernel import GradedExpr, JetVar, Signature, add_into, partial_derivative
from .onshell import Witness, find_witness
from .variational import (
    Density,
    EulerLagrange,
    Triviality,
    dH_antiderivative,
    density_coefficient,
    euler_lagrange,
    lepage_coefficients,
    variational_triviality,
)


def lie_derivative_density(u: GradedDerivation, L: Density) -> GradedExpr:
    """Density of the Lie derivative:  d_lam(u^lam L) + u_V(L)."""
    L = density_coefficient(L)
    acc = dict(Prolongation(u.vertical_part())(L).terms)
    for lam, ul in u.horizontal.items():
        add_into(acc, total_derivative(ul * L, lam).terms)
    return GradedExpr(L.sig, acc)


def first_variational_residual(u: GradedDerivation, L: Density) -> GradedExpr:
    """Lie derivative minus u^A E_A minus d_lam(sum_S d_S(u^A) F^{lam,S}_A); zero for vertical u."""
    L = density_coefficient(L)
    sig = L.sig
    uv = u.vertical_part()
    acc = dict(lie_derivative_density(u, L).terms)
    E = euler_lagrange(L)
    for a, comp in uv.vertical.items():
        add_into(acc, (comp * E.get(a)).terms, Fraction(-1))
    P = Prolongation(uv)
    for (a, S, lam), f in lepage_coefficients(L).items():
        ds = P._djet(a, S)
        if ds.terms:
            add_into(acc, total_derivative(ds * f, lam).terms, Fraction(-1))
    return GradedExpr(sig, acc)


def is_exact_symmetry(u: GradedDerivation, L: Density) -> bool:
    return not lie_derivative_density(u, L).terms


def variational_symmetry_verdict(u: GradedDerivation, L: Density) -> Triviality:
    return variational_triviality(lie_derivative_density(u, L))


def is_variational_symmetry(u: GradedDerivation, L: Density) -> bool:
    return variational_symmetry_verdict(u, L).trivial


@dataclass(frozen=True)
class GaugeSymmetry:
    """Gauge symmetry linear in ghost jets; components keyed by symbol number."""

    derivation: GradedDerivation
    ghosts: tuple

    def __post_init__(self):
        gh = set(self.ghosts)
        comps = list(self.derivation.vertical.values()) + list(self.derivation.horizontal.values())
        for e in comps:
            for m in e.terms:
                if sum(1 for f in m if f.sym in gh) != 1:
                    raise PreconditionFailed(
                        "gauge components must contain exactly one ghost-jet factor per monomial"
                    )

    @property
    def sig(self) -> Signature:
        return self.derivation.sig

    @property
    def max_parameter_order(self) -> int:
        gh = set(self.ghosts)
        comps = list(self.derivation.vertical.values()) + list(self.derivation.horizontal.values())
        return max((len(f.mi) for e in comps for m in e.terms for f in m if f.sym in gh), default=0)

    def coefficient(self, a: int, r: int, mi: tuple) -> GradedExpr:
        """u^{A,L}_r with u^A = sum c^r_L u^{A,L}_r (ghost on the left)."""
        return partial_derivative(self.derivation.component(a), JetVar(r, tuple(sorted(mi))), "left")

    def coefficient_family(self, a: int, r: int) -> dict[tuple, GradedExpr]:
        comp = self.derivation.component(a)
        out = {}
        for v in sorted({f for m in comp.terms for f in m if f.sym == r}):
            out[v.mi] = partial_derivative(comp, v, "left")
        return out


@dataclass(frozen=True)
class NoetherCurrent:
    sig: Signature
    components: Mapping[int, GradedExpr]
    sigma: Mapping[int, GradedExpr] = field(default_factory=dict)

    def __getitem__(self, mu: int) -> GradedExpr:
        return self.components.get(mu, self.sig.zero)

    def divergence(self) -> GradedExpr:
        acc: dict = {}
        for mu, j in self.components.items():
            add_into(acc, total_derivative(j, mu).terms)
        return GradedExpr(self.sig, acc)

    def as_hform(self) -> HForm:
        return HForm.current({mu: self[mu] for mu in range(self.sig.dim)})


def noether_current(u: GradedDerivation, L: Density, max_order: int | None = None,
                    max_degree: int | None = None) -> NoetherCurrent:
    """J^lam = sigma^lam - u^lam L - sum_S d_S(u_V^A) F^{lam,S}_A."""
    L = density_coefficient(L)
    sig = L.sig
    lie = lie_derivative_density(u, L)
    sigma: dict[int, GradedExpr] = {}
    if lie.terms:
        verdict = variational_triviality(lie)
        if not verdict.trivial:
            raise PreconditionFailed("not a variational symmetry")
        xi = dH_antiderivative(lie, max_order, max_degree, check_trivial=False)
        sigma = {mu: e for mu, e in xi.to_current().items() if e.terms}
    P = Prolongation(u.vertical_part())
    F = lepage_coefficients(L)
    acc: dict[int, dict] = {mu: dict(sigma.get(mu, sig.zero).terms) for mu in range(sig.dim)}
    for lam, ul in u.horizontal.items():
        add_into(acc[lam], (ul * L).terms, Fraction(-1))
    for (a, S, lam), f in F.items():
        uv = P._djet(a, S)
        if uv.terms:
            add_into(acc[lam], (uv * f).terms, Fraction(-1))
    comps = {mu: GradedExpr(sig, t) for mu, t in acc.items() if t}
    return NoetherCurrent(sig, comps, sigma)


def weak_conservation_check(J: NoetherCurrent, E: EulerLagrange, max_order: int | None = None,
                            max_degree: int | None = None) -> Witness:
    """Witness Phi with d_mu J^mu = sum Phi^{A,L} d_L E_A; raises NotFound if inconclusive."""
    return find_witness(J.divergence(), E, max_order, max_degree)


@dataclass(frozen=True)
class Superpotential:
    sig: Signature
    components: Mapping[tuple, GradedExpr]

    def __getitem__(self, key: tuple) -> GradedExpr:
        return self.components.get(key, self.sig.zero)

    def is_antisymmetric(self) -> bool:
        n = self.sig.dim
        return all(self[(a, b)] == -self[(b, a)] for a in range(n) for b in range(n))


@dataclass(frozen=True)
class SuperpotentialResult:
    W: Mapping[int, GradedExpr]
    U: Superpotential
    witnesses: Mapping[int, Witness]


def _orderings(mi: tuple) -> int:
    w = factorial(len(mi))
    for c in Counter(mi).values():
        w //= factorial(c)
    return w


def superpotential(J: NoetherCurrent, ghosts) -> Superpotential:
    """U^{nu mu} = - sum_T J^{[nu mu]T}_r c^r_T with symmetric-tensor coefficients J^{nu K}_r."""
    sig = J.sig
    gh = set(ghosts)
    for e in J.components.values():
        for m in e.terms:
            if sum(1 for f in m if f.sym in gh) != 1:
                raise NotGaugeCurrent("current is not linear in ghost jets")
    # tensor[(nu, K, r)] = coefficient multiplying c^r_K with K an ordered-sum tensor index
    tensor: dict[tuple, GradedExpr] = {}
    for nu, e in J.components.items():
        for v in sorted({f for m in e.terms for f in m if f.sym in gh}):
            if not v.mi:
                continue
            coef = partial_derivative(e, v, "left").scale(Fraction(1, _orderings(v.mi)))
            tensor[(nu, v.mi, v.sym)] = coef
    pairs = set()
    for (nu, K, r) in tensor:
        for mu in set(K):
            if mu == nu:
                continue
            T = list(K)
            T.remove(mu)
            pairs.add((min(nu, mu), max(nu, mu), tuple(T), r))
    zero = sig.zero
    acc: dict[tuple, dict] = {}
    for nu, mu, T, r in pairs:
        a = tensor.get((nu, tuple(sorted(T + (mu,))), r), zero)
        b = tensor.get((mu, tuple(sorted(T + (nu,))), r), zero)
        cT = GradedExpr(sig, {(JetVar(r, T),): Fraction(1)})
        term = (cT * (a - b)).scale(Fraction(-_orderings(T), 2))
        add_into(acc.setdefault((nu, mu), {}), term.terms)
        add_into(acc.setdefault((mu, nu), {}), term.terms, Fraction(-1))
    out = {k: GradedExpr(sig, t) for k, t in acc.items() if t}
    return Superpotential(sig, out)


def superpotential_decompose(J: NoetherCurrent, g: GaugeSymmetry, E: EulerLagrange,
                             max_order: int | None = None, max_degree: int | None = None) -> SuperpotentialResult:
    U = superpotential(J, g.ghosts)
    sig = J.sig
    W = {}
    witnesses = {}
    for mu in range(sig.dim):
        acc = dict(J[mu].terms)
        for nu in range(sig.dim):
            u = U[(nu, mu)]
            if u.terms:
                add_into(acc, total_derivative(u, nu).terms, Fraction(-1))
        w = GradedExpr(sig, acc)
        W[mu] = w
        witnesses[mu] = find_witness(w, E, max_order, max_degree)
    return SuperpotentialResult(W, U, witnesses)
