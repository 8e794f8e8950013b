"""Programmatic constructions of the shipped models."""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from itertools import combinations

from ..errors import BadShape
from ..jetcalc import total_derivative
from ..kernel import GradedExpr, Parity, Role, Signature, SymbolDecl, add_into
from .base import Algebra, FieldModel, comp_name, gauge_stage, get_algebra, identity, levi_civita, metric_diag, perm_sign

EVEN, ODD = Parity.EVEN, Parity.ODD


class _Acc:
    """Dict accumulator for building expressions term by term."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.t: dict = {}

    def add(self, e: GradedExpr, c=1) -> None:
        if e.terms and c:
            add_into(self.t, e.terms, Fraction(c))

    def expr(self) -> GradedExpr:
        return GradedExpr(self.sig, self.t)


def _connection_decls(alg: Algebra, n: int) -> list[SymbolDecl]:
    R, M = range(1, alg.dim + 1), range(n)
    return [SymbolDecl(comp_name("a", (r, mu)), Role.FIELD) for r in R for mu in M]


def _strength(sig: Signature, alg: Algebra, n: int):
    R = range(1, alg.dim + 1)
    cache: dict = {}

    def F(r, lam, mu):
        key = (r, lam, mu)
        if key not in cache:
            acc = _Acc(sig)
            acc.add(sig.var(comp_name("a", (r, mu)), lam))
            acc.add(sig.var(comp_name("a", (r, lam)), mu), -1)
            for p in R:
                for q in R:
                    f = alg.fc(r, p, q)
                    if f:
                        acc.add(sig.var(comp_name("a", (p, lam))) * sig.var(comp_name("a", (q, mu))), f)
            cache[key] = acc.expr()
        return cache[key]

    return F


def yang_mills(algebra="su2", n: int = 4, metric: str = "minkowski") -> FieldModel:
    if n < 2:
        raise BadShape("Yang-Mills needs n >= 2")
    alg = get_algebra(algebra)
    R, M = range(1, alg.dim + 1), range(n)
    decls = _connection_decls(alg, n)
    decls += [SymbolDecl(comp_name("c", (r,)), Role.GHOST, ODD, stage=0) for r in R]
    decls += [SymbolDecl(comp_name("abar", (r, mu)), Role.FIELD_ANTIFIELD, ODD, partner=comp_name("a", (r, mu)))
              for r in R for mu in M]
    decls += [SymbolDecl(comp_name("cbar", (r,)), Role.NOETHER_ANTIFIELD, EVEN, stage=0, partner=comp_name("c", (r,)))
              for r in R]
    sig = Signature(n, decls)
    eta = metric_diag(metric, n)
    F = _strength(sig, alg, n)
    var = lambda b, *i: sig.var(comp_name(b, i))
    L = _Acc(sig)
    for p in R:
        for q in R:
            h = alg.h(p, q)
            if not h:
                continue
            for lam in M:
                for be in M:
                    if lam != be:
                        L.add(F(p, lam, be) * F(q, lam, be), Fraction(1, 4) * h * eta[lam] * eta[be])
    u, delta, gamma = {}, [], {}
    for r in R:
        for mu in M:
            acc = _Acc(sig)
            acc.add(sig.var(comp_name("c", (r,)), mu))
            for p in R:
                for q in R:
                    if alg.fc(r, p, q):
                        acc.add(var("a", p, mu) * var("c", q), alg.fc(r, p, q))
            u[comp_name("a", (r, mu))] = acc.expr()
    for r in R:
        acc = _Acc(sig)
        for mu in M:
            for p in R:
                for q in R:
                    if alg.fc(p, r, q):
                        acc.add(var("a", q, mu) * var("abar", p, mu), alg.fc(p, r, q))
            acc.add(sig.var(comp_name("abar", (r, mu)), mu))
        delta.append(identity(sig, 0, comp_name("cbar", (r,)), acc.expr()))
        g = _Acc(sig)
        for p in R:
            for q in R:
                if alg.fc(r, p, q):
                    g.add(var("c", p) * var("c", q), Fraction(-1, 2) * alg.fc(r, p, q))
        if g.t:
            gamma[sig.index(comp_name("c", (r,)))] = g.expr()
    name = "maxwell" if alg.name == "u1" and n == 4 else f"yang_mills_{alg.name}"
    return FieldModel(name, sig, L.expr(), (gauge_stage(sig, u),), tuple(delta), gamma,
                      {"f": dict(alg.f), "h": dict(alg.form)}, metric)


def maxwell(n: int = 4) -> FieldModel:
    return yang_mills("u1", n)


def chern_simons_3d(algebra="su2", literal_gamma: bool = False) -> FieldModel:
    """Local 3d Chern-Simons Lagrangian with gauge and diffeomorphism-type ghosts.

    ``literal_gamma`` drops the ``-c^mu c^r_mu`` term from the ghost
    transformation; the resulting operator is not nilpotent.
    """
    n = 3
    alg = get_algebra(algebra)
    R, M = range(1, alg.dim + 1), range(n)
    decls = _connection_decls(alg, n)
    decls += [SymbolDecl(comp_name("c", (r,)), Role.GHOST, ODD, stage=0) for r in R]
    decls += [SymbolDecl(comp_name("cx", (mu,)), Role.GHOST, ODD, stage=0) for mu in M]
    decls += [SymbolDecl(comp_name("abar", (r, mu)), Role.FIELD_ANTIFIELD, ODD, partner=comp_name("a", (r, mu)))
              for r in R for mu in M]
    decls += [SymbolDecl(comp_name("cbar", (r,)), Role.NOETHER_ANTIFIELD, EVEN, stage=0, partner=comp_name("c", (r,)))
              for r in R]
    decls += [SymbolDecl(comp_name("cxbar", (mu,)), Role.NOETHER_ANTIFIELD, EVEN, stage=0,
                         partner=comp_name("cx", (mu,))) for mu in M]
    sig = Signature(n, decls)
    F = _strength(sig, alg, n)
    eps = levi_civita(n)
    a = lambda r, mu, *lam: sig.var(comp_name("a", (r, mu)), *lam)
    c = lambda r, *lam: sig.var(comp_name("c", (r,)), *lam)
    cx = lambda mu, *lam: sig.var(comp_name("cx", (mu,)), *lam)
    abar = lambda r, mu, *lam: sig.var(comp_name("abar", (r, mu)), *lam)
    L = _Acc(sig)
    for (al, be, ga), e in eps.items():
        for m in R:
            for nn in R:
                h = alg.h(m, nn)
                if not h:
                    continue
                inner = _Acc(sig)
                inner.add(F(nn, be, ga))
                for p in R:
                    for q in R:
                        if alg.fc(nn, p, q):
                            inner.add(a(p, be) * a(q, ga), Fraction(-1, 3) * alg.fc(nn, p, q))
                L.add(a(m, al) * inner.expr(), Fraction(1, 2) * h * e)
    u = {}
    for r in R:
        for lam in M:
            acc = _Acc(sig)
            for p in R:
                for q in R:
                    if alg.fc(r, p, q):
                        acc.add(c(p) * a(q, lam), -alg.fc(r, p, q))
            acc.add(c(r, lam))
            for mu in M:
                acc.add(cx(mu, lam) * a(r, mu), -1)
                acc.add(cx(mu) * a(r, lam, mu), -1)
            u[comp_name("a", (r, lam))] = acc.expr()
    delta = []
    for j in R:
        acc = _Acc(sig)
        for lam in M:
            for r in R:
                for i in R:
                    if alg.fc(r, j, i):
                        acc.add(a(i, lam) * abar(r, lam), -alg.fc(r, j, i))
            acc.add(abar(j, lam, lam), -1)
        delta.append(identity(sig, 0, comp_name("cbar", (j,)), acc.expr()))
    for mu in M:
        acc = _Acc(sig)
        for lam in M:
            for r in R:
                acc.add(a(r, lam, mu) * abar(r, lam), -1)
                acc.add(total_derivative(a(r, mu) * abar(r, lam), lam))
        delta.append(identity(sig, 0, comp_name("cxbar", (mu,)), acc.expr()))
    gamma = {}
    for r in R:
        g = _Acc(sig)
        for p in R:
            for q in R:
                if alg.fc(r, p, q):
                    g.add(c(p) * c(q), Fraction(-1, 2) * alg.fc(r, p, q))
        if not literal_gamma:
            for mu in M:
                g.add(cx(mu) * c(r, mu), -1)
        if g.t:
            gamma[sig.index(comp_name("c", (r,)))] = g.expr()
    for lam in M:
        g = _Acc(sig)
        for mu in M:
            g.add(cx(lam, mu) * cx(mu))
        gamma[sig.index(comp_name("cx", (lam,)))] = g.expr()
    return FieldModel(f"chern_simons_{alg.name}", sig, L.expr(), (gauge_stage(sig, u),), tuple(delta), gamma,
                      {"f": dict(alg.f), "h": dict(alg.form)}, "euclidean")


def chern_simons_primed_identity(model: FieldModel, mu: int) -> GradedExpr:
    """Delta'_mu = Delta_mu + a^r_mu Delta_r built from the shipped stage-0 tower."""
    sig = model.sig
    by = {sig.symbols[d.antifield].name: d.expression for d in model.identities}
    acc = _Acc(sig)
    acc.add(by[comp_name("cxbar", (mu,))])
    r = 1
    while comp_name("cbar", (r,)) in by:
        acc.add(sig.var(comp_name("a", (r, mu))) * by[comp_name("cbar", (r,))])
        r += 1
    return acc.expr()


# --- BF ---------------------------------------------------------------------------


def _sets(n: int, k: int) -> list[tuple]:
    return list(combinations(range(n), k))


def bf_shape(n: int, p: int) -> int:
    q = n - 1 - p
    if p < 1 or q < p or q % 2:
        raise BadShape(f"BF needs p >= 1, q = n-1-p even and q >= p (got n={n}, p={p}, q={q})")
    return q


def bf_tower_names(n: int, p: int):
    """(family, rank, stage) for the A-side and B-side ghost towers."""
    q = bf_shape(n, p)
    out = []
    for k in range(p):
        out.append((f"e{k}", p - 1 - k, k))
    for k in range(q):
        out.append((f"xi{k}", q - 1 - k, k))
    return out


def _exterior_d(sig: Signature, fam: str, I: tuple, parity_sign: int = 1) -> GradedExpr:
    """(d omega)_I = sum_i (-1)^i d_{I_i} omega_{I minus I_i} for a rank |I|-1 family ``fam``."""
    acc = _Acc(sig)
    for i, mu in enumerate(I):
        rest = I[:i] + I[i + 1:]
        acc.add(sig.var(comp_name(fam, rest), mu), (-1) ** i * parity_sign)
    return acc.expr()


def _divergence(sig: Signature, fam: str, J: tuple, n: int) -> GradedExpr:
    """sum_mu sign(mu, J) d_mu fam^{sort(mu J)}."""
    acc = _Acc(sig)
    for mu in range(n):
        if mu in J:
            continue
        s = perm_sign((mu,) + J)
        acc.add(sig.var(comp_name(fam, tuple(sorted((mu,) + J))), mu), s)
    return acc.expr()


def bf_theory(n: int = 4, p: int = 1) -> FieldModel:
    q = bf_shape(n, p)
    tower = bf_tower_names(n, p)
    decls = [SymbolDecl(comp_name("A", I), Role.FIELD) for I in _sets(n, p)]
    decls += [SymbolDecl(comp_name("B", K), Role.FIELD) for K in _sets(n, q)]
    for fam, rank, k in tower:
        par = Parity((k + 1) % 2)
        decls += [SymbolDecl(comp_name(fam, J), Role.GHOST, par, stage=k) for J in _sets(n, rank)]
    decls += [SymbolDecl(comp_name("Abar", I), Role.FIELD_ANTIFIELD, ODD, partner=comp_name("A", I))
              for I in _sets(n, p)]
    decls += [SymbolDecl(comp_name("Bbar", K), Role.FIELD_ANTIFIELD, ODD, partner=comp_name("B", K))
              for K in _sets(n, q)]
    for fam, rank, k in tower:
        par = Parity(k % 2)
        decls += [SymbolDecl(comp_name(fam + "bar", J), Role.NOETHER_ANTIFIELD, par, stage=k,
                             partner=comp_name(fam, J)) for J in _sets(n, rank)]
    sig = Signature(n, decls)
    # L = sum over all index orderings of eps A d B = p! q! sum over sorted sets
    L = _Acc(sig)
    w = factorial(p) * factorial(q)
    for I in _sets(n, p):
        for K in _sets(n, q):
            for lam in range(n):
                s = perm_sign(I + (lam,) + K)
                if s:
                    L.add(sig.var(comp_name("A", I)) * sig.var(comp_name("B", K), lam), s * w)
    stages: dict[int, dict] = {}
    for fam, rank, k in tower:
        if fam.startswith("xi"):
            target = "B" if k == 0 else f"xi{k - 1}"
        else:
            target = "A" if k == 0 else f"e{k - 1}"
        comps = stages.setdefault(k, {})
        for I in _sets(n, rank + 1):
            comps[comp_name(target, I)] = _exterior_d(sig, fam, I)
    gauge = tuple(gauge_stage(sig, stages[k]) for k in sorted(stages))
    ids = []
    for fam, rank, k in tower:
        if fam.startswith("xi"):
            src = "Bbar" if k == 0 else f"xi{k - 1}bar"
        else:
            src = "Abar" if k == 0 else f"e{k - 1}bar"
        for J in _sets(n, rank):
            ids.append(identity(sig, k, comp_name(fam + "bar", J), _divergence(sig, src, J, n)))
    ids.sort(key=lambda d: d.stage)
    return FieldModel(f"bf_{n}_{p}", sig, L.expr(), gauge, tuple(ids), {}, {}, "euclidean")
