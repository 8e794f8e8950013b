"""Noether identities and the Koszul-Tate operator."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import GradingMismatch, NotASymmetry
from .jetcalc import total_derivative_multi
from .kernel import ANTIFIELD_ROLES, GradedExpr, JetVar, Parity, Role, Signature, add_into, mono_mul, partial_derivative
from .symmetry import GaugeSymmetry
from .variational import EulerLagrange, eta_family, is_variationally_trivial, variational_derivative


def antifield_map(sig: Signature) -> dict[int, int]:
    """partner symbol number -> antifield symbol number."""
    out = {}
    for i, d in enumerate(sig.symbols):
        if d.role in ANTIFIELD_ROLES:
            out[sig.index(d.partner)] = i
    return out


@dataclass(frozen=True)
class IdentityDensity:
    """Stage-k identity density paired with the Noether antifield ``antifield``.

    ``expression`` is linear in the stage-(k-1) antifield layer, plus an
    optional ``h_term`` quadratic in lower antifields.
    """

    stage: int
    antifield: int | None
    expression: GradedExpr
    h_term: GradedExpr | None = None

    @property
    def sig(self) -> Signature:
        return self.expression.sig

    @property
    def total(self) -> GradedExpr:
        return self.expression + self.h_term if self.h_term is not None else self.expression

    def coefficients(self) -> dict[tuple, GradedExpr]:
        """Delta^{B,L} keyed by (antifield symbol, multi-index); antifield on the right."""
        e = self.expression
        out = {}
        for v in sorted({f for m in e.terms for f in m if e.sig.symbols[f.sym].role in ANTIFIELD_ROLES}):
            out[(v.sym, v.mi)] = partial_derivative(e, v, "right")
        return out

    def label(self) -> str:
        if self.antifield is None:
            return f"stage {self.stage}"
        return f"stage {self.stage} [{self.sig.symbols[self.antifield].name}]"


class RightDerivation:
    """Right graded derivation defined on symbols and prolonged by d_L(image)."""

    def __init__(self, sig: Signature, images: Mapping[int, GradedExpr], parity: Parity = Parity.ODD):
        self.sig = sig
        self.images = dict(images)
        self.parity = Parity(int(parity))
        self._jets: dict[JetVar, GradedExpr] = {}

    def image(self, v: JetVar) -> GradedExpr:
        if v.sym not in self.images:
            return self.sig.zero
        if v not in self._jets:
            base = self.images[v.sym]
            self._jets[v] = total_derivative_multi(base, v.mi)
        return self._jets[v]

    def __call__(self, e: GradedExpr) -> GradedExpr:
        odd = self.sig.odd
        p = int(self.parity)
        out: dict = {}
        for m, c in e.terms.items():
            k = len(m)
            after = [0] * (k + 1)
            for i in range(k - 1, -1, -1):
                after[i] = after[i + 1] + (1 if odd[m[i].sym] else 0)
            for i, f in enumerate(m):
                img = self.image(f)
                if not img.terms:
                    continue
                sign = -1 if (p and after[i + 1] & 1) else 1
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
        return GradedExpr(self.sig, out)


def delta_bar(E: EulerLagrange) -> RightDerivation:
    """s-bar_A -> E_A."""
    sig = E.sig
    amap = antifield_map(sig)
    images = {amap[a]: e for a, e in E.components.items() if a in amap and sig.symbols[a].role is Role.FIELD}
    return RightDerivation(sig, images)


def noether_identity_residual(delta: IdentityDensity, E: EulerLagrange) -> GradedExpr:
    return delta_bar(E)(delta.total)


def check_noether_identity(delta: IdentityDensity, E: EulerLagrange) -> bool:
    return not noether_identity_residual(delta, E).terms


def derive_identities_from_gauge(g: GaugeSymmetry, E: EulerLagrange,
                                 check_symmetry: bool = True) -> list[IdentityDensity]:
    """Stage-0 identities Delta_r = sum eta(u^A_r)^L s-bar_{L A}, one per ghost."""
    sig = g.sig
    amap = antifield_map(sig)
    u = g.derivation
    acc: dict = {}
    for a, comp in u.vertical.items():
        add_into(acc, (comp * E.get(a)).terms)
    uE = GradedExpr(sig, acc)
    if check_symmetry and not is_variationally_trivial(uE):
        raise NotASymmetry("u^A E_A is not variationally trivial")
    out = []
    for r in g.ghosts:
        direct = variational_derivative(uE, r, "left")
        dacc: dict = {}
        for a in u.vertical:
            fam = g.coefficient_family(a, r)
            if not fam:
                continue
            if a not in amap:
                raise GradingMismatch(f"field {sig.symbols[a].name} has no antifield")
            for mi, coef in eta_family(fam).items():
                bar = GradedExpr(sig, {(JetVar(amap[a], mi),): Fraction(1)})
                add_into(dacc, (coef * bar).terms)
        delta = IdentityDensity(0, amap.get(r), GradedExpr(sig, dacc))
        if delta_bar(E)(delta.expression) != direct:
            raise AssertionError("eta normal form disagrees with the direct variational derivative")
        out.append(delta)
    return out


def relative_sign(a: GradedExpr, b: GradedExpr) -> int | None:
    """+1 if a == b, -1 if a == -b, else None (zero expressions compare as +1)."""
    if a == b:
        return 1
    if a == -b:
        return -1
    return None


@dataclass(frozen=True)
class KoszulTate:
    sig: Signature
    tower: tuple
    delta: RightDerivation = field(compare=False)

    def apply(self, e: GradedExpr) -> GradedExpr:
        return self.delta(e)

    def generators(self) -> list[int]:
        return sorted(self.delta.images)


def build_koszul_tate(sig: Signature, E: EulerLagrange, tower: Sequence[IdentityDensity]) -> KoszulTate:
    syms = sig.symbols
    images: dict[int, GradedExpr] = {}
    amap = antifield_map(sig)
    for a, e in E.components.items():
        if syms[a].role is Role.FIELD and a in amap:
            images[amap[a]] = e
    for d in tower:
        if d.antifield is None:
            raise GradingMismatch(f"identity at {d.label()} is not paired with an antifield")
        bar = syms[d.antifield]
        expr = d.total
        if bar.role is not Role.NOETHER_ANTIFIELD or bar.stage != d.stage:
            raise GradingMismatch(f"{bar.name} is not a stage-{d.stage} Noether antifield")
        p = expr.parity()
        if expr.terms and (p is None or int(p) == int(bar.parity)):
            raise GradingMismatch(f"{bar.name}: parity must be opposite to its identity density")
        afs = expr.antifield_numbers()
        if expr.terms and afs != {bar.antifield_number - 1}:
            raise GradingMismatch(
                f"{bar.name}: identity has antifield numbers {sorted(afs)}, expected {bar.antifield_number - 1}"
            )
        images[d.antifield] = expr
    return KoszulTate(sig, tuple(tower), RightDerivation(sig, images))


@dataclass(frozen=True)
class NilpotencyReport:
    residuals: Mapping[str, GradedExpr]
    stages: Mapping[str, int]

    @property
    def ok(self) -> bool:
        return not any(e.terms for e in self.residuals.values())

    def failures(self) -> dict[str, GradedExpr]:
        return {k: e for k, e in self.residuals.items() if e.terms}


def check_kt_nilpotency(kt: KoszulTate) -> NilpotencyReport:
    res, stages = {}, {}
    for z in kt.generators():
        name = kt.sig.symbols[z].name
        once = kt.delta.image(JetVar(z, ()))
        res[name] = kt.apply(once)
        stages[name] = kt.sig.symbols[z].stage
    return NilpotencyReport(res, stages)
