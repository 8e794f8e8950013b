"""Gauge operator, BRST extension, antibracket and the classical master equation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import GradingMismatch, MissingTower, NotFound, NotNilpotent, UnpairedVariable
from .jetcalc import GradedDerivation, Prolongation
from .kernel import ANTIFIELD_ROLES, GradedExpr, JetVar, Parity, Role, Signature, add_into, ghost_degree
from .noether import IdentityDensity, antifield_map, relative_sign
from .onshell import Witness, find_witness
from .variational import (
    EulerLagrange,
    eta_family,
    is_variationally_trivial,
    variational_derivative,
    variational_triviality,
)


@dataclass(frozen=True)
class GaugeOperator:
    """Stages u, u^(1), ..., u^(N); stage k acts on fields (k=0) or on stage-(k-1) ghosts."""

    stages: tuple
    tower_signs: tuple = ()

    @property
    def sig(self) -> Signature:
        return self.stages[0].sig

    def total(self) -> GradedDerivation:
        out = self.stages[0]
        for s in self.stages[1:]:
            out = out + s
        return out


def gauge_from_tower(sig: Signature, tower: Sequence[IdentityDensity]) -> list[GradedDerivation]:
    """Stage-k components sum c^{r_k}_L eta(Delta^{r_{k-1}}_{r_k})^L."""
    syms = sig.symbols
    by_stage: dict[int, dict[int, dict]] = {}
    for d in tower:
        if d.antifield is None:
            raise MissingTower(f"identity at {d.label()} has no antifield")
        ghost = sig.index(syms[d.antifield].partner)
        fams: dict[int, dict[tuple, GradedExpr]] = {}
        for (bar, mi), coef in d.coefficients().items():
            target = sig.index(syms[bar].partner)
            fams.setdefault(target, {})[mi] = coef
        comps = by_stage.setdefault(d.stage, {})
        for target, fam in fams.items():
            acc = comps.setdefault(target, {})
            for mi, coef in eta_family(fam).items():
                c = GradedExpr(sig, {(JetVar(ghost, mi),): Fraction(1)})
                add_into(acc, (c * coef).terms)
    out = []
    for k in sorted(by_stage):
        comps = {a: GradedExpr(sig, t) for a, t in by_stage[k].items()}
        out.append(GradedDerivation(sig, {}, comps, parity=Parity.ODD))
    return out


def derivation_relative_sign(a: GradedDerivation, b: GradedDerivation) -> int | None:
    keys = set(a.vertical) | set(b.vertical)
    signs = {relative_sign(a.component(k), b.component(k)) for k in keys}
    if not keys:
        return 1
    if len(signs) == 1:
        return signs.pop()
    return None


def assemble_gauge_operator(sig: Signature, declared: Sequence[GradedDerivation] | None,
                            tower: Sequence[IdentityDensity] | None) -> GaugeOperator:
    """Declared stages are used when present and compared with the tower stage by stage.

    ``tower_signs`` records, per stage, whether declared == tower-built (+1),
    declared == -(tower-built) (-1), or neither (None).
    """
    built = gauge_from_tower(sig, tower) if tower else []
    if declared:
        signs = tuple(derivation_relative_sign(d, b) for d, b in zip(declared, built))
        return GaugeOperator(tuple(declared), signs)
    if not built:
        raise MissingTower("model declares neither gauge stages nor an identity tower")
    return GaugeOperator(tuple(built), tuple(1 for _ in built))


@dataclass(frozen=True)
class StageCondition:
    stage: int
    residuals: Mapping[str, GradedExpr]
    status: str  # "off-shell", "on-shell", "inconclusive", "fail"
    witnesses: Mapping[str, Witness] = field(default_factory=dict)


def check_gauge_stage_conditions(gop: GaugeOperator, E: EulerLagrange, max_order: int | None = None,
                                 max_degree: int | None = None) -> list[StageCondition]:
    """u^(k+1)(u^(k)) per stage, zero off-shell or with an on-shell witness."""
    out = []
    sig = gop.sig
    for k in range(len(gop.stages) - 1):
        P = Prolongation(gop.stages[k + 1])
        res = {}
        for a, comp in sorted(gop.stages[k].vertical.items()):
            res[sig.symbols[a].name] = P(comp)
        nonzero = {n: e for n, e in res.items() if e.terms}
        if not nonzero:
            out.append(StageCondition(k, res, "off-shell"))
            continue
        wits, status = {}, "on-shell"
        for n, e in nonzero.items():
            try:
                wits[n] = find_witness(e, E, max_order, max_degree)
            except NotFound:
                status = "inconclusive"
        out.append(StageCondition(k, res, status, wits))
    return out


@dataclass(frozen=True)
class BrstOperator:
    gauge: GaugeOperator
    gamma: Mapping[int, GradedExpr]
    derivation: GradedDerivation

    @property
    def sig(self) -> Signature:
        return self.derivation.sig


def brst_extend(gop: GaugeOperator, gamma: Mapping[int, GradedExpr]) -> BrstOperator:
    sig = gop.sig
    syms = sig.symbols
    for r, e in gamma.items():
        if syms[r].role is not Role.GHOST:
            raise GradingMismatch(f"gamma term on non-ghost {syms[r].name}")
        if e.antifield_numbers() - {0}:
            raise GradingMismatch(f"gamma term for {syms[r].name} contains antifields")
        if e.terms and e.ghost_numbers() != {syms[r].ghost_number + 1}:
            raise GradingMismatch(f"gamma term for {syms[r].name} does not raise ghost number by 1")
        if any(ghost_degree(sig, m) < 2 for m in e.terms):
            raise GradingMismatch(f"gamma term for {syms[r].name} has ghost degree below 2")
    total = gop.total()
    if gamma:
        total = total + GradedDerivation(sig, {}, dict(gamma), parity=Parity.ODD)
    if total.parity is not Parity.ODD:
        raise GradingMismatch("BRST operator must be odd")
    for a, e in total.vertical.items():
        if e.antifield_numbers() - {0}:
            raise GradingMismatch("BRST operator must be antifield-free")
        if e.terms and e.ghost_numbers() != {syms[a].ghost_number + 1}:
            raise GradingMismatch(f"component on {syms[a].name} has wrong ghost number")
    return BrstOperator(gop, dict(gamma), total)


LABELS = {1: "gauge-stage conditions", 2: "commutation relations", 3: "Jacobi identities"}


@dataclass(frozen=True)
class BrstReport:
    residuals: Mapping[str, GradedExpr]
    by_degree: Mapping[int, Mapping[str, GradedExpr]]

    @property
    def ok(self) -> bool:
        return not any(e.terms for e in self.residuals.values())

    def conditions(self) -> dict[str, bool]:
        out = {}
        for deg, lab in LABELS.items():
            parts = [e for d, m in self.by_degree.items() if (d >= 3 if deg == 3 else d == deg)
                     for e in m.values()]
            out[lab] = not any(e.terms for e in parts)
        return out


def check_brst_nilpotency(b: BrstOperator) -> BrstReport:
    sig = b.sig
    P = Prolongation(b.derivation)
    res, by_deg = {}, {}
    for i, d in enumerate(sig.symbols):
        if d.role not in (Role.FIELD, Role.GHOST):
            continue
        r = P(P.image(JetVar(i, ())))
        res[d.name] = r
        parts: dict[int, dict] = {}
        for m, c in r.terms.items():
            parts.setdefault(ghost_degree(sig, m), {})[m] = c
        for deg, t in parts.items():
            by_deg.setdefault(deg, {})[d.name] = GradedExpr(sig, t)
    return BrstReport(res, by_deg)


# --- antibracket ------------------------------------------------------------------


def _pairs(sig: Signature, exprs: Sequence[GradedExpr]) -> list[tuple[int, int]]:
    amap = antifield_map(sig)
    used = set()
    for e in exprs:
        used |= e.symbols_used()
    pairs = []
    for s in sorted(used):
        d = sig.symbols[s]
        if d.role in (Role.FIELD, Role.GHOST) and s not in amap:
            raise UnpairedVariable(f"{d.name} has no antifield")
        if d.role in ANTIFIELD_ROLES and d.partner not in sig:
            raise UnpairedVariable(f"{d.name} pairs with undeclared {d.partner}")
    for z, zb in amap.items():
        if z in used or zb in used:
            pairs.append((z, zb))
    return pairs


def antibracket(L1: GradedExpr, L2: GradedExpr) -> GradedExpr:
    """{L1, L2} = dR L1/d zbar . dL2/dz + dR L2/d zbar . dL1/dz."""
    sig = L1.sig
    acc: dict = {}
    for z, zb in _pairs(sig, [L1, L2]):
        r1 = variational_derivative(L1, zb, "right")
        r2 = variational_derivative(L2, zb, "right")
        if r1.terms:
            add_into(acc, (r1 * variational_derivative(L2, z, "left")).terms)
        if r2.terms:
            add_into(acc, (r2 * variational_derivative(L1, z, "left")).terms)
    return GradedExpr(sig, acc)


def master_equation_residual(LE: GradedExpr) -> dict[str, GradedExpr]:
    """Nonzero Euler-Lagrange components of {L_E, L_E}; empty when the master equation holds."""
    return variational_triviality(antibracket(LE, LE)).residual


def check_master_equation(LE: GradedExpr) -> bool:
    return is_variationally_trivial(antibracket(LE, LE))


def proper_solution_terms(b: BrstOperator) -> GradedExpr:
    """sum over fields and ghosts z of b(z) zbar."""
    sig = b.sig
    amap = antifield_map(sig)
    acc: dict = {}
    for z, comp in b.derivation.vertical.items():
        if z not in amap:
            raise UnpairedVariable(f"{sig.symbols[z].name} has no antifield")
        zb = GradedExpr(sig, {(JetVar(amap[z], ()),): Fraction(1)})
        add_into(acc, (comp * zb).terms)
    return GradedExpr(sig, acc)


def build_proper_solution(L: GradedExpr, b: BrstOperator) -> GradedExpr:
    rep = check_brst_nilpotency(b)
    if not rep.ok:
        raise NotNilpotent("BRST operator is not nilpotent")
    return L + proper_solution_terms(b)


def extended_lagrangian(L: GradedExpr, tower: Sequence[IdentityDensity]) -> GradedExpr:
    """L_e = L + sum c^{r_k} Delta_{r_k}."""
    sig = L.sig
    acc = dict(L.terms)
    for d in tower:
        c = GradedExpr(sig, {(JetVar(sig.index(sig.symbols[d.antifield].partner), ()),): Fraction(1)})
        add_into(acc, (c * d.total).terms)
    return GradedExpr(sig, acc)
