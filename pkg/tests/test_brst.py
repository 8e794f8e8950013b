from fractions import Fraction

import pytest

from gvc.brst import (
    antibracket,
    assemble_gauge_operator,
    brst_extend,
    build_proper_solution,
    check_brst_nilpotency,
    check_gauge_stage_conditions,
    check_master_equation,
    extended_lagrangian,
    gauge_from_tower,
)
from gvc.errors import GradingMismatch, MissingTower, NotNilpotent, UnpairedVariable
from gvc.kernel import Role, Signature, SymbolDecl
from gvc.models import bf_theory, chern_simons_3d, yang_mills
from gvc.variational import euler_lagrange, is_variationally_trivial

YM = yang_mills("su2", 3)
CS = chern_simons_3d()
BF = bf_theory(4, 1)


def _brst(m, gamma=None):
    gop = assemble_gauge_operator(m.sig, m.gauge, m.identities)
    return brst_extend(gop, m.gamma if gamma is None else gamma)


@pytest.mark.parametrize("model, signs", [(YM, (-1,)), (CS, (1,)), (BF, (-1, -1))], ids=["ym", "cs", "bf"])
def test_tower_signs(model, signs):
    gop = assemble_gauge_operator(model.sig, model.gauge, model.identities)
    assert gop.tower_signs == signs


def test_gauge_operator_built_from_the_tower_alone():
    gop = assemble_gauge_operator(BF.sig, None, BF.identities)
    assert len(gop.stages) == 2
    assert [s.parity.name for s in gauge_from_tower(BF.sig, BF.identities)] == ["ODD", "ODD"]
    with pytest.raises(MissingTower):
        assemble_gauge_operator(BF.sig, None, None)


@pytest.mark.parametrize("model", [YM, CS, BF], ids=lambda m: m.name)
def test_brst_nilpotent_and_master_equation(model):
    b = _brst(model)
    rep = check_brst_nilpotency(b)
    assert rep.ok
    assert all(rep.conditions().values())
    LE = build_proper_solution(model.lagrangian, b)
    assert check_master_equation(LE)


def test_bf_stage_conditions_hold_off_shell():
    gop = assemble_gauge_operator(BF.sig, BF.gauge, BF.identities)
    assert [c.status for c in check_gauge_stage_conditions(gop, euler_lagrange(BF.lagrangian))] == ["off-shell"]


def test_bf_extended_and_proper_solutions_agree_up_to_sign_conventions():
    Le = extended_lagrangian(BF.lagrangian, BF.identities)
    LE = build_proper_solution(BF.lagrangian, _brst(BF))
    assert check_master_equation(Le)
    assert is_variationally_trivial(Le + LE - BF.lagrangian.scale(2))


def test_chern_simons_literal_gamma_is_not_nilpotent():
    lit = chern_simons_3d(literal_gamma=True)
    rep = check_brst_nilpotency(_brst(lit))
    assert not rep.ok
    failing = {k for k, e in rep.residuals.items() if e.terms}
    assert failing and all(k.startswith("a[") for k in failing)
    with pytest.raises(NotNilpotent):
        build_proper_solution(lit.lagrangian, _brst(lit))


def test_corrupted_gamma_breaks_nilpotency():
    gamma = {r: e.scale(2) for r, e in YM.gamma.items()}
    assert not check_brst_nilpotency(_brst(YM, gamma)).ok


def test_corrupted_proper_solution_breaks_master_equation():
    LE = build_proper_solution(YM.lagrangian, _brst(YM))
    sig = YM.sig
    bad = LE + sig.var("c[1]") * sig.var("c[2]") * sig.var("cbar[3]")
    assert not check_master_equation(bad)


def test_degree_one_part_of_the_square_is_the_stage_condition():
    rep = check_brst_nilpotency(_brst(YM, {}))
    assert not rep.ok
    assert rep.conditions()["gauge-stage conditions"]
    assert not rep.conditions()["commutation relations"]


def test_antibracket_is_symmetric_on_even_functionals():
    LE = build_proper_solution(YM.lagrangian, _brst(YM))
    assert antibracket(YM.lagrangian, LE) == antibracket(LE, YM.lagrangian)


def test_gamma_grading_checked():
    sig = YM.sig
    with pytest.raises(GradingMismatch):
        _brst(YM, {sig.index("c[1]"): sig.var("c[2]")})
    with pytest.raises(GradingMismatch):
        _brst(YM, {sig.index("a[1,0]"): sig.var("c[2]") * sig.var("c[3]")})


def test_unpaired_variable():
    sig = Signature(1, [SymbolDecl("y", Role.FIELD)])
    y = sig.var("y")
    with pytest.raises(UnpairedVariable):
        antibracket(y, y * Fraction(2))
