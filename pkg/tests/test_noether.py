import pytest

from gvc.errors import GradingMismatch, NotASymmetry
from gvc.jetcalc import GradedDerivation
from gvc.kernel import Parity
from gvc.models import bf_theory, chern_simons_3d, maxwell, yang_mills
from gvc.noether import (
    IdentityDensity,
    build_koszul_tate,
    check_kt_nilpotency,
    check_noether_identity,
    derive_identities_from_gauge,
    noether_identity_residual,
    relative_sign,
)
from gvc.brst import extended_lagrangian
from gvc.symmetry import GaugeSymmetry, lie_derivative_density
from gvc.variational import euler_lagrange

YM = yang_mills("su2", 3)


def _E(m):
    return euler_lagrange(m.lagrangian)


@pytest.mark.parametrize("model", [YM, maxwell(3), chern_simons_3d(), bf_theory(4, 1)], ids=lambda m: m.name)
def test_declared_identities_hold_off_shell(model):
    E = _E(model)
    for d in model.identities:
        assert check_noether_identity(d, E), d.label()


@pytest.mark.parametrize("model, sign", [(YM, -1), (maxwell(3), -1), (chern_simons_3d(), 1)],
                         ids=["ym", "maxwell", "cs"])
def test_identities_derived_from_the_gauge_symmetry(model, sign):
    E = _E(model)
    g = GaugeSymmetry(model.gauge[0], model.stage_ghosts(0))
    declared = {d.antifield: d.expression for d in model.identities if d.stage == 0}
    derived = derive_identities_from_gauge(g, E)
    assert len(derived) == len(declared)
    for d in derived:
        assert relative_sign(d.expression, declared[d.antifield]) == sign


@pytest.mark.parametrize("model", [YM, chern_simons_3d(), bf_theory(4, 1), bf_theory(6, 1)], ids=lambda m: m.name)
def test_koszul_tate_is_nilpotent_and_a_symmetry_of_the_extended_lagrangian(model):
    E = _E(model)
    kt = build_koszul_tate(model.sig, E, model.identities)
    rep = check_kt_nilpotency(kt)
    assert rep.ok, rep.failures()
    Le = extended_lagrangian(model.lagrangian, model.identities)
    D = GradedDerivation(model.sig, {}, dict(kt.delta.images), parity=Parity.ODD)
    assert lie_derivative_density(D, Le).is_zero()


def test_bf_tower_reaches_every_stage():
    kt = build_koszul_tate(bf_theory(6, 1).sig, _E(bf_theory(6, 1)), bf_theory(6, 1).identities)
    assert set(check_kt_nilpotency(kt).stages.values()) >= {0, 1}


def test_corrupted_identity_is_detected():
    E = _E(YM)
    d = YM.identities[0]
    bad = IdentityDensity(d.stage, d.antifield, d.expression + YM.sig.var("abar[1,0]"))
    assert not check_noether_identity(bad, E)
    assert noether_identity_residual(bad, E) == E["a[1,0]"]


def test_identity_grading_is_checked():
    d = YM.identities[0]
    wrong = IdentityDensity(0, YM.sig.index("abar[1,0]"), d.expression)
    with pytest.raises(GradingMismatch):
        build_koszul_tate(YM.sig, _E(YM), [wrong])
    unpaired = IdentityDensity(0, None, d.expression)
    with pytest.raises(GradingMismatch):
        build_koszul_tate(YM.sig, _E(YM), [unpaired])


def test_non_symmetry_has_no_identities():
    sig = YM.sig
    u = GradedDerivation.by_name(sig, {"a[1,0]": sig.var("c[1]") * sig.var("a[1,1]")})
    with pytest.raises(NotASymmetry):
        derive_identities_from_gauge(GaugeSymmetry(u, YM.stage_ghosts(0)), _E(YM))


def test_relative_sign():
    a = YM.sig.var("a[1,0]")
    assert relative_sign(a, a) == 1
    assert relative_sign(a, -a) == -1
    assert relative_sign(a, a.scale(2)) is None
