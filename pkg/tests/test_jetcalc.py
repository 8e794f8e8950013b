import pytest
from hypothesis import given, settings, strategies as st

from conftest import RandomPolys, mixed_signature, polys
from gvc.errors import DegreeOverflow, GradingMismatch
from gvc.jetcalc import (
    GradedDerivation,
    HForm,
    Prolongation,
    dH,
    dH_contact,
    dV,
    prolong_apply,
    superbracket,
    total_derivative,
    total_derivative_multi,
)
from gvc.kernel import Parity, Role, Signature, SymbolDecl

SIG = mixed_signature(2)


def test_total_derivative_examples(sig1):
    y, y0 = sig1.var("y"), sig1.var("y", 0)
    assert total_derivative(y * y, 0) == (y * y0).scale(2)
    assert total_derivative(sig1.x(0) * y, 0) == y + sig1.x(0) * y0
    assert total_derivative_multi(y, (0, 0)) == sig1.var("y", 0, 0)


def test_divergence_of_a_gradient_current():
    sig = Signature(2, [SymbolDecl("y", Role.FIELD)])
    J = HForm.current({0: sig.var("y", 0), 1: sig.var("y", 1)})
    assert dH(J).coefficient() == sig.var("y", 0, 0) + sig.var("y", 1, 1)
    assert HForm.current(J.to_current()) == J


def test_top_degree_has_no_dH(sig1):
    with pytest.raises(DegreeOverflow):
        dH(HForm.density(sig1.var("y")))


def test_prolongation_with_odd_ghost():
    sig = Signature(1, [SymbolDecl("y", Role.FIELD), SymbolDecl("c", Role.GHOST, Parity.ODD, stage=0)])
    u = GradedDerivation.by_name(sig, {"y": sig.var("c")})
    assert u.parity is Parity.ODD and u.ghost_number == 1
    y, y0 = sig.var("y"), sig.var("y", 0)
    assert prolong_apply(u, y * y0) == sig.var("c") * y0 + y * sig.var("c", 0)


def test_inhomogeneous_derivation_rejected():
    with pytest.raises(GradingMismatch):
        GradedDerivation.by_name(SIG, {"u": SIG.var("psi"), "v": SIG.var("u")})


def test_horizontal_part_enters_vertical_part(sig1):
    u = GradedDerivation(sig1, {0: sig1.const(1)}, {})
    assert u.vertical_part().component(sig1.index("y")) == -sig1.var("y", 0)


def test_superbracket_of_even_fields(sig1):
    y = sig1.var("y")
    u1 = GradedDerivation.by_name(sig1, {"y": y})
    u2 = GradedDerivation.by_name(sig1, {"y": y * y})
    assert superbracket(u1, u2).component(sig1.index("y")) == y * y


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 1), st.integers(0, 1), polys(SIG, 1, 2))
def test_superbracket_acts_as_graded_commutator(seed, p1, p2, e):
    r = RandomPolys(SIG, seed)
    u1, u2 = r.vertical(p1, 1, 2), r.vertical(p2, 1, 2)
    P1, P2 = Prolongation(u1), Prolongation(u2)
    lhs = prolong_apply(superbracket(u1, u2), e)
    rhs = P1(P2(e)) - P2(P1(e)).scale(-1 if p1 * p2 else 1)
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(polys(SIG), st.integers(0, 1), st.integers(0, 1))
def test_total_derivatives_commute(f, a, b):
    assert total_derivative(total_derivative(f, a), b) == total_derivative(total_derivative(f, b), a)


SIG3 = mixed_signature(3)


@settings(max_examples=40, deadline=None)
@given(polys(SIG3), polys(SIG3), polys(SIG3))
def test_bicomplex_relations(f, g, h):
    w0 = HForm(SIG3, 0, {(): f})
    w1 = HForm(SIG3, 1, {(0,): f, (1,): g, (2,): h})
    for w in (w0, w1):
        assert dH(dH(w)).is_zero()
        assert (dV(dH(w)) + dH_contact(dV(w))).is_zero()
