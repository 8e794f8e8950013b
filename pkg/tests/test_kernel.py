from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import mixed_signature, polys
from gvc.errors import GradingMismatch, UndeclaredSymbol
from gvc.kernel import (
    JetVar,
    Parity,
    Role,
    Signature,
    SymbolDecl,
    ghost_degree,
    partial_derivative,
    substitute,
)

SIG = mixed_signature(2)


def test_base_coordinates_come_first():
    sig = Signature(3, [SymbolDecl("y", Role.FIELD)])
    assert sig.names()[:3] == ["x0", "x1", "x2"]
    assert sig.index("y") == 3


def test_odd_variables_anticommute_and_square_to_zero():
    p, c = SIG.var("psi"), SIG.var("chi")
    assert p * c == -(c * p)
    assert (p * p).is_zero()
    assert (p * c).parity() is Parity.EVEN


def test_jets_of_even_fields_commute():
    a, b = SIG.var("u", 0), SIG.var("v", 1, 0)
    assert a * b == b * a
    assert str(a * a) == "u_0^2"


def test_multi_index_is_symmetric():
    assert SIG.var("u", 1, 0) == SIG.var("u", 0, 1)


def test_left_and_right_derivatives_differ_by_koszul_sign():
    p, c = SIG.var("psi"), SIG.var("chi")
    chi = JetVar(SIG.index("chi"))
    assert partial_derivative(p * c, chi, "left") == -p
    assert partial_derivative(p * c, chi, "right") == p


def test_mixed_parity_sum_has_no_parity():
    assert (SIG.var("psi") + SIG.var("u")).parity() is None


def test_undeclared_symbol():
    with pytest.raises(UndeclaredSymbol):
        SIG.var("nope")


def test_gradings_are_derived_and_checked():
    c = SymbolDecl("c", Role.GHOST, Parity.ODD, stage=1)
    assert c.ghost_number == 2
    bar = SymbolDecl("cbar", Role.NOETHER_ANTIFIELD, Parity.EVEN, stage=1, partner="c")
    assert bar.antifield_number == 3
    with pytest.raises(GradingMismatch):
        SymbolDecl("c", Role.GHOST, Parity.ODD, stage=0, ghost_number=2)
    with pytest.raises(GradingMismatch):
        SymbolDecl("zbar", Role.FIELD_ANTIFIELD, Parity.ODD)


def test_duplicate_symbols_rejected():
    with pytest.raises(GradingMismatch):
        Signature(1, [SymbolDecl("y", Role.FIELD), SymbolDecl("y", Role.FIELD)])


def test_printing_is_deterministic():
    e = SIG.var("v") * Fraction(-1, 2) + SIG.var("u", 1) * SIG.var("u")
    assert str(e) == "u*u_1 - 1/2*v"
    assert str(SIG.zero) == "0"


def test_substitute_and_ghost_degree():
    sig = Signature(1, [SymbolDecl("y", Role.FIELD), SymbolDecl("c", Role.GHOST, Parity.ODD, stage=0)])
    e = sig.var("y") * sig.var("c", 0)
    out = substitute(e, {JetVar(sig.index("y")): sig.var("y") * sig.var("y")})
    assert out == sig.var("y") * sig.var("y") * sig.var("c", 0)
    (m,) = e.terms
    assert ghost_degree(sig, m) == 1


@settings(max_examples=60, deadline=None)
@given(polys(SIG), polys(SIG), polys(SIG))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == SIG.zero


@settings(max_examples=60, deadline=None)
@given(polys(SIG), polys(SIG))
def test_graded_commutativity(a, b):
    a0, a1 = a.split_parity()
    b0, b1 = b.split_parity()
    assert a1 * b1 == -(b1 * a1)
    assert a0 * b1 == b1 * a0
    assert a0 * b0 == b0 * a0


@settings(max_examples=60, deadline=None)
@given(polys(SIG), polys(SIG))
def test_graded_leibniz_for_left_derivative(a, b):
    v = JetVar(SIG.index("psi"))
    a0, a1 = a.split_parity()
    for part, sign in ((a0, 1), (a1, -1)):
        lhs = partial_derivative(part * b, v, "left")
        rhs = partial_derivative(part, v, "left") * b + (part * partial_derivative(b, v, "left")).scale(sign)
        assert lhs == rhs
