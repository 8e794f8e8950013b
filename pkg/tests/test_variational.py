from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import RandomPolys, mixed_signature
from gvc.errors import NotTrivial
from gvc.jetcalc import HForm, dH, total_derivative, total_derivative_multi
from gvc.kernel import Role, Signature, SymbolDecl
from gvc.variational import (
    dH_antiderivative,
    decomposition_residual,
    eta_family,
    euler_lagrange,
    higher_euler_eta,
    lepage_coefficients,
    lepage_equivalent,
    variational_triviality,
    verify_variational_decomposition,
)

SIG = mixed_signature(2)


def test_el_of_free_particle(sig1):
    y0 = sig1.var("y", 0)
    assert euler_lagrange((y0 * y0).scale(Fraction(1, 2)))["y"] == -sig1.var("y", 0, 0)


def test_el_of_wave_equation():
    sig = Signature(2, [SymbolDecl("y", Role.FIELD)])
    y0, y1 = sig.var("y", 0), sig.var("y", 1)
    L = (y0 * y0 - y1 * y1).scale(Fraction(1, 2))
    assert euler_lagrange(L)["y"] == sig.var("y", 1, 1) - sig.var("y", 0, 0)


def test_el_with_odd_fields_left_and_right():
    psi, chi0 = SIG.var("psi"), SIG.var("chi", 0)
    L = psi * chi0
    el_left = euler_lagrange(L)
    assert el_left["psi"] == chi0
    assert el_left["chi"] == SIG.var("psi", 0)
    assert euler_lagrange(L, side="right")["psi"] == -chi0


def test_lepage_of_second_order_lagrangian(sig1):
    y = sig1.index("y")
    L = sig1.var("y", 0, 0) * sig1.var("y", 0, 0) * Fraction(1, 2)
    F = lepage_coefficients(L)
    assert F == {(y, (0,), 0): sig1.var("y", 0, 0), (y, (), 0): -sig1.var("y", 0, 0, 0)}
    assert lepage_equivalent(L).components[(y, (), ())] == -sig1.var("y", 0, 0, 0)
    assert euler_lagrange(L)["y"] == sig1.var("y", 0, 0, 0, 0)


def test_lepage_of_first_order_lagrangian_is_the_momentum(sig1):
    y0 = sig1.var("y", 0)
    assert lepage_coefficients(y0 * y0 * Fraction(1, 2)) == {(sig1.index("y"), (), 0): y0}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_decomposition_on_random_even_lagrangians(seed):
    L = RandomPolys(SIG, seed).even(2, 3, terms=4)
    assert verify_variational_decomposition(L)
    assert verify_variational_decomposition(HForm.density(L))


def test_decomposition_residual_is_a_contact_form(sig1):
    L = sig1.var("y", 0) * sig1.var("y") * sig1.x(0)
    assert not decomposition_residual(L).components


def test_total_divergence_is_trivial():
    r = RandomPolys(SIG, 7)
    phi = total_derivative(r.poly(), 0) + total_derivative(r.poly(), 1)
    assert variational_triviality(phi).trivial


def test_triviality_reports_residual(sig1):
    t = variational_triviality(sig1.var("y") * sig1.var("y"))
    assert not t.trivial and set(t.residual) == {"y"}


def test_odd_density_carries_no_closed_form_caveat():
    t = variational_triviality(total_derivative(SIG.var("psi") * SIG.var("u"), 0))
    assert t.trivial and not t.modulo_closed_forms


def test_antiderivative_of_known_divergence(sig1):
    y = sig1.var("y")
    xi = dH_antiderivative(sig1.var("y", 0) * y)
    assert xi.components == {(): (y * y).scale(Fraction(1, 2))}


def test_antiderivative_integrates_field_free_terms():
    sig = Signature(2, [SymbolDecl("y", Role.FIELD)])
    phi = sig.const(Fraction(1, 3)) + sig.x(1) * sig.var("y", 1) + sig.var("y")
    xi = dH_antiderivative(phi)
    assert dH(xi).coefficient() == phi


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_antiderivative_recovers_a_random_divergence(seed):
    r = RandomPolys(SIG, seed)
    J = HForm.current({0: r.poly(1, 2, 3, x_prob=0), 1: r.poly(1, 2, 3, x_prob=0)})
    phi = dH(J)
    xi = dH_antiderivative(phi)
    assert dH(xi) == phi


def test_antiderivative_refuses_nontrivial_density(sig1):
    with pytest.raises(NotTrivial):
        dH_antiderivative(sig1.var("y") * sig1.var("y"))


def test_eta_in_one_dimension(sig1):
    g, h = sig1.var("y"), sig1.var("y", 0) * sig1.var("y")
    eta = eta_family({(): g, (0,): h})
    assert eta[()] == g - total_derivative(h, 0)
    assert eta[(0,)] == -h


def test_eta_binomial_weight(sig1):
    f = sig1.var("y")
    assert higher_euler_eta({(0, 0, 0): f}, (0,)) == total_derivative_multi(f, (0, 0)).scale(-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_eta_is_an_involution(seed):
    f = RandomPolys(SIG, seed).family(3, 3, max_order=1, max_degree=2, terms=2)
    f = {K: e for K, e in f.items() if e.terms}
    if not f:
        return
    back = eta_family(eta_family(f))
    assert {K: e for K, e in back.items() if e.terms} == f


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_eta_is_the_formal_adjoint(seed):
    r = RandomPolys(SIG, seed)
    f = r.family(3, 3, max_order=1, max_degree=2, terms=2)
    phi = r.poly(1, 2, 3)
    if not any(e.terms for e in f.values()):
        return
    lhs = SIG.zero
    for K, fk in f.items():
        lhs = lhs + fk * total_derivative_multi(phi, K)
    rhs = SIG.zero
    for Lam, e in eta_family(f).items():
        t = total_derivative_multi(e * phi, Lam)
        rhs = rhs + (t.scale(-1) if len(Lam) % 2 else t)
    assert lhs == rhs
