from fractions import Fraction

import pytest

from gvc.errors import BadAlgebra, BadShape
from gvc.models import (
    Algebra,
    bf_theory,
    chern_simons_3d,
    chern_simons_primed_identity,
    get_algebra,
    maxwell,
    validate_algebra,
    yang_mills,
)
from gvc.models.base import comp_name, levi_civita, metric_diag, perm_sign
from gvc.models.builders import bf_shape, bf_tower_names
from gvc.noether import check_noether_identity, delta_bar
from gvc.variational import euler_lagrange, is_variationally_trivial


def test_helpers():
    assert comp_name("a", (1, 0)) == "a[1,0]"
    assert comp_name("y", ()) == "y"
    assert perm_sign((2, 1, 3)) == -1
    assert levi_civita(3)[(1, 2, 0)] == 1
    assert metric_diag("minkowski", 3) == (1, -1, -1)
    assert metric_diag("euclidean", 2) == (1, 1)


def test_algebras():
    su2 = get_algebra("su2")
    assert su2.fc(1, 2, 3) == 1 and su2.fc(1, 3, 2) == -1 and su2.h(2, 2) == 1
    with pytest.raises(BadAlgebra):
        get_algebra("e8")
    broken = {(1, 1, 2): 1, (1, 2, 1): -1, (2, 1, 3): 1, (2, 3, 1): -1}
    with pytest.raises(BadAlgebra, match="Jacobi"):
        validate_algebra(3, broken)
    with pytest.raises(BadAlgebra, match="antisymmetric"):
        validate_algebra(2, {(1, 1, 2): 1})
    with pytest.raises(BadAlgebra, match="ad-invariant"):
        get_algebra(Algebra("x", 3, dict(su2.f), {(1, 1): Fraction(1)}))


def test_yang_mills_in_two_dimensions():
    m = yang_mills("su2", 2)
    E = euler_lagrange(m.lagrangian)
    assert set(E.nonzero()) == {comp_name("a", (r, mu)) for r in (1, 2, 3) for mu in (0, 1)}
    assert all(check_noether_identity(d, E) for d in m.identities)
    with pytest.raises(BadShape):
        yang_mills("su2", 1)


def test_maxwell_is_the_abelian_case():
    assert maxwell(4).name == "maxwell"
    assert maxwell(4).structure() == yang_mills("u1", 4).structure()
    assert not maxwell(4).gamma


def test_abelian_chern_simons_field_equation():
    m = chern_simons_3d("u1")
    E = euler_lagrange(m.lagrangian)
    eps = levi_civita(3)
    for mu in range(3):
        want = m.sig.zero
        for (a, nu, rho), s in eps.items():
            if a == mu:
                F = m.sig.var(comp_name("a", (1, rho)), nu) - m.sig.var(comp_name("a", (1, nu)), rho)
                want = want + F.scale(s)
        assert E[comp_name("a", (1, mu))] == want


def _cs_strength(sig, alg, r, lam, mu):
    e = sig.var(comp_name("a", (r, mu)), lam) - sig.var(comp_name("a", (r, lam)), mu)
    for p in (1, 2, 3):
        for q in (1, 2, 3):
            if alg.fc(r, p, q):
                e = e + sig.var(comp_name("a", (p, lam))) * sig.var(comp_name("a", (q, mu))) * alg.fc(r, p, q)
    return e


def test_chern_simons_primed_identity_is_koszul_tate_exact():
    m = chern_simons_3d()
    sig, alg = m.sig, get_algebra("su2")
    dbar = delta_bar(euler_lagrange(m.lagrangian))
    bar = lambda r, lam: sig.var(comp_name("abar", (r, lam)))
    eps = levi_civita(3)
    for mu in range(3):
        d = chern_simons_primed_identity(m, mu)
        assert not dbar(d).terms
        want = sig.zero
        for r in (1, 2, 3):
            for lam in range(3):
                want = want + _cs_strength(sig, alg, r, lam, mu) * bar(r, lam)
        assert d == want
        H = sig.zero
        for (lam, m2, nu), s in eps.items():
            if m2 == mu:
                for r in (1, 2, 3):
                    H = H + (bar(r, nu) * bar(r, lam)).scale(Fraction(-s, 4))
        assert dbar(H) == d


def test_bf_shapes():
    assert bf_shape(4, 1) == 2 and bf_shape(6, 1) == 4 and bf_shape(5, 2) == 2
    for n, p in ((4, 0), (4, 2), (6, 2), (3, 1)):
        with pytest.raises(BadShape):
            bf_theory(n, p)
    assert bf_tower_names(4, 1) == [("e0", 0, 0), ("xi0", 1, 0), ("xi1", 0, 1)]


def test_bf_lagrangian_and_field_content():
    m = bf_theory(4, 1)
    names = {d.name for d in m.sig.symbols}
    assert {"A[0]", "B[0,1]", "e0", "xi0[2]", "xi1", "xi1bar"} <= names
    assert "B[1,0]" not in names
    assert not is_variationally_trivial(m.lagrangian)
    assert len(m.gauge) == 2 and [d.stage for d in m.identities] == sorted(d.stage for d in m.identities)


def test_ghost_accessors():
    m = bf_theory(4, 1)
    assert {m.sig.symbols[g].name for g in m.stage_ghosts(1)} == {"xi1"}
    assert len(m.ghosts) == 1 + 4 + 1
