from fractions import Fraction

from hypothesis import given, settings, strategies as st

from gvc.linsolve import solve_expr_combination, solve_sparse


def test_small_system():
    x = solve_sparse([{0: 1, 1: 1}, {0: 1, 1: -1}], [3, 1])
    assert x == {0: 2, 1: 1}


def test_inconsistent_system():
    assert solve_sparse([{0: 1}, {0: 2}], [1, 3]) is None


def test_underdetermined_system_sets_free_unknowns_to_zero():
    x = solve_sparse([{0: 1, 1: 1, 2: 1}], [Fraction(5, 2)])
    assert sum(x.values()) == Fraction(5, 2)


def test_combination_of_expressions(sig2):
    u, v = sig2.var("u"), sig2.var("v")
    a = solve_expr_combination([("p", u + v), ("q", u - v)], u.scale(3) + v)
    assert a == {"p": 2, "q": 1}
    assert solve_expr_combination([("p", u)], v) is None


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_consistent_systems(data):
    ncols = data.draw(st.integers(1, 6))
    nrows = data.draw(st.integers(1, 8))
    ints = st.integers(-3, 3)
    rows = [{c: data.draw(ints) for c in range(ncols)} for _ in range(nrows)]
    truth = [Fraction(data.draw(ints), data.draw(st.integers(1, 3))) for _ in range(ncols)]
    rhs = [sum(r[c] * truth[c] for c in r) for r in rows]
    x = solve_sparse(rows, rhs)
    assert x is not None
    for r, b in zip(rows, rhs):
        assert sum(v * x.get(c, 0) for c, v in r.items()) == b
