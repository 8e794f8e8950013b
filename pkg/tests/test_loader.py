import pytest

from gvc.errors import ParseError, ValidationError
from gvc.models import bf_theory, chern_simons_3d, maxwell, yang_mills
from gvc.models.loader import load_model, parse_model, shipped_files
from gvc.variational import euler_lagrange

SCALAR = """model "scalar";
dim 2;
metric minkowski;
index mu, nu = 0..1;
field y parity even;
lagrangian = 1/2 * eta(mu,nu) * y[;mu] * y[;nu];
"""


def test_scalar_model():
    m = parse_model(SCALAR, "scalar.gvc")
    assert m.name == "scalar"
    assert str(m.lagrangian) == "1/2*y_0^2 - 1/2*y_1^2"
    assert euler_lagrange(m.lagrangian)["y"] == m.sig.var("y", 1, 1) - m.sig.var("y", 0, 0)


@pytest.mark.parametrize("stem, build", [
    ("yang_mills_su2", lambda: yang_mills("su2", 4)),
    ("maxwell", lambda: maxwell(4)),
    ("chern_simons_su2", lambda: chern_simons_3d("su2")),
    ("bf_4_1", lambda: bf_theory(4, 1)),
])
def test_shipped_files_match_builders(stem, build):
    assert load_model(shipped_files()[stem]).structure() == build().structure()


def _err(text):
    with pytest.raises((ParseError, ValidationError)) as info:
        parse_model(text, "bad.gvc")
    return info.value


def test_undeclared_index_range_reports_position():
    e = _err(SCALAR.replace("y[;nu]", "y[;la]"))
    assert isinstance(e, ParseError) and (e.line, e.column) == (6, 45)


def test_missing_semicolon():
    e = _err(SCALAR.replace("dim 2;", "dim 2"))
    assert isinstance(e, ParseError) and e.line == 3


def test_index_used_three_times():
    e = _err(SCALAR.replace("* y[;nu]", "* y[;nu] * y[;mu]"))
    assert isinstance(e, ParseError) and "more than twice" in str(e)


def test_unknown_name():
    e = _err(SCALAR.replace("y[;mu] * y[;nu]", "z[;mu] * y[;nu]"))
    assert isinstance(e, ParseError) and "'z'" in str(e)


def test_odd_field_makes_the_lagrangian_vanish():
    assert isinstance(_err(SCALAR.replace("parity even", "parity odd")), ValidationError)


def test_odd_lagrangian_rejected():
    text = SCALAR.replace("field y parity even;", "field y parity even;\nfield psi parity odd;")
    text = text.replace("y[;mu] * y[;nu]", "y[;mu] * y[;nu] + psi")
    assert isinstance(_err(text), ValidationError)


def test_antifield_parity_must_be_opposite():
    e = _err(SCALAR + "antifield ybar parity even of y;\n")
    assert isinstance(e, ValidationError) and "opposite" in str(e)


def test_even_ghost_gives_an_even_gauge_stage():
    text = SCALAR + "ghost c parity even stage 0;\nantifield cbar parity odd stage 0 of c;\ngauge stage 0: y <- c;\n"
    assert isinstance(_err(text), ValidationError)


def test_constant_symmetry_conflict():
    e = _err(SCALAR + "constant f[mu,nu] = {(0,1): 1, (1,0): 1} with antisym(1,2);\n")
    assert isinstance(e, ValidationError) and "antisym" in str(e)


def test_broken_structure_constants():
    text = SCALAR + "index r, p, q = 1..3;\nconstant f[r,p,q] = {(1,1,2): 1, (2,1,3): 1} with antisym(2,3);\nalgebra f;\n"
    e = _err(text)
    assert isinstance(e, ValidationError) and "Jacobi" in str(e)


def test_unexpected_character():
    e = _err(SCALAR.replace("1/2", "1/2 $"))
    assert isinstance(e, ParseError) and e.line == 6
