import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from gvc.jetcalc import GradedDerivation
from gvc.kernel import GradedExpr, JetVar, Parity, Role, Signature, SymbolDecl


def mixed_signature(n: int) -> Signature:
    return Signature(n, [
        SymbolDecl("u", Role.FIELD),
        SymbolDecl("v", Role.FIELD),
        SymbolDecl("psi", Role.FIELD, Parity.ODD),
        SymbolDecl("chi", Role.FIELD, Parity.ODD),
    ])


class RandomPolys:
    """Seeded generator of random jet polynomials over a signature."""

    def __init__(self, sig: Signature, seed: int = 0):
        self.sig = sig
        self.rng = random.Random(seed)
        self.dyn = sig.dynamic_indices()

    def jet(self, max_order: int) -> GradedExpr:
        r = self.rng
        a = r.choice(self.dyn)
        mi = tuple(sorted(r.randrange(self.sig.dim) for _ in range(r.randint(0, max_order))))
        return GradedExpr(self.sig, {(JetVar(a, mi),): Fraction(1)})

    def coeff(self) -> Fraction:
        return Fraction(self.rng.choice([-3, -2, -1, 1, 2, 3]), self.rng.choice([1, 1, 2, 3]))

    def poly(self, max_order: int = 2, max_degree: int = 3, terms: int = 4, x_prob: float = 0.25) -> GradedExpr:
        e = self.sig.zero
        for _ in range(terms):
            m = self.sig.const(self.coeff())
            for _ in range(self.rng.randint(0, max_degree)):
                m = m * self.jet(max_order)
            if self.rng.random() < x_prob:
                m = m * self.sig.x(self.rng.randrange(self.sig.dim))
            e = e + m
        return e

    def even(self, *a, **kw) -> GradedExpr:
        return self.poly(*a, **kw).split_parity()[0]

    def of_parity(self, p: int, *a, **kw) -> GradedExpr:
        ev, od = self.poly(*a, **kw).split_parity()
        return od if p else ev

    def vertical(self, parity: int, max_order: int = 1, max_degree: int = 2) -> GradedDerivation:
        comps = {}
        for a in self.dyn:
            want = (parity + int(self.sig.symbols[a].parity)) % 2
            comps[a] = self.of_parity(want, max_order, max_degree, terms=3)
        return GradedDerivation(self.sig, {}, comps, parity=Parity(parity))

    def family(self, order: int = 3, size: int = 3, **kw) -> dict:
        out = {}
        for _ in range(size):
            k = self.rng.randint(0, order)
            mi = tuple(sorted(self.rng.randrange(self.sig.dim) for _ in range(k)))
            out[mi] = self.poly(**kw)
        return out


@pytest.fixture
def sig2():
    return mixed_signature(2)


@pytest.fixture
def sig1():
    return Signature(1, [SymbolDecl("y", Role.FIELD)])


def polys(sig: Signature, max_order: int = 2, max_degree: int = 3):
    """Hypothesis strategy for random polynomials over ``sig``."""
    dyn = sig.dynamic_indices()
    jet = st.builds(
        lambda a, mi: JetVar(a, tuple(sorted(mi))),
        st.sampled_from(dyn),
        st.lists(st.integers(0, sig.dim - 1), max_size=max_order),
    )
    coeff = st.fractions(min_value=-4, max_value=4, max_denominator=3).filter(bool)
    mono = st.tuples(coeff, st.lists(jet, max_size=max_degree))
    return st.lists(mono, max_size=4).map(lambda raw: GradedExpr.from_raw(sig, raw))


# --- acceptance summary -------------------------------------------------------

_ACCEPTANCE: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = ("PASS" if report.outcome == "passed" else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        verdict, dur = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{verdict}  {name}  ({dur:.2f} s)")
