"""Model container, Lie algebra data and small index helpers shared by builders and the loader."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Mapping

from ..errors import BadAlgebra
from ..jetcalc import GradedDerivation
from ..kernel import GradedExpr, Signature
from ..noether import IdentityDensity


def comp_name(base: str, idx) -> str:
    """``a[1,0]`` style component names; bare ``base`` for scalars."""
    idx = tuple(idx)
    return f"{base}[{','.join(map(str, idx))}]" if idx else base


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    s = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def levi_civita(n: int) -> dict[tuple, int]:
    return {p: perm_sign(p) for p in permutations(range(n))}


def metric_diag(kind: str, n: int) -> tuple[int, ...]:
    if kind == "minkowski":
        return (1,) + (-1,) * (n - 1)
    if kind == "euclidean":
        return (1,) * n
    raise ValueError(f"unknown metric {kind!r}")


@dataclass(frozen=True)
class Algebra:
    """Structure constants f^r_{pq} and an invariant form, 1-based indices."""

    name: str
    dim: int
    f: Mapping[tuple, Fraction]
    form: Mapping[tuple, Fraction]

    def fc(self, r: int, p: int, q: int) -> Fraction:
        return self.f.get((r, p, q), Fraction(0))

    def h(self, p: int, q: int) -> Fraction:
        return self.form.get((p, q), Fraction(0))

    def validate(self) -> None:
        validate_algebra(self.dim, self.f, self.form)


def validate_algebra(dim: int, f: Mapping[tuple, Fraction], form: Mapping[tuple, Fraction] | None = None) -> None:
    R = range(1, dim + 1)
    g = lambda r, p, q: f.get((r, p, q), 0)
    for r in R:
        for p in R:
            for q in R:
                if g(r, p, q) != -g(r, q, p):
                    raise BadAlgebra(f"f[{r},{p},{q}] is not antisymmetric in its lower indices")
    for r in R:
        for p in R:
            for q in R:
                for t in R:
                    j = sum(g(r, p, s) * g(s, q, t) + g(r, q, s) * g(s, t, p) + g(r, t, s) * g(s, p, q) for s in R)
                    if j:
                        raise BadAlgebra(f"Jacobi identity fails at ({r},{p},{q},{t})")
    if form is None:
        return
    h = lambda p, q: form.get((p, q), 0)
    for p in R:
        for q in R:
            if h(p, q) != h(q, p):
                raise BadAlgebra(f"invariant form is not symmetric at ({p},{q})")
            for r in R:
                if sum(h(p, s) * g(s, r, q) + h(q, s) * g(s, r, p) for s in R):
                    raise BadAlgebra(f"form is not ad-invariant at ({p},{q},{r})")


def _su2() -> Algebra:
    eps = {}
    for p in permutations((1, 2, 3)):
        eps[p] = Fraction(perm_sign(p))
    return Algebra("su2", 3, eps, {(i, i): Fraction(1) for i in (1, 2, 3)})


ALGEBRAS = {
    "su2": _su2,
    "u1": lambda: Algebra("u1", 1, {}, {(1, 1): Fraction(1)}),
}


def get_algebra(algebra) -> Algebra:
    if isinstance(algebra, Algebra):
        algebra.validate()
        return algebra
    try:
        alg = ALGEBRAS[algebra]()
    except KeyError:
        raise BadAlgebra(f"unknown algebra {algebra!r}; pass an Algebra for custom ones") from None
    alg.validate()
    return alg


@dataclass(frozen=True)
class FieldModel:
    """Everything the checks need about one field theory."""

    name: str
    sig: Signature
    lagrangian: GradedExpr
    gauge: tuple = ()  # GradedDerivation per stage
    identities: tuple = ()  # IdentityDensity tower
    gamma: Mapping[int, GradedExpr] = field(default_factory=dict)
    constants: Mapping[str, Mapping[tuple, Fraction]] = field(default_factory=dict, compare=False)
    metric: str = "minkowski"
    notes: Mapping[str, str] = field(default_factory=dict, compare=False)

    @property
    def ghosts(self) -> tuple[int, ...]:
        from ..kernel import Role

        return tuple(i for i, d in enumerate(self.sig.symbols) if d.role is Role.GHOST)

    def stage_ghosts(self, k: int) -> tuple[int, ...]:
        from ..kernel import Role

        return tuple(i for i, d in enumerate(self.sig.symbols) if d.role is Role.GHOST and d.stage == k)

    def structure(self) -> tuple:
        """Comparable snapshot used to check that two constructions agree."""
        gauge = tuple(tuple(sorted(g.vertical.items())) for g in self.gauge)
        ids = tuple((d.stage, d.antifield, d.expression, d.h_term) for d in self.identities)
        return (self.sig, self.lagrangian, gauge, ids, tuple(sorted(self.gamma.items())))


def gauge_stage(sig: Signature, comps: Mapping[str, GradedExpr]) -> GradedDerivation:
    from ..kernel import Parity

    return GradedDerivation(sig, {}, {sig.index(k): v for k, v in comps.items() if v.terms}, parity=Parity.ODD)


def identity(sig: Signature, stage: int, antifield: str, expr: GradedExpr,
             h_term: GradedExpr | None = None) -> IdentityDensity:
    return IdentityDensity(stage, sig.index(antifield), expr, h_term)
