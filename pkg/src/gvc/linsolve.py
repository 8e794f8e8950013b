"""Exact sparse linear solving for undetermined-coefficient ansatze."""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Hashable, Sequence

from .kernel import GradedExpr


def solve_sparse(rows: Sequence[dict], rhs: Sequence[Fraction]) -> dict | None:
    """A particular solution of ``rows . x = rhs`` (free unknowns set to 0), or ``None``.

    Rows are dicts from integer column to rational.  Elimination keeps every
    pivot row free of columns above its pivot, so each reduction is one
    descending sweep.
    """
    pivots: dict[int, tuple[dict, Fraction]] = {}
    order = sorted(range(len(rows)), key=lambda i: len(rows[i]))
    for i in order:
        row = {c: Fraction(v) for c, v in rows[i].items() if v}
        b = Fraction(rhs[i])
        heap = [-c for c in row]
        heapq.heapify(heap)
        seen = set()
        while heap:
            col = -heapq.heappop(heap)
            if col in seen:
                continue
            seen.add(col)
            f = row.get(col)
            if not f or col not in pivots:
                continue
            prow, pb = pivots[col]
            del row[col]
            for c, v in prow.items():
                nv = row.get(c, 0) - f * v
                if nv:
                    if c not in row:
                        heapq.heappush(heap, -c)
                        seen.discard(c)
                    row[c] = nv
                else:
                    row.pop(c, None)
            b -= f * pb
        if not row:
            if b:
                return None
            continue
        p = max(row)
        inv = 1 / row[p]
        pivots[p] = ({c: v * inv for c, v in row.items() if c != p}, b * inv)
    x: dict[int, Fraction] = {}
    for p in sorted(pivots):
        prow, pb = pivots[p]
        val = pb - sum((v * x.get(c, 0) for c, v in prow.items()), Fraction(0))
        if val:
            x[p] = val
    return x


def solve_expr_combination(
    columns: Sequence[tuple[Hashable, GradedExpr]], target: GradedExpr
) -> dict | None:
    """Rational coefficients a_k with sum a_k * E_k == target, keyed by column label."""
    mono_row: dict = {}
    rows: list[dict] = []
    rhs: list[Fraction] = []

    def row_of(m):
        if m not in mono_row:
            mono_row[m] = len(rows)
            rows.append({})
            rhs.append(Fraction(0))
        return mono_row[m]

    for j, (_, e) in enumerate(columns):
        for m, c in e.terms.items():
            rows[row_of(m)][j] = c
    for m, c in target.terms.items():
        rhs[row_of(m)] = c
    sol = solve_sparse(rows, rhs)
    if sol is None:
        return None
    return {columns[j][0]: v for j, v in sol.items()}
