"""``gvc``: run checks on shipped or file-defined models."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .brst import (
    assemble_gauge_operator,
    brst_extend,
    build_proper_solution,
    check_brst_nilpotency,
    check_gauge_stage_conditions,
    master_equation_residual,
)
from .errors import GvcError, NotFound, NotNilpotent, ParseError, PreconditionFailed, ValidationError
from .kernel import GradedExpr, grading_filter
from .models import FieldModel, bf_theory, chern_simons_3d, maxwell, yang_mills
from .models.loader import load_model, shipped_files
from .noether import (
    build_koszul_tate,
    check_kt_nilpotency,
    derive_identities_from_gauge,
    noether_identity_residual,
    relative_sign,
)
from .symmetry import (
    GaugeSymmetry,
    lie_derivative_density,
    noether_current,
    superpotential_decompose,
    variational_triviality,
    weak_conservation_check,
)
from .variational import decomposition_residual, euler_lagrange, verify_variational_decomposition

CHECKS = ("el", "decomposition", "symmetry", "current", "superpotential", "noether-id", "derive-id", "kt",
          "gauge-stages", "brst", "master-eq", "proper-solution")

BUILTIN = {
    "yang_mills_su2": lambda: yang_mills("su2", 4),
    "maxwell": maxwell,
    "chern_simons_su2": lambda: chern_simons_3d("su2"),
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["model", "check", "verdict", "bounds", "elapsed_ms"],
    "additionalProperties": False,
    "properties": {
        "model": {"type": "string"},
        "check": {"type": "string", "enum": list(CHECKS)},
        "verdict": {"type": "string", "enum": ["pass", "fail", "inconclusive"]},
        "residual": {"type": "string"},
        "witness": {"type": "object", "additionalProperties": {"type": "string"}},
        "bounds": {
            "type": "object",
            "required": ["order", "degree"],
            "additionalProperties": False,
            "properties": {"order": {"type": ["integer", "null"]}, "degree": {"type": ["integer", "null"]}},
        },
        "elapsed_ms": {"type": "integer", "minimum": 0},
    },
    "allOf": [{"if": {"properties": {"verdict": {"const": "pass"}}}, "then": {"not": {"required": ["residual"]}}}],
}


@dataclass
class CheckReport:
    model: str
    check: str
    verdict: str
    residual: str | None = None
    witness: dict | None = None
    bounds: dict = field(default_factory=lambda: {"order": None, "degree": None})
    elapsed_ms: int = 0
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"model": self.model, "check": self.check, "verdict": self.verdict, "bounds": dict(self.bounds),
               "elapsed_ms": self.elapsed_ms}
        if self.residual is not None and self.verdict != "pass":
            out["residual"] = self.residual
        if self.witness:
            out["witness"] = {k: str(v) for k, v in self.witness.items()}
        return out


def dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def resolve_model(ref: str) -> FieldModel:
    if ref in BUILTIN:
        return BUILTIN[ref]()
    if ref.startswith("bf:"):
        parts = ref.split(":")
        if len(parts) != 3 or not all(p.isdigit() for p in parts[1:]):
            raise ValidationError(f"model reference {ref!r} must look like bf:<n>:<p>")
        return bf_theory(int(parts[1]), int(parts[2]))
    path = Path(ref[5:] if ref.startswith("file:") else ref)
    if path.suffix != ".gvc" and not path.exists() and path.stem in shipped_files():
        path = shipped_files()[path.stem]
    if not path.exists():
        known = ", ".join(sorted(BUILTIN)) + ", bf:<n>:<p>"
        raise ValidationError(f"unknown model {ref!r} (built-ins: {known}; or a .gvc path)")
    return load_model(path)


def _render(parts: dict[str, GradedExpr]) -> str:
    return "\n".join(f"{k}: {v}" for k, v in parts.items() if v.terms)


class Runner:
    def __init__(self, model: FieldModel, max_order: int | None, max_degree: int | None):
        self.m = model
        self.order, self.degree = max_order, max_degree
        self._E = None

    @property
    def E(self):
        if self._E is None:
            self._E = euler_lagrange(self.m.lagrangian)
        return self._E

    def run(self, check: str) -> CheckReport:
        t0 = time.perf_counter()
        rep = CheckReport(self.m.name, check, "pass", bounds={"order": self.order, "degree": self.degree})
        fn: Callable = getattr(self, "c_" + check.replace("-", "_"))
        try:
            fn(rep)
        except NotFound as e:
            rep.verdict, rep.residual = "inconclusive", None
            rep.notes.append(str(e))
        except (PreconditionFailed, NotNilpotent) as e:
            rep.verdict = "fail"
            rep.residual = rep.residual or str(e)
        rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
        return rep

    def _gauge(self):
        if not self.m.gauge:
            raise PreconditionFailed("model declares no gauge symmetry")
        return GaugeSymmetry(self.m.gauge[0], self.m.stage_ghosts(0))

    def _brst(self):
        gop = assemble_gauge_operator(self.m.sig, self.m.gauge, self.m.identities)
        return brst_extend(gop, self.m.gamma)

    def c_el(self, rep):
        for name, e in self.E.nonzero().items():
            rep.notes.append(f"E[{name}] = {e}")

    def c_decomposition(self, rep):
        if not verify_variational_decomposition(self.m.lagrangian):
            rep.verdict, rep.residual = "fail", str(decomposition_residual(self.m.lagrangian))

    def c_symmetry(self, rep):
        g = self._gauge()
        lie = lie_derivative_density(g.derivation, self.m.lagrangian)
        if not lie.terms:
            rep.notes.append("exact symmetry: Lie derivative vanishes")
            return
        v = variational_triviality(lie)
        if v.trivial:
            rep.notes.append("variational symmetry: Lie derivative is d_H-exact")
        else:
            rep.verdict = "fail"
            rep.residual = _render({f"E[{k}]": e for k, e in v.residual.items()})

    def c_current(self, rep):
        g = self._gauge()
        J = noether_current(g.derivation, self.m.lagrangian, self.order, self.degree)
        w = weak_conservation_check(J, self.E, self.order, self.degree)
        rep.witness = w.render(self.m.sig)

    def c_superpotential(self, rep):
        g = self._gauge()
        J = noether_current(g.derivation, self.m.lagrangian, self.order, self.degree)
        res = superpotential_decompose(J, g, self.E, self.order, self.degree)
        wit = {}
        for mu, w in res.witnesses.items():
            for k, v in w.render(self.m.sig).items():
                wit[f"W{mu}:{k}"] = v
        if not res.U.is_antisymmetric():
            rep.verdict, rep.residual = "fail", "U is not antisymmetric"
        rep.witness = wit

    def c_noether_id(self, rep):
        if not self.m.identities:
            raise PreconditionFailed("model declares no Noether identities")
        res = {d.label(): noether_identity_residual(d, self.E) for d in self.m.identities if d.stage == 0}
        if any(e.terms for e in res.values()):
            rep.verdict, rep.residual = "fail", _render(res)

    def c_derive_id(self, rep):
        derived = derive_identities_from_gauge(self._gauge(), self.E)
        declared = {d.antifield: d for d in self.m.identities if d.stage == 0}
        signs, bad = set(), {}
        for d in derived:
            if d.antifield in declared:
                s = relative_sign(d.expression, declared[d.antifield].expression)
                signs.add(s)
                if s is None:
                    bad[d.label()] = d.expression - declared[d.antifield].expression
            rep.notes.append(f"{d.label()}: {d.expression}")
        if bad or len(signs) > 1:
            rep.verdict = "fail"
            rep.residual = _render(bad) or "derived identities differ from the declared ones by mixed signs"
        elif signs:
            rep.notes.append(f"derived = {signs.pop():+d} x declared")

    def c_kt(self, rep):
        kt = build_koszul_tate(self.m.sig, self.E, self.m.identities)
        r = check_kt_nilpotency(kt)
        if not r.ok:
            rep.verdict, rep.residual = "fail", _render(r.failures())
        else:
            rep.notes.append(f"nilpotent on {len(r.residuals)} generators, stages {sorted(set(r.stages.values()))}")

    def c_gauge_stages(self, rep):
        gop = assemble_gauge_operator(self.m.sig, self.m.gauge, self.m.identities)
        rep.notes.append(f"stage signs against the identity tower: {gop.tower_signs}")
        conds = check_gauge_stage_conditions(gop, self.E, self.order, self.degree)
        wit, res = {}, {}
        for c in conds:
            rep.notes.append(f"stage {c.stage}: {c.status}")
            for name, w in c.witnesses.items():
                wit.update({f"stage{c.stage}:{name}:{k}": v for k, v in w.render(self.m.sig).items()})
            if c.status == "fail":
                res.update({f"stage {c.stage} {k}": e for k, e in c.residuals.items()})
        if any(s is None for s in gop.tower_signs):
            rep.verdict, rep.residual = "fail", "declared gauge stages disagree with the identity tower"
        elif res:
            rep.verdict, rep.residual = "fail", _render(res)
        elif any(c.status == "inconclusive" for c in conds):
            rep.verdict = "inconclusive"
        rep.witness = wit or None

    def c_brst(self, rep):
        r = check_brst_nilpotency(self._brst())
        for lab, ok in r.conditions().items():
            rep.notes.append(f"{lab}: {'ok' if ok else 'violated'}")
        if not r.ok:
            rep.verdict, rep.residual = "fail", _render(r.residuals)

    def c_master_eq(self, rep):
        LE = build_proper_solution(self.m.lagrangian, self._brst())
        res = master_equation_residual(LE)
        if res:
            rep.verdict, rep.residual = "fail", _render({f"E[{k}]": e for k, e in res.items()})

    def c_proper_solution(self, rep):
        LE = build_proper_solution(self.m.lagrangian, self._brst())
        syms = self.m.sig.symbols
        af0 = grading_filter(LE, lambda m: all(syms[f.sym].antifield_number == 0 for f in m))
        total_gh = {sum(syms[f.sym].ghost_number - syms[f.sym].antifield_number for f in m) for m in LE.terms}
        if af0 != self.m.lagrangian or total_gh - {0} or LE.parity() is None or int(LE.parity()):
            rep.verdict = "fail"
            rep.residual = str(LE)
        else:
            rep.notes.append(f"L_E = {LE}")


def _print(rep: CheckReport, quiet: bool, out) -> None:
    if quiet:
        return
    head = f"[{rep.verdict.upper():^12}] {rep.check:<16} {rep.model}  ({rep.elapsed_ms} ms)"
    print(head, file=out)
    for n in rep.notes:
        print(f"    {n}", file=out)
    if rep.residual:
        print("    residual:", file=out)
        for line in rep.residual.splitlines():
            print(f"      {line}", file=out)
    if rep.witness:
        print(f"    witness ({len(rep.witness)} coefficients)", file=out)
        for k, v in list(rep.witness.items())[:12]:
            print(f"      {k} = {v}", file=out)
        if len(rep.witness) > 12:
            print("      ...", file=out)


def exit_code(reports: list[CheckReport]) -> int:
    verdicts = {r.verdict for r in reports}
    if "fail" in verdicts:
        return 1
    if "inconclusive" in verdicts:
        return 3
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="gvc", description="Exact checks for graded Lagrangian field theories.")
    ap.add_argument("check", choices=CHECKS + ("all",))
    ap.add_argument("model", help="yang_mills_su2, maxwell, chern_simons_su2, bf:<n>:<p>, or a .gvc file")
    ap.add_argument("--max-order", type=int, default=None, help="jet-order bound for ansatz searches")
    ap.add_argument("--max-degree", type=int, default=None, help="polynomial-degree bound for ansatz searches")
    ap.add_argument("--json", metavar="PATH", help="also write the report(s) as JSON")
    ap.add_argument("--quiet", action="store_true", help="suppress the human-readable report")
    args = ap.parse_args(argv)
    try:
        model = resolve_model(args.model)
    except ParseError as e:
        print(f"gvc: parse error: {e}", file=sys.stderr)
        return 2
    except GvcError as e:
        print(f"gvc: invalid model: {e}", file=sys.stderr)
        return 2
    runner = Runner(model, args.max_order, args.max_degree)
    checks = CHECKS if args.check == "all" else (args.check,)
    reports = []
    for c in checks:
        try:
            rep = runner.run(c)
        except GvcError as e:
            rep = CheckReport(model.name, c, "fail", residual=f"{type(e).__name__}: {e}",
                              bounds={"order": args.max_order, "degree": args.max_degree})
        reports.append(rep)
        _print(rep, args.quiet, sys.stdout)
    code = exit_code(reports)
    if not args.quiet and len(reports) > 1:
        n = sum(r.verdict == "pass" for r in reports)
        print(f"{n}/{len(reports)} checks passed", file=sys.stdout)
    if args.json:
        data = reports[0].to_json() if args.check != "all" else [r.to_json() for r in reports]
        Path(args.json).write_text(dump_json(data), encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
