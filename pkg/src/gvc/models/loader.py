"""Reader for ``.gvc`` model files.

A file is a list of ``;``-terminated statements.  Index templates are
expanded eagerly; repeated indices inside one product (or inside one
atom or ``d(...)``) are summed over their declared range.

    model "maxwell";
    dim 4;
    metric minkowski;
    index mu, nu, la = 0..3;
    field a[mu] parity even;
    ghost c parity odd stage 0;
    antifield abar[mu] parity odd of a;
    antifield cbar parity even stage 0 of c;
    def F(la, mu) = a[mu;la] - a[la;mu];
    lagrangian = 1/4 * eta(la,la) * eta(mu,mu) * F(la,mu) * F(la,mu);
    gauge stage 0: a[mu] <- c[;mu];
    identity stage 0 cbar: d(abar[mu], mu);
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any

from ..errors import BadAlgebra, GvcError, ParseError, ValidationError
from ..jetcalc import total_derivative
from ..kernel import GradedExpr, JetVar, Parity, Role, Signature, SymbolDecl
from .base import FieldModel, comp_name, gauge_stage, identity, metric_diag, perm_sign, validate_algebra

# --- lexer ----------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)|(?P<str>"[^"\n]*")|(?P<num>\d+)
    |(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><-|\.\.|[;:,\[\](){}=+\-*/])""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Tok]:
    out, line, start, pos = [], 1, 0, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Tok("eof", "", line, pos - start + 1))
    return out


# --- syntax tree ----------------------------------------------------------------------


@dataclass
class Node:
    loc: tuple
    free: frozenset = field(default=frozenset(), init=False)
    summed: tuple = field(default=(), init=False)


@dataclass
class Num(Node):
    value: Fraction = Fraction(0)


@dataclass
class Atom(Node):
    """``name``, ``name[i,j]`` or ``name[i,j; mu,nu]``; symbol or constant."""

    name: str = ""
    slots: list = field(default_factory=list)
    jet: list = field(default_factory=list)


@dataclass
class Call(Node):
    """Builtin (eps, eta, delta) or macro call with index arguments."""

    name: str = ""
    args: list = field(default_factory=list)


@dataclass
class Deriv(Node):
    body: Any = None
    idx: list = field(default_factory=list)


@dataclass
class Prod(Node):
    factors: list = field(default_factory=list)


@dataclass
class Sum(Node):
    terms: list = field(default_factory=list)  # (sign, node)


@dataclass
class Stmt:
    kind: str
    loc: tuple
    data: dict


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def err(self, msg: str, tok: Tok | None = None):
        t = tok or self.tok
        return ParseError(msg, t.line, t.col)

    def take(self, text: str | None = None, kind: str | None = None) -> Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text else kind
            got = repr(t.text) if t.kind != "eof" else "end of file"
            raise self.err(f"expected {want}, found {got}")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "id"):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        return self.take(kind="id").text

    def integer(self) -> int:
        return int(self.take(kind="num").text)

    def rational(self) -> Fraction:
        neg = self.accept("-")
        v = Fraction(self.integer())
        if self.accept("/"):
            d = self.tok
            den = self.integer()
            if den == 0:
                raise self.err("division by zero", d)
            v /= den
        return -v if neg else v

    def ident_list(self, close: str) -> list:
        out = []
        if self.tok.text != close:
            out.append(self.index_arg())
            while self.accept(","):
                out.append(self.index_arg())
        return out

    def index_arg(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return (int(t.text), (t.line, t.col))
        if t.kind == "id":
            self.i += 1
            return (t.text, (t.line, t.col))
        raise self.err("expected an index name or integer")

    # statements
    def parse(self) -> list[Stmt]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.statement())
        return out

    def statement(self) -> Stmt:
        t = self.tok
        loc = (t.line, t.col)
        kw = self.ident()
        data: dict = {}
        if kw == "model":
            data["name"] = self.take(kind="str").text.strip('"')
        elif kw == "dim":
            data["n"] = self.integer()
        elif kw == "metric":
            mt = self.tok
            data["kind"] = self.ident()
            if data["kind"] not in ("minkowski", "euclidean"):
                raise self.err("metric must be minkowski or euclidean", mt)
        elif kw == "index":
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.take("=")
            lo = self.integer()
            self.take("..")
            hi = self.integer()
            if hi < lo:
                raise self.err("empty index range", t)
            data.update(names=names, lo=lo, hi=hi)
        elif kw == "constant":
            data["name"] = self.ident()
            data["slots"] = self.slot_names()
            self.take("=")
            self.take("{")
            entries = []
            while self.tok.text != "}":
                et = self.tok
                self.take("(")
                key = [self.integer()]
                while self.accept(","):
                    key.append(self.integer())
                self.take(")")
                self.take(":")
                entries.append((tuple(key), self.rational(), (et.line, et.col)))
                if not self.accept(","):
                    break
            self.take("}")
            tags = []
            if self.accept("with"):
                tags.append(self.tag())
                while self.accept(","):
                    tags.append(self.tag())
            data.update(entries=entries, tags=tags)
        elif kw == "algebra":
            data["f"] = self.ident()
            data["form"] = self.ident() if self.accept("form") else None
        elif kw in ("field", "ghost", "antifield"):
            data["name"] = self.ident()
            data["slots"] = self.slot_names()
            self.take("parity")
            pt = self.tok
            par = self.ident()
            if par not in ("even", "odd"):
                raise self.err("parity must be even or odd", pt)
            data["parity"] = Parity.ODD if par == "odd" else Parity.EVEN
            data["stage"] = self.integer() if self.accept("stage") else None
            data["antisym"] = self.accept("antisym")
            data["partner"] = self.ident() if self.accept("of") else None
        elif kw == "def":
            data["name"] = self.ident()
            self.take("(")
            data["params"] = [n for n, _ in self.ident_list(")")]
            self.take(")")
            self.take("=")
            data["body"] = self.expr()
        elif kw == "lagrangian":
            self.take("=")
            data["body"] = self.expr()
        elif kw == "gauge":
            self.take("stage")
            data["stage"] = self.integer()
            self.take(":")
            data["target"] = self.target()
            self.take("<-")
            data["body"] = self.expr()
        elif kw == "identity":
            self.take("stage")
            data["stage"] = self.integer()
            data["target"] = self.target() if self.tok.text != ":" else None
            self.take(":")
            data["body"] = self.expr()
        elif kw == "brst":
            self.take("gamma")
            self.take(":")
            data["target"] = self.target()
            self.take("<-")
            data["body"] = self.expr()
        else:
            raise self.err(f"unknown statement {kw!r}", t)
        self.take(";")
        return Stmt(kw, loc, data)

    def slot_names(self) -> list:
        if not self.accept("["):
            return []
        out = self.ident_list("]")
        self.take("]")
        return out

    def tag(self):
        t = self.tok
        kind = self.ident()
        if kind not in ("sym", "antisym"):
            raise self.err("symmetry tag must be sym or antisym", t)
        self.take("(")
        i = self.integer()
        self.take(",")
        j = self.integer()
        self.take(")")
        return (kind, i, j, (t.line, t.col))

    def target(self):
        t = self.tok
        return (self.ident(), self.slot_names(), (t.line, t.col))

    # expressions
    def expr(self) -> Node:
        t = self.tok
        terms = []
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        terms.append((sign, self.term()))
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            sign = 1 if self.take().text == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Sum((t.line, t.col), terms)

    def term(self) -> Node:
        t = self.tok
        factors = [self.factor()]
        while self.accept("*"):
            if self.tok.text == "-":
                raise self.err("put a negative factor in parentheses")
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Prod((t.line, t.col), factors)

    def factor(self) -> Node:
        t = self.tok
        loc = (t.line, t.col)
        if t.kind == "num":
            return Num(loc, self.rational())
        if self.accept("("):
            e = self.expr()
            self.take(")")
            return e
        if t.kind != "id":
            raise self.err("expected an expression")
        name = self.ident()
        if name == "d" and self.tok.text == "(":
            self.take("(")
            body = self.expr()
            self.take(",")
            idx = [self.index_arg()]
            while self.accept(","):
                idx.append(self.index_arg())
            self.take(")")
            return Deriv(loc, body, idx)
        if self.accept("("):
            args = self.ident_list(")")
            self.take(")")
            return Call(loc, name, args)
        slots, jet = [], []
        if self.accept("["):
            if self.tok.text != ";":
                slots = self.ident_list("]")
            if self.accept(";"):
                jet = self.ident_list("]")
            self.take("]")
        return Atom(loc, name, slots, jet)


# --- semantic model -----------------------------------------------------------------------


@dataclass
class Family:
    name: str
    kind: str  # field, ghost, antifield
    slots: list  # ranges
    parity: Parity
    stage: int | None
    antisym: bool
    partner: str | None
    loc: tuple

    def components(self):
        rs = [range(lo, hi + 1) for lo, hi in self.slots]
        for vals in product(*rs):
            if self.antisym and any(vals[i] >= vals[i + 1] for i in range(len(vals) - 1)):
                continue
            yield vals


@dataclass
class Constant:
    slots: list
    table: dict


@dataclass
class Macro:
    params: list
    body: Node
    loc: tuple


BUILTINS = ("eps", "eta", "delta")


class Loader:
    def __init__(self, stmts: list[Stmt], source: str = "<string>"):
        self.stmts = stmts
        self.source = source
        self.name = None
        self.dim = None
        self.metric = "minkowski"
        self.ranges: dict[str, tuple[int, int]] = {}
        self.consts: dict[str, Constant] = {}
        self.families: dict[str, Family] = {}
        self.macros: dict[str, Macro] = {}
        self.sig: Signature | None = None
        self._macro_cache: dict = {}

    # declarations
    def run(self) -> FieldModel:
        decl_kinds = ("model", "dim", "metric", "index", "constant", "field", "ghost", "antifield", "def", "algebra")
        for s in self.stmts:
            if s.kind in decl_kinds:
                getattr(self, "_" + s.kind)(s)
        if self.dim is None:
            raise ParseError("missing 'dim' statement", 1, 1)
        self._build_signature()
        L = None
        gauge: dict[int, dict] = {}
        ids, gamma = [], {}
        for s in self.stmts:
            if s.kind == "lagrangian":
                if L is not None:
                    raise ParseError("second lagrangian statement", *s.loc)
                L = self._lagrangian(s)
            elif s.kind == "gauge":
                self._gauge(s, gauge)
            elif s.kind == "identity":
                ids.extend(self._identity(s))
            elif s.kind == "brst":
                self._gamma(s, gamma)
        if L is None:
            raise ParseError("missing 'lagrangian' statement", 1, 1)
        stages = sorted(gauge)
        if stages != list(range(len(stages))):
            raise ValidationError(f"gauge stages must be 0..k without gaps, got {stages}")
        try:
            gops = tuple(gauge_stage(self.sig, gauge[k]) for k in stages)
        except GvcError as e:
            raise ValidationError(f"gauge operator: {e}") from None
        for k, g in enumerate(gops):
            if g.vertical and g.parity is not Parity.ODD:
                raise ValidationError(f"gauge stage {k} is not odd; check ghost parities")
        ids.sort(key=lambda d: d.stage)
        consts = {k: dict(c.table) for k, c in self.consts.items()}
        return FieldModel(self.name or Path(self.source).stem, self.sig, L, gops, tuple(ids), gamma, consts,
                          self.metric)

    def _model(self, s):
        self.name = s.data["name"]

    def _dim(self, s):
        if s.data["n"] < 1:
            raise ParseError("dimension must be positive", *s.loc)
        self.dim = s.data["n"]

    def _metric(self, s):
        self.metric = s.data["kind"]

    def _index(self, s):
        for n in s.data["names"]:
            if n in self.ranges:
                raise ParseError(f"index {n!r} declared twice", *s.loc)
            self.ranges[n] = (s.data["lo"], s.data["hi"])

    def _slot_ranges(self, slots) -> list:
        out = []
        for name, loc in slots:
            if isinstance(name, int):
                raise ParseError("declarations take index names, not integers", *loc)
            if name not in self.ranges:
                raise ParseError(f"undeclared index range {name!r}", *loc)
            out.append(self.ranges[name])
        return out

    def _constant(self, s):
        d = s.data
        slots = self._slot_ranges(d["slots"])
        table: dict[tuple, Fraction] = {}
        for key, v, loc in d["entries"]:
            if len(key) != len(slots) or any(not lo <= k <= hi for k, (lo, hi) in zip(key, slots)):
                raise ValidationError(f"constant {d['name']}: entry {key} outside its index ranges (line {loc[0]})")
            table[key] = v
        for kind, i, j, loc in d["tags"]:
            if not (1 <= i <= len(slots) and 1 <= j <= len(slots)) or i == j:
                raise ValidationError(f"constant {d['name']}: bad symmetry tag positions ({i},{j}) (line {loc[0]})")
            if slots[i - 1] != slots[j - 1]:
                raise ValidationError(f"constant {d['name']}: tag ({i},{j}) pairs different index ranges")
        todo = list(table.items())
        while todo:
            key, v = todo.pop()
            for kind, i, j, _ in d["tags"]:
                k = list(key)
                k[i - 1], k[j - 1] = k[j - 1], k[i - 1]
                k = tuple(k)
                w = -v if kind == "antisym" else v
                if k == key and kind == "antisym" and v:
                    raise ValidationError(f"constant {d['name']}: antisymmetric entry {key} must vanish")
                if k in table:
                    if table[k] != w:
                        raise ValidationError(f"constant {d['name']}: entries {key} and {k} violate {kind}({i},{j})")
                    continue
                table[k] = w
                todo.append((k, w))
        self.consts[d["name"]] = Constant(slots, {k: v for k, v in table.items() if v})

    def _algebra(self, s):
        f = self.consts.get(s.data["f"])
        if f is None or len(f.slots) != 3 or len(set(f.slots)) != 1:
            raise ValidationError(f"algebra: {s.data['f']!r} must be a constant with three equal index ranges")
        lo, hi = f.slots[0]
        shift = lambda k: tuple(x - lo + 1 for x in k)
        ftab = {shift(k): v for k, v in f.table.items()}
        form = None
        if s.data["form"] is not None:
            h = self.consts.get(s.data["form"])
            if h is None or h.slots != f.slots[:2]:
                raise ValidationError(f"algebra: form {s.data['form']!r} must be a constant over the same range")
            form = {shift(k): v for k, v in h.table.items()}
        try:
            validate_algebra(hi - lo + 1, ftab, form)
        except BadAlgebra as e:
            raise ValidationError(f"algebra {s.data['f']}: {e}") from None

    def _field(self, s, kind="field"):
        d = s.data
        if d["name"] in self.families or d["name"] in self.consts:
            raise ParseError(f"{d['name']!r} declared twice", *s.loc)
        if d["name"] in BUILTINS or d["name"] == "d":
            raise ParseError(f"{d['name']!r} is reserved", *s.loc)
        slots = self._slot_ranges(d["slots"])
        stage, antisym = d["stage"], d["antisym"]
        if kind == "field" and stage is not None:
            raise ValidationError(f"field {d['name']} cannot have a stage")
        if kind == "ghost" and stage is None:
            raise ValidationError(f"ghost {d['name']} needs a stage")
        if kind == "antifield":
            p = self.families.get(d["partner"]) if d["partner"] else None
            if p is None:
                raise ValidationError(f"antifield {d['name']} needs 'of <declared field or ghost>'")
            if p.kind == "antifield":
                raise ValidationError(f"antifield {d['name']} cannot pair with another antifield")
            if p.slots != slots:
                raise ValidationError(f"antifield {d['name']} must carry the same index ranges as {p.name}")
            if p.parity == d["parity"]:
                raise ValidationError(f"antifield {d['name']} must have parity opposite to {p.name}")
            if p.kind == "field" and stage is not None:
                raise ValidationError(f"antifield of field {p.name} cannot have a stage")
            if p.kind == "ghost":
                if stage is None:
                    stage = p.stage
                elif stage != p.stage:
                    raise ValidationError(f"antifield {d['name']} must have the stage of {p.name}")
            antisym = antisym or p.antisym
        elif d["partner"]:
            raise ValidationError("only antifields take 'of'")
        if antisym and len(set(slots)) > 1:
            raise ValidationError(f"antisymmetric {d['name']} needs equal index ranges")
        self.families[d["name"]] = Family(d["name"], kind, slots, d["parity"], stage, antisym, d["partner"], s.loc)

    def _ghost(self, s):
        self._field(s, "ghost")

    def _antifield(self, s):
        self._field(s, "antifield")

    def _def(self, s):
        d = s.data
        if d["name"] in self.macros or d["name"] in BUILTINS or d["name"] == "d":
            raise ParseError(f"macro {d['name']!r} already defined", *s.loc)
        for p in d["params"]:
            if p not in self.ranges:
                raise ParseError(f"undeclared index range {p!r}", *s.loc)
        self.macros[d["name"]] = Macro(d["params"], d["body"], s.loc)

    def _build_signature(self):
        decls = []
        for fam in self.families.values():
            for vals in fam.components():
                name = comp_name(fam.name, vals)
                try:
                    if fam.kind == "field":
                        decls.append(SymbolDecl(name, Role.FIELD, fam.parity))
                    elif fam.kind == "ghost":
                        decls.append(SymbolDecl(name, Role.GHOST, fam.parity, stage=fam.stage))
                    else:
                        p = self.families[fam.partner]
                        role = Role.FIELD_ANTIFIELD if p.kind == "field" else Role.NOETHER_ANTIFIELD
                        st = -1 if p.kind == "field" else fam.stage
                        decls.append(SymbolDecl(name, role, fam.parity, stage=st, partner=comp_name(p.name, vals)))
                except GvcError as e:
                    raise ValidationError(f"{name}: {e}") from None
        try:
            self.sig = Signature(self.dim, decls)
        except GvcError as e:
            raise ValidationError(str(e)) from None
        for name, m in self.macros.items():
            self._analyse(m.body)
            extra = m.body.free - set(m.params)
            if extra:
                raise ParseError(f"macro {name}: free indices {sorted(extra)} are not parameters", *m.loc)

    # index analysis
    def _idx_names(self, args) -> list[str]:
        out = []
        for a, loc in args:
            if isinstance(a, str):
                if a not in self.ranges:
                    raise ParseError(f"undeclared index range {a!r}", *loc)
                out.append(a)
        return out

    def _occ(self, node: Node, occ: list[str]) -> None:
        counts: dict[str, int] = {}
        for n in occ:
            counts[n] = counts.get(n, 0) + 1
        bad = [n for n, c in counts.items() if c > 2]
        if bad:
            raise ParseError(f"index {bad[0]!r} appears more than twice", *node.loc)
        node.free = frozenset(n for n, c in counts.items() if c == 1)
        node.summed = tuple(sorted(n for n, c in counts.items() if c == 2))

    def _analyse(self, node: Node) -> None:
        if isinstance(node, Num):
            return
        if isinstance(node, Atom):
            self._check_atom(node)
            self._occ(node, self._idx_names(node.slots) + self._idx_names(node.jet))
        elif isinstance(node, Call):
            self._check_call(node)
            self._occ(node, self._idx_names(node.args))
        elif isinstance(node, Deriv):
            self._analyse(node.body)
            self._occ(node, list(node.body.free) + self._idx_names(node.idx))
            for a, loc in node.idx:
                if self._range_of(a) != (0, self.dim - 1) and not (isinstance(a, int) and 0 <= a < self.dim):
                    raise ValidationError(f"derivative index {a!r} (line {loc[0]}) must run over 0..{self.dim - 1}")
        elif isinstance(node, Prod):
            occ = []
            for f in node.factors:
                self._analyse(f)
                occ.extend(f.free)
            self._occ(node, occ)
        elif isinstance(node, Sum):
            frees = set()
            for _, t in node.terms:
                self._analyse(t)
                frees.add(t.free)
            if len(frees) > 1:
                raise ParseError("terms of a sum carry different free indices", *node.loc)
            node.free = frees.pop()

    def _range_of(self, a):
        return self.ranges.get(a) if isinstance(a, str) else None

    def _check_slots(self, what: str, want: list, args, loc):
        if len(args) != len(want):
            raise ValidationError(f"{what} takes {len(want)} indices, got {len(args)} (line {loc[0]})")
        for (a, aloc), r in zip(args, want):
            if isinstance(a, int):
                if not r[0] <= a <= r[1]:
                    raise ValidationError(f"{what}: value {a} outside {r[0]}..{r[1]} (line {aloc[0]})")
            elif a in self.ranges and self.ranges[a] != r:
                raise ValidationError(f"{what}: index {a!r} ranges over {self.ranges[a]}, slot needs {r} (line {aloc[0]})")

    def _check_atom(self, node: Atom):
        spacetime = (0, self.dim - 1)
        if node.name in self.families:
            fam = self.families[node.name]
            self._check_slots(node.name, fam.slots, node.slots, node.loc)
            self._check_slots(node.name + " jet", [spacetime] * len(node.jet), node.jet, node.loc)
        elif node.name in self.consts:
            if node.jet:
                raise ValidationError(f"constant {node.name} has no jets (line {node.loc[0]})")
            self._check_slots(node.name, self.consts[node.name].slots, node.slots, node.loc)
        else:
            raise ParseError(f"undeclared name {node.name!r}", *node.loc)

    def _check_call(self, node: Call):
        self._idx_names(node.args)
        if node.name in ("eta", "delta"):
            if len(node.args) != 2:
                raise ValidationError(f"{node.name} takes two indices (line {node.loc[0]})")
        elif node.name == "eps":
            k = len(node.args)
            rs = {self._range_of(a) for a, _ in node.args if isinstance(a, str)}
            if len(rs) > 1 or any(hi - lo + 1 != k for lo, hi in rs):
                raise ValidationError(f"eps with {k} indices needs them all over one range of size {k} "
                                      f"(line {node.loc[0]})")
        elif node.name in self.macros:
            m = self.macros[node.name]
            self._check_slots(node.name, [self.ranges[p] for p in m.params], node.args, node.loc)
        else:
            raise ParseError(f"undefined function {node.name!r}", *node.loc)

    # evaluation
    def _val(self, a, env):
        return a if isinstance(a, int) else env[a]

    def eval(self, node: Node, env: dict):
        if not node.summed:
            return self._core(node, env)
        if isinstance(node, Prod):
            return self._prod(node, env)
        acc = Fraction(0)
        rs = [range(self.ranges[i][0], self.ranges[i][1] + 1) for i in node.summed]
        for vals in product(*rs):
            e2 = dict(env)
            e2.update(zip(node.summed, vals))
            acc = _add(acc, self._core(node, e2))
        return acc

    def _prod(self, node: Prod, env: dict):
        summed = set(node.summed)
        acc_total = [Fraction(0)]

        def rec(i, env, acc):
            if i == len(node.factors):
                acc_total[0] = _add(acc_total[0], acc)
                return
            f = node.factors[i]
            need = sorted((f.free & summed) - env.keys())
            rs = [range(self.ranges[n][0], self.ranges[n][1] + 1) for n in need]
            for vals in product(*rs):
                e2 = dict(env)
                e2.update(zip(need, vals))
                v = self.eval(f, e2)
                if _is_zero(v):
                    continue
                rec(i + 1, e2, _mul(acc, v))

        base = {k: v for k, v in env.items() if k not in summed}
        rec(0, base, Fraction(1))
        return acc_total[0]

    def _core(self, node: Node, env: dict):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Atom):
            vals = tuple(self._val(a, env) for a, _ in node.slots)
            jet = tuple(sorted(self._val(a, env) for a, _ in node.jet))
            if node.name in self.consts:
                return self.consts[node.name].table.get(vals, Fraction(0))
            fam = self.families[node.name]
            sign = 1
            if fam.antisym:
                sign = perm_sign(vals)
                if not sign:
                    return Fraction(0)
                vals = tuple(sorted(vals))
            v = GradedExpr(self.sig, {(JetVar(self.sig.index(comp_name(fam.name, vals)), jet),): Fraction(sign)})
            return v
        if isinstance(node, Call):
            vals = tuple(self._val(a, env) for a, _ in node.args)
            if node.name == "delta":
                return Fraction(int(vals[0] == vals[1]))
            if node.name == "eta":
                if vals[0] != vals[1]:
                    return Fraction(0)
                return Fraction(metric_diag(self.metric, self.dim)[vals[0]])
            if node.name == "eps":
                lo = next((self.ranges[a][0] for a, _ in node.args if isinstance(a, str)), 0)
                return Fraction(perm_sign([v - lo for v in vals]))
            key = (node.name, vals)
            if key not in self._macro_cache:
                m = self.macros[node.name]
                self._macro_cache[key] = self.eval(m.body, dict(zip(m.params, vals)))
            return self._macro_cache[key]
        if isinstance(node, Deriv):
            v = self.eval(node.body, env)
            if not isinstance(v, GradedExpr):
                return Fraction(0)
            for a, _ in node.idx:
                v = total_derivative(v, self._val(a, env))
            return v
        if isinstance(node, Prod):
            acc = Fraction(1)
            for f in node.factors:
                acc = _mul(acc, self.eval(f, env))
                if _is_zero(acc):
                    return Fraction(0)
            return acc
        if isinstance(node, Sum):
            acc = Fraction(0)
            for s, t in node.terms:
                v = self.eval(t, env)
                acc = _add(acc, v if s == 1 else _neg(v))
            return acc
        raise TypeError(node)

    def _expr(self, node: Node, env: dict) -> GradedExpr:
        v = self.eval(node, env)
        return v if isinstance(v, GradedExpr) else self.sig.const(v)

    # model statements
    def _lagrangian(self, s) -> GradedExpr:
        body = s.data["body"]
        self._analyse(body)
        if body.free:
            raise ParseError(f"lagrangian has free indices {sorted(body.free)}", *s.loc)
        L = self._expr(body, {})
        if not L.terms:
            raise ValidationError(f"lagrangian vanishes identically (line {s.loc[0]}); check field parities")
        if (L.parity() is not Parity.EVEN or L.ghost_numbers() != {0} or L.antifield_numbers() != {0}):
            raise ValidationError("lagrangian must be even with ghost and antifield number 0")
        return L

    def _target(self, s, kinds) -> tuple[Family, list[str]]:
        name, slots, loc = s.data["target"]
        fam = self.families.get(name)
        if fam is None:
            raise ParseError(f"undeclared name {name!r}", *loc)
        if fam.kind not in kinds:
            raise ValidationError(f"{name} must be a {' or '.join(kinds)} here (line {loc[0]})")
        idx = self._idx_names(slots)
        if len(idx) != len(slots) or len(set(idx)) != len(idx):
            raise ParseError("target indices must be distinct index names", *loc)
        self._check_slots(name, fam.slots, slots, loc)
        body = s.data["body"]
        self._analyse(body)
        if body.free != frozenset(idx):
            raise ParseError(f"free indices {sorted(body.free)} do not match target {idx}", *s.loc)
        return fam, idx

    def _expand(self, s, kinds):
        fam, idx = self._target(s, kinds)
        for vals in fam.components():
            env = dict(zip(idx, vals))
            yield fam, vals, self._expr(s.data["body"], env)

    def _gauge(self, s, gauge: dict):
        k = s.data["stage"]
        comps = gauge.setdefault(k, {})
        for fam, vals, e in self._expand(s, ("field", "ghost")):
            want = "field" if k == 0 else "ghost"
            if fam.kind != want or (k > 0 and fam.stage != k - 1):
                raise ValidationError(f"gauge stage {k} must act on {'fields' if k == 0 else f'stage-{k - 1} ghosts'}")
            name = comp_name(fam.name, vals)
            if name in comps:
                raise ValidationError(f"gauge stage {k}: {name} assigned twice")
            for m in e.terms:
                ghosts = [f for f in m if self.sig.symbols[f.sym].role is Role.GHOST]
                if len(ghosts) != 1 or self.sig.symbols[ghosts[0].sym].stage != k:
                    raise ValidationError(f"gauge stage {k}: {name} must be linear in stage-{k} ghosts")
            comps[name] = e

    def _identity(self, s) -> list:
        k = s.data["stage"]
        if s.data["target"] is None:
            self._analyse(s.data["body"])
            if s.data["body"].free:
                raise ParseError("unpaired identity with free indices", *s.loc)
            from ..noether import IdentityDensity

            return [IdentityDensity(k, None, self._expr(s.data["body"], {}))]
        out = []
        for fam, vals, e in self._expand(s, ("antifield",)):
            if fam.stage != k or self.families[fam.partner].kind != "ghost":
                raise ValidationError(f"identity stage {k} must pair with a stage-{k} ghost antifield, not {fam.name}")
            out.append(identity(self.sig, k, comp_name(fam.name, vals), e))
        return out

    def _gamma(self, s, gamma: dict):
        for fam, vals, e in self._expand(s, ("ghost",)):
            i = self.sig.index(comp_name(fam.name, vals))
            if i in gamma:
                raise ValidationError(f"gamma for {comp_name(fam.name, vals)} given twice")
            if e.terms:
                gamma[i] = e


def _is_zero(v) -> bool:
    return (not v.terms) if isinstance(v, GradedExpr) else v == 0


def _neg(v):
    return -v


def _add(a, b):
    if isinstance(a, GradedExpr) or isinstance(b, GradedExpr):
        if not isinstance(a, GradedExpr):
            a, b = b, a
        if not isinstance(b, GradedExpr):
            return a + a.sig.const(b) if b else a
        return a + b
    return a + b


def _mul(a, b):
    if isinstance(a, GradedExpr):
        return a * b if isinstance(b, GradedExpr) else a.scale(b)
    if isinstance(b, GradedExpr):
        return b.scale(a)
    return a * b


def parse_model(text: str, source: str = "<string>") -> FieldModel:
    stmts = Parser(text).parse()
    return Loader(stmts, source).run()


def load_model(path) -> FieldModel:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{p.name} is not UTF-8: {e.reason}", 1, 1) from None
    return parse_model(text, str(p))


DATA = Path(__file__).with_name("data")


def shipped_files() -> dict[str, Path]:
    return {p.stem: p for p in sorted(DATA.glob("*.gvc"))}
