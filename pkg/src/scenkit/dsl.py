"""Scenario specification DSL: lexer, parser, printer, resolver.

A spec document declares schemas, named model bindings, logical
scenarios (parameters, start scene, model binds, horizon), abstract
scenarios (instance bounds, world and constraint formulas) and named
formula fixtures. Parsing is total: any input yields either a document
or a list of diagnostics with line/column, offending token and expected
set, never an exception and never a partial document.

Numbers accept unit suffixes m, m/s, s and km/h; km/h is converted to
m/s at parse time, so printed documents are always in SI units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .core import Scene, SceneSchema, TimeGrid, schema_of
from .dynamics import (
    DeterministicModel,
    combine,
    constant_acceleration,
    constant_velocity,
    drift,
)
from .errors import ScenarioError
from .formulas import (
    Always,
    And,
    Atom,
    Eventually,
    FalseFormula,
    Formula,
    Next,
    Or,
    SceneConst,
    ScenePredicate,
    TrueFormula,
)
from .logic import AbstractScenario, ScenarioLogicInstance
from .logical import (
    ContinuousAxis,
    DiscreteAxis,
    DiscreteWeighted,
    LogicalScenario,
    ParameterDistribution,
    ParameterSpace,
    TruncatedNormal,
    Uniform,
)

KMH_PER_MS = 3.6

_UNIT_FACTORS = {"m": 1.0, "s": 1.0, "m/s": 1.0, "m/s^2": 1.0, "km/h": 1.0 / KMH_PER_MS}
_SCHEMA_UNITS = {"m", "m/s", "m/s^2", "s", "dimensionless", "enum", "enum-code", "km/h"}


# --- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    code: str
    line: int
    col: int
    message: str
    found: str = ""
    expected: tuple[str, ...] = ()

    def render(self) -> str:
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.code} at {self.line}:{self.col}: {self.message}{exp}"


class ParseFailure(Exception):
    """Internal bail-out; surfaces as diagnostics, never escapes parse()."""


# --- tokens ------------------------------------------------------------------

_PUNCT = ("<=", "{", "}", "(", ")", "[", "]", ",", ".", "=", "~", "-", "+", "*", "/", "^", ":")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | punct literal | "eof"
    text: str
    line: int
    col: int


def _lex(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                diags.append(
                    Diagnostic("LEX002", line, col, f"malformed number {lexeme!r}", lexeme)
                )
            tokens.append(Token("number", lexeme, line, col))
            col += j - i
            i = j
            continue
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            tokens.append(Token(matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        diags.append(Diagnostic("LEX001", line, col, f"unexpected character {ch!r}", ch))
        i += 1
        col += 1
    tokens.append(Token("eof", "", line, col))
    return tokens, diags


# --- document AST ------------------------------------------------------------


class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Ref(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    sub: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


class FormulaNode:
    pass


@dataclass(frozen=True)
class FTrue(FormulaNode):
    pass


@dataclass(frozen=True)
class FFalse(FormulaNode):
    pass


@dataclass(frozen=True)
class FScene(FormulaNode):
    items: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class FPred(FormulaNode):
    # (dim_or_None, other_dim_or_None, lo, hi): single-dim when other is None,
    # otherwise a bound on dim - other.
    items: tuple[tuple[str, str | None, Expr, Expr], ...]


@dataclass(frozen=True)
class FAnd(FormulaNode):
    left: FormulaNode
    right: FormulaNode


@dataclass(frozen=True)
class FOr(FormulaNode):
    left: FormulaNode
    right: FormulaNode


@dataclass(frozen=True)
class FNext(FormulaNode):
    sub: FormulaNode


@dataclass(frozen=True)
class FEventually(FormulaNode):
    sub: FormulaNode
    within: int | None


@dataclass(frozen=True)
class FAlways(FormulaNode):
    sub: FormulaNode
    within: int | None


@dataclass(frozen=True)
class FRef(FormulaNode):
    name: str


@dataclass(frozen=True)
class SchemaDecl:
    name: str
    dims: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class ModelDecl:
    name: str
    factory: str
    args: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class ParamDecl:
    name: str
    kind: str  # "range" | "set"
    values: tuple[float, ...]  # (lo, hi) for range, members for set
    dist: tuple | None  # ("uniform",) | ("normal", mu, sigma) | ("weights", w...)


@dataclass(frozen=True)
class BindDecl:
    model: str
    args: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class LogicalDecl:
    name: str
    params: tuple[ParamDecl, ...]
    start: tuple[tuple[str, str, Expr], ...]  # (schema_name, dim, expr)
    binds: tuple[BindDecl, ...]
    horizon: float
    step: float


@dataclass(frozen=True)
class AbstractDecl:
    name: str
    use: str
    horizon: float
    step: float
    bounds: tuple[tuple[str, float], ...]
    world: tuple[FormulaNode, ...]
    constraint: FormulaNode


@dataclass(frozen=True)
class FixtureDecl:
    name: str
    formula: FormulaNode


Decl = SchemaDecl | ModelDecl | LogicalDecl | AbstractDecl | FixtureDecl


@dataclass(frozen=True)
class SpecDocument:
    decls: tuple[Decl, ...]

    def find(self, kind: type, name: str):
        for d in self.decls:
            if isinstance(d, kind) and d.name == name:
                return d
        return None


@dataclass(frozen=True)
class ParseResult:
    document: SpecDocument | None
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.document is not None


# --- parser ------------------------------------------------------------------

_DECL_KEYWORDS = ("schema", "model", "logical", "abstract", "fixture")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, expected: tuple[str, ...] = ()) -> ParseFailure:
        tok = self.peek()
        code = "PAR002" if tok.kind == "eof" else "PAR001"
        self.diags.append(
            Diagnostic(code, tok.line, tok.col, message, tok.text, expected)
        )
        return ParseFailure()

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what or kind}", (kind,))
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            raise self.error(f"expected {word!r}", (word,))
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == word

    def sync_to_decl(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "ident" and tok.text in _DECL_KEYWORDS:
                return
            self.advance()

    # -- numbers, units, expressions -----------------------------------------

    def parse_unit(self) -> str | None:
        tok = self.peek()
        if tok.kind != "ident":
            return None
        if tok.text == "km":
            save = self.pos
            self.advance()
            if self.peek().kind == "/" :
                self.advance()
                if self.at_keyword("h"):
                    self.advance()
                    return "km/h"
            self.pos = save
            return None
        if tok.text in ("m", "s"):
            save = self.pos
            unit = tok.text
            self.advance()
            if unit == "m" and self.peek().kind == "/":
                peek2 = self.tokens[self.pos + 1]
                if peek2.kind == "ident" and peek2.text == "s":
                    self.advance()
                    self.advance()
                    unit = "m/s"
                    if self.peek().kind == "^":
                        peek3 = self.tokens[self.pos + 1]
                        if peek3.kind == "number" and peek3.text == "2":
                            self.advance()
                            self.advance()
                            unit = "m/s^2"
                else:
                    self.pos = save
                    return None
            return unit
        return None

    def parse_number_with_unit(self) -> float:
        neg = False
        if self.peek().kind == "-":
            self.advance()
            neg = True
        tok = self.expect("number", "a number")
        value = float(tok.text)
        unit = self.parse_unit()
        if unit is not None:
            value *= _UNIT_FACTORS.get(unit, 1.0)
        return -value if neg else value

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            right = self.parse_term()
            left = Bin(op, left, right)
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            right = self.parse_factor()
            left = Bin(op, left, right)
        return left

    def parse_factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            return Neg(self.parse_factor())
        if tok.kind == "number":
            self.advance()
            value = float(tok.text)
            unit = self.parse_unit()
            if unit is not None:
                value *= _UNIT_FACTORS.get(unit, 1.0)
            return Num(value)
        if tok.kind == "ident":
            if tok.text == "inf":
                self.advance()
                return Num(math.inf)
            self.advance()
            return Ref(tok.text)
        if tok.kind == "(":
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        raise self.error("expected an expression", ("number", "identifier", "("))

    # -- formulas --------------------------------------------------------------

    def parse_formula(self) -> FormulaNode:
        left = self.parse_formula_and()
        while self.at_keyword("or"):
            self.advance()
            left = FOr(left, self.parse_formula_and())
        return left

    def parse_formula_and(self) -> FormulaNode:
        left = self.parse_formula_unary()
        while self.at_keyword("and"):
            self.advance()
            left = FAnd(left, self.parse_formula_unary())
        return left

    def parse_within(self) -> int | None:
        if self.peek().kind != "[":
            return None
        self.advance()
        self.expect("<=")
        tok = self.expect("number", "a step bound")
        self.expect("]")
        return int(float(tok.text))

    def parse_formula_unary(self) -> FormulaNode:
        if self.at_keyword("next"):
            self.advance()
            return FNext(self.parse_formula_unary())
        if self.at_keyword("eventually"):
            self.advance()
            within = self.parse_within()
            return FEventually(self.parse_formula_unary(), within)
        if self.at_keyword("always"):
            self.advance()
            within = self.parse_within()
            return FAlways(self.parse_formula_unary(), within)
        return self.parse_formula_primary()

    def parse_formula_primary(self) -> FormulaNode:
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            f = self.parse_formula()
            self.expect(")")
            return f
        if tok.kind != "ident":
            raise self.error(
                "expected a formula", ("true", "false", "scene", "pred", "(")
            )
        if tok.text == "true":
            self.advance()
            return FTrue()
        if tok.text == "false":
            self.advance()
            return FFalse()
        if tok.text == "scene":
            self.advance()
            self.expect("(")
            items = []
            while not self.peek().kind == ")":
                name = self.expect("ident", "a dimension name").text
                self.expect("=")
                items.append((name, self.parse_expr()))
                if self.peek().kind == ",":
                    self.advance()
            self.expect(")")
            return FScene(tuple(items))
        if tok.text == "pred":
            self.advance()
            self.expect("(")
            items = []
            while not self.peek().kind == ")":
                name = self.expect("ident", "a dimension name").text
                other = None
                if self.peek().kind == "-":
                    self.advance()
                    other = self.expect("ident", "a dimension name").text
                self.expect_keyword("in")
                self.expect("[")
                lo = self.parse_expr()
                self.expect(",")
                hi = self.parse_expr()
                self.expect("]")
                items.append((name, other, lo, hi))
                if self.peek().kind == ",":
                    self.advance()
            self.expect(")")
            return FPred(tuple(items))
        self.advance()
        return FRef(tok.text)

    # -- declarations ------------------------------------------------------------

    def parse_schema(self) -> SchemaDecl:
        self.expect_keyword("schema")
        name = self.expect("ident", "a schema name").text
        self.expect("{")
        dims = []
        while self.peek().kind != "}":
            dim = self.expect("ident", "a dimension name").text
            self.expect(":")
            unit_tok = self.peek()
            unit = self.parse_unit()
            if unit is None:
                if unit_tok.kind == "ident" and unit_tok.text in _SCHEMA_UNITS:
                    unit = unit_tok.text
                    self.advance()
                else:
                    raise self.error("expected a unit", tuple(sorted(_SCHEMA_UNITS)))
            if unit == "km/h":
                unit = "m/s"
            if unit == "enum":
                unit = "enum-code"
            dims.append((dim, unit))
            if self.peek().kind == ",":
                self.advance()
        self.expect("}")
        return SchemaDecl(name, tuple(dims))

    def parse_model(self) -> ModelDecl:
        self.expect_keyword("model")
        name = self.expect("ident", "a model name").text
        self.expect("=")
        factory = self.expect("ident", "a model factory").text
        args = self.parse_arglist()
        return ModelDecl(name, factory, args)

    def parse_arglist(self) -> tuple[tuple[str, Expr], ...]:
        self.expect("(")
        args = []
        while self.peek().kind != ")":
            name = self.expect("ident", "an argument name").text
            self.expect("=")
            args.append((name, self.parse_expr()))
            if self.peek().kind == ",":
                self.advance()
        self.expect(")")
        return tuple(args)

    def parse_param(self) -> ParamDecl:
        self.expect_keyword("param")
        name = self.expect("ident", "a parameter name").text
        self.expect(":")
        tok = self.peek()
        if self.at_keyword("range"):
            self.advance()
            self.expect("(")
            lo = self.parse_number_with_unit()
            self.expect(",")
            hi = self.parse_number_with_unit()
            self.expect(")")
            kind, values = "range", (lo, hi)
        elif self.at_keyword("set"):
            self.advance()
            self.expect("{")
            values = [self.parse_number_with_unit()]
            while self.peek().kind == ",":
                self.advance()
                values.append(self.parse_number_with_unit())
            self.expect("}")
            kind, values = "set", tuple(values)
        else:
            raise self.error("expected a parameter domain", ("range", "set"))
        dist = None
        if self.peek().kind == "~":
            self.advance()
            dtok = self.expect("ident", "a distribution")
            if dtok.text == "uniform":
                dist = ("uniform",)
            elif dtok.text == "normal":
                self.expect("(")
                mu = self.parse_number_with_unit()
                self.expect(",")
                sigma = self.parse_number_with_unit()
                self.expect(")")
                dist = ("normal", mu, sigma)
            elif dtok.text == "weights":
                self.expect("(")
                ws = [self.parse_number_with_unit()]
                while self.peek().kind == ",":
                    self.advance()
                    ws.append(self.parse_number_with_unit())
                self.expect(")")
                dist = ("weights", *ws)
            else:
                raise self.error(
                    "unknown distribution", ("uniform", "normal", "weights")
                )
        return ParamDecl(name, kind, values, dist)

    def parse_logical(self) -> LogicalDecl:
        self.expect_keyword("logical")
        name = self.expect("ident", "a scenario name").text
        self.expect("{")
        params = []
        while self.at_keyword("param"):
            params.append(self.parse_param())
        self.expect_keyword("start")
        self.expect("{")
        start = []
        while self.peek().kind != "}":
            qual = self.expect("ident", "a schema name").text
            self.expect(".")
            dim = self.expect("ident", "a dimension name").text
            self.expect("=")
            start.append((qual, dim, self.parse_expr()))
            if self.peek().kind == ",":
                self.advance()
        self.expect("}")
        binds = []
        while self.at_keyword("bind"):
            self.advance()
            model = self.expect("ident", "a model name").text
            binds.append(BindDecl(model, self.parse_arglist()))
        if not binds:
            raise self.error("a logical scenario needs at least one bind", ("bind",))
        self.expect_keyword("horizon")
        horizon = self.parse_number_with_unit()
        self.expect_keyword("step")
        step = self.parse_number_with_unit()
        self.expect("}")
        return LogicalDecl(name, tuple(params), tuple(start), tuple(binds), horizon, step)

    def parse_abstract(self) -> AbstractDecl:
        self.expect_keyword("abstract")
        name = self.expect("ident", "a scenario name").text
        self.expect("{")
        self.expect_keyword("use")
        use = self.expect("ident", "a schema name").text
        self.expect_keyword("horizon")
        horizon = self.parse_number_with_unit()
        self.expect_keyword("step")
        step = self.parse_number_with_unit()
        bounds = []
        while self.at_keyword("bound"):
            self.advance()
            dim = self.expect("ident", "a dimension name").text
            bounds.append((dim, self.parse_number_with_unit()))
        world = []
        constraint = None
        while self.peek().kind != "}":
            if self.at_keyword("world"):
                self.advance()
                world.append(self.parse_formula())
            elif self.at_keyword("constraint"):
                self.advance()
                if constraint is not None:
                    raise self.error("duplicate constraint clause", ("}",))
                constraint = self.parse_formula()
            else:
                raise self.error("expected world or constraint", ("world", "constraint"))
        self.expect("}")
        if constraint is None:
            raise self.error("abstract scenario needs a constraint", ("constraint",))
        return AbstractDecl(name, use, horizon, step, tuple(bounds), tuple(world), constraint)

    def parse_fixture(self) -> FixtureDecl:
        self.expect_keyword("fixture")
        name = self.expect("ident", "a fixture name").text
        self.expect("=")
        return FixtureDecl(name, self.parse_formula())

    def parse_document(self) -> SpecDocument | None:
        decls: list[Decl] = []
        tok = self.peek()
        if tok.kind == "eof":
            self.diags.append(
                Diagnostic("PAR002", tok.line, tok.col, "expected declaration", "", _DECL_KEYWORDS)
            )
            return None
        while self.peek().kind != "eof":
            try:
                if self.at_keyword("schema"):
                    decls.append(self.parse_schema())
                elif self.at_keyword("model"):
                    decls.append(self.parse_model())
                elif self.at_keyword("logical"):
                    decls.append(self.parse_logical())
                elif self.at_keyword("abstract"):
                    decls.append(self.parse_abstract())
                elif self.at_keyword("fixture"):
                    decls.append(self.parse_fixture())
                else:
                    raise self.error("expected declaration", _DECL_KEYWORDS)
            except ParseFailure:
                self.advance()
                self.sync_to_decl()
        if self.diags:
            return None
        return SpecDocument(tuple(decls))


def parse(text: str) -> ParseResult:
    """Parse a spec document; never raises on malformed input."""
    try:
        tokens, lex_diags = _lex(text)
        parser = _Parser(tokens)
        doc = parser.parse_document()
        diags = tuple(lex_diags + parser.diags)
        if diags:
            return ParseResult(None, diags)
        return ParseResult(doc, ())
    except ParseFailure:  # pragma: no cover - defensive
        return ParseResult(None, (Diagnostic("PAR001", 0, 0, "parse failed", ""),))


# --- printer -----------------------------------------------------------------


def _fmt_num(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(v)


def _print_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Neg):
        return f"-{_print_expr(e.sub)}"
    if isinstance(e, Bin):
        return f"({_print_expr(e.left)} {e.op} {_print_expr(e.right)})"
    raise TypeError(e)


def _print_formula(f: FormulaNode) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FFalse):
        return "false"
    if isinstance(f, FScene):
        inner = ", ".join(f"{n} = {_print_expr(e)}" for n, e in f.items)
        return f"scene({inner})"
    if isinstance(f, FPred):
        parts = []
        for name, other, lo, hi in f.items:
            lhs = name if other is None else f"{name} - {other}"
            parts.append(f"{lhs} in [{_print_expr(lo)}, {_print_expr(hi)}]")
        return f"pred({', '.join(parts)})"
    if isinstance(f, FAnd):
        return f"({_print_formula(f.left)} and {_print_formula(f.right)})"
    if isinstance(f, FOr):
        return f"({_print_formula(f.left)} or {_print_formula(f.right)})"
    if isinstance(f, FNext):
        return f"next {_print_formula(f.sub)}"
    if isinstance(f, FEventually):
        bound = f"[<={f.within}]" if f.within is not None else ""
        return f"eventually{bound} {_print_formula(f.sub)}"
    if isinstance(f, FAlways):
        bound = f"[<={f.within}]" if f.within is not None else ""
        return f"always{bound} {_print_formula(f.sub)}"
    if isinstance(f, FRef):
        return f.name
    raise TypeError(f)


def print_document(doc: SpecDocument) -> str:
    """Canonical source text; parse(print_document(d)) == d structurally."""
    out: list[str] = []
    for d in doc.decls:
        if isinstance(d, SchemaDecl):
            dims = ", ".join(f"{n}: {u}" for n, u in d.dims)
            out.append(f"schema {d.name} {{ {dims} }}")
        elif isinstance(d, ModelDecl):
            args = ", ".join(f"{n} = {_print_expr(e)}" for n, e in d.args)
            out.append(f"model {d.name} = {d.factory}({args})")
        elif isinstance(d, LogicalDecl):
            out.append(f"logical {d.name} {{")
            for p in d.params:
                if p.kind == "range":
                    dom = f"range({_fmt_num(p.values[0])}, {_fmt_num(p.values[1])})"
                else:
                    dom = "set{" + ", ".join(_fmt_num(v) for v in p.values) + "}"
                dist = ""
                if p.dist is not None:
                    if p.dist[0] == "uniform":
                        dist = " ~ uniform"
                    elif p.dist[0] == "normal":
                        dist = f" ~ normal({_fmt_num(p.dist[1])}, {_fmt_num(p.dist[2])})"
                    else:
                        dist = " ~ weights(" + ", ".join(_fmt_num(w) for w in p.dist[1:]) + ")"
                out.append(f"  param {p.name}: {dom}{dist}")
            starts = ", ".join(f"{q}.{dim} = {_print_expr(e)}" for q, dim, e in d.start)
            out.append(f"  start {{ {starts} }}")
            for b in d.binds:
                args = ", ".join(f"{n} = {_print_expr(e)}" for n, e in b.args)
                out.append(f"  bind {b.model}({args})")
            out.append(f"  horizon {_fmt_num(d.horizon)} step {_fmt_num(d.step)}")
            out.append("}")
        elif isinstance(d, AbstractDecl):
            out.append(f"abstract {d.name} {{")
            out.append(f"  use {d.use}")
            out.append(f"  horizon {_fmt_num(d.horizon)} step {_fmt_num(d.step)}")
            for dim, v in d.bounds:
                out.append(f"  bound {dim} {_fmt_num(v)}")
            for w in d.world:
                out.append(f"  world {_print_formula(w)}")
            out.append(f"  constraint {_print_formula(d.constraint)}")
            out.append("}")
        elif isinstance(d, FixtureDecl):
            out.append(f"fixture {d.name} = {_print_formula(d.formula)}")
    return "\n".join(out) + "\n"


# --- resolution ---------------------------------------------------------------


class ResolutionError(ScenarioError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        super().__init__("; ".join(d.render() for d in diagnostics))
        self.diagnostics = tuple(diagnostics)


_MODEL_FACTORIES = ("constant_velocity", "constant_acceleration", "drift")


@dataclass
class ResolvedSpec:
    document: SpecDocument
    schemas: dict[str, SceneSchema] = field(default_factory=dict)
    logicals: dict[str, LogicalScenario] = field(default_factory=dict)
    distributions: dict[str, ParameterDistribution] = field(default_factory=dict)
    abstracts: dict[str, AbstractScenario] = field(default_factory=dict)
    fixtures: dict[str, FormulaNode] = field(default_factory=dict)


def _eval_expr(e: Expr, env: dict[str, float], diags: list[Diagnostic]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Ref):
        if e.name not in env:
            diags.append(Diagnostic("RES001", 0, 0, f"unresolved reference {e.name!r}", e.name))
            return 0.0
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval_expr(e.sub, env, diags)
    if isinstance(e, Bin):
        lv = _eval_expr(e.left, env, diags)
        rv = _eval_expr(e.right, env, diags)
        if e.op == "+":
            return lv + rv
        if e.op == "-":
            return lv - rv
        if e.op == "*":
            return lv * rv
        return lv / rv
    raise TypeError(e)


def _build_model(
    factory: str,
    args: dict[str, float],
    schema: SceneSchema,
    diags: list[Diagnostic],
    model_id: str,
) -> DeterministicModel | None:
    if factory == "constant_velocity":
        return constant_velocity(
            schema, vx=args.get("vx", 0.0), vy=args.get("vy", 0.0), id=model_id
        )
    if factory == "constant_acceleration":
        return constant_acceleration(
            schema, ax=args.get("ax", 0.0), ay=args.get("ay", 0.0), id=model_id
        )
    if factory == "drift":
        bad = [k for k in args if not schema.has(k)]
        if bad:
            diags.append(
                Diagnostic("RES003", 0, 0, f"drift on unknown dimensions {bad}", str(bad))
            )
            return None
        return drift(schema, args, id=model_id)
    diags.append(
        Diagnostic(
            "RES001", 0, 0, f"unknown model factory {factory!r}", factory, _MODEL_FACTORIES
        )
    )
    return None


def _resolve_formula(
    node: FormulaNode,
    schema: SceneSchema,
    fixtures: dict[str, FormulaNode],
    diags: list[Diagnostic],
    depth: int = 0,
) -> Formula:
    if depth > 32:
        diags.append(Diagnostic("RES001", 0, 0, "fixture references nest too deeply"))
        return TrueFormula()
    if isinstance(node, FTrue):
        return TrueFormula()
    if isinstance(node, FFalse):
        return FalseFormula()
    if isinstance(node, FScene):
        given = {n: _eval_expr(e, {}, diags) for n, e in node.items}
        missing = [n for n in schema.names if n not in given]
        extra = [n for n in given if not schema.has(n)]
        if missing or extra:
            diags.append(
                Diagnostic(
                    "TYP002",
                    0,
                    0,
                    f"scene() must give every dimension exactly once "
                    f"(missing {missing}, unknown {extra})",
                )
            )
            return TrueFormula()
        return SceneConst(Scene(schema, tuple(given[n] for n in schema.names)))
    if isinstance(node, FPred):
        bounds = []
        diffs = []
        for name, other, lo_e, hi_e in node.items:
            lo = _eval_expr(lo_e, {}, diags)
            hi = _eval_expr(hi_e, {}, diags)
            for dim in (name, other) if other else (name,):
                if not schema.has(dim):
                    diags.append(
                        Diagnostic("RES003", 0, 0, f"unknown dimension {dim!r} in pred()", dim)
                    )
                    return TrueFormula()
            if other is None:
                bounds.append((name, lo, hi))
            else:
                diffs.append((name, other, lo, hi))
        return Atom(ScenePredicate(tuple(bounds), tuple(diffs)))
    if isinstance(node, FAnd):
        return And(
            _resolve_formula(node.left, schema, fixtures, diags, depth + 1),
            _resolve_formula(node.right, schema, fixtures, diags, depth + 1),
        )
    if isinstance(node, FOr):
        return Or(
            _resolve_formula(node.left, schema, fixtures, diags, depth + 1),
            _resolve_formula(node.right, schema, fixtures, diags, depth + 1),
        )
    if isinstance(node, FNext):
        return Next(_resolve_formula(node.sub, schema, fixtures, diags, depth + 1))
    if isinstance(node, FEventually):
        return Eventually(
            _resolve_formula(node.sub, schema, fixtures, diags, depth + 1), node.within
        )
    if isinstance(node, FAlways):
        return Always(
            _resolve_formula(node.sub, schema, fixtures, diags, depth + 1), node.within
        )
    if isinstance(node, FRef):
        if node.name not in fixtures:
            diags.append(
                Diagnostic("RES001", 0, 0, f"unresolved fixture {node.name!r}", node.name)
            )
            return TrueFormula()
        return _resolve_formula(fixtures[node.name], schema, fixtures, diags, depth + 1)
    raise TypeError(node)


def _bounded_step_instance(
    decl: AbstractDecl, schema: SceneSchema, diags: list[Diagnostic]
) -> ScenarioLogicInstance:
    """Per-dimension step-bound world: the quantized successor offers
    -bound, 0, +bound per bounded dimension; monitoring admits anything
    inside the box; unbounded dimensions are frozen."""
    bound_by_dim = dict(decl.bounds)
    for dim in bound_by_dim:
        if not schema.has(dim):
            diags.append(Diagnostic("RES003", 0, 0, f"bound on unknown dimension {dim!r}", dim))
    horizon = int(round(decl.horizon / decl.step))
    names = schema.names
    slack = 1e-9

    def successors(samples):
        end = samples[-1]
        options = []
        for name in names:
            b = bound_by_dim.get(name)
            options.append((0.0,) if b is None else (-b, 0.0, b))
        out = []

        def build(i: int, vals: list[float]):
            if i == len(names):
                out.append(Scene(schema, tuple(vals)))
                return
            for d in options[i]:
                vals.append(end.values[i] + d)
                build(i + 1, vals)
                vals.pop()

        build(0, [])
        return tuple(out)

    def allows(samples, nxt) -> bool:
        end = samples[-1]
        for i, name in enumerate(names):
            b = bound_by_dim.get(name, 0.0)
            if abs(nxt.values[i] - end.values[i]) > b + slack:
                return False
        return True

    return ScenarioLogicInstance(
        id=f"dsl-{decl.name}",
        schema=schema,
        step=decl.step,
        horizon=max(horizon, 1),
        initial_scenes=None,
        successors=successors,
        allows=allows,
        initial_allows=lambda scene: True,
        scene_tol=1e-6,
        probe_scenes=(Scene(schema, (0.0,) * schema.k),),
    )


def resolve(doc: SpecDocument) -> ResolvedSpec:
    """Build library objects from a document; raises ResolutionError with
    collected diagnostics when anything fails to resolve."""
    diags: list[Diagnostic] = []
    spec = ResolvedSpec(doc)
    models: dict[str, ModelDecl] = {}
    seen: set[tuple[type, str]] = set()
    for d in doc.decls:
        key = (type(d), d.name)
        if key in seen:
            diags.append(Diagnostic("RES002", 0, 0, f"duplicate declaration {d.name!r}", d.name))
        seen.add(key)
        if isinstance(d, SchemaDecl):
            spec.schemas[d.name] = schema_of(*d.dims)
        elif isinstance(d, ModelDecl):
            models[d.name] = d
        elif isinstance(d, FixtureDecl):
            spec.fixtures[d.name] = d.formula

    for d in doc.decls:
        if isinstance(d, LogicalDecl):
            _resolve_logical(d, spec, models, diags)
        elif isinstance(d, AbstractDecl):
            schema = spec.schemas.get(d.use)
            if schema is None:
                diags.append(Diagnostic("RES001", 0, 0, f"unknown schema {d.use!r}", d.use))
                continue
            world = tuple(
                _resolve_formula(w, schema, spec.fixtures, diags) for w in d.world
            )
            constraint = _resolve_formula(d.constraint, schema, spec.fixtures, diags)
            instance = _bounded_step_instance(d, schema, diags)
            spec.abstracts[d.name] = AbstractScenario(constraint, world, instance)
    if diags:
        raise ResolutionError(diags)
    return spec


def _resolve_logical(
    d: LogicalDecl,
    spec: ResolvedSpec,
    models: dict[str, ModelDecl],
    diags: list[Diagnostic],
) -> None:
    qualifiers = {q for q, _, _ in d.start}
    if len(qualifiers) != 1:
        diags.append(
            Diagnostic("RES003", 0, 0, f"start block must use exactly one schema, got {sorted(qualifiers)}")
        )
        return
    schema_name = next(iter(qualifiers))
    schema = spec.schemas.get(schema_name)
    if schema is None:
        diags.append(Diagnostic("RES001", 0, 0, f"unknown schema {schema_name!r}", schema_name))
        return
    start_dims = [dim for _, dim, _ in d.start]
    missing = [n for n in schema.names if n not in start_dims]
    unknown = [n for n in start_dims if not schema.has(n)]
    if missing or unknown:
        diags.append(
            Diagnostic(
                "TYP002", 0, 0,
                f"start block must assign every dimension exactly once "
                f"(missing {missing}, unknown {unknown})",
            )
        )
        return
    axes = []
    marginals = []
    for p in d.params:
        if p.kind == "range":
            axes.append(ContinuousAxis(p.name, p.values[0], p.values[1]))
        else:
            axes.append(DiscreteAxis(p.name, p.values))
        if p.dist is None or p.dist[0] == "uniform":
            marginals.append(Uniform())
        elif p.dist[0] == "normal":
            marginals.append(TruncatedNormal(p.dist[1], p.dist[2]))
        else:
            marginals.append(DiscreteWeighted(tuple(p.dist[1:])))
    space = ParameterSpace(tuple(axes))
    dist = ParameterDistribution(tuple(marginals))
    param_names = [p.name for p in d.params]
    count = int(round(d.horizon / d.step)) + 1
    grid = TimeGrid(d.step, count, closed_end=True)
    start_items = tuple((dim, e) for _, dim, e in d.start)
    binds = d.binds

    # Validate the binder once at resolution time so diagnostics surface
    # here rather than at first realize().
    probe_env = {}
    for p, axis in zip(d.params, axes):
        probe_env[p.name] = axis.lo if isinstance(axis, ContinuousAxis) else axis.values[0]
    pre_diags = list(diags)

    def binder(x):
        env = dict(zip(param_names, x))
        local: list[Diagnostic] = []
        values = {dim: _eval_expr(e, env, local) for dim, e in start_items}
        start = Scene(schema, tuple(values[n] for n in schema.names))
        members = []
        for b in binds:
            decl = models.get(b.model)
            factory = decl.factory if decl else b.model
            args = dict(decl.args) if decl else {}
            args.update(dict(b.args))
            arg_values = {k: _eval_expr(e, env, local) for k, e in args.items()}
            model = _build_model(factory, arg_values, schema, local, model_id=b.model)
            if model is not None:
                members.append(model)
        if local:
            raise ResolutionError(local)
        return start, combine(members, epsilon=grid.step)

    try:
        binder(tuple(probe_env[n] for n in param_names))
    except ResolutionError as exc:
        diags.extend(exc.diagnostics)
        return
    except ScenarioError as exc:
        diags.append(Diagnostic("RES003", 0, 0, f"scenario {d.name!r}: {exc}"))
        return
    del pre_diags
    spec.logicals[d.name] = LogicalScenario(space, binder, grid, name=d.name)
    spec.distributions[d.name] = dist


def load(text: str) -> ResolvedSpec:
    """Parse and resolve in one step; raises ResolutionError on failure."""
    result = parse(text)
    if not result.ok:
        raise ResolutionError(result.diagnostics)
    return resolve(result.document)
