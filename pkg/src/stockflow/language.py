"""Parser and renderer for the .sdm model text format.

One declaration per line:

    stock <name> = integ(<expr>, <expr>) [<units>]
    flow <name> = <expr> [<units>]
    aux <name> = <expr> [<units>]
    const <name> = <number> [<units>]
    table <name> bounds (<num>,<num>)-(<num>,<num>) points (<num>,<num>)... domain [<units>] range [<units>]

Comments run from `#` to end of line; a trailing `# range a..b` on a const
line records the slider range served to interactive front ends.  The bounds
pair on a table is display metadata and never used in evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (
    Bin,
    Element,
    Expr,
    Kind,
    Lookup,
    ModelDefinition,
    Name,
    Neg,
    Num,
    Smooth,
    Step,
    validate_model,
)
from .errors import ParseError, SourceSpan
from .units import UnitExpr, parse_unit_expr

__all__ = ["parse_model", "render_model"]

_TOKEN_RE = re.compile(
    r"(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>->|[()\[\],=+\-*/^])"
    r"|(?P<ws>\s+)"
    r"|(?P<bad>.)"
)

_BUILTINS = {"smooth", "step", "lookup"}
_KEYWORDS = {"stock", "flow", "aux", "const", "table", "integ",
             "bounds", "points", "domain", "range"} | _BUILTINS


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | punct | end
    text: str
    span: SourceSpan


def _tokenize(line: str, lineno: int) -> list[_Token]:
    tokens: list[_Token] = []
    for m in _TOKEN_RE.finditer(line):
        kind = m.lastgroup
        if kind == "ws":
            continue
        span = SourceSpan(lineno, m.start() + 1, m.end() - m.start())
        if kind == "bad":
            raise ParseError(span, "a token", repr(m.group()))
        tokens.append(_Token(kind, m.group(), span))
    tokens.append(_Token("end", "end of line", SourceSpan(lineno, len(line) + 1, 0)))
    return tokens


class _LineParser:
    def __init__(self, line: str, lineno: int):
        self.raw = line
        self.tokens = _tokenize(line, lineno)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def expect(self, text: str, what: str | None = None) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(tok.span, what or repr(text), repr(tok.text))
        return tok

    def expect_name(self, what: str = "a name") -> _Token:
        tok = self.next()
        if tok.kind != "name":
            raise ParseError(tok.span, what, repr(tok.text))
        return tok

    def expect_number(self) -> tuple[float, _Token]:
        tok = self.next()
        sign = 1.0
        if tok.text == "-":
            sign = -1.0
            tok = self.next()
        if tok.kind != "number":
            raise ParseError(tok.span, "a number", repr(tok.text))
        return sign * float(tok.text), tok

    def expect_end(self) -> None:
        tok = self.next()
        if tok.kind != "end":
            raise ParseError(tok.span, "end of line", repr(tok.text))

    # expression grammar: + - over * / over unary minus over atoms
    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            left = Bin(op, left, self.parse_term())
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            left = Bin(op, left, self.parse_factor())
        return left

    def parse_factor(self) -> Expr:
        tok = self.peek()
        if tok.text == "-":
            self.next()
            return Neg(self.parse_factor())
        if tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.kind == "number":
            self.next()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.next()
            if tok.text in _BUILTINS:
                return self.parse_call(tok)
            if tok.text in _KEYWORDS:
                raise ParseError(tok.span, "an expression", f"keyword {tok.text!r}")
            return Name(tok.text)
        raise ParseError(tok.span, "an expression", repr(tok.text))

    def parse_call(self, head: _Token) -> Expr:
        self.expect("(")
        if head.text == "smooth":
            inp = self.parse_expr()
            self.expect(",")
            delay = self.parse_const_arg()
            self.expect(")")
            return Smooth(inp, delay)
        if head.text == "step":
            height = self.parse_const_arg()
            self.expect(",")
            start = self.parse_const_arg()
            self.expect(")")
            return Step(height, start)
        table = self.expect_name("a table name")
        self.expect(",")
        arg = self.parse_expr()
        self.expect(")")
        return Lookup(table.text, arg)

    def parse_const_arg(self) -> Expr:
        """A number (optionally signed) or a constant's name."""
        tok = self.peek()
        if tok.kind == "name" and tok.text not in _KEYWORDS:
            self.next()
            return Name(tok.text)
        value, _ = self.expect_number()
        return Num(value)

    def parse_units(self) -> UnitExpr:
        open_tok = self.expect("[", "units in square brackets")
        depth = 1
        start = open_tok.span.column  # 1-based position of '['
        text_parts: list[str] = []
        while True:
            tok = self.next()
            if tok.kind == "end":
                raise ParseError(tok.span, "']'", "end of line")
            if tok.text == "[":
                depth += 1
            elif tok.text == "]":
                depth -= 1
                if depth == 0:
                    break
            text_parts.append(tok.text)
        return parse_unit_expr("".join(text_parts), SourceSpan(open_tok.span.line, start))

    def parse_point(self) -> tuple[float, float]:
        self.expect("(")
        x, _ = self.expect_number()
        self.expect(",")
        y, _ = self.expect_number()
        self.expect(")")
        return (x, y)


def _split_comment(line: str) -> tuple[str, str | None]:
    if "#" in line:
        code, _, comment = line.partition("#")
        return code, comment.strip()
    return line, None


_NUM = r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"
_RANGE_RE = re.compile(rf"^range\s+({_NUM})\s*\.\.\s*({_NUM})$")


def parse_model(source: str, name: str = "model") -> ModelDefinition:
    """Parse .sdm text into a validated ModelDefinition.

    Parsing is total: on any error an exception is raised and no partially
    built model escapes.
    """
    elements: list[Element] = []
    for lineno, raw_line in enumerate(source.splitlines(), start=1):
        code, comment = _split_comment(raw_line)
        if not code.strip():
            continue
        parser = _LineParser(code.rstrip(), lineno)
        element = _parse_declaration(parser, comment)
        elements.append(element)
    model = ModelDefinition(name, elements)
    validate_model(model)
    return model


def _parse_declaration(p: _LineParser, comment: str | None) -> Element:
    head = p.expect_name("a declaration keyword")
    if head.text not in ("stock", "flow", "aux", "const", "table"):
        raise ParseError(head.span, "stock/flow/aux/const/table", repr(head.text))
    name_tok = p.expect_name("an element name")
    if name_tok.text in _KEYWORDS:
        raise ParseError(name_tok.span, "an element name", f"keyword {name_tok.text!r}")
    span = name_tok.span

    if head.text == "table":
        return _parse_table(p, name_tok.text, span)

    p.expect("=")
    if head.text == "stock":
        integ = p.expect_name("'integ'")
        if integ.text != "integ":
            raise ParseError(integ.span, "'integ'", repr(integ.text))
        p.expect("(")
        net_flow = p.parse_expr()
        p.expect(",")
        initial = p.parse_expr()
        p.expect(")")
        units = p.parse_units()
        p.expect_end()
        return Element(name_tok.text, Kind.STOCK, units, expression=net_flow,
                       initial=initial, span=span)
    if head.text == "const":
        value, _ = p.expect_number()
        units = p.parse_units()
        p.expect_end()
        return Element(name_tok.text, Kind.CONST, units, value=value, span=span,
                       slider_range=_parse_range_comment(comment))
    expr = p.parse_expr()
    units = p.parse_units()
    p.expect_end()
    kind = Kind.FLOW if head.text == "flow" else Kind.AUX
    return Element(name_tok.text, kind, units, expression=expr, span=span)


def _parse_table(p: _LineParser, name: str, span: SourceSpan) -> Element:
    p.expect("bounds")
    low = p.parse_point()
    p.expect("-")
    high = p.parse_point()
    p.expect("points")
    points = [p.parse_point()]
    while p.peek().text == "(":
        points.append(p.parse_point())
    p.expect("domain")
    domain_units = p.parse_units()
    p.expect("range")
    range_units = p.parse_units()
    p.expect_end()
    return Element(name, Kind.TABLE, range_units, points=tuple(points),
                   bounds=(low, high), domain_units=domain_units, span=span)


def _parse_range_comment(comment: str | None) -> tuple[float, float] | None:
    if not comment:
        return None
    m = _RANGE_RE.match(comment)
    if not m:
        return None
    return (float(m.group(1)), float(m.group(2)))


# --- rendering -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _render_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return _fmt_number(expr.value)
    if isinstance(expr, Name):
        return expr.target
    if isinstance(expr, Neg):
        inner = _render_expr(expr.operand)
        if isinstance(expr.operand, Bin):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, Bin):
        left = _render_expr(expr.left)
        if isinstance(expr.left, Bin) and _PREC[expr.left.op] < _PREC[expr.op]:
            left = f"({left})"
        right = _render_expr(expr.right)
        # parsing is left-associative, so an equal-precedence right child
        # must keep its parentheses to round-trip structurally
        if isinstance(expr.right, Bin) and _PREC[expr.right.op] <= _PREC[expr.op]:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Smooth):
        return f"smooth({_render_expr(expr.input)}, {_render_expr(expr.delay)})"
    if isinstance(expr, Step):
        return f"step({_render_expr(expr.height)}, {_render_expr(expr.start)})"
    if isinstance(expr, Lookup):
        return f"lookup({expr.table}, {_render_expr(expr.arg)})"
    raise TypeError(f"unknown expression node {expr!r}")


def _render_point(point: tuple[float, float]) -> str:
    return f"({_fmt_number(point[0])},{_fmt_number(point[1])})"


def render_model(model: ModelDefinition) -> str:
    """Canonical .sdm text; parsing it back yields an equivalent model."""
    lines: list[str] = []
    for el in model.elements:
        if el.kind is Kind.STOCK:
            lines.append(
                f"stock {el.name} = integ({_render_expr(el.expression)}, "
                f"{_render_expr(el.initial)}) [{el.units}]"
            )
        elif el.kind in (Kind.FLOW, Kind.AUX):
            lines.append(f"{el.kind.value} {el.name} = {_render_expr(el.expression)} [{el.units}]")
        elif el.kind is Kind.CONST:
            line = f"const {el.name} = {_fmt_number(el.value)} [{el.units}]"
            if el.slider_range is not None:
                lo, hi = el.slider_range
                line += f" # range {_fmt_number(lo)}..{_fmt_number(hi)}"
            lines.append(line)
        else:
            low, high = el.bounds if el.bounds is not None else ((0.0, 0.0), (0.0, 0.0))
            points = " ".join(_render_point(pt) for pt in el.points)
            lines.append(
                f"table {el.name} bounds {_render_point(low)}-{_render_point(high)} "
                f"points {points} domain [{el.domain_units}] range [{el.units}]"
            )
    return "\n".join(lines) + ("\n" if lines else "")
