"""DSL for indexed expressions.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := coeff | [coeff '*'] factor ('*' factor)*
    coeff  := rational ['i']
    factor := NAME '[' index+ ']' | 'D[' index ']' '(' expr ')'
    index  := ('^'|'_') NAME ["'"]

Index kind is inferred from the declared slot position; a trailing prime is
required on (and only on) primed-spinor slots.  A repeated name within a term
denotes a contraction.  Parsing renames internal dummies apart, so round
trips hold up to dummy names.  A term with a coefficient and no factors is a
scalar constant.

Printing splits a complex coefficient into its real and imaginary terms so
output always re-parses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .expr import Expression, ExprError, Factor
from .indices import Index, Kind, NameSupply, is_dummy_name
from .rationals import QI, parse_rational_coeff
from .symbols import SymbolTable


class ParseError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"at position {pos}: {message}")
        self.pos = pos


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<coeff>\d+(?:/\d+)?i?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<punct>[\[\]()^_*'+-])
""", re.VERBOSE)


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, table: SymbolTable):
        self.src = src
        self.table = table
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, got {tok.text!r}", tok.pos)
        return tok

    # expr := term (('+'|'-') term)*
    def expr(self) -> Expression:
        sign = 1
        if self.peek().text in ("+", "-"):
            if self.take().text == "-":
                sign = -1
        result = self.term().scale(sign)
        while self.peek().text in ("+", "-"):
            op = self.take().text
            nxt = self.term()
            try:
                result = result + (nxt if op == "+" else -nxt)
            except ExprError as err:
                raise ParseError(str(err), self.peek().pos) from None
        return result

    # term := coeff | [coeff '*'] factor ('*' factor)*
    def term(self) -> Expression:
        coeff = QI(1)
        tok = self.peek()
        if tok.kind == "coeff":
            self.take()
            coeff = parse_rational_coeff(tok.text)
            if self.peek().text == "*":
                self.take()
            else:
                return Expression.scalar(coeff)
        result = self.factor()
        while self.peek().text == "*":
            self.take()
            try:
                result = result * self.factor()
            except ExprError as err:
                raise ParseError(str(err), self.peek().pos) from None
        return result.scale(coeff)

    # factor := NAME '[' index+ ']' | 'D[' index ']' '(' expr ')' | '(' expr ')'
    def factor(self) -> Expression:
        if self.peek().text == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        tok = self.take()
        if tok.kind != "name":
            raise ParseError(f"expected a symbol name, got {tok.text!r}", tok.pos)
        if tok.text == "D" and self.peek().text == "[":
            self.expect("[")
            mark, name, primed, pos = self.index_parts()
            if mark != "_" or primed:
                raise ParseError("derivative index must be a lower tensor index", pos)
            self.expect("]")
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            from .deriv import apply_nabla
            try:
                return apply_nabla(inner, name)
            except ExprError as err:
                raise ParseError(str(err), pos) from None
        if tok.text not in self.table:
            raise ParseError(f"unknown symbol {tok.text!r}", tok.pos)
        decl = self.table[tok.text]
        self.expect("[")
        shape = decl.signature.slot_shape()
        slots = []
        for k, (kind, up) in enumerate(shape):
            mark, name, primed, pos = self.index_parts()
            if (mark == "^") != up:
                raise ParseError(
                    f"slot {k} of {decl.name} is {'upper' if up else 'lower'}", pos)
            if primed != (kind is Kind.PRIMED):
                raise ParseError(
                    f"slot {k} of {decl.name} is {'primed' if kind is Kind.PRIMED else 'not primed'}",
                    pos)
            slots.append(Index(name, kind, up))
        close = self.take()
        if close.text != "]":
            raise ParseError(
                f"{decl.name} takes {len(shape)} indices", close.pos)
        try:
            return Expression.from_factor(Factor(decl, tuple(slots)))
        except ExprError as err:
            raise ParseError(str(err), tok.pos) from None

    def index_parts(self):
        mark = self.take()
        if mark.text not in ("^", "_"):
            raise ParseError(f"expected ^ or _, got {mark.text!r}", mark.pos)
        nm = self.take()
        if nm.kind != "name":
            raise ParseError(f"expected an index name, got {nm.text!r}", nm.pos)
        primed = False
        if self.peek().text == "'":
            self.take()
            primed = True
        return mark.text, nm.text, primed, nm.pos

    def parse(self) -> Expression:
        result = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)
        return result


def parse(src: str, table: SymbolTable) -> Expression:
    """Parse DSL source against declared symbols.  The expression is
    validated: free indices must agree across terms and repeated names must
    form proper contractions."""
    return _Parser(src, table).parse()


# --------------------------------------------------------------------------
# printing


def _coeff_str(c: QI, lead: bool) -> str:
    # real or pure-imaginary only; callers split mixed coefficients
    if c.im == 0:
        body, neg = str(abs(c.re)), c.re < 0
        one = abs(c.re) == 1
    else:
        body, neg = f"{abs(c.im)}i", c.im < 0
        one = False
    sign = ("-" if neg else "") if lead else (" - " if neg else " + ")
    return sign, body, one


def pprint(e: Expression) -> str:
    """Deterministic, re-parseable rendering.  Dummy names are displayed as
    d0, d1, ... chosen to avoid the expression's free names."""
    if not e.terms:
        return "0"
    avoid = e.free_names() | {f.symbol.name for _, fs in e.terms for f in fs}
    parts: list[str] = []
    # split complex coefficients so every printed coefficient is rational
    split_terms = []
    for c, fs in e.terms:
        if c.re != 0 and c.im != 0:
            split_terms.append((QI(c.re), fs))
            split_terms.append((QI(0, c.im), fs))
        else:
            split_terms.append((c, fs))
    for c, fs in split_terms:
        supply = NameSupply(set(avoid))
        mapping: dict[str, str] = {}
        rendered = []
        for f in fs:
            for idx in f.indices:
                if is_dummy_name(idx.name) and idx.name not in mapping:
                    mapping[idx.name] = supply.fresh(f"d{len(mapping)}")
        for f in fs:
            g = f.rename(mapping)
            rendered.append(str(g))
        sign, body, one = _coeff_str(c, lead=not parts)
        if not rendered:
            parts.append(f"{sign}{body}")
        elif one:
            parts.append(f"{sign}{' * '.join(rendered)}")
        else:
            parts.append(f"{sign}{body} * {' * '.join(rendered)}")
    return "".join(parts)


# --------------------------------------------------------------------------
# files combining declarations and a single expression


def load_expression_source(text: str, table: SymbolTable | None = None):
    """Split a file into declaration lines and expression source, declare the
    symbols, and parse.  Returns (table, expression)."""
    if table is None:
        table = SymbolTable()
    decl_lines: list[str] = []
    expr_lines: list[str] = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if not expr_lines and (
                stripped.startswith("field ") or stripped.startswith("background ")
                or not stripped):
            decl_lines.append(raw)
        else:
            expr_lines.append(raw)
    table.load_declarations("\n".join(decl_lines))
    src = " ".join(line.split("#", 1)[0] for line in expr_lines).strip()
    if not src:
        raise ParseError("no expression found", 0)
    return table, parse(src, table)
