"""Tokenizer and recursive-descent parser for ``.ctl`` control programs.

Grammar::

    program  := stmt*
    stmt     := IDENT ':=' expr ';'
              | 'if' expr 'then' stmt* ['else' stmt*] 'end' [';']
    expr     := and_expr ('or' and_expr)*
    and_expr := not_expr ('and' not_expr)*
    not_expr := 'not' not_expr | rel_expr
    rel_expr := add_expr [relop add_expr]
    add_expr := mul_expr (('+' | '-') mul_expr)*
    mul_expr := unary (('*' | '/') unary)*
    unary    := '-' unary | primary
    primary  := NUMBER | IDENT | 'abs' '(' expr ')' | '(' expr ')'

Comments are ``// ...`` to end of line or ``(* ... *)``.  Keywords are case
insensitive; identifiers are case sensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .ast import Abs, Assign, BinOp, Compare, If, Logic, Neg, Not, Num, Program, Var, number

if TYPE_CHECKING:
    from .validate import Declarations

MAX_DEPTH = 3

KEYWORDS = frozenset({"if", "then", "else", "end", "and", "or", "not", "abs"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>\(\*.*?\*\))
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|>=|<=|<>|!=|[-+*/()<>=;])
  """,
    re.VERBOSE | re.DOTALL,
)


class DslSyntaxError(SyntaxError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | kw | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        if text.startswith("(*", pos) and text.find("*)", pos + 2) < 0:
            raise DslSyntaxError("unterminated comment", line, pos - line_start + 1)
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        col = pos - line_start + 1
        if kind == "number":
            tokens.append(Token("number", chunk, line, col))
        elif kind == "ident":
            low = chunk.lower()
            if low in KEYWORDS:
                tokens.append(Token("kw", low, line, col))
            else:
                tokens.append(Token("ident", chunk, line, col))
        elif kind == "op":
            tokens.append(Token("op", "<>" if chunk == "!=" else chunk, line, col))
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], max_depth: int):
        self.toks = tokens
        self.i = 0
        self.max_depth = max_depth
        self.depth = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.cur
        raise DslSyntaxError(message, tok.line, tok.col)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.cur
        if tok.kind == kind and (text is None or tok.text == text):
            self.i += 1
            return tok
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.accept(kind, text)
        if tok is None:
            want = repr(text) if text else kind
            got = repr(self.cur.text) if self.cur.kind != "eof" else "end of input"
            self.error(f"expected {want}, got {got}")
        return tok

    def program(self) -> Program:
        body = self.block(terminators=())
        if self.cur.kind != "eof":
            self.error(f"unexpected {self.cur.text!r}")
        return Program(body)

    def block(self, terminators: tuple[str, ...]) -> tuple:
        stmts = []
        while not (self.cur.kind == "eof" or (self.cur.kind == "kw" and self.cur.text in terminators)):
            stmts.append(self.statement())
        return tuple(stmts)

    def statement(self):
        tok = self.cur
        if self.accept("kw", "if"):
            self.depth += 1
            if self.depth > self.max_depth:
                self.error(f"nesting depth exceeds {self.max_depth}", tok)
            cond = self.expr()
            self.expect("kw", "then")
            then = self.block(("else", "end"))
            orelse = None
            if self.accept("kw", "else"):
                orelse = self.block(("end",))
            self.expect("kw", "end")
            self.accept("op", ";")
            self.depth -= 1
            return If(cond, then, orelse, pos=(tok.line, tok.col))
        if tok.kind == "ident":
            self.i += 1
            self.expect("op", ":=")
            value = self.expr()
            self.expect("op", ";")
            return Assign(tok.text, value, pos=(tok.line, tok.col))
        got = repr(tok.text) if tok.kind != "eof" else "end of input"
        self.error(f"expected statement, got {got}")

    def expr(self):
        left = self.and_expr()
        while (tok := self.accept("kw", "or")) is not None:
            left = Logic("or", left, self.and_expr(), pos=(tok.line, tok.col))
        return left

    def and_expr(self):
        left = self.not_expr()
        while (tok := self.accept("kw", "and")) is not None:
            left = Logic("and", left, self.not_expr(), pos=(tok.line, tok.col))
        return left

    def not_expr(self):
        tok = self.accept("kw", "not")
        if tok is not None:
            return Not(self.not_expr(), pos=(tok.line, tok.col))
        return self.rel_expr()

    def rel_expr(self):
        left = self.add_expr()
        tok = self.cur
        if tok.kind == "op" and tok.text in (">", ">=", "<", "<=", "=", "<>"):
            self.i += 1
            return Compare(tok.text, left, self.add_expr(), pos=(tok.line, tok.col))
        return left

    def add_expr(self):
        left = self.mul_expr()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            tok = self.cur
            self.i += 1
            left = BinOp(tok.text, left, self.mul_expr(), pos=(tok.line, tok.col))
        return left

    def mul_expr(self):
        left = self.unary()
        while self.cur.kind == "op" and self.cur.text in ("*", "/"):
            tok = self.cur
            self.i += 1
            left = BinOp(tok.text, left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self):
        tok = self.accept("op", "-")
        if tok is not None:
            return Neg(self.unary(), pos=(tok.line, tok.col))
        return self.primary()

    def primary(self):
        tok = self.cur
        if self.accept("number"):
            return Num(float(tok.text), pos=(tok.line, tok.col))
        if self.accept("ident"):
            return Var(tok.text, pos=(tok.line, tok.col))
        if self.accept("kw", "abs"):
            self.expect("op", "(")
            inner = self.expr()
            self.expect("op", ")")
            return Abs(inner, pos=(tok.line, tok.col))
        if self.accept("op", "("):
            inner = self.expr()
            self.expect("op", ")")
            return inner
        got = repr(tok.text) if tok.kind != "eof" else "end of input"
        self.error(f"expected expression, got {got}")


def parse(text: str, declared: "Declarations | Iterable[str] | None" = None, max_depth: int = MAX_DEPTH) -> Program:
    """Parse source text into a numbered :class:`Program`.

    When ``declared`` is given, the program is also checked with
    :func:`mutinv.dsl.validate.validate` and the first error is raised as a
    :class:`DslSyntaxError`.
    """
    program = number(_Parser(tokenize(text), max_depth).program())
    if declared is not None:
        from .validate import validate

        diags = validate(program, declared, max_depth=max_depth)
        if diags:
            d = diags[0]
            raise DslSyntaxError(d.message, d.line, d.col)
    return program

