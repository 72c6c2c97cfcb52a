"""具体语法：词法分析，以及上界、类型、项与文件的递归下降解析器。"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import bounds as bd
from .bounds import BoundExpr, SizeVar
from .errors import ParseError
from .syntax import (
    BOTTOM,
    UNIT,
    UNIT_TYPE,
    App,
    Arrow,
    Case,
    Inl,
    Inr,
    Lam,
    Pair,
    Prl,
    Prod,
    Prr,
    Rec,
    Sum,
    Term,
    TVar,
    Type,
    Var,
    ascribe,
    subst_term,
)

logger = logging.getLogger(__name__)

KEYWORDS = frozenset({"unit", "inl", "inr", "prl", "prr", "rec", "case", "of", "def", "Unit", "Bot", "iter", "max"})

_TOKEN_RE = re.compile(
    r"""
    (?P<newline>\n)
  | (?P<space>[ \t\r]+)
  | (?P<comment>--[^\n]*)
  | (?P<op>->|=>|:=)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<directive>\#[A-Za-z]+)
  | (?P<sym>[()\[\]{};,.:^\\+*\-|=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup or ""
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind, match.group(), line, match.start() - line_start + 1))
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual peek/accept/expect helpers."""

    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != "eof":
            self.pos += 1
        return token

    def at(self, *texts: str) -> bool:
        token = self.peek()
        return token.kind != "eof" and token.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        token = self.peek()
        if token.kind != "ident" or token.text in KEYWORDS:
            self.fail(f"expected {what}")
        return self.advance().text

    def fail(self, message: str) -> None:
        token = self.peek()
        found = token.text if token.kind != "eof" else "end of input"
        raise ParseError(f"{message}, found {found!r}", token.line, token.col)

    def finish(self) -> None:
        if self.peek().kind != "eof":
            self.fail("unexpected trailing input")


# ---------------------------------------------------------------------------
# grammar
# ---------------------------------------------------------------------------

class _Parser(TokenStream):
    # bounds ---------------------------------------------------------------
    def bound(self) -> BoundExpr:
        left = self.bound_term()
        while self.at("+", "-"):
            op = self.advance().text
            right = self.bound_term()
            left = bd.Add(left, right) if op == "+" else bd.Sub(left, right)
        return left

    def bound_term(self) -> BoundExpr:
        left = self.bound_power()
        while self.accept("*"):
            left = bd.Mul(left, self.bound_power())
        return left

    def bound_power(self) -> BoundExpr:
        base = self.bound_postfix()
        if self.accept("^"):
            return bd.Pow(base, self.bound_power())
        return base

    def bound_postfix(self) -> BoundExpr:
        node = self.bound_atom()
        while self.at("["):
            self.advance()
            name = self.ident("size variable")
            self.expect(":=")
            replacement = self.bound()
            self.expect("]")
            node = bd.Subst(node, SizeVar(name), replacement)
        return node

    def bound_atom(self) -> BoundExpr:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            value = int(token.text)
            if value < 1:
                raise ParseError("bound literals must be at least 1", token.line, token.col)
            return bd.Lit(value)
        if self.accept("iter"):
            self.expect("(")
            body = self.bound()
            self.expect(";")
            count = self.bound()
            self.expect(";")
            name = self.ident("size variable")
            self.expect(")")
            return bd.Iter(body, count, SizeVar(name))
        if self.accept("max"):
            self.expect("(")
            left = self.bound()
            self.expect(",")
            right = self.bound()
            self.expect(")")
            return bd.Max(left, right)
        if self.accept("("):
            inner = self.bound()
            self.expect(")")
            return inner
        return bd.var(self.ident("bound expression"))

    # types ----------------------------------------------------------------
    def type_(self) -> Type:
        domain = self.type_sum()
        if self.accept("->"):
            self.expect("[")
            size_var = SizeVar(self.ident("size variable"))
            self.expect(";")
            alpha = self.bound()
            self.expect(";")
            beta = self.bound()
            self.expect("]")
            return Arrow(domain, size_var, alpha, beta, self.type_())
        return domain

    def type_sum(self) -> Type:
        left = self.type_prod()
        if self.accept("+"):
            return Sum(left, self.type_sum())
        return left

    def type_prod(self) -> Type:
        left = self.type_atom()
        if self.accept("*"):
            return Prod(left, self.type_prod())
        return left

    def type_atom(self) -> Type:
        if self.accept("Unit"):
            return UNIT_TYPE
        if self.accept("Bot"):
            return BOTTOM
        if self.accept("("):
            inner = self.type_()
            self.expect(")")
            return inner
        return TVar(self.ident("type"))

    # terms ----------------------------------------------------------------
    def term(self) -> Term:
        if self.accept("\\"):
            binder = self.ident("binder")
            self.expect("^")
            size_var = SizeVar(self.ident("size variable"))
            annotation = self.type_() if self.accept(":") else None
            self.expect(".")
            return Lam(binder, size_var, self.term(), annotation)
        if self.accept("case"):
            scrutinee = self.term()
            self.expect("of")
            self.expect("inl")
            left_binder = self.ident("binder")
            self.expect("=>")
            left = self.term()
            self.expect("|")
            self.expect("inr")
            right_binder = self.ident("binder")
            self.expect("=>")
            return Case(scrutinee, left_binder, left, right_binder, self.term())
        if self.accept("rec"):
            return Rec(self.term_atom(), self.term_atom(), self.term_atom())
        node = self.term_unary()
        while self._starts_atom():
            node = App(node, self.term_atom())
        return node

    def _starts_atom(self) -> bool:
        token = self.peek()
        if token.kind == "ident":
            return token.text not in KEYWORDS or token.text == "unit"
        return token.text == "(" and token.kind == "sym"

    _PREFIX = {"inl": Inl, "inr": Inr, "prl": Prl, "prr": Prr}

    def term_unary(self) -> Term:
        token = self.peek()
        if token.kind == "ident" and token.text in self._PREFIX:
            self.advance()
            return self._PREFIX[token.text](self.term_unary())
        return self.term_atom()

    def term_atom(self) -> Term:
        if self.accept("unit"):
            return UNIT
        if self.accept("("):
            first = self.term()
            if self.accept(","):
                second = self.term()
                self.expect(")")
                return Pair(first, second)
            if self.accept(":"):
                ty = self.type_()
                self.expect(")")
                return ascribe(first, ty)
            self.expect(")")
            return first
        return Var(self.ident("term"))


def parse_bound(text: str) -> BoundExpr:
    parser = _Parser(text)
    result = parser.bound()
    parser.finish()
    return result


def parse_type(text: str) -> Type:
    parser = _Parser(text)
    result = parser.type_()
    parser.finish()
    return result


def parse_term(text: str) -> Term:
    parser = _Parser(text)
    result = parser.term()
    parser.finish()
    return result


# ---------------------------------------------------------------------------
# .cufl files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Definition:
    name: str
    term: Term
    ty: Optional[Type] = None
    claim: Optional[Tuple[BoundExpr, BoundExpr]] = None
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Directive:
    kind: str
    name: str
    line: int = 0
    col: int = 0


@dataclass
class Program:
    definitions: Dict[str, Definition] = field(default_factory=dict)
    directives: List[Directive] = field(default_factory=list)


DIRECTIVES = ("check", "run", "quote")


def parse_program(text: str) -> Program:
    """Parse a ``.cufl`` file; each definition sees earlier ones inlined."""
    parser = _Parser(text)
    program = Program()
    while parser.peek().kind != "eof":
        token = parser.peek()
        if token.kind == "directive":
            parser.advance()
            kind = token.text[1:]
            if kind not in DIRECTIVES:
                raise ParseError(f"unknown directive {token.text!r}", token.line, token.col)
            name = parser.ident("definition name")
            parser.accept(";")
            program.directives.append(Directive(kind, name, token.line, token.col))
            continue
        parser.expect("def")
        name = parser.ident("definition name")
        if name in program.definitions:
            raise ParseError(f"duplicate definition {name!r}", token.line, token.col)
        ty = parser.type_() if parser.accept(":") else None
        claim = None
        if parser.accept("["):
            alpha = parser.bound()
            parser.expect(";")
            beta = parser.bound()
            parser.expect("]")
            claim = (alpha, beta)
        parser.expect("=")
        term = parser.term()
        parser.expect(";")
        for earlier in sorted(term.free & set(program.definitions)):
            term = subst_term(term, earlier, program.definitions[earlier].term)
        program.definitions[name] = Definition(name, term, ty, claim, token.line, token.col)
        logger.debug("parsed definition %s", name)
    return program
