"""Recursive-descent parser for the definition-file expression grammar.

Grammar (whitespace insignificant)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' exponent)?          # right-associative
    exponent := INTEGER ('^' exponent)? | '(' expr ')'   # must fold to a rational
    primary  := INTEGER | IDENT | call | '(' expr ')'
    call     := IDENT primes? '(' expr (',' expr)* ')'
    primes   := "'"+  |  '{' INTEGER (',' INTEGER)* '}'

Identifiers are ``[A-Za-z][A-Za-z0-9_]*`` and must be declared: chart
coordinates, parameters, elementary functions, or registered opaque
functions.  Rational literals are written ``p/q`` (folded exactly by the
constant arithmetic); decimal literals are rejected to keep definition files
exact.  A prime after an opaque name raises its derivative order
(``f''(x0)``); the brace form ``c{1,0}(x1,x2)`` is the printer's extension
for partial derivatives of multi-argument opaque functions and is accepted
on input as well.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .chart import Chart, SymbolTable
from .errors import ArityMismatchError, ParseError, UnknownIdentifierError
from .expression import (ELEMENTARY, Expr, Rational, add, coord, div, elem,
                         mul, neg, opaque, param, pow_, rational)

__all__ = ["parse_expression", "tokenize"]

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<decimal>\d+\.\d*|\.\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),{}'])
""", re.VERBOSE)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"{self.kind}:{self.text}@{self.pos}"


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "decimal":
            raise ParseError(
                "decimal literals are not allowed; use exact rationals like 3/10",
                pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart, symbols: SymbolTable):
        self.text = text
        self.chart = chart
        self.symbols = symbols
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        if self.tok.text != text:
            raise ParseError(f"unexpected token {self.tok.text or 'end of input'!r}",
                             self.tok.pos, expected=repr(text))
        return self.advance()

    # grammar rules -------------------------------------------------------

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos,
                             expected="end of input")
        return e

    def expr(self) -> Expr:
        parts = [self.term()]
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            t = self.term()
            parts.append(t if op == "+" else neg(t))
        return add(*parts)

    def term(self) -> Expr:
        out = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            rhs = self.unary()
            out = mul(out, rhs) if op == "*" else div(out, rhs)
        return out

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.text == "^":
            self.advance()
            return pow_(base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        t = self.tok
        if t.kind == "int":
            self.advance()
            value = Fraction(int(t.text))
            if self.tok.text == "^":  # right-associative chain, e.g. 2^3^2
                self.advance()
                value = value ** self.exponent()
            return value
        if t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            if not isinstance(inner, Rational):
                raise ParseError("exponent must fold to an exact rational", t.pos)
            return inner.value
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.pos,
                         expected="integer or parenthesized rational exponent")

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return rational(int(t.text))
        if t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "ident":
            return self.identifier()
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.pos,
                         expected="a value")

    def identifier(self) -> Expr:
        t = self.advance()
        name = t.text
        if name in ELEMENTARY:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return elem(name, arg)
        arity = self.symbols.opaque_arity(name)
        if arity is not None:
            orders = self.derivative_marks(name, arity, t.pos)
            self.expect("(")
            args = [self.expr()]
            while self.tok.text == ",":
                self.advance()
                args.append(self.expr())
            self.expect(")")
            if len(args) != arity:
                raise ArityMismatchError(
                    f"{name} takes {arity} argument(s), got {len(args)}", t.pos)
            return opaque(name, orders, args)
        if name in self.chart.coordinates:
            return coord(self.chart.index(name))
        if name in self.symbols.parameters:
            return param(name)
        raise UnknownIdentifierError(f"unknown identifier {name!r}", t.pos)

    def derivative_marks(self, name, arity, pos):
        orders = [0] * arity
        if self.tok.text == "'":
            if arity != 1:
                raise ArityMismatchError(
                    f"prime derivative notation requires a unary function, "
                    f"but {name} takes {arity} arguments", pos)
            while self.tok.text == "'":
                self.advance()
                orders[0] += 1
        elif self.tok.text == "{":
            self.advance()
            got = []
            while True:
                t = self.tok
                if t.kind != "int":
                    raise ParseError("expected a derivative order", t.pos,
                                     expected="integer")
                got.append(int(self.advance().text))
                if self.tok.text == ",":
                    self.advance()
                    continue
                break
            self.expect("}")
            if len(got) != arity:
                raise ArityMismatchError(
                    f"derivative multi-index for {name} must have {arity} "
                    f"entries, got {len(got)}", pos)
            orders = got
        return tuple(orders)


def parse_expression(text: str, chart: Chart, symbols: SymbolTable = None) -> Expr:
    """Parse ``text`` into a normalized expression over ``chart``.

    Raises :class:`ParseError` (with position and expected token),
    :class:`UnknownIdentifierError` or :class:`ArityMismatchError`.
    Printing the result with :func:`weaklie.expression.format_expression`
    and re-parsing reproduces it exactly.
    """
    return _Parser(text, chart, symbols or SymbolTable()).parse()
