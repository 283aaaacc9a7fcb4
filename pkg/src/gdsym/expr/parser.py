"""Recursive-descent parser for the ASCII expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' exponent)?
    base   := number | ident | ident '(' expr (',' expr)* ')'
            | ident '[' int (',' int)* ']' '(' expr (',' expr)* ')'
            | 'lnabs' '(' expr ')' | '(' expr ')'

Unary minus, signed or parenthesised rational exponents and the bracketed
derivative index are extensions so that printed canonical forms parse back.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .core import ArityError, Expr, ExprError, add, const, func, lnabs, mul, neg, power, sym

DEFAULT_FUNCTIONS = {"Phi": 2, "f": 1}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),\[\]]))"
)


class ParseError(ExprError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at offset {pos}: {text!r}")
        self.text = text
        self.pos = pos


def _tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unknown operator {text[pos]!r}", text, pos)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, functions: dict | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.functions = DEFAULT_FUNCTIONS if functions is None else functions

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.next()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", self.text, pos)

    def error(self, msg):
        raise ParseError(msg, self.text, self.peek()[2])

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return add(*terms)

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            f = self.factor()
            if op == "*":
                e = mul(e, f)
            else:
                if f.is_zero_literal:
                    self.error("division by zero")
                e = mul(e, power(f, -1))
        return e

    def factor(self) -> Expr:
        if self.peek()[1] == "-":
            self.next()
            return neg(self.factor())
        b = self.base()
        if self.peek()[1] == "^":
            self.next()
            exp = self.exponent()
            if b.is_zero_literal and exp < 0:
                self.error("division by zero")
            return power(b, exp)
        return b

    def exponent(self) -> Fraction:
        kind, v, pos = self.peek()
        sign = 1
        if v == "-":
            self.next()
            sign = -1
            kind, v, pos = self.peek()
        if v == "(":
            self.next()
            inner = self.expr()
            self.expect(")")
            if not inner.__class__.__name__ == "Const":
                raise ParseError("exponent must be rational", self.text, pos)
            return sign * inner.value
        if kind != "num" or "." in v:
            raise ParseError("integer exponent expected", self.text, pos)
        self.next()
        return Fraction(sign * int(v))

    def base(self) -> Expr:
        kind, v, pos = self.next()
        if kind == "num":
            return const(Fraction(v))
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "ident":
            if v == "lnabs":
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return lnabs(e)
            nxt = self.peek()[1]
            if nxt == "[":
                self.next()
                index = [self._int()]
                while self.peek()[1] == ",":
                    self.next()
                    index.append(self._int())
                self.expect("]")
                if self.peek()[1] != "(":
                    self.error("derivative index must be followed by arguments")
                return self.call(v, pos, index)
            if nxt == "(":
                return self.call(v, pos, None)
            return sym(v)
        raise ParseError(f"unexpected {v or 'end of input'!r}", self.text, pos)

    def _int(self) -> int:
        kind, v, pos = self.next()
        if kind != "num" or "." in v:
            raise ParseError("integer expected", self.text, pos)
        return int(v)

    def call(self, name, pos, index):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.next()
            args.append(self.expr())
        self.expect(")")
        declared = self.functions.get(name)
        if declared is not None and declared != len(args):
            raise ArityError(f"{name} declared with arity {declared}, called with {len(args)} at offset {pos}")
        if index is not None and len(index) != len(args):
            raise ArityError(f"{name}: derivative index {index} does not match {len(args)} arguments")
        return func(name, args, index)


def parse(text: str, functions: dict | None = None) -> Expr:
    """Parse ``text`` into a canonical expression.

    ``functions`` maps declared function names to arities; calls to names
    not in the map are accepted with whatever arity they are used with.
    """
    return _Parser(text, functions).parse()
