"""Reader for the ``.sys`` text format.

::

    # comment
    vars x1 x2 x3;
    x1^2 - 2*x1*x3 + 5;
    x1*x2^2 + x2*x3 + 1;

Polynomials use ``+ - * ^``, parentheses, integer or decimal literals and
division by constants.  Multiplication must be written out.
"""

import re
from dataclasses import dataclass

from realvar.polycore import Polynomial, PolySystem

__all__ = ["ParseError", "parse_system", "parse_polynomial", "format_system"]

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^();])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


def _combine(p, q, sign=1.0):
    # exact: the solver's arithmetic trims relative 1e-12 noise, the parser keeps every literal
    out = dict(p.terms)
    for m, c in q.terms.items():
        out[m] = out.get(m, 0.0) + sign * c
    return Polynomial(out, n=p.n)


def _product(p, q):
    out = {}
    for m1, c1 in p.terms.items():
        for m2, c2 in q.terms.items():
            m = m1 * m2
            out[m] = out.get(m, 0.0) + c1 * c2
    return Polynomial(out, n=p.n)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, tokens, names=None):
        self.toks = tokens
        self.i = 0
        self.names = names
        self.index = {v: k for k, v in enumerate(names)} if names else {}

    @property
    def cur(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.cur
        return ParseError(msg, tok.line, tok.col)

    def take(self):
        tok = self.cur
        self.i += 1
        return tok

    def expect(self, text):
        if self.cur.text != text or self.cur.kind == "eof":
            found = "end of input" if self.cur.kind == "eof" else repr(self.cur.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.take()

    def declaration(self):
        tok = self.cur
        if tok.kind != "id" or tok.text != "vars":
            raise self.error("a system starts with 'vars <names> ;'")
        self.take()
        names = []
        while self.cur.kind == "id":
            name = self.take()
            if name.text in names:
                raise self.error(f"variable {name.text!r} declared twice", name)
            names.append(name.text)
        if not names:
            raise self.error("no variables declared")
        self.expect(";")
        self.names = names
        self.index = {v: k for k, v in enumerate(names)}

    def statements(self):
        polys = []
        while self.cur.kind != "eof":
            start = self.cur
            p = self.expr()
            self.expect(";")
            if p.is_zero():
                raise self.error("polynomial is identically zero", start)
            polys.append(p)
        return polys

    def expr(self):
        p = self.term()
        while self.cur.text in ("+", "-") and self.cur.kind == "op":
            op = self.take()
            if self.cur.kind == "eof" or self.cur.text in (";", ")"):
                raise self.error(f"dangling {op.text!r}", op)
            q = self.term()
            p = _combine(p, q, 1.0 if op.text == "+" else -1.0)
        return p

    def term(self):
        p = self.unary()
        while self.cur.text in ("*", "/") and self.cur.kind == "op":
            op = self.take()
            q = self.unary()
            if op.text == "*":
                p = _product(p, q)
            else:
                if q.degree > 0:
                    raise self.error("division is only allowed by constants", op)
                if q.is_zero():
                    raise self.error("division by zero", op)
                p = Polynomial({m: c / q.terms[next(iter(q.terms))] for m, c in p.terms.items()}, n=p.n)
        return p

    def unary(self):
        if self.cur.kind == "op" and self.cur.text in ("-", "+"):
            sign = self.take().text
            p = self.unary()
            return -p if sign == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            self.take()
            tok = self.cur
            if tok.kind == "op" and tok.text == "-":
                raise self.error("negative exponents are not allowed")
            if tok.kind != "num":
                raise self.error("exponent must be a non-negative integer literal")
            if not tok.text.isdigit():
                raise self.error(f"non-integer exponent {tok.text}")
            self.take()
            out = Polynomial.constant(1.0, base.n)
            for _ in range(int(tok.text)):
                out = _product(out, base)
            base = out
        if self.cur.kind in ("num", "id") or self.cur.text == "(":
            raise self.error("implicit multiplication is not allowed; write '*'")
        return base

    def atom(self):
        tok = self.cur
        n = len(self.names)
        if tok.kind == "num":
            self.take()
            return Polynomial.constant(float(tok.text), n)
        if tok.kind == "id":
            if tok.text not in self.index:
                raise self.error(f"undeclared variable {tok.text!r}")
            self.take()
            return Polynomial.variable(self.index[tok.text], n)
        if tok.text == "(" and tok.kind == "op":
            self.take()
            p = self.expr()
            self.expect(")")
            return p
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise self.error(f"expected a number, variable or '(', found {found}")


def parse_system(text):
    """Parse a ``vars ...;`` header followed by ``;``-terminated polynomials."""
    p = _Parser(_tokenize(text))
    p.declaration()
    polys = p.statements()
    if not polys:
        raise p.error("the system has no polynomials")
    return PolySystem(len(p.names), tuple(polys), tuple(p.names))


def parse_polynomial(text, names):
    p = _Parser(_tokenize(text), list(names))
    out = p.expr()
    if p.cur.kind != "eof":
        raise p.error(f"unexpected {p.cur.text!r}")
    return out


def format_system(sys):
    return sys.format()
