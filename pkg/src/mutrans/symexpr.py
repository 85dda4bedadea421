"""Tiny expression language for boundary symbols p(sigma, xi).

Grammar (Pratt parser, positions tracked for error reporting):

    atoms     sigma, xi, numeric literals (1.5, 2e-3, 2i, bare i or j)
    builtins  abs2pow(a)    = (sigma^2 + xi^2)^a
              chiplus(nu)   = (sigma + i*xi)^nu
              chiminus(nu)  = (sigma - i*xi)^nu
    ops       + - * / ^   with ^ right-associative and binding tighter
              than unary minus, so -xi^2 means -(xi^2)

Exponents of ^ and the builtin parameters must fold to constants: the
homogeneity and derivative rules below rely on that. Everything evaluates
vectorized over numpy arrays with principal branches throughout.

The AST supports exact xi-differentiation (used for transmission-condition
residuals, where finite differences near the symbol's branch points lose
half the digits) and structural homogeneity-order inference in the joint
(sigma, xi) dilation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mutrans.errors import SymbolError

_BUILTINS = ("abs2pow", "chiplus", "chiminus")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: complex

    def eval(self, sigma, xi):
        return np.broadcast_to(self.value, np.broadcast(sigma, xi).shape).copy() \
            if np.ndim(sigma) or np.ndim(xi) else self.value

    def diff_xi(self):
        return Num(0.0)

    def order(self):
        return 0.0

    def __str__(self):
        v = complex(self.value)
        if v.imag == 0:
            return _fmt(v.real)
        if v.real == 0:
            return _fmt(v.imag) + "i"
        return f"({_fmt(v.real)}+{_fmt(v.imag)}i)"


@dataclass(frozen=True)
class Var:
    name: str  # 'sigma' or 'xi'

    def eval(self, sigma, xi):
        return sigma if self.name == "sigma" else xi

    def diff_xi(self):
        return Num(1.0 if self.name == "xi" else 0.0)

    def order(self):
        return 1.0

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: object

    def eval(self, sigma, xi):
        return -self.arg.eval(sigma, xi)

    def diff_xi(self):
        return Neg(self.arg.diff_xi())

    def order(self):
        return self.arg.order()

    def __str__(self):
        return f"-({self.arg})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def eval(self, sigma, xi):
        a = self.left.eval(sigma, xi)
        b = self.right.eval(sigma, xi)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        # '^' with constant exponent, enforced at parse time
        return np.asarray(a, dtype=complex) ** b if np.ndim(a) else \
            complex(a) ** b

    def diff_xi(self):
        u, v = self.left, self.right
        du, dv = u.diff_xi(), v.diff_xi()
        if self.op == "+":
            return BinOp("+", du, dv)
        if self.op == "-":
            return BinOp("-", du, dv)
        if self.op == "*":
            return BinOp("+", BinOp("*", du, v), BinOp("*", u, dv))
        if self.op == "/":
            num = BinOp("-", BinOp("*", du, v), BinOp("*", u, dv))
            return BinOp("/", num, BinOp("^", v, Num(2.0)))
        # d/dxi u^c = c * u^(c-1) * u'
        c = self.right.value
        return BinOp("*", BinOp("*", Num(c), BinOp("^", u, Num(c - 1))), du)

    def order(self):
        if self.op in ("+", "-"):
            a, b = self.left.order(), self.right.order()
            if abs(a - b) > 1e-12:
                raise SymbolError(
                    f"sum mixes homogeneity orders {a:g} and {b:g}")
            return a
        if self.op == "*":
            return self.left.order() + self.right.order()
        if self.op == "/":
            return self.left.order() - self.right.order()
        return self.left.order() * complex(self.right.value).real

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Builtin:
    kind: str
    param: complex

    def eval(self, sigma, xi):
        s = np.asarray(sigma, dtype=complex) if np.ndim(sigma) else complex(sigma)
        x = np.asarray(xi, dtype=complex) if np.ndim(xi) else complex(xi)
        if self.kind == "abs2pow":
            return (s * s + x * x) ** self.param
        if self.kind == "chiplus":
            return (s + 1j * x) ** self.param
        return (s - 1j * x) ** self.param

    def diff_xi(self):
        a = self.param
        if self.kind == "abs2pow":
            # 2 a xi (sigma^2 + xi^2)^(a-1)
            return BinOp("*", BinOp("*", Num(2 * a), Var("xi")),
                         Builtin("abs2pow", a - 1))
        if self.kind == "chiplus":
            return BinOp("*", Num(1j * a), Builtin("chiplus", a - 1))
        return BinOp("*", Num(-1j * a), Builtin("chiminus", a - 1))

    def order(self):
        a = complex(self.param)
        if self.kind == "abs2pow":
            return (2 * a).real if a.imag == 0 else 2 * a
        return a.real if a.imag == 0 else a

    def __str__(self):
        return f"{self.kind}({Num(self.param)})"


def _fmt(v):
    return f"{v:g}"


# ---------------------------------------------------------------------------
# lexer


_OPS = "+-*/^(),"


def _lex(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                seen_dot |= text[j] == "."
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            value = float(text[i:j])
            if j < n and text[j] in "ij" and \
                    (j + 1 >= n or not (text[j + 1].isalnum() or text[j + 1] == "_")):
                tokens.append(("num", 1j * value, i))
                j += 1
            else:
                tokens.append(("num", complex(value), i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise SymbolError(f"unexpected character {ch!r}", position=i)
    tokens.append(("end", None, n))
    return tokens


# ---------------------------------------------------------------------------
# Pratt parser

_LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25  # between mul and pow: -xi^2 parses as -(xi^2)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _lex(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise SymbolError(f"expected {kind!r}, found {tok[1]!r}",
                              position=tok[2])
        return tok

    def parse(self):
        node = self.expression(0)
        tok = self.peek()
        if tok[0] != "end":
            raise SymbolError(f"trailing input starting at {tok[1]!r}",
                              position=tok[2])
        return node

    def expression(self, rbp):
        tok = self.advance()
        left = self.nud(tok)
        while _LBP.get(self.peek()[0], -1) > rbp:
            tok = self.advance()
            left = self.led(tok, left)
        return left

    def nud(self, tok):
        kind, value, pos = tok
        if kind == "num":
            return Num(value)
        if kind == "name":
            if value in ("sigma", "xi"):
                return Var(value)
            if value in ("i", "j"):
                return Num(1j)
            if value in _BUILTINS:
                self.expect("(")
                arg = self.expression(0)
                self.expect(")")
                cval = _const_value(arg)
                if cval is None:
                    raise SymbolError(
                        f"{value} parameter must be a constant", position=pos)
                return Builtin(value, cval)
            raise SymbolError(f"unknown name {value!r}", position=pos)
        if kind == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if kind == "-":
            return Neg(self.expression(_UNARY_BP))
        if kind == "+":
            return self.expression(_UNARY_BP)
        raise SymbolError(f"unexpected token {value!r}", position=pos)

    def led(self, tok, left):
        kind, _, pos = tok
        if kind == "^":
            right = self.expression(_LBP["^"] - 1)  # right-associative
            cval = _const_value(right)
            if cval is None:
                raise SymbolError("exponent must be a constant", position=pos)
            return BinOp("^", left, Num(cval))
        right = self.expression(_LBP[kind])
        return BinOp(kind, left, right)


def _const_value(node):
    """Fold a constant subtree to a complex number, or None."""
    if isinstance(node, Num):
        return complex(node.value)
    if isinstance(node, Neg):
        v = _const_value(node.arg)
        return None if v is None else -v
    if isinstance(node, BinOp):
        a = _const_value(node.left)
        b = _const_value(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a ** b
    return None


def parse_symbol(text):
    """Parse an expression string into an AST with eval / diff_xi / order."""
    if not isinstance(text, str) or not text.strip():
        raise SymbolError("empty symbol expression", position=0)
    return _Parser(text).parse()


def diff_xi(node, times=1):
    """times-fold exact xi-derivative of a parsed expression."""
    for _ in range(times):
        node = node.diff_xi()
    return node


def homogeneity_order(node):
    """Structural joint (sigma, xi)-dilation order; raises SymbolError on
    sums of unequal orders (e.g. 1 + xi^2, which is not homogeneous)."""
    return node.order()
