"""Symbol expressions: parsing, evaluation, and algebraic manipulation.

A symbol is a continuous function on the closed disc (one variable, ``z``)
or closed bi-disc (two variables, ``z`` and ``w``), written in the grammar

.. code-block:: text

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := 'z' | 'w' | number | '(' expr ')' | '-' base | func '(' expr ')'
    func   := 'conj' | 're' | 'im' | 'abs' | 'exp'
    number := real | '(' real ('+'|'-') real 'i' ')'

Whitespace is insignificant and everything is case-sensitive.  Complex
literals must be parenthesized with both parts present, e.g. ``(0.5-2i)``.
Exponents are literal nonnegative integers, which keeps every expressible
symbol continuous on the closed bi-disc.
"""

from __future__ import annotations

import cmath
import re as _re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ArityError, SymbolSyntaxError

__all__ = [
    "Const", "VarZ", "VarW", "Conj", "Neg", "Add", "Sub", "Mul", "Pow",
    "Re", "Im", "Abs", "Exp", "SymbolExpr", "parse", "evaluate",
    "slice_theta1", "slice_theta2", "swap_variables", "expand_polynomial",
    "to_text", "canonical_text",
]

# AST node kinds.  All immutable; trees are shared freely.


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class VarZ:
    pass


@dataclass(frozen=True)
class VarW:
    pass


@dataclass(frozen=True)
class Conj:
    arg: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Re:
    arg: "Node"


@dataclass(frozen=True)
class Im:
    arg: "Node"


@dataclass(frozen=True)
class Abs:
    arg: "Node"


@dataclass(frozen=True)
class Exp:
    arg: "Node"


Node = Union[Const, VarZ, VarW, Conj, Neg, Add, Sub, Mul, Pow, Re, Im, Abs, Exp]

# Node kinds with no exact polynomial form; builders fall back to quadrature
# and the CLI enlarges the default rule for them.
NONPOLY_KINDS = (Re, Im, Abs, Exp)


def _uses(node: Node, kind) -> bool:
    if isinstance(node, kind):
        return True
    if isinstance(node, (Const, VarZ, VarW)):
        return False
    if isinstance(node, (Add, Sub, Mul)):
        return _uses(node.left, kind) or _uses(node.right, kind)
    if isinstance(node, Pow):
        return _uses(node.base, kind)
    return _uses(node.arg, kind)


@dataclass(frozen=True)
class SymbolExpr:
    """A parsed symbol.

    :ivar root: the AST root node
    """

    root: Node

    @property
    def is_two_variable(self) -> bool:
        # arity is derived from true variable usage: two-variable iff w occurs
        return _uses(self.root, VarW)

    @property
    def has_nonpolynomial_node(self) -> bool:
        return any(_uses(self.root, k) for k in NONPOLY_KINDS)

    @property
    def text(self) -> str:
        return to_text(self)

    def __str__(self) -> str:
        return to_text(self)


# Tokenizer.  Offsets are character offsets into the input text, which for
# the ASCII grammar coincide with byte offsets.

_TOKEN_RE = _re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[a-z]+)"
    r"|(?P<op>[-+*^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "op" | "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise SymbolSyntaxError(
                "unrecognized character", bad_at,
                expected=("number", "identifier", "operator"),
                found=text[bad_at],
            )
        for kind in ("number", "ident", "op"):
            if m.group(kind) is not None:
                tokens.append(_Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


_FUNCS = {"conj": Conj, "re": Re, "im": Im, "abs": Abs, "exp": Exp}


class _Parser:
    """Recursive-descent parser for the grammar above."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, expected, tok: Optional[_Token] = None):
        tok = tok or self.peek()
        found = tok.text if tok.kind != "end" else "end of input"
        raise SymbolSyntaxError("syntax error", tok.offset, expected=expected, found=found)

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            self.error((f"'{op}'",))
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error(("'+'", "'-'", "'*'", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.advance()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            tok = self.peek()
            if tok.kind != "number" or not tok.text.isdigit():
                raise SymbolSyntaxError(
                    "exponent must be a nonnegative integer literal", tok.offset,
                    expected=("nonnegative integer",),
                    found=tok.text if tok.kind != "end" else "end of input",
                )
            self.advance()
            node = Pow(node, int(tok.text))
        return node

    def base(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.base())
        if tok.kind == "op" and tok.text == "(":
            lit = self.try_complex_literal()
            if lit is not None:
                return lit
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "number":
            self.advance()
            return Const(complex(float(tok.text), 0.0))
        if tok.kind == "ident":
            if tok.text == "z":
                self.advance()
                return VarZ()
            if tok.text == "w":
                self.advance()
                return VarW()
            if tok.text in _FUNCS:
                self.advance()
                self.expect_op("(")
                node = self.expr()
                self.expect_op(")")
                return _FUNCS[tok.text](node)
            self.error(("'z'", "'w'", "'conj'", "'re'", "'im'", "'abs'", "'exp'"))
        self.error(("'z'", "'w'", "number", "'('", "'-'", "function name"))

    def try_complex_literal(self) -> Optional[Node]:
        # lookahead for '(' ['-'] real ('+'|'-') real 'i' ')'
        i = 1
        sign = 1.0
        if self.peek(i).kind == "op" and self.peek(i).text == "-":
            sign = -1.0
            i += 1
        if self.peek(i).kind != "number":
            return None
        re_tok = self.peek(i)
        i += 1
        if self.peek(i).kind != "op" or self.peek(i).text not in "+-":
            return None
        im_sign = 1.0 if self.peek(i).text == "+" else -1.0
        i += 1
        if self.peek(i).kind != "number":
            return None
        im_tok = self.peek(i)
        i += 1
        if self.peek(i).kind != "ident" or self.peek(i).text != "i":
            return None
        i += 1
        if self.peek(i).kind != "op" or self.peek(i).text != ")":
            return None
        for _ in range(i + 1):
            self.advance()
        return Const(complex(sign * float(re_tok.text), im_sign * float(im_tok.text)))


def parse(text: str) -> SymbolExpr:
    """Parse symbol text into a :class:`SymbolExpr`.

    :param text: expression in the module grammar
    :returns: parsed symbol
    :raises SymbolSyntaxError: with the byte offset and expected-token set
    """
    return SymbolExpr(_Parser(text).parse())


# Evaluation.  One walker serves scalars and numpy arrays; numpy scalar
# types propagate through cmath-free operations.

def _eval(node: Node, z, w):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, VarZ):
        return z
    if isinstance(node, VarW):
        return w
    if isinstance(node, Conj):
        return np.conjugate(_eval(node.arg, z, w))
    if isinstance(node, Neg):
        return -_eval(node.arg, z, w)
    if isinstance(node, Add):
        return _eval(node.left, z, w) + _eval(node.right, z, w)
    if isinstance(node, Sub):
        return _eval(node.left, z, w) - _eval(node.right, z, w)
    if isinstance(node, Mul):
        return _eval(node.left, z, w) * _eval(node.right, z, w)
    if isinstance(node, Pow):
        return _eval(node.base, z, w) ** node.exponent
    if isinstance(node, Re):
        return np.real(_eval(node.arg, z, w)) + 0j
    if isinstance(node, Im):
        return np.imag(_eval(node.arg, z, w)) + 0j
    if isinstance(node, Abs):
        return np.abs(_eval(node.arg, z, w)) + 0j
    if isinstance(node, Exp):
        return np.exp(_eval(node.arg, z, w))
    raise TypeError(f"unknown node {node!r}")


def evaluate(e: SymbolExpr, z, w=None):
    """Evaluate a symbol at a point (or elementwise on numpy arrays).

    :param e: the symbol
    :param z: value of ``z``; scalar or array
    :param w: value of ``w``; required iff the symbol is two-variable
    :returns: complex value (or complex array matching the broadcast shape)
    :raises ArityError: if ``w`` is missing for a two-variable symbol
    """
    if e.is_two_variable and w is None:
        raise ArityError("two-variable symbol requires a value for w")
    result = _eval(e.root, z, w)
    if isinstance(result, np.ndarray):
        return result.astype(complex, copy=False)
    return complex(result)


def eval_grid(e: SymbolExpr, z, w=None) -> np.ndarray:
    """Evaluate on numpy arrays, always returning a complex ndarray of the
    full broadcast shape (constant symbols included).

    :param z: array of z values
    :param w: array of w values, broadcastable against ``z``; may be given
        for a one-variable symbol to fix the output shape
    """
    if e.is_two_variable and w is None:
        raise ArityError("two-variable symbol requires a value for w")
    result = _eval(e.root, z, w)
    shape = np.shape(z) if w is None else np.broadcast_shapes(np.shape(z), np.shape(w))
    out = np.asarray(result, dtype=complex)
    if out.shape != shape:
        out = np.broadcast_to(out, shape).copy()
    return out


# Structural rewriting.

def _map_vars(node: Node, z_repl: Node, w_repl: Node) -> Node:
    if isinstance(node, Const):
        return node
    if isinstance(node, VarZ):
        return z_repl
    if isinstance(node, VarW):
        return w_repl
    if isinstance(node, Conj):
        return Conj(_map_vars(node.arg, z_repl, w_repl))
    if isinstance(node, Neg):
        return Neg(_map_vars(node.arg, z_repl, w_repl))
    if isinstance(node, Add):
        return Add(_map_vars(node.left, z_repl, w_repl), _map_vars(node.right, z_repl, w_repl))
    if isinstance(node, Sub):
        return Sub(_map_vars(node.left, z_repl, w_repl), _map_vars(node.right, z_repl, w_repl))
    if isinstance(node, Mul):
        return Mul(_map_vars(node.left, z_repl, w_repl), _map_vars(node.right, z_repl, w_repl))
    if isinstance(node, Pow):
        return Pow(_map_vars(node.base, z_repl, w_repl), node.exponent)
    if isinstance(node, Re):
        return Re(_map_vars(node.arg, z_repl, w_repl))
    if isinstance(node, Im):
        return Im(_map_vars(node.arg, z_repl, w_repl))
    if isinstance(node, Abs):
        return Abs(_map_vars(node.arg, z_repl, w_repl))
    if isinstance(node, Exp):
        return Exp(_map_vars(node.arg, z_repl, w_repl))
    raise TypeError(f"unknown node {node!r}")


def _boundary_slice(e: SymbolExpr, theta: float, fix_z: bool) -> SymbolExpr:
    c = Const(cmath.exp(1j * float(theta)))
    if fix_z:
        # g(zeta) = f(e^{i theta}, zeta): pin z, rename w to the free variable
        return SymbolExpr(_map_vars(e.root, c, VarZ()))
    return SymbolExpr(_map_vars(e.root, VarZ(), c))


def slice_theta1(e: SymbolExpr, theta1: float) -> SymbolExpr:
    """Return the one-variable symbol ``g(zeta) = f(e^{i theta1}, zeta)``.

    :param e: a two-variable symbol
    :param theta1: angle in radians
    :raises ArityError: if ``e`` is one-variable
    """
    if not e.is_two_variable:
        raise ArityError("slice_theta1 requires a two-variable symbol")
    return _boundary_slice(e, theta1, fix_z=True)


def slice_theta2(e: SymbolExpr, theta2: float) -> SymbolExpr:
    """Return the one-variable symbol ``g(zeta) = f(zeta, e^{i theta2})``.

    :param e: a two-variable symbol
    :param theta2: angle in radians
    :raises ArityError: if ``e`` is one-variable
    """
    if not e.is_two_variable:
        raise ArityError("slice_theta2 requires a two-variable symbol")
    return _boundary_slice(e, theta2, fix_z=False)


def swap_variables(e: SymbolExpr) -> SymbolExpr:
    """Return the symbol with the roles of ``z`` and ``w`` exchanged."""
    return SymbolExpr(_map_vars(e.root, VarW(), VarZ()))


# Polynomial expansion into sum of c * z^a * conj(z)^b.  Only the listed
# node kinds qualify; Re/Im/Abs/Exp make the expansion absent even when a
# polynomial identity exists, so the exactness contract stays syntactic.

_EXPAND_TERM_CAP = 4096


def _expand(node: Node) -> Optional[dict]:
    if isinstance(node, Const):
        return {(0, 0): complex(node.value)}
    if isinstance(node, VarZ):
        return {(1, 0): 1.0 + 0j}
    if isinstance(node, Conj):
        inner = _expand(node.arg)
        if inner is None:
            return None
        return {(b, a): c.conjugate() for (a, b), c in inner.items()}
    if isinstance(node, Neg):
        inner = _expand(node.arg)
        if inner is None:
            return None
        return {k: -c for k, c in inner.items()}
    if isinstance(node, (Add, Sub)):
        left = _expand(node.left)
        right = _expand(node.right)
        if left is None or right is None:
            return None
        sign = 1.0 if isinstance(node, Add) else -1.0
        out = dict(left)
        for k, c in right.items():
            out[k] = out.get(k, 0j) + sign * c
        return out
    if isinstance(node, Mul):
        left = _expand(node.left)
        right = _expand(node.right)
        if left is None or right is None:
            return None
        out: dict = {}
        for (a1, b1), c1 in left.items():
            for (a2, b2), c2 in right.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0j) + c1 * c2
        if len(out) > _EXPAND_TERM_CAP:
            return None
        return out
    if isinstance(node, Pow):
        base = _expand(node.base)
        if base is None:
            return None
        out = {(0, 0): 1.0 + 0j}
        for _ in range(node.exponent):
            nxt: dict = {}
            for (a1, b1), c1 in out.items():
                for (a2, b2), c2 in base.items():
                    k = (a1 + a2, b1 + b2)
                    nxt[k] = nxt.get(k, 0j) + c1 * c2
            out = nxt
            if len(out) > _EXPAND_TERM_CAP:
                return None
        return out
    # VarW, Re, Im, Abs, Exp
    return None


def expand_polynomial(e: SymbolExpr) -> Optional[list[tuple[int, int, complex]]]:
    """Collect a one-variable polynomial symbol into monomials.

    :param e: the symbol
    :returns: list of ``(a, b, c)`` terms meaning ``sum c * z^a * conj(z)^b``
        with distinct ``(a, b)`` pairs, or ``None`` when the symbol contains
        a node kind outside Const/VarZ/Conj/Neg/Add/Sub/Mul/Pow or uses ``w``.
        Exact zero coefficients are dropped; the zero symbol gives ``[]``.
    """
    if e.is_two_variable:
        return None
    table = _expand(e.root)
    if table is None:
        return None
    terms = [(a, b, c) for (a, b), c in table.items() if c != 0]
    terms.sort(key=lambda t: (t[0], t[1]))
    return terms


# Printing.

def _fmt_real(x: float) -> str:
    return "%.17g" % x


def _fmt_const(v: complex) -> str:
    if v.imag == 0.0:
        if v.real < 0:
            return "-" + _fmt_real(-v.real)
        return _fmt_real(v.real)
    sign = "+" if v.imag >= 0 else "-"
    return f"({_fmt_real(v.real)}{sign}{_fmt_real(abs(v.imag))}i)"


_FUNC_NAMES = {Conj: "conj", Re: "re", Im: "im", Abs: "abs", Exp: "exp"}

# precedence: Add/Sub = 1, Mul = 2, Pow = 3, atoms = 4


def _print(node: Node) -> tuple[str, int]:
    if isinstance(node, Const):
        s = _fmt_const(complex(node.value))
        return s, 1 if s.startswith("-") else 4
    if isinstance(node, VarZ):
        return "z", 4
    if isinstance(node, VarW):
        return "w", 4
    if isinstance(node, tuple(_FUNC_NAMES)):
        inner, _ = _print(node.arg)
        return f"{_FUNC_NAMES[type(node)]}({inner})", 4
    if isinstance(node, Neg):
        s, prec = _print(node.arg)
        if prec < 4:
            s = f"({s})"
        return "-" + s, 1
    if isinstance(node, Pow):
        s, prec = _print(node.base)
        if prec < 4:
            s = f"({s})"
        return f"{s}^{node.exponent}", 3
    if isinstance(node, Mul):
        ls, lp = _print(node.left)
        rs, rp = _print(node.right)
        if lp < 2:
            ls = f"({ls})"
        if rp < 2:
            rs = f"({rs})"
        return f"{ls}*{rs}", 2
    if isinstance(node, (Add, Sub)):
        op = "+" if isinstance(node, Add) else "-"
        ls, _ = _print(node.left)
        rs, rp = _print(node.right)
        if rp <= 1:
            rs = f"({rs})"
        return f"{ls}{op}{rs}", 1
    raise TypeError(f"unknown node {node!r}")


def to_text(e: SymbolExpr) -> str:
    """Render the symbol as grammar-conforming text.

    ``parse(to_text(e))`` evaluates pointwise identically to ``e``.
    """
    return _print(e.root)[0]


# Canonical text: a deterministic key that identifies symbols up to
# commutativity of + and *.  Used for caching slice spectra; not parseable.

def _canon(node: Node) -> str:
    if isinstance(node, Const):
        v = complex(node.value)
        return f"c({_fmt_real(v.real)},{_fmt_real(v.imag)})"
    if isinstance(node, VarZ):
        return "z"
    if isinstance(node, VarW):
        return "w"
    if isinstance(node, (Add, Sub, Mul)):
        if isinstance(node, Mul):
            parts = sorted(_mul_chain(node))
            return "mul(" + ",".join(parts) + ")"
        parts = sorted(_add_chain(node))
        return "add(" + ",".join(parts) + ")"
    if isinstance(node, Neg):
        return f"neg({_canon(node.arg)})"
    if isinstance(node, Pow):
        return f"pow({_canon(node.base)},{node.exponent})"
    name = _FUNC_NAMES[type(node)]
    return f"{name}({_canon(node.arg)})"


def _add_chain(node: Node) -> list[str]:
    if isinstance(node, Add):
        return _add_chain(node.left) + _add_chain(node.right)
    if isinstance(node, Sub):
        return _add_chain(node.left) + [f"neg({_canon(node.right)})"]
    return [_canon(node)]


def _mul_chain(node: Node) -> list[str]:
    if isinstance(node, Mul):
        return _mul_chain(node.left) + _mul_chain(node.right)
    return [_canon(node)]


def canonical_text(e: SymbolExpr) -> str:
    """Deterministic identity key, invariant under reordering of the
    operands of ``+`` and ``*``."""
    return _canon(e.root)
