"""Parsing and symbolic manipulation of ODE right-hand sides.

The input language covers polynomials in x, t, y0..yn with complex-valued
named parameters: sums, differences, products, integer powers and
parentheses.  Parameters are bound to concrete numbers at parse time, so a
parsed tree contains only constants and the structural variables.  Negative
exponents are allowed on t only (t-factors may be meromorphic); everything
else must stay polynomial.

The grammar is documented in docs/grammar.ebnf.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "Add",
    "Const",
    "ExprError",
    "Mul",
    "OdeExpr",
    "Pow",
    "Sym",
    "Yvar",
    "parse_expr",
    "parse_ode",
    "partial",
    "taylor_terms",
]


class ExprError(ValueError):
    pass


# --------------------------------------------------------------------------
# nodes


class Node:
    __slots__ = ()


class Const(Node):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = complex(value)

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value

    def __hash__(self):
        return hash(("const", self.value))


class Sym(Node):
    """The structural variable x or t."""

    __slots__ = ("name",)

    def __init__(self, name):
        if name not in ("x", "t"):
            raise ExprError(f"unknown structural symbol {name!r}")
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Sym) and other.name == self.name

    def __hash__(self):
        return hash(("sym", self.name))


class Yvar(Node):
    __slots__ = ("j",)

    def __init__(self, j):
        if j < 0:
            raise ExprError("y index must be nonnegative")
        self.j = int(j)

    def __eq__(self, other):
        return isinstance(other, Yvar) and other.j == self.j

    def __hash__(self):
        return hash(("y", self.j))


class Add(Node):
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = tuple(args)

    def __eq__(self, other):
        return isinstance(other, Add) and other.args == self.args

    def __hash__(self):
        return hash(("add", self.args))


class Mul(Node):
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = tuple(args)

    def __eq__(self, other):
        return isinstance(other, Mul) and other.args == self.args

    def __hash__(self):
        return hash(("mul", self.args))


class Pow(Node):
    __slots__ = ("base", "n")

    def __init__(self, base, n):
        self.base = base
        self.n = int(n)

    def __eq__(self, other):
        return isinstance(other, Pow) and other.base == self.base and other.n == self.n

    def __hash__(self):
        return hash(("pow", self.base, self.n))


# smart constructors: flatten and fold constants, keep argument order


def make_add(*args):
    flat = []
    const = 0.0 + 0.0j
    for a in args:
        if isinstance(a, Add):
            items = a.args
        else:
            items = (a,)
        for item in items:
            if isinstance(item, Const):
                const += item.value
            else:
                flat.append(item)
    if const != 0:
        flat.append(Const(const))
    if not flat:
        return Const(0)
    if len(flat) == 1:
        return flat[0]
    return Add(flat)


def make_mul(*args):
    flat = []
    const = 1.0 + 0.0j
    for a in args:
        if isinstance(a, Mul):
            items = a.args
        else:
            items = (a,)
        for item in items:
            if isinstance(item, Const):
                const *= item.value
            else:
                flat.append(item)
    if const == 0:
        return Const(0)
    if not flat:
        return Const(const)
    if const != 1:
        flat.insert(0, Const(const))
    if len(flat) == 1:
        return flat[0]
    return Mul(flat)


def make_pow(base, n):
    n = int(n)
    if n < 0 and not (isinstance(base, Sym) and base.name == "t"):
        raise ExprError("negative exponents are allowed on t only")
    if n == 0:
        return Const(1)
    if n == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value**n)
    if isinstance(base, Pow):
        return make_pow(base.base, base.n * n)
    return Pow(base, n)


def neg(node):
    return make_mul(Const(-1), node)


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*^(),]))"
)

_RESERVED = {"x", "t"}
_YVAR = re.compile(r"^y(\d+)$")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ExprError(f"syntax error at position {at}: unexpected {stripped[0]!r}")
        if m.lastgroup is not None:
            out.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, params):
        self.text = text
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ExprError(f"syntax error at position {tok[2]}: expected {kind}, got {tok[1]!r}")
        if value is not None and tok[1] != value:
            raise ExprError(f"syntax error at position {tok[2]}: expected {value!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprError(f"syntax error at position {tok[2]}: unexpected {tok[1]!r}")
        return node

    def expr(self):
        sign = 1
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
        node = self.term()
        if sign < 0:
            node = neg(node)
        terms = [node]
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            terms.append(neg(rhs) if op == "-" else rhs)
        return make_add(*terms)

    def term(self):
        factors = [self.factor()]
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            factors.append(self.factor())
        return make_mul(*factors)

    def factor(self):
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            inner = self.factor()
            return neg(inner) if op == "-" else inner
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            n = self.exponent()
            return make_pow(base, n)
        return base

    def exponent(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "(":
            self.take()
            n = self.exponent()
            self.take("op", ")")
            return n
        sign = 1
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            sign = -1
            tok = self.peek()
        if tok[0] != "num" or "." in tok[1] or "e" in tok[1].lower():
            raise ExprError(f"syntax error at position {tok[2]}: integer exponent expected")
        self.take()
        return sign * int(tok[1])

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Const(float(tok[1]))
        if tok[0] == "ident":
            self.take()
            return self.resolve(tok)
        if tok[0] == "op" and tok[1] == "(":
            self.take()
            first = self.expr()
            if self.peek()[0] == "op" and self.peek()[1] == ",":
                # complex literal (re, im); both parts must fold to constants
                self.take()
                second = self.expr()
                self.take("op", ")")
                if not (isinstance(first, Const) and isinstance(second, Const)):
                    raise ExprError("complex literal parts must be numeric")
                return Const(first.value.real + 1j * second.value.real)
            self.take("op", ")")
            return first
        raise ExprError(f"syntax error at position {tok[2]}: unexpected {tok[1]!r}")

    def resolve(self, tok):
        name = tok[1]
        if name in _RESERVED:
            return Sym(name)
        m = _YVAR.match(name)
        if m:
            return Yvar(int(m.group(1)))
        if name in self.params:
            return Const(self.params[name])
        raise ExprError(f"unknown symbol {name!r} at position {tok[2]}")


# --------------------------------------------------------------------------
# printing


def _format_real(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _format_const(c: complex) -> str:
    if c.imag == 0:
        return _format_real(c.real)
    return f"({_format_real(c.real)}, {_format_real(c.imag)})"


def _needs_paren_in_mul(node) -> bool:
    if isinstance(node, Add):
        return True
    return isinstance(node, Const) and (node.value.imag == 0 and node.value.real < 0)


def to_text(node) -> str:
    if isinstance(node, Const):
        return _format_const(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Yvar):
        return f"y{node.j}"
    if isinstance(node, Pow):
        b = to_text(node.base)
        if isinstance(node.base, (Add, Mul, Const)):
            b = f"({b})"
        return f"{b}^{node.n}"
    if isinstance(node, Mul):
        args = list(node.args)
        prefix = ""
        if isinstance(args[0], Const) and args[0].value == -1:
            prefix = "-"
            args = args[1:]
        parts = []
        for a in args:
            s = to_text(a)
            if _needs_paren_in_mul(a):
                s = f"({s})"
            parts.append(s)
        return prefix + "*".join(parts)
    if isinstance(node, Add):
        out = to_text(node.args[0])
        for a in node.args[1:]:
            s = to_text(a)
            if s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out
    raise ExprError(f"cannot print node {node!r}")


# --------------------------------------------------------------------------
# evaluation / differentiation / expansion


def eval_numeric(node, x, t, ys) -> complex:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Sym):
        return complex(x if node.name == "x" else t)
    if isinstance(node, Yvar):
        if node.j >= len(ys):
            raise ExprError(f"no value supplied for y{node.j}")
        return complex(ys[node.j])
    if isinstance(node, Add):
        return sum(eval_numeric(a, x, t, ys) for a in node.args)
    if isinstance(node, Mul):
        acc = 1.0 + 0.0j
        for a in node.args:
            acc *= eval_numeric(a, x, t, ys)
        return acc
    if isinstance(node, Pow):
        return eval_numeric(node.base, x, t, ys) ** node.n
    raise ExprError(f"cannot evaluate node {node!r}")


def _derivative(node, j):
    if isinstance(node, (Const, Sym)):
        return Const(0)
    if isinstance(node, Yvar):
        return Const(1 if node.j == j else 0)
    if isinstance(node, Add):
        return make_add(*[_derivative(a, j) for a in node.args])
    if isinstance(node, Mul):
        terms = []
        for i, a in enumerate(node.args):
            d = _derivative(a, j)
            terms.append(make_mul(*node.args[:i], d, *node.args[i + 1 :]))
        return make_add(*terms)
    if isinstance(node, Pow):
        d = _derivative(node.base, j)
        return make_mul(Const(node.n), make_pow(node.base, node.n - 1), d)
    raise ExprError(f"cannot differentiate node {node!r}")


def _max_y_index(node):
    if isinstance(node, Yvar):
        return node.j
    if isinstance(node, (Add, Mul)):
        return max((_max_y_index(a) for a in node.args), default=-1)
    if isinstance(node, Pow):
        return _max_y_index(node.base)
    return -1


def y_degree_bound(node) -> int:
    """Upper bound for the total degree in the y variables."""
    if isinstance(node, Yvar):
        return 1
    if isinstance(node, Add):
        return max((y_degree_bound(a) for a in node.args), default=0)
    if isinstance(node, Mul):
        return sum(y_degree_bound(a) for a in node.args)
    if isinstance(node, Pow):
        return max(node.n, 0) * y_degree_bound(node.base)
    return 0


def _expand(node, n_y, bound):
    """Monomial dict {(r, yexps, s): coeff} with r + sum(yexps) <= bound."""
    if isinstance(node, Const):
        if node.value == 0:
            return {}
        return {(0, (0,) * (n_y + 1), 0): node.value}
    if isinstance(node, Sym):
        if node.name == "x":
            if bound < 1:
                return {}
            return {(1, (0,) * (n_y + 1), 0): 1.0 + 0.0j}
        return {(0, (0,) * (n_y + 1), 1): 1.0 + 0.0j}
    if isinstance(node, Yvar):
        if bound < 1:
            return {}
        ye = [0] * (n_y + 1)
        ye[node.j] = 1
        return {(0, tuple(ye), 0): 1.0 + 0.0j}
    if isinstance(node, Add):
        out = {}
        for a in node.args:
            for key, c in _expand(a, n_y, bound).items():
                out[key] = out.get(key, 0.0) + c
        return {k: c for k, c in out.items() if c != 0}
    if isinstance(node, Mul):
        out = {(0, (0,) * (n_y + 1), 0): 1.0 + 0.0j}
        for a in node.args:
            out = _dict_mul(out, _expand(a, n_y, bound), bound)
        return out
    if isinstance(node, Pow):
        if node.n < 0:
            base = _expand(node.base, n_y, bound)
            if len(base) != 1:
                raise ExprError("negative powers must act on a single monomial")
            ((r, ye, s), c) = next(iter(base.items()))
            if r or any(ye):
                raise ExprError("negative powers are allowed on t only")
            return {(0, ye, s * node.n): c**node.n}
        out = {(0, (0,) * (n_y + 1), 0): 1.0 + 0.0j}
        base = _expand(node.base, n_y, bound)
        for _ in range(node.n):
            out = _dict_mul(out, base, bound)
        return out
    raise ExprError(f"cannot expand node {node!r}")


def _dict_mul(a, b, bound):
    out = {}
    for (r1, y1, s1), c1 in a.items():
        for (r2, y2, s2), c2 in b.items():
            r = r1 + r2
            ye = tuple(u + v for u, v in zip(y1, y2))
            if r + sum(ye) > bound:
                continue
            key = (r, ye, s1 + s2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


# --------------------------------------------------------------------------
# public wrapper


@dataclass(frozen=True)
class OdeExpr:
    """A parsed expression F(x, t, y0..y_order_n)."""

    root: Node
    order_n: int

    def __str__(self):
        return to_text(self.root)

    def evaluate(self, x=0.0, t=0.0, ys=()) -> complex:
        return eval_numeric(self.root, x, t, ys)

    def partial(self, j: int) -> "OdeExpr":
        if not (0 <= j <= self.order_n):
            raise ExprError(f"derivative index {j} out of range 0..{self.order_n}")
        return OdeExpr(_derivative(self.root, j), self.order_n)

    def taylor_terms(self, bound: int):
        """All monomials c * x^r * t^s * prod(y_j^k_j) with r + sum(k_j) <= bound.

        Returns a sorted list of ((r, (k_0..k_n)), coeff) where coeff is an
        expression in t alone.
        """
        raw = _expand(self.root, self.order_n, int(bound))
        grouped = {}
        for (r, ye, s), c in raw.items():
            grouped.setdefault((r, ye), {})[s] = c
        out = []
        for (r, ye), tmap in sorted(grouped.items()):
            parts = [make_mul(Const(c), make_pow(Sym("t"), s)) for s, c in sorted(tmap.items())]
            out.append(((r, ye), OdeExpr(make_add(*parts), self.order_n)))
        return out


def _check_params(params):
    for name in params:
        if name in _RESERVED or _YVAR.match(name) or name == "i":
            raise ExprError(f"parameter name {name!r} is reserved")
        if not re.match(r"^[A-Za-z_][A-Za-z_0-9]*$", name):
            raise ExprError(f"parameter name {name!r} is not a valid identifier")


def parse_expr(text: str, params=None) -> OdeExpr:
    """Parse without the minimum-order requirement (plain expressions)."""
    params = dict(params or {})
    _check_params(params)
    root = _Parser(text, {k: complex(v) for k, v in params.items()}).parse()
    return OdeExpr(root, max(_max_y_index(root), 0))


def parse_ode(text: str, params=None) -> OdeExpr:
    """Parse an ODE left-hand side; the equation read is F = 0.

    Parameter values are substituted during parsing, so the result contains
    only x, t and y variables.
    """
    f = parse_expr(text, params)
    n = _max_y_index(f.root)
    if n < 1:
        raise ExprError(f"equation order is {max(n, 0)}; at least one derivative (y1 or higher) is required")
    return OdeExpr(f.root, n)


def partial(f: OdeExpr, j: int) -> OdeExpr:
    return f.partial(j)


def taylor_terms(f: OdeExpr, bound: int):
    return f.taylor_terms(bound)
