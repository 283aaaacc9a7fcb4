"""Immutable expression trees kept in a canonical, fully expanded form.

Every public constructor returns a canonical node, so structural equality
is the same thing as equality of canonical forms.  Sums are flattened and
sorted, products merge equal bases by adding exponents, positive integer
powers of sums are expanded, and sum bases are normalised so that their
leading term has coefficient one.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]

_RANK_CONST = 0
_RANK_SYMBOL = 1
_RANK_LNABS = 2
_RANK_FUNC = 3
_RANK_POWER = 4
_RANK_PRODUCT = 5
_RANK_SUM = 6


class ExprError(Exception):
    pass


class ArityError(ExprError):
    pass


class Expr:
    """Base node.  Subclasses are immutable and hashable."""

    __slots__ = ("_key", "_hash")

    def _init_key(self, key):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    @property
    def key(self):
        return self._key

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Expr):
            return self._hash == other._hash and self._key == other._key
        if isinstance(other, (int, Fraction)):
            return isinstance(self, Const) and self.value == other
        return NotImplemented

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        from .printer import to_string

        return f"Expr({to_string(self)!r})"

    def __str__(self):
        from .printer import to_string

        return to_string(self)

    def __reduce__(self):
        from .printer import to_string

        return (_unpickle, (to_string(self),))

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return power(self, exponent)

    @property
    def is_zero_literal(self) -> bool:
        return isinstance(self, Const) and self.value == 0


def _unpickle(text):
    from .parser import parse

    return parse(text)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Fraction):
        object.__setattr__(self, "value", value)
        self._init_key((_RANK_CONST, value))


class Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_key((_RANK_SYMBOL, name))


class LnAbs(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", arg)
        self._init_key((_RANK_LNABS, arg._key))


class FuncApp(Expr):
    """Application of an abstract function, possibly differentiated.

    ``index[k]`` counts the partial derivatives taken in argument ``k``.
    """

    __slots__ = ("name", "index", "args")

    def __init__(self, name: str, index: tuple, args: tuple):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "args", args)
        self._init_key((_RANK_FUNC, name, index, tuple(a._key for a in args)))

    @property
    def arity(self) -> int:
        return len(self.args)


class Power(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Fraction):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._init_key((_RANK_POWER, base._key, exp))


class Product(Expr):
    """``factors[0]`` may be a rational coefficient; the rest are non-constant."""

    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        object.__setattr__(self, "factors", factors)
        self._init_key((_RANK_PRODUCT, tuple(f._key for f in factors)))

    @property
    def coeff(self) -> Fraction:
        f0 = self.factors[0]
        return f0.value if isinstance(f0, Const) else Fraction(1)


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        object.__setattr__(self, "terms", terms)
        self._init_key((_RANK_SUM, tuple(t._key for t in terms)))


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
MINUS_ONE = Const(Fraction(-1))


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"exact rational expected, got {type(value).__name__}")


def const(value) -> Const:
    v = _frac(value)
    if v == 0:
        return ZERO
    if v == 1:
        return ONE
    return Const(v)


def sym(name: str) -> Symbol:
    return Symbol(name)


def symbols(names: str) -> tuple:
    return tuple(Symbol(n) for n in names.replace(",", " ").split())


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    return const(value)


# --------------------------------------------------------------------------
# products

def _split_coeff(e: Expr):
    """Return ``(c, m)`` with ``e == c*m`` and ``m`` free of a rational factor."""
    if isinstance(e, Const):
        return e.value, ONE
    if isinstance(e, Product):
        f0 = e.factors[0]
        if isinstance(f0, Const):
            rest = e.factors[1:]
            return f0.value, rest[0] if len(rest) == 1 else Product(rest)
    return Fraction(1), e


def _normalize_sum(s: Sum):
    """``s == k * s'`` where the leading term of ``s'`` has coefficient one."""
    k, _ = _split_coeff(s.terms[0])
    if k == 1:
        return k, s
    inv = 1 / k
    terms = tuple(_scale(t, inv) for t in s.terms)
    return k, Sum(terms)


def _scale(term: Expr, c: Fraction) -> Expr:
    k, m = _split_coeff(term)
    return _make_term(k * c, m)


def _make_term(c: Fraction, m: Expr) -> Expr:
    if c == 0:
        return ZERO
    if m is ONE or m == ONE:
        return const(c)
    if c == 1:
        return m
    if isinstance(m, Product):
        return Product((Const(c),) + m.factors)
    return Product((Const(c), m))


def _accumulate(factors: Iterable[Expr], coeff: Fraction, bases: dict):
    for f in factors:
        if isinstance(f, Const):
            coeff *= f.value
        elif isinstance(f, Product):
            coeff = _accumulate(f.factors, coeff, bases)
        elif isinstance(f, Power):
            bases[f.base] = bases.get(f.base, 0) + f.exp
        elif isinstance(f, Sum):
            k, base = _normalize_sum(f)
            coeff *= k
            bases[base] = bases.get(base, 0) + 1
        else:
            bases[f] = bases.get(f, 0) + 1
        if coeff == 0:
            return coeff
    return coeff


def mul(*factors) -> Expr:
    exprs = [as_expr(f) for f in factors]
    bases: dict = {}
    coeff = _accumulate(exprs, Fraction(1), bases)
    if coeff == 0:
        return ZERO
    plain = []
    expand = []
    for base, e in bases.items():
        if e == 0:
            continue
        if isinstance(base, Sum) and e.denominator == 1 and e > 0:
            expand.extend([base] * int(e))
        elif isinstance(base, Const):
            if e.denominator == 1:
                coeff *= base.value ** int(e)
            else:
                plain.append(Power(base, Fraction(e)))
        else:
            plain.append(base if e == 1 else Power(base, Fraction(e)))
    plain.sort(key=lambda x: x._key)
    if expand:
        head = _make_monomial(coeff, plain)
        return _expand_product(head, expand)
    return _make_monomial(coeff, plain)


def _make_monomial(coeff: Fraction, plain: list) -> Expr:
    if not plain:
        return const(coeff)
    if coeff == 1 and len(plain) == 1:
        return plain[0]
    if coeff == 1:
        return Product(tuple(plain))
    return Product((Const(coeff),) + tuple(plain))


def _expand_product(head: Expr, sums: list) -> Expr:
    # distribute one sum at a time, passing the others along whole so that
    # negative powers of the same base inside a term cancel against them
    first, rest = sums[0], sums[1:]
    return add(*(mul(head, t, *rest) for t in first.terms))


def _terms_of(e: Expr):
    if isinstance(e, Sum):
        return e.terms
    return (e,)


# --------------------------------------------------------------------------
# sums

def add(*terms) -> Expr:
    coeffs: dict = {}
    constant = Fraction(0)
    stack = [as_expr(t) for t in terms]
    for t in stack:
        if isinstance(t, Sum):
            parts = t.terms
        else:
            parts = (t,)
        for p in parts:
            if isinstance(p, Const):
                constant += p.value
                continue
            c, m = _split_coeff(p)
            coeffs[m] = coeffs.get(m, 0) + c
    out = []
    if constant != 0:
        out.append(Const(constant))
    for m, c in coeffs.items():
        if c != 0:
            out.append(_make_term(Fraction(c), m))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=_term_key)
    return Sum(tuple(out))


def _term_key(t: Expr):
    # order sum terms by monomial so rescaling a sum never reorders it
    _, m = _split_coeff(t)
    return m._key


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(as_expr(a), neg(as_expr(b)))


def div(a, b) -> Expr:
    return mul(as_expr(a), power(as_expr(b), -1))


# --------------------------------------------------------------------------
# powers

def power(base, exp) -> Expr:
    base = as_expr(base)
    exp = _frac(exp)
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, Const):
        if exp.denominator == 1:
            if base.value == 0 and exp < 0:
                raise ZeroDivisionError("0 raised to a negative power")
            return const(base.value ** int(exp))
        if base.value in (0, 1):
            return base
        return Power(base, exp)
    if isinstance(base, Power):
        return power(base.base, base.exp * exp)
    if isinstance(base, Product):
        return mul(*(power(f, exp) for f in base.factors))
    if isinstance(base, Sum):
        k, s = _normalize_sum(base)
        if exp.denominator == 1 and exp > 0:
            return mul(const(k ** int(exp)), *([s] * int(exp)))
        return mul(power(const(k), exp), Power(s, exp))
    return Power(base, exp)


def lnabs(arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        if arg.value == 0:
            raise ZeroDivisionError("ln|0|")
        if abs(arg.value) == 1:
            return ZERO
    return LnAbs(arg)


def func(name: str, args: Sequence, index: Sequence[int] | None = None) -> FuncApp:
    args = tuple(as_expr(a) for a in args)
    if index is None:
        index = (0,) * len(args)
    index = tuple(int(i) for i in index)
    if len(index) != len(args):
        raise ArityError(f"{name}: derivative index length {len(index)} != arity {len(args)}")
    if any(i < 0 for i in index):
        raise ValueError("negative derivative order")
    return FuncApp(name, index, args)


def expand(e: Expr) -> Expr:
    """Canonical forms are already expanded; kept for readability at call sites."""
    return e


# --------------------------------------------------------------------------
# traversal helpers

def children(e: Expr) -> tuple:
    if isinstance(e, (Const, Symbol)):
        return ()
    if isinstance(e, LnAbs):
        return (e.arg,)
    if isinstance(e, FuncApp):
        return e.args
    if isinstance(e, Power):
        return (e.base,)
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, Sum):
        return e.terms
    raise TypeError(type(e))


def rebuild(e: Expr, new_children: Sequence[Expr]) -> Expr:
    """Reassemble a node of the same kind from (possibly changed) children."""
    if isinstance(e, (Const, Symbol)):
        return e
    if isinstance(e, LnAbs):
        return lnabs(new_children[0])
    if isinstance(e, FuncApp):
        return func(e.name, new_children, e.index)
    if isinstance(e, Power):
        return power(new_children[0], e.exp)
    if isinstance(e, Product):
        return mul(*new_children)
    if isinstance(e, Sum):
        return add(*new_children)
    raise TypeError(type(e))


def walk(e: Expr):
    """Pre-order traversal over distinct subtrees."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        yield node
        stack.extend(children(node))


def free_symbols(e: Expr) -> set:
    return {n.name for n in walk(e) if isinstance(n, Symbol)}


def function_names(e: Expr) -> set:
    return {n.name for n in walk(e) if isinstance(n, FuncApp)}


def contains_symbol(e: Expr, name: str) -> bool:
    return any(isinstance(n, Symbol) and n.name == name for n in walk(e))


def opaque_atoms(e: Expr, concrete: frozenset = frozenset()) -> list:
    """Outermost LnAbs nodes and FuncApp nodes without a concrete definition."""
    out = []
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        if isinstance(node, LnAbs) or (isinstance(node, FuncApp) and node.name not in concrete):
            out.append(node)
            continue
        stack.extend(children(node))
    out.sort(key=lambda x: x._key)
    return out


def negative_sum_powers(e: Expr) -> dict:
    """Map each sum base appearing with a negative exponent to its largest order."""
    out: dict = {}
    for node in walk(e):
        if isinstance(node, Power) and isinstance(node.base, Sum) and node.exp < 0:
            order = -node.exp
            if order > out.get(node.base, 0):
                out[node.base] = order
    return out


def clear_denominators(e: Expr) -> Expr:
    """Multiply by every negative-power sum base so no sum denominator is left.

    The result vanishes identically iff ``e`` does, wherever the
    denominators are nonzero.  Denominators nested inside LnAbs or
    function arguments are left alone.
    """
    # multiply by one bare base at a time: a pre-expanded product of
    # several bases would no longer cancel against the reciprocals
    for _ in range(8):
        dens = negative_sum_powers(_top_level(e))
        if not dens:
            return e
        for b, o in sorted(dens.items(), key=lambda kv: kv[0]._key):
            for _ in range(_ceil(o)):
                e = mul(e, b)
    return e


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def _top_level(e: Expr) -> Expr:
    """Strip LnAbs/FuncApp subtrees so their internal denominators are ignored."""
    if isinstance(e, (LnAbs, FuncApp)):
        return ONE
    if isinstance(e, (Const, Symbol)):
        return e
    if isinstance(e, Power):
        if isinstance(e.base, Sum):
            return e
        return _top_level(e.base)
    kids = children(e)
    tops = [_top_level(k) for k in kids]
    return Product(tuple(tops)) if tops else ONE
