"""ASCII printing that the parser reads back to the same canonical tree."""
from __future__ import annotations

from fractions import Fraction

from .core import Const, Expr, FuncApp, LnAbs, Power, Product, Sum, Symbol, _split_coeff


def _rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _exponent(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({_rational(q)})"


def _atom(e: Expr) -> str:
    """Print ``e`` so it can sit as a power base or a product factor."""
    s = to_string(e)
    if isinstance(e, (Sum, Product)) or (isinstance(e, Const) and (e.value < 0 or e.value.denominator != 1)):
        return f"({s})"
    return s


def _monomial(m: Expr) -> str:
    if isinstance(m, Product):
        return "*".join(_factor(f) for f in m.factors)
    return _factor(m)


def _factor(f: Expr) -> str:
    if isinstance(f, Power):
        return f"{_atom(f.base)}^{_exponent(f.exp)}"
    return _atom(f)


def _term(t: Expr) -> tuple[bool, str]:
    """Return (negative, text of |t|)."""
    c, m = _split_coeff(t)
    neg = c < 0
    c = abs(c)
    if isinstance(m, Const):
        return neg, _rational(c)
    body = _monomial(m)
    if c == 1:
        return neg, body
    return neg, f"{_rational(c)}*{body}"


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        return _rational(e.value)
    if isinstance(e, Symbol):
        return e.name
    if isinstance(e, LnAbs):
        return f"lnabs({to_string(e.arg)})"
    if isinstance(e, FuncApp):
        args = ", ".join(to_string(a) for a in e.args)
        if any(e.index):
            idx = ",".join(str(i) for i in e.index)
            return f"{e.name}[{idx}]({args})"
        return f"{e.name}({args})"
    if isinstance(e, Power):
        return _factor(e)
    if isinstance(e, Product):
        neg, body = _term(e)
        return f"-{body}" if neg else body
    if isinstance(e, Sum):
        parts = []
        for i, t in enumerate(e.terms):
            neg, body = _term(t)
            if i == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)
    raise TypeError(type(e))


def tree(e: Expr) -> str:
    """Constructor-style dump, e.g. ``Sum[Symbol P, Product[-1, z, Power(a,-1)]]``."""
    if isinstance(e, Const):
        return _rational(e.value)
    if isinstance(e, Symbol):
        return f"Symbol {e.name}"
    if isinstance(e, LnAbs):
        return f"LnAbs({tree(e.arg)})"
    if isinstance(e, FuncApp):
        idx = ",".join(str(i) for i in e.index)
        return f"FuncApp({e.name},({idx}),[{', '.join(tree(a) for a in e.args)}])"
    if isinstance(e, Power):
        b = e.base.name if isinstance(e.base, Symbol) else tree(e.base)
        return f"Power({b},{_rational(e.exp)})"
    if isinstance(e, Product):
        return "Product[" + ", ".join(
            f.name if isinstance(f, Symbol) else tree(f) for f in e.factors
        ) + "]"
    if isinstance(e, Sum):
        return "Sum[" + ", ".join(tree(t) for t in e.terms) + "]"
    raise TypeError(type(e))
