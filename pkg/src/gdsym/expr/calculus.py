"""Partial derivatives and simultaneous substitution."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .core import (
    ONE,
    ZERO,
    ArityError,
    Const,
    Expr,
    FuncApp,
    LnAbs,
    Power,
    Product,
    Sum,
    Symbol,
    add,
    as_expr,
    children,
    func,
    mul,
    power,
    rebuild,
    sym,
)

FORMAL_ARGS = ("arg1", "arg2", "arg3", "arg4", "arg5", "arg6")


@lru_cache(maxsize=200_000)
def differentiate(e: Expr, s: str) -> Expr:
    """Canonical partial derivative of ``e`` with respect to symbol ``s``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Symbol):
        return ONE if e.name == s else ZERO
    if isinstance(e, Sum):
        return add(*(differentiate(t, s) for t in e.terms))
    if isinstance(e, Product):
        fs = e.factors
        parts = []
        for i, f in enumerate(fs):
            df = differentiate(f, s)
            if df.is_zero_literal:
                continue
            parts.append(mul(df, *fs[:i], *fs[i + 1:]))
        return add(*parts)
    if isinstance(e, Power):
        db = differentiate(e.base, s)
        if db.is_zero_literal:
            return ZERO
        return mul(Const(e.exp), power(e.base, e.exp - 1), db)
    if isinstance(e, LnAbs):
        dg = differentiate(e.arg, s)
        if dg.is_zero_literal:
            return ZERO
        return mul(dg, power(e.arg, -1))
    if isinstance(e, FuncApp):
        parts = []
        for k, a in enumerate(e.args):
            da = differentiate(a, s)
            if da.is_zero_literal:
                continue
            idx = list(e.index)
            idx[k] += 1
            parts.append(mul(FuncApp(e.name, tuple(idx), e.args), da))
        return add(*parts)
    raise TypeError(type(e))


def diff(e: Expr, *names: str) -> Expr:
    for n in names:
        e = differentiate(e, n)
    return e


def gradient(e: Expr, names: Sequence[str]) -> list:
    return [differentiate(e, n) for n in names]


@dataclass(frozen=True)
class Lambda:
    """A concrete function: ``body`` written in the formal arguments ``params``."""

    params: tuple
    body: Expr

    @classmethod
    def of(cls, body, arity: int | None = None, params: Sequence[str] | None = None) -> "Lambda":
        body = as_expr(body)
        if params is None:
            if arity is None:
                raise ValueError("give arity or params")
            params = FORMAL_ARGS[:arity]
        return cls(tuple(params), body)

    @property
    def arity(self) -> int:
        return len(self.params)

    def derivative(self, index: Sequence[int]) -> Expr:
        return _lambda_derivative(self, tuple(index))

    def __call__(self, *args) -> Expr:
        if len(args) != self.arity:
            raise ArityError(f"expected {self.arity} arguments, got {len(args)}")
        return substitute(self.body, dict(zip(self.params, args)))


@lru_cache(maxsize=4096)
def _lambda_derivative(lam: Lambda, index: tuple) -> Expr:
    if len(index) != lam.arity:
        raise ArityError(f"derivative index {index} does not match arity {lam.arity}")
    e = lam.body
    for p, k in zip(lam.params, index):
        for _ in range(k):
            e = differentiate(e, p)
    return e


def substitute(e, mapping: Mapping) -> Expr:
    """Simultaneous substitution, then canonicalisation.

    ``mapping`` keys are symbol names (values: expressions or numbers) or
    function names (values: :class:`Lambda`).  A differentiated function
    application is replaced by the matching partial of the definition.
    """
    e = as_expr(e)
    scal = {}
    funcs = {}
    for k, v in mapping.items():
        if isinstance(v, Lambda):
            funcs[k] = v
        else:
            scal[k] = as_expr(v)
    if not scal and not funcs:
        return e
    cache: dict = {}
    return _subst(e, scal, funcs, cache)


def _subst(e: Expr, scal, funcs, cache) -> Expr:
    hit = cache.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = e
    elif isinstance(e, Symbol):
        out = scal.get(e.name, e)
    elif isinstance(e, FuncApp):
        args = [_subst(a, scal, funcs, cache) for a in e.args]
        lam = funcs.get(e.name)
        if lam is None:
            out = func(e.name, args, e.index)
        else:
            if lam.arity != len(args):
                raise ArityError(
                    f"{e.name} applied to {len(args)} arguments, definition takes {lam.arity}"
                )
            d = lam.derivative(e.index)
            inner = dict(scal)
            inner.update(zip(lam.params, args))
            out = _subst(d, inner, {}, {})
    else:
        kids = children(e)
        new = [_subst(k, scal, funcs, cache) for k in kids]
        out = e if all(a is b for a, b in zip(kids, new)) else rebuild(e, new)
    cache[e] = out
    return out


def apply_field(coeffs: Sequence[Expr], names: Sequence[str], e: Expr) -> Expr:
    """Sum of ``coeffs[i] * d e / d names[i]``."""
    parts = []
    for c, n in zip(coeffs, names):
        if c.is_zero_literal:
            continue
        d = differentiate(e, n)
        if not d.is_zero_literal:
            parts.append(mul(c, d))
    return add(*parts)


def fn(name: str, *args, index=None) -> FuncApp:
    return func(name, args, index)


__all__ = [
    "FORMAL_ARGS",
    "Lambda",
    "apply_field",
    "diff",
    "differentiate",
    "fn",
    "gradient",
    "substitute",
    "sym",
]
