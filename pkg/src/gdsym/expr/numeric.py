"""Point evaluation and randomized zero testing."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .calculus import Lambda
from .core import Const, Expr, ExprError, FuncApp, LnAbs, Power, Product, Sum, Symbol, as_expr, clear_denominators, free_symbols, opaque_atoms

SYMBOLIC_ZERO = "symbolic-zero"
PROBABILISTIC_ZERO = "probabilistic-zero"
NONZERO = "nonzero"


class UnboundSymbolError(ExprError, KeyError):
    pass


@dataclass(frozen=True)
class Binding:
    """Values for an evaluation.

    ``atoms`` pins opaque nodes (``lnabs(...)`` or applications of abstract
    functions) to numbers; randomized zero testing uses it to treat them as
    independent variables.
    """

    scalars: Mapping = field(default_factory=dict)
    functions: Mapping = field(default_factory=dict)
    atoms: Mapping = field(default_factory=dict)

    def with_scalars(self, **values) -> "Binding":
        s = dict(self.scalars)
        s.update(values)
        return Binding(s, self.functions, self.atoms)

    def to_json(self) -> dict:
        from .printer import to_string

        def num(v):
            return str(v) if isinstance(v, Fraction) else v

        return {
            "scalars": {k: num(v) for k, v in sorted(self.scalars.items())},
            "functions": {k: to_string(v.body) for k, v in sorted(self.functions.items())},
            "atoms": {to_string(k): num(v) for k, v in sorted(self.atoms.items(), key=lambda kv: kv[0].key)},
        }


def _as_lambda(name: str, v) -> Lambda:
    if isinstance(v, Lambda):
        return v
    body = as_expr(v)
    formal = sorted(n for n in free_symbols(body) if n.startswith("arg"))
    arity = max((int(n[3:]) for n in formal if n[3:].isdigit()), default=1)
    return Lambda.of(body, arity=arity)


def binding(scalars: Optional[Mapping] = None, functions: Optional[Mapping] = None, atoms=None) -> Binding:
    fns = {k: _as_lambda(k, v) for k, v in (functions or {}).items()}
    sc = {}
    for k, v in (scalars or {}).items():
        sc[k] = v if isinstance(v, float) else Fraction(v)
    return Binding(sc, fns, dict(atoms or {}))


def evaluate(e, b: Binding):
    """Value of ``e`` at ``b``: a Fraction when everything stays rational, else a float."""
    e = as_expr(e)
    return _Evaluator(b).run(e)


class _Evaluator:
    def __init__(self, b: Binding):
        self.b = b
        self.cache: dict = {}

    def run(self, e: Expr):
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        v = self._eval(e)
        self.cache[e] = v
        return v

    def _eval(self, e: Expr):
        atoms = self.b.atoms
        if atoms and e in atoms:
            return atoms[e]
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Symbol):
            try:
                return self.b.scalars[e.name]
            except KeyError:
                raise UnboundSymbolError(f"unbound symbol {e.name!r}") from None
        if isinstance(e, Sum):
            acc = 0
            for t in e.terms:
                acc = acc + self.run(t)
            return acc
        if isinstance(e, Product):
            acc = 1
            for f in e.factors:
                acc = acc * self.run(f)
            return acc
        if isinstance(e, Power):
            base = self.run(e.base)
            if e.exp.denominator == 1:
                n = int(e.exp)
                if n < 0 and base == 0:
                    raise ZeroDivisionError(f"pole of {e}")
                return base ** n
            if base == 0 and e.exp < 0:
                raise ZeroDivisionError(f"pole of {e}")
            return float(base) ** float(e.exp)
        if isinstance(e, LnAbs):
            g = self.run(e.arg)
            if g == 0:
                raise ZeroDivisionError("ln|0|")
            return math.log(abs(float(g)))
        if isinstance(e, FuncApp):
            lam = self.b.functions.get(e.name)
            if lam is None:
                raise UnboundSymbolError(f"unbound function {e.name!r}")
            if lam.arity != len(e.args):
                raise ExprError(f"{e.name} arity mismatch")
            args = [self.run(a) for a in e.args]
            body = lam.derivative(e.index)
            inner = dict(self.b.scalars)
            inner.update(zip(lam.params, args))
            return _Evaluator(Binding(inner, self.b.functions)).run(body)
        raise TypeError(type(e))


@dataclass(frozen=True)
class ZeroVerdict:
    kind: str
    witness: Optional[Binding] = None
    samples_used: int = 0
    value: object = None

    @property
    def is_zero(self) -> bool:
        return self.kind != NONZERO

    def to_json(self) -> dict:
        out = {"kind": self.kind, "samples": self.samples_used}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
            out["value"] = str(self.value)
        return out


@dataclass(frozen=True)
class ZeroPolicy:
    samples: int = 20
    seed: int = 0
    # numerator/denominator bounds for random rationals
    height: int = 97
    retries: int = 50


def random_rational(rng: random.Random, height: int = 97) -> Fraction:
    while True:
        p = rng.randint(-height, height)
        if p:
            return Fraction(p, rng.randint(1, height))


Sampler = Callable[[random.Random], Mapping]


def is_zero(
    e,
    policy: ZeroPolicy = ZeroPolicy(),
    *,
    functions: Optional[Mapping] = None,
    sampler: Optional[Sampler] = None,
    fixed: Optional[Mapping] = None,
) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically.

    A literal zero canonical form (also after clearing sum denominators) is
    a symbolic zero.  Otherwise ``e`` is evaluated at random exact rational
    points; opaque ``lnabs`` nodes and abstract function applications get
    independent random values.  ``sampler`` supplies constrained values for
    some symbols (e.g. parameters on a circle), ``fixed`` pins others.
    """
    e = as_expr(e)
    if e.is_zero_literal or clear_denominators(e).is_zero_literal:
        return ZeroVerdict(SYMBOLIC_ZERO, samples_used=0)
    fns = {k: _as_lambda(k, v) for k, v in (functions or {}).items()}
    rng = random.Random(policy.seed)
    names = sorted(free_symbols(e))
    atoms = opaque_atoms(e, frozenset(fns))
    fixed = {k: Fraction(v) if not isinstance(v, float) else v for k, v in (fixed or {}).items()}
    used = 0
    for _ in range(policy.samples):
        for attempt in range(policy.retries):
            scal = {n: random_rational(rng, policy.height) for n in names}
            if sampler is not None:
                scal.update(sampler(rng))
            scal.update(fixed)
            atom_vals = {a: random_rational(rng, policy.height) for a in atoms}
            b = Binding(scal, fns, atom_vals)
            try:
                val = evaluate(e, b)
            except ZeroDivisionError:
                continue
            break
        else:
            raise ExprError(f"could not find a pole-free sample for {e}")
        used += 1
        if val != 0:
            return ZeroVerdict(NONZERO, witness=b, samples_used=used, value=val)
    return ZeroVerdict(PROBABILISTIC_ZERO, samples_used=used)


__all__ = [
    "Binding",
    "NONZERO",
    "PROBABILISTIC_ZERO",
    "SYMBOLIC_ZERO",
    "UnboundSymbolError",
    "ZeroPolicy",
    "ZeroVerdict",
    "binding",
    "evaluate",
    "is_zero",
    "random_rational",
]
