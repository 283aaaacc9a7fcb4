"""Lower canonical expressions to float stack programs for the kernels."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .. import kernels
from .._kernels_py import OP_ADD, OP_CONST, OP_LNABS, OP_MUL, OP_POWF, OP_POWI, OP_VAR
from .calculus import substitute
from .core import Const, Expr, ExprError, FuncApp, LnAbs, Power, Product, Sum, Symbol, as_expr


@dataclass(frozen=True)
class Program:
    variables: tuple
    ops: np.ndarray
    args: np.ndarray
    consts: np.ndarray
    offsets: np.ndarray

    @property
    def n_outputs(self) -> int:
        return len(self.offsets) - 1

    def __call__(self, *values) -> np.ndarray:
        return kernels.eval_many(self.ops, self.args, self.consts, self.offsets, np.asarray(values, dtype=float))

    def eval_points(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return kernels.eval_points(self.ops, self.args, self.consts, self.offsets, pts)


class _Emitter:
    def __init__(self, variables):
        self.index = {v: i for i, v in enumerate(variables)}
        self.ops: list = []
        self.args: list = []
        self.consts: list = []
        self.const_index: dict = {}

    def const(self, value: float) -> int:
        k = self.const_index.get(value)
        if k is None:
            k = self.const_index[value] = len(self.consts)
            self.consts.append(value)
        return k

    def emit(self, e: Expr):
        if isinstance(e, Const):
            self._op(OP_CONST, self.const(float(e.value)))
        elif isinstance(e, Symbol):
            try:
                self._op(OP_VAR, self.index[e.name])
            except KeyError:
                raise ExprError(f"symbol {e.name!r} is not a program variable") from None
        elif isinstance(e, Sum):
            for t in e.terms:
                self.emit(t)
            self._op(OP_ADD, len(e.terms))
        elif isinstance(e, Product):
            for f in e.factors:
                self.emit(f)
            self._op(OP_MUL, len(e.factors))
        elif isinstance(e, Power):
            self.emit(e.base)
            if e.exp.denominator == 1:
                self._op(OP_POWI, int(e.exp))
            else:
                self._op(OP_POWF, self.const(float(e.exp)))
        elif isinstance(e, LnAbs):
            self.emit(e.arg)
            self._op(OP_LNABS, 0)
        elif isinstance(e, FuncApp):
            raise ExprError(f"cannot compile abstract function {e.name!r}; bind it first")
        else:
            raise TypeError(type(e))

    def _op(self, op, arg):
        self.ops.append(op)
        self.args.append(arg)


def compile_exprs(exprs: Sequence, variables: Sequence[str], bind: Mapping | None = None) -> Program:
    """Compile ``exprs`` into one program whose inputs are ``variables``.

    ``bind`` is substituted first (scalar values and concrete functions).
    """
    em = _Emitter(variables)
    offsets = [0]
    for e in exprs:
        e = as_expr(e)
        if bind:
            e = substitute(e, bind)
        em.emit(e)
        offsets.append(len(em.ops))
    return Program(
        tuple(variables),
        np.asarray(em.ops, dtype=np.int32),
        np.asarray(em.args, dtype=np.int32),
        np.asarray(em.consts if em.consts else [0.0], dtype=np.float64),
        np.asarray(offsets, dtype=np.intp),
    )
