"""Pure-Python stack-machine kernels; the fallback for ``_kernels.pyx``.

Both modules expose the same functions with the same argument layout:
``ops``/``args`` are int arrays, ``consts`` a float array, and ``offsets``
delimits the program of each output (``offsets[k]:offsets[k+1]``).
"""
import math

import numpy as np

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_MUL = 3
OP_POWI = 4
OP_POWF = 5
OP_LNABS = 6


def _ipow(x, n):
    # repeated squaring, matching the compiled kernel bit for bit
    r = 1.0
    m = -n if n < 0 else n
    while m:
        if m & 1:
            r *= x
        x *= x
        m >>= 1
    if n < 0:
        return math.inf if r == 0.0 else 1.0 / r
    return r


def _run(ops, args, consts, start, stop, vars_):
    stack = []
    push = stack.append
    for pc in range(start, stop):
        op = ops[pc]
        a = args[pc]
        if op == OP_CONST:
            push(consts[a])
        elif op == OP_VAR:
            push(vars_[a])
        elif op == OP_ADD:
            s = 0.0
            for _ in range(a):
                s += stack.pop()
            push(s)
        elif op == OP_MUL:
            p = 1.0
            for _ in range(a):
                p *= stack.pop()
            push(p)
        elif op == OP_POWI:
            push(_ipow(stack.pop(), a))
        elif op == OP_POWF:
            x = stack.pop()
            if x == 0.0 and consts[a] < 0:
                push(math.inf)
            elif x < 0.0:
                push(math.nan)
            else:
                push(x ** consts[a])
        elif op == OP_LNABS:
            x = stack.pop()
            push(math.log(abs(x)) if x != 0.0 else -math.inf)
        else:
            raise ValueError(f"bad opcode {op}")
    return stack[-1]


def eval_many(ops, args, consts, offsets, vars_):
    ops = list(ops)
    args = list(args)
    consts = list(consts)
    vars_ = [float(v) for v in vars_]
    n = len(offsets) - 1
    out = np.empty(n)
    for k in range(n):
        out[k] = _run(ops, args, consts, offsets[k], offsets[k + 1], vars_)
    return out


def eval_points(ops, args, consts, offsets, points):
    ops = list(ops)
    args = list(args)
    consts = list(consts)
    pts = np.asarray(points, dtype=float)
    n = len(offsets) - 1
    out = np.empty((pts.shape[0], n))
    for i in range(pts.shape[0]):
        row = pts[i].tolist()
        for k in range(n):
            out[i, k] = _run(ops, args, consts, offsets[k], offsets[k + 1], row)
    return out


def rk4(ops, args, consts, offsets, t0, x0, h, nsteps):
    """Classical fixed-step RK4 for ``dX/dt = F(t, X)`` with ``len(X) == nout``.

    Program variables are ``(t, X[0], ..., X[n-1])``.  Returns an array of
    shape ``(nsteps + 1, n + 1)`` with columns ``t, X...``.
    """
    ops = list(ops)
    args = list(args)
    consts = list(consts)
    offs = list(offsets)
    n = len(offs) - 1
    out = np.empty((nsteps + 1, n + 1))
    x = [float(v) for v in x0]
    out[0, 0] = t0
    out[0, 1:] = x

    def f(t, y):
        v = [t] + y
        return [_run(ops, args, consts, offs[k], offs[k + 1], v) for k in range(n)]

    for i in range(nsteps):
        t = t0 + i * h
        k1 = f(t, x)
        k2 = f(t + 0.5 * h, [x[j] + 0.5 * h * k1[j] for j in range(n)])
        k3 = f(t + 0.5 * h, [x[j] + 0.5 * h * k2[j] for j in range(n)])
        k4 = f(t + h, [x[j] + h * k3[j] for j in range(n)])
        x = [x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(n)]
        out[i + 1, 0] = t0 + (i + 1) * h
        out[i + 1, 1:] = x
    return out
