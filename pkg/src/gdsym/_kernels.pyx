# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stack-machine kernels.  Same interface as ``_kernels_py``."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log, pow, INFINITY, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_ADD = 2
DEF OP_MUL = 3
DEF OP_POWI = 4
DEF OP_POWF = 5
DEF OP_LNABS = 6


cdef inline double _ipow(double x, int n) nogil:
    cdef double r = 1.0
    cdef int m = n if n >= 0 else -n
    while m:
        if m & 1:
            r *= x
        x *= x
        m >>= 1
    if n < 0:
        if r == 0.0:
            return INFINITY
        return 1.0 / r
    return r


cdef double _run(const int[::1] ops, const int[::1] args, const double[::1] consts,
                 Py_ssize_t start, Py_ssize_t stop, const double* vars_, double* stack) nogil:
    cdef Py_ssize_t pc
    cdef int sp = 0
    cdef int op, a, j
    cdef double s, x
    for pc in range(start, stop):
        op = ops[pc]
        a = args[pc]
        if op == OP_CONST:
            stack[sp] = consts[a]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = vars_[a]
            sp += 1
        elif op == OP_ADD:
            s = 0.0
            for j in range(a):
                sp -= 1
                s += stack[sp]
            stack[sp] = s
            sp += 1
        elif op == OP_MUL:
            s = 1.0
            for j in range(a):
                sp -= 1
                s *= stack[sp]
            stack[sp] = s
            sp += 1
        elif op == OP_POWI:
            stack[sp - 1] = _ipow(stack[sp - 1], a)
        elif op == OP_POWF:
            x = stack[sp - 1]
            if x == 0.0 and consts[a] < 0:
                stack[sp - 1] = INFINITY
            elif x < 0.0:
                stack[sp - 1] = NAN
            else:
                stack[sp - 1] = pow(x, consts[a])
        elif op == OP_LNABS:
            x = stack[sp - 1]
            stack[sp - 1] = log(fabs(x)) if x != 0.0 else -INFINITY
    return stack[sp - 1]


def _prep(ops, args, consts, offsets):
    return (np.ascontiguousarray(ops, dtype=np.int32),
            np.ascontiguousarray(args, dtype=np.int32),
            np.ascontiguousarray(consts, dtype=np.float64),
            np.ascontiguousarray(offsets, dtype=np.intp))


def eval_many(ops, args, consts, offsets, vars_):
    cdef int[::1] o
    cdef int[::1] g
    cdef double[::1] c
    cdef Py_ssize_t[::1] off
    o, g, c, off = _prep(ops, args, consts, offsets)
    cdef double[::1] v = np.ascontiguousarray(vars_, dtype=np.float64)
    cdef Py_ssize_t n = off.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double* stack = <double*> malloc((o.shape[0] + 1) * sizeof(double))
    cdef Py_ssize_t k
    try:
        for k in range(n):
            out[k] = _run(o, g, c, off[k], off[k + 1], &v[0] if v.shape[0] else NULL, stack)
    finally:
        free(stack)
    return out


def eval_points(ops, args, consts, offsets, points):
    cdef int[::1] o
    cdef int[::1] g
    cdef double[::1] c
    cdef Py_ssize_t[::1] off
    o, g, c, off = _prep(ops, args, consts, offsets)
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t n = off.shape[0] - 1
    cdef cnp.ndarray[double, ndim=2] res = np.empty((m, n))
    cdef double[:, ::1] out = res
    cdef double* stack = <double*> malloc((o.shape[0] + 1) * sizeof(double))
    cdef Py_ssize_t i, k
    try:
        with nogil:
            for i in range(m):
                for k in range(n):
                    out[i, k] = _run(o, g, c, off[k], off[k + 1], &pts[i, 0], stack)
    finally:
        free(stack)
    return res


def rk4(ops, args, consts, offsets, double t0, x0, double h, Py_ssize_t nsteps):
    cdef int[::1] o
    cdef int[::1] g
    cdef double[::1] c
    cdef Py_ssize_t[::1] off
    o, g, c, off = _prep(ops, args, consts, offsets)
    cdef Py_ssize_t n = off.shape[0] - 1
    cdef cnp.ndarray[double, ndim=2] res = np.empty((nsteps + 1, n + 1))
    cdef double[:, ::1] out = res
    cdef double* stack = <double*> malloc((o.shape[0] + 1) * sizeof(double))
    cdef double* work = <double*> malloc(6 * (n + 1) * sizeof(double))
    cdef double* x = work
    cdef double* v = work + (n + 1)
    cdef double* k1 = work + 2 * (n + 1)
    cdef double* k2 = work + 3 * (n + 1)
    cdef double* k3 = work + 4 * (n + 1)
    cdef double* k4 = work + 5 * (n + 1)
    cdef Py_ssize_t i, j
    cdef double t
    cdef double[::1] start = np.ascontiguousarray(x0, dtype=np.float64)
    try:
        for j in range(n):
            x[j] = start[j]
        with nogil:
            out[0, 0] = t0
            for j in range(n):
                out[0, j + 1] = x[j]
            for i in range(nsteps):
                t = t0 + i * h
                v[0] = t
                for j in range(n):
                    v[j + 1] = x[j]
                for j in range(n):
                    k1[j] = _run(o, g, c, off[j], off[j + 1], v, stack)
                v[0] = t + 0.5 * h
                for j in range(n):
                    v[j + 1] = x[j] + 0.5 * h * k1[j]
                for j in range(n):
                    k2[j] = _run(o, g, c, off[j], off[j + 1], v, stack)
                for j in range(n):
                    v[j + 1] = x[j] + 0.5 * h * k2[j]
                for j in range(n):
                    k3[j] = _run(o, g, c, off[j], off[j + 1], v, stack)
                v[0] = t + h
                for j in range(n):
                    v[j + 1] = x[j] + h * k3[j]
                for j in range(n):
                    k4[j] = _run(o, g, c, off[j], off[j + 1], v, stack)
                for j in range(n):
                    x[j] = x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                out[i + 1, 0] = t0 + (i + 1) * h
                for j in range(n):
                    out[i + 1, j + 1] = x[j]
    finally:
        free(stack)
        free(work)
    return res
