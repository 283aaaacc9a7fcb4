"""Symmetry toolkit for 3D gas dynamics with the state equation P = f(rho) + S."""
from .expr import Expr, ZeroPolicy, diff, evaluate, is_zero, parse, simplify, to_string
from .kernels import BACKEND
from .report import Report

__version__ = "0.1.0"

__all__ = ["BACKEND", "Expr", "Report", "ZeroPolicy", "diff", "evaluate", "is_zero", "parse", "simplify", "to_string"]
