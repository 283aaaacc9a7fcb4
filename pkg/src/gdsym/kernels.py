"""Select the compiled kernels when available, the pure-Python ones otherwise.

Set ``GDSYM_KERNELS=python`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("GDSYM_KERNELS", "").lower() == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

eval_many = _impl.eval_many
eval_points = _impl.eval_points
rk4 = _impl.rk4
