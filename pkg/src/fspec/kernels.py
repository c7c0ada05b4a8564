"""Backend selection for the hot separable sum.

The compiled extension is used when it imports; setting ``FSPEC_PURE_PYTHON``
to a non-empty value forces the NumPy fallback.
"""

import os

from . import _kernels_py

python_separable_sum = _kernels_py.separable_sum

try:
    from ._kernels import separable_sum as compiled_separable_sum
except ImportError:  # extension not built
    compiled_separable_sum = None

if compiled_separable_sum is not None and not os.environ.get("FSPEC_PURE_PYTHON"):
    separable_sum = compiled_separable_sum
    BACKEND = "cython"
else:
    separable_sum = python_separable_sum
    BACKEND = "python"

__all__ = ["BACKEND", "separable_sum", "compiled_separable_sum", "python_separable_sum"]
