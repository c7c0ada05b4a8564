import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is selected at import time
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("FSPEC_NO_EXTENSION"):
    ext_modules = cythonize(
        [
            Extension(
                "fspec._kernels",
                ["src/fspec/_kernels.pyx"],
                include_dirs=[np.get_include(), "src/fspec"],
                extra_compile_args=["-O3", "-fopenmp-simd"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
