"""Build script for the compiled kernel extension.

The package works without the extension (a pure NumPy backend is selected at
import time), so a failed extension build degrades to a slower install rather
than a broken one.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "dockmpc._backend._fastcore",
                ["src/dockmpc/_backend/_fastcore.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
