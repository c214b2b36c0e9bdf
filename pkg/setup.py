"""Build script for the optional compiled kernel.

The package works without the extension: `debias_clr._kernels` falls back to
a pure-numpy implementation at import time. The extension is marked optional
so installs succeed on machines without a C toolchain.
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
                "debias_clr._kernels._split",
                ["src/debias_clr/_kernels/_split.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
