"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); the build is marked optional so a missing C toolchain never
breaks installation.
"""

from setuptools import setup
from setuptools.extension import Extension

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mwi.kernels._speedups",
                sources=["src/mwi/kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
