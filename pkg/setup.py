"""Build script: compiles the optional Crank-Nicolson stepping extension.

The package works without the extension (a numpy/scipy fallback is selected
at import time), so a failed compile only costs speed.
"""
import numpy
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "openwg._bpmcore",
                ["src/openwg/_bpmcore.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
