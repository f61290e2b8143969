"""Build script.  The Cython extension is optional: without Cython or a C++
compiler the package installs and runs on the pure-Python kernels."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("SPECTRA_LAB_NO_EXT", "0") in ("", "0"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "spectra_lab._core",
                    ["src/spectra_lab/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                    language="c++",
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
