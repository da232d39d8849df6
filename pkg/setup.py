"""Build script: compiles the packed-bitset multiply kernel when a C toolchain
is available, otherwise installs the pure-numpy fallback only."""

import os
import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy
except ImportError:  # pragma: no cover - build-time only
    cythonize = None
    numpy = None


def extensions():
    if cythonize is None or os.environ.get("LCFRS_NO_EXT"):
        return []
    ext = Extension(
        "lcfrs._matmul_kernel",
        sources=["src/lcfrs/_matmul_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    try:
        return cythonize([ext], language_level=3)
    except Exception as exc:  # pragma: no cover
        sys.stderr.write("skipping compiled kernel: %s\n" % exc)
        return []


setup(ext_modules=extensions())
