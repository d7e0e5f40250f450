"""Build script for the optional compiled kernels.

All project metadata lives in pyproject.toml. Set LEXFLUX_NO_EXT=1 to skip
the extension and install the pure-Python fallback only.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("LEXFLUX_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "lexflux._kernels._speedups",
        ["src/lexflux/_kernels/_speedups.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
