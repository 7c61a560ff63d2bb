"""Build script for the compiled isotonic-regression kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so the build degrades gracefully when Cython or a C compiler is
unavailable.
"""

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "ordershape._pava",
        ["src/ordershape/_pava.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=_extensions())
