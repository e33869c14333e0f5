"""Build script for the optional compiled edit-distance kernel.

The package works without the extension (a pure-Python fallback is
selected at import time); building it just makes linking fast. Cython
and a C compiler are required to build, otherwise the extension is
skipped silently.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "loke._speedups",
                ["src/loke/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
