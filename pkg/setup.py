import os

from setuptools import setup

ext_modules = []
if os.environ.get("FOPKIT_SKIP_NATIVE") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "fopkit.backends._native",
                    sources=["src/fopkit/backends/_native.pyx"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        # The package works without the compiled core; the pure-Python
        # backend is selected at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
