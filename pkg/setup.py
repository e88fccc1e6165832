"""Build the optional compiled LAP kernel.

The package works without it: ``hmasim.assignment`` falls back to the
pure-Python solver when the extension cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("HMASIM_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "hmasim.assignment._lapjv",
                    ["src/hmasim/assignment/_lapjv.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
