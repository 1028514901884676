"""Builds the compiled kernel. The package still works without it: wfpp.kernel
falls back to the pure-Python implementation when the extension is missing."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("wfpp._kernel", ["src/wfpp/_kernel.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
