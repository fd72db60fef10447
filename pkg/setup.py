"""Build script for the optional compiled evaluation kernel.

The package is pure Python except for one hot loop (off-grid evaluation of
trigonometric interpolants, used by the characteristics machinery).  If the
extension cannot be built the package falls back to a vectorized numpy
implementation at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "chflow._kernels._ext",
                ["src/chflow/_kernels/_ext.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
