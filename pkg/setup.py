"""Builds the optional compiled histogram kernel.

The package is fully functional without the extension: onsetwarn.kernels
falls back to a numpy implementation when the compiled module is absent.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "onsetwarn.kernels._histogram",
                sources=["src/onsetwarn/kernels/_histogram.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
