import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernel is optional: without it the package falls back to the
# pure-NumPy implementation selected at import time (see ionjc._kernels).
ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ionjc._kernels_cy",
                ["src/ionjc/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
