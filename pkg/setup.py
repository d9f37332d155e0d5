import os

import numpy as np
from setuptools import Extension, setup


def _extensions():
    if os.environ.get("FRAMETOP_NO_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "frametop._kernels._core",
        ["src/frametop/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3, compiler_directives={"boundscheck": False, "wraparound": False, "cdivision": True})


setup(ext_modules=_extensions())
