import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/carnot/_ccdist.pyx",
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # The package works without the compiled kernel (numpy fallback).
    ext_modules = []

setup(ext_modules=ext_modules, include_dirs=[np.get_include()])
