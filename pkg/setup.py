import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# ENTROSEP_NO_EXT=1 skips the compiled core; the package then runs on the
# pure-Python kernels.
if os.environ.get("ENTROSEP_NO_EXT"):
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "entrosep._ckernels",
                ["src/entrosep/_ckernels.pyx"],
                include_dirs=[np.get_include()],
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

setup(ext_modules=ext_modules)
