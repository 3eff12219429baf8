import sys

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off: the pure-Python fallback must reproduce the compiled
# kernels bit for bit, so fused multiply-adds are disabled.
if sys.platform == "win32":
    compile_args = ["/O2", "/fp:strict"]
else:
    compile_args = ["-O2", "-ffp-contract=off"]

extensions = [
    Extension(
        "ddikge._ckern",
        ["src/ddikge/_ckern.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=compile_args,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
)
