import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math and no FMA contraction: the compiled kernels must produce
# the same bits as the numpy fallback.
extensions = [
    Extension(
        "spikelsm._ckernels",
        ["src/spikelsm/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=os.environ.get("SPIKELSM_REQUIRE_EXT") != "1",
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
)
